"""Relaxed Bell inequalities: models, measures, capacities and bounds."""

from ._backend import BACKEND
from .bounds import (RelaxationBudget, ThresholdReport, b_3322, b_chsh, b_chsh_nosig, b_mm22,
                     b_outcome, bound_surface, chsh_value, make_chsh_saturating_model,
                     make_outcome_saturating_model, make_prior_family, min_overlap,
                     min_relaxation)
from .errors import (BellkitError, BranchCapError, InvalidModelError, ModelStructureError,
                     ParameterRangeError, UnsupportedAlphabetError, UnsupportedModelError)
from .info import (CapacityReport, CommModel, binary_entropy, c_commun, c_meas_dep, c_outcome,
                   c_random, c_sig, capacity, capacity_report, entropy, mutual_information)
from .lp import (BellFunctional, LPConfig, LPResult, builtin_functional, deterministic_bound,
                 functional_from_correlators, load_functional, relaxed_bound_lp)
from .measures import (MeasureReport, free_will_fraction, indeterminism, measure_report,
                       measurement_dependence, outcome_dependence, signaling)
from .model import (CmnTriple, CorrelationTable, NPartyModel, correlator, decompose_cmn,
                    dump_model, load_model, model_from_dict, model_hash, model_to_dict,
                    observed_correlations, validate_model)
from .transforms import check_commutation, is_outcome_independent, to_deterministic

__version__ = "0.1.0"
