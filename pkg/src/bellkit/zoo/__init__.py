"""Concrete models: continuous singlet models and finite tabulated ones."""

from .finite import (GAMMA_MAX, brans_model, conway_kochen_capacity_bound, conway_kochen_model,
                     conway_kochen_prior, hardy_capacity_bound, hardy_model, mermin_model,
                     pawlowski_model)
from .hall import (HallCapacities, HallModelSpec, hall_capacities, hall_density,
                   hall_discrete_model, hall_measurement_dependence, hall_outcome_table,
                   hall_setting_entropy, hall_verify_singlet)
from .singlet import (chsh_directions, singlet_distribution, singlet_probability, singlet_table,
                      standard_singlet_model)
from .sphere import SphereDirection, planar, random_rotation, uniform_directions
from .toner_bacon import (TonerBaconRun, TonerBaconSpec, mean_message_entropy,
                          toner_bacon_restriction, toner_bacon_run)

__all__ = [
    "GAMMA_MAX", "brans_model", "conway_kochen_capacity_bound", "conway_kochen_model",
    "conway_kochen_prior", "hardy_capacity_bound", "hardy_model", "mermin_model",
    "pawlowski_model", "HallCapacities", "HallModelSpec", "hall_capacities", "hall_density",
    "hall_discrete_model", "hall_measurement_dependence", "hall_outcome_table",
    "hall_setting_entropy", "hall_verify_singlet", "chsh_directions", "singlet_distribution",
    "singlet_probability", "singlet_table", "standard_singlet_model", "SphereDirection", "planar",
    "random_rotation", "uniform_directions", "TonerBaconRun", "TonerBaconSpec",
    "mean_message_entropy", "toner_bacon_restriction", "toner_bacon_run",
]
