"""Closed-form relaxed Bell bounds, minimal-relaxation queries and saturating models.

CHSH here is <XY> + <XY'> + <X'Y> - <X'Y'> with settings ordered (x, x') and
(y, y'), so the four setting pairs are (x,y), (x,y'), (x',y), (x',y').
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import ParameterRangeError
from .info import binary_entropy
from .model import CorrelationTable, NPartyModel, correlator, observed_correlations

# slack on the strict branch conditions so that S = 1 - 2I computed in floating
# point (e.g. I = 0.2, S = 0.6) lands on the "4" branch as intended
BRANCH_EPS = 1e-12

CHSH_SETTINGS = (("x", "x'"), ("y", "y'"))
CHSH_SIGNS = (1, 1, 1, -1)


def _check(name, value, lo, hi):
    if not (lo <= value <= hi) or math.isnan(value):
        raise ParameterRangeError(f"{name} must lie in [{lo}, {hi}], got {value}")


@dataclass(frozen=True)
class RelaxationBudget:
    I: float = 0.0
    S: float = 0.0
    M: float = 0.0
    O: float | None = None

    def __post_init__(self):
        _check("I", self.I, 0, 0.5)
        _check("S", self.S, 0, 1)
        _check("M", self.M, 0, 2)
        if self.O is not None:
            _check("O", self.O, 0, 2)


def b_chsh(I: float, S: float, M: float) -> float:
    """Tight CHSH bound under indeterminism I, signaling S, measurement dependence M."""
    _check("I", I, 0, 0.5)
    _check("S", S, 0, 1)
    _check("M", M, 0, 2)
    if S < 1 - 2 * I - BRANCH_EPS and M < 2 / 3 - BRANCH_EPS:
        return 4 - (1 - 2 * I) * (2 - 3 * M)
    return 4.0


def b_chsh_nosig(I: float, M: float) -> float:
    """CHSH bound for nonsignaling models: b_chsh(I, 0, M)."""
    return b_chsh(I, 0.0, M)


def b_outcome(O: float) -> float:
    """CHSH bound 4/(2-O) for nonsignaling, measurement-independent models."""
    _check("O", O, 0, 1)
    return 4 / (2 - O)


def b_3322(I: float, S: float) -> float:
    """Bound on the 3-setting correlator functional: 4 + 8I below the gap, else 8."""
    _check("I", I, 0, 0.5)
    _check("S", S, 0, 1)
    if S < 1 - 2 * I - BRANCH_EPS:
        return 4 + 8 * I
    return 8.0


class MM22Bound(NamedTuple):
    value: float
    conjectured: bool


def b_mm22(m: int, I: float, S: float) -> MM22Bound:
    """Bound on the m-setting correlator functional; only proven for m <= 3."""
    if int(m) != m or m < 2:
        raise ParameterRangeError(f"m must be an integer >= 2, got {m}")
    _check("I", I, 0, 0.5)
    _check("S", S, 0, 1)
    m = int(m)
    if S < 1 - 2 * I - BRANCH_EPS:
        value = (m - 1) * (m + 8 * I) / 2 + 1
    else:
        value = (m - 1) * (m + 4) / 2 + 1
    return MM22Bound(float(value), m >= 4)


@dataclass
class ThresholdReport:
    V: float
    I_min: float
    S_gap: float
    M_min: float
    O_min: float
    C_random_min: float
    C_sig_min: float
    C_outcome_min: float

    def to_dict(self) -> dict:
        return asdict(self)


def min_relaxation(V: float) -> ThresholdReport:
    """Smallest single-parameter relaxations that allow a CHSH violation V."""
    _check("V", V, 0, 2)
    I_min = V / 4
    S_gap = 1 - V / 2
    return ThresholdReport(
        V=V,
        I_min=I_min,
        S_gap=S_gap,
        M_min=V / 3,
        O_min=2 * V / (2 + V),
        C_random_min=binary_entropy(I_min),
        C_sig_min=1 - binary_entropy((1 + S_gap) / 2),
        C_outcome_min=1 - binary_entropy((2 + 3 * V) / (4 + 2 * V)),
    )


# ------------------------------------------------------------ formula kernels

def f_kernel(a, b, c):
    """min{a, b, ab + c/4}: the largest p(+,+) at marginals a, b and outcome dependence c."""
    return np.minimum(np.minimum(a, b), np.multiply(a, b) + np.divide(c, 4))


def g(x):
    """-x log2 x with g(0) = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, -x * np.log2(np.where(x > 0, x, 1)), 0.0)
    return float(out) if out.ndim == 0 else out


def outcome_rhs(m, mp, n, np_, O):
    """Per-lambda CHSH upper bound at marginals (m, m', n, n') and outcome dependence O."""
    return (4 * (f_kernel(1 - m, 1 - n, O) + f_kernel(m, np_, O) + f_kernel(mp, n, O)
                 + f_kernel(mp, 1 - np_, O)) - 4 * mp - 2)


def outcome_claimed_point(O: float) -> tuple:
    """Marginals (m, m', n, n') at which the per-lambda bound reaches 4/(2-O)."""
    return (1.5 - 1 / (2 - O), 0.5, 1 - O / 2, 1 - O / 2)


@dataclass
class OutcomeGridCheck:
    O: float
    grid_max: float
    grid_argmax: tuple
    claimed_value: float
    closed_form: float
    resolution: float


def outcome_bound_grid_check(O: float, n_grid: int = 1001, backend: str | None = None
                             ) -> OutcomeGridCheck:
    """Re-derive the maximum of the per-lambda outcome bound by grid search."""
    _check("O", O, 0, 1)
    kern = _backend.get_kernels(backend)
    value, m, mp, n, np_ = kern.outcome_rhs_grid_max(float(O), int(n_grid))
    claimed = float(outcome_rhs(*outcome_claimed_point(O), O))
    return OutcomeGridCheck(O, float(value), (m, mp, n, np_), claimed, b_outcome(O),
                            1 / (n_grid - 1))


def c_outcome_closed_form(O: float) -> float:
    """Outcome capacity of the outcome-saturating model."""
    _check("O", O, 0, 1)
    return g(O / 2) + g(1.5 - 1 / (2 - O)) - g((1 + O) / 2 - 1 / (2 - O))


def correlator_bounds(m: float, n: float) -> tuple:
    """Range of <XY> over joint distributions with marginals m = p_A(+), n = p_B(+)."""
    return 2 * abs(m + n - 1) - 1, 1 - 2 * abs(m - n)


def correlator_from_cmn(c: float, m: float, n: float) -> float:
    """<XY> = 4c - 2m - 2n + 1 for the distribution (c, m-c, n-c, 1+c-m-n)."""
    return 4 * c - 2 * m - 2 * n + 1


# ------------------------------------------------------------ CHSH helpers

def chsh_value(obj) -> float:
    """CHSH combination of a two-setting model or correlation table."""
    table = obj if isinstance(obj, CorrelationTable) else observed_correlations(obj)
    pairs = list(itertools.product(range(2), range(2)))
    return float(sum(sign * correlator(table, j * 2 + k) for sign, (j, k) in zip(CHSH_SIGNS, pairs)))


def _single_lambda_model(dists, metadata) -> NPartyModel:
    joint = np.array([[d] for d in dists], dtype=float)
    return NPartyModel(CHSH_SETTINGS, ((1, -1), (1, -1)), ("l1",), joint, np.ones((4, 1)),
                       metadata)


def _det_box(a, b):
    """Joint distribution ordered (++, +-, -+, --) of deterministic outcomes a, b."""
    out = np.zeros(4)
    out[(0 if a == 1 else 2) + (0 if b == 1 else 1)] = 1.0
    return out


def _first_box(satisfy: tuple):
    """Lexicographically first (a, a', b, b') satisfying CHSH signs on the given pairs."""
    for a, ap, b, bp in itertools.product((1, -1), repeat=4):
        vals = (a * b, a * bp, ap * b, ap * bp)
        if all(vals[s] == CHSH_SIGNS[s] for s in satisfy):
            return a, ap, b, bp
    raise AssertionError("unreachable: any three CHSH signs can be met")


def _boxes_model(priors, satisfied, metadata) -> NPartyModel:
    lambdas = [f"l{k + 1}" for k in range(len(satisfied))]
    joint = np.zeros((4, len(lambdas), 4))
    for l, sat in enumerate(satisfied):
        a, ap, b, bp = _first_box(sat)
        for s, (xa, yb) in enumerate(((a, b), (a, bp), (ap, b), (ap, bp))):
            joint[s, l] = _det_box(xa, yb)
    return NPartyModel(CHSH_SETTINGS, ((1, -1), (1, -1)), lambdas, joint, priors, metadata)


def make_prior_family(kind: str, p: float) -> np.ndarray:
    """Prior tables P_j(lambda_k) over the four CHSH setting pairs.

    five-lambda: 1-3p on lambda_5, 0 when j + k = 5, p otherwise (M = 2p).
    four-lambda: p when j = k, 0 when j + k = 5, (1-p)/2 otherwise (M = 2 - 4p).
    """
    if kind == "five-lambda":
        if not 0 <= p < 1 / 3:
            raise ParameterRangeError(f"five-lambda family needs 0 <= p < 1/3, got {p}")
        out = np.full((4, 5), float(p))
        out[:, 4] = 1 - 3 * p
    elif kind == "four-lambda":
        if not 0 <= p <= 1 / 3:
            raise ParameterRangeError(f"four-lambda family needs 0 <= p <= 1/3, got {p}")
        out = np.full((4, 4), (1 - p) / 2)
        np.fill_diagonal(out, p)
    else:
        raise ParameterRangeError(f"unknown prior family {kind!r}")
    for j in range(4):
        out[j, 3 - j] = 0.0
    return out


def min_overlap(priors) -> float:
    """sum_lambda min_j P_j(lambda) for a stack of prior distributions."""
    arr = np.asarray(priors, dtype=float)
    if arr.ndim != 2 or np.any(arr < -1e-12) or np.any(np.abs(arr.sum(axis=1) - 1) > 1e-9):
        raise ParameterRangeError("priors must be a stack of normalized distributions")
    return float(arr.min(axis=0).sum())


def make_chsh_saturating_model(case: str, I: float = 0.0, S: float = 0.0, M: float = 0.0
                               ) -> NPartyModel:
    """A finite CHSH model whose value equals b_chsh of the budget.

    case "I-only" (S = M = 0), "M-only" (I = S = 0) or "gap" (S >= 1 - 2I).
    """
    budget = RelaxationBudget(I, S, M)
    meta = {"construction": f"chsh-saturating:{case}", "I": I, "S": S, "M": M}
    if case == "gap":
        if S < 1 - 2 * I - BRANCH_EPS:
            raise ParameterRangeError(f"gap case needs S >= 1 - 2I, got I={I}, S={S}")
        box = (I, 0.0, 0.0, 1 - I)
        return _single_lambda_model([box, box, box, (0.0, I, 1 - I, 0.0)], meta)
    if case == "I-only":
        if S != 0 or M != 0:
            raise ParameterRangeError("I-only case needs S = M = 0")
        box = (I, 0.0, 0.0, 1 - I)
        return _single_lambda_model([box, box, box, (0.0, I, I, 1 - 2 * I)], meta)
    if case == "M-only":
        if I != 0 or S != 0:
            raise ParameterRangeError("M-only case needs I = S = 0")
        if budget.M < 2 / 3:
            p = M / 2
            priors = make_prior_family("five-lambda", p)
            satisfied = [tuple(s for s in range(4) if s != 3 - k) for k in range(4)] + [(0, 1, 2)]
            meta["prior_family"] = "five-lambda"
        else:
            p = min((2 - M) / 4, 1 / 3)
            priors = make_prior_family("four-lambda", p)
            satisfied = [tuple(s for s in range(4) if s != 3 - k) for k in range(4)]
            meta["prior_family"] = "four-lambda"
        meta["p"] = p
        return _boxes_model(priors, satisfied, meta)
    raise ParameterRangeError(f"unknown saturating case {case!r}")


def make_outcome_saturating_model(O: float) -> NPartyModel:
    """Nonsignaling, measurement-independent model with outcome dependence O and CHSH 4/(2-O)."""
    _check("O", O, 0, 1)
    p1 = (1 - O / 2, (1 + O) / 2 - 1 / (2 - O), 0.0, 1 / (2 - O) - 0.5)
    p3 = (0.5, 0.0, (1 - O) / 2, O / 2)
    p4 = ((1 - O) / 2, O / 2, 0.5, 0.0)
    return _single_lambda_model([p1, p1, p3, p4], {"construction": "outcome-saturating", "O": O})


# ------------------------------------------------------------ sweeps

def bound_surface(family: str, I_grid=(0.0,), S_grid=(0.0,), M_grid=(0.0,), O_grid=(0.0,),
                  V: float | None = None, m: int = 4) -> list:
    """Rows (I, S, M, O, bound[, feasible_for_V]) over the Cartesian grid."""
    rows = []
    for I, S, M, O in itertools.product(I_grid, S_grid, M_grid, O_grid):
        if family == "chsh":
            value = b_chsh(I, S, M)
        elif family == "chsh-nosig":
            value = b_chsh_nosig(I, M)
        elif family == "outcome":
            value = b_outcome(O)
        elif family == "i3322":
            value = b_3322(I, S)
        elif family == "imm22":
            value = b_mm22(m, I, S).value
        else:
            raise ParameterRangeError(f"unknown bound family {family!r}")
        row = {"I": I, "S": S, "M": M, "O": O, "bound": value}
        if V is not None:
            row["feasible_for_V"] = int(value >= 2 + V - BRANCH_EPS)
        rows.append(row)
    return rows
