"""Distance-based relaxation measures of a finite model.

All suprema are exact maxima over the finite index sets. Hidden-variable
values with zero prior weight still count; when a supremum is only reached on
such a value the report carries a flag naming the measure.
"""

from __future__ import annotations

import itertools
import math
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterRangeError, UnsupportedModelError
from .model import DEFAULT_TOL, NPartyModel, require_valid


def _max(arr, default=0):
    return arr.max() if arr.size else default


def indeterminism(model: NPartyModel, *, validate: bool = True):
    """Largest min(p, 1-p) over every underlying single-party marginal entry."""
    if validate:
        require_valid(model)
    return max(_max(np.minimum(marg, 1 - marg)) for marg in model.marginals())


def _indeterminism_positive(model):
    pos = _positive(model.prior)
    best = 0
    for marg in model.marginals():
        v = np.minimum(marg, 1 - marg)[pos]
        best = max(best, _max(v))
    return best


def _positive(prior):
    return np.asarray(prior > 0, dtype=bool)


def _require_bipartite(model, what):
    if model.parties != 2:
        raise UnsupportedModelError(f"{what} is defined for two parties, got {model.parties}")


def outcome_dependence_table(model: NPartyModel) -> np.ndarray:
    """Per (setting tuple, lambda) variational distance from the product of marginals."""
    _require_bipartite(model, "outcome dependence")
    full = model.joint_by_party()
    pa = full.sum(axis=3)
    pb = full.sum(axis=2)
    prod = pa[:, :, :, None] * pb[:, :, None, :]
    return abs(full - prod).sum(axis=(2, 3))


def outcome_dependence(model: NPartyModel, *, validate: bool = True):
    """max over (x, y, lambda) of sum_ab |p(a,b) - p(a) p(b)|."""
    if validate:
        require_valid(model)
    return _max(outcome_dependence_table(model))


def _signal_shifts(model: NPartyModel, sender: int, receiver: int) -> np.ndarray:
    """|p_receiver(o|s,l) - p_receiver(o|s',l)| maximized over outcomes and over
    setting tuples s, s' that differ only in the sender's setting.

    Returns an array of shape (S, L): for each setting tuple s the largest shift
    against any sender-perturbed s'.
    """
    shape = model.setting_shape
    marg = model.marginals()[receiver]
    marg = marg.reshape(shape + marg.shape[1:])
    # move sender axis first, then compare every pair along it
    moved = np.moveaxis(marg, sender, 0)
    ns = shape[sender]
    out = np.zeros(moved.shape[:-1], dtype=marg.dtype)
    if marg.dtype == object:
        out = np.full(moved.shape[:-1], Fraction(0), dtype=object)
    for i, j in itertools.product(range(ns), repeat=2):
        if i == j:
            continue
        d = abs(moved[i] - moved[j]).max(axis=-1)
        out[i] = np.maximum(out[i], d)
    out = np.moveaxis(out, 0, sender)
    return out.reshape((model.n_setting_tuples, model.n_lambdas))


def signaling_matrix(model: NPartyModel, *, validate: bool = True) -> np.ndarray:
    """``out[i, j]`` is the largest shift of party j's marginal caused by party i."""
    if validate:
        require_valid(model)
    n = model.parties
    out = np.zeros((n, n), dtype=model.joint.dtype)
    if model.is_exact:
        out = np.full((n, n), Fraction(0), dtype=object)
    for i in range(n):
        for j in range(n):
            if i != j:
                out[i, j] = _max(_signal_shifts(model, i, j))
    return out


def signaling(model: NPartyModel, *, validate: bool = True) -> tuple:
    """(S_1to2, S_2to1, S) for two parties.

    For more parties the first two entries are None and S is the largest shift
    of any party's marginal under a change of any single other party's setting.
    """
    mat = signaling_matrix(model, validate=validate)
    if model.parties == 1:
        return (None, None, 0)
    total = mat.max()
    if model.parties == 2:
        return (mat[0, 1], mat[1, 0], total)
    return (None, None, total)


def _prior_rows(model_or_prior) -> np.ndarray:
    if isinstance(model_or_prior, NPartyModel):
        return model_or_prior.prior
    return np.asarray(model_or_prior)


def measurement_dependence(model_or_prior, *, validate: bool = True):
    """max over setting-tuple pairs of sum_lambda |p(l|s) - p(l|s')|.

    Accepts a model or a bare prior table of shape (n_setting_tuples, n_lambdas).
    Exact tables are screened in floating point first and only the candidate
    pairs are re-evaluated exactly.
    """
    if validate and isinstance(model_or_prior, NPartyModel):
        require_valid(model_or_prior)
    prior = _prior_rows(model_or_prior)
    exact = prior.dtype == object
    fprior = prior.astype(float)
    rows, inverse = np.unique(fprior, axis=0, return_inverse=True)
    inverse = np.ravel(inverse)
    if len(rows) == 1:
        return Fraction(0) if exact else 0.0
    dist = np.zeros((len(rows), len(rows)))
    for i in range(len(rows)):
        dist[i] = np.abs(rows - rows[i]).sum(axis=1)
    best = dist.max()
    if not exact:
        return float(best)
    uniq = prior[[int(np.argmax(inverse == u)) for u in range(len(rows))]]
    scaled = _common_denominator(uniq)
    if scaled is not None:
        ints, den = scaled
        top = max(int(np.abs(ints - ints[i]).sum(axis=1).max()) for i in range(len(ints)))
        return Fraction(top, den)
    cand = np.argwhere(np.triu(dist >= best - 1e-9))
    value = Fraction(0)
    for i, j in cand:
        value = max(value, sum(abs(uniq[i] - uniq[j]), Fraction(0)))
    return value


def _common_denominator(table, limit=2 ** 60):
    """(int64 numerators, denominator) for a Fraction table, or None if too large."""
    den = 1
    for v in table.ravel():
        den = math.lcm(den, Fraction(v).denominator)
        if den * table.shape[-1] > limit:
            return None
    ints = np.array([[int(Fraction(v) * den) for v in row] for row in table], dtype=np.int64)
    return ints, den


def free_will_fraction(M):
    """1 - M/2, the guaranteed overlap of any two setting-conditioned priors."""
    if not 0 <= M <= 2:
        raise ParameterRangeError(f"M must lie in [0, 2], got {M}")
    return 1 - M / 2


@dataclass
class MeasureReport:
    I: float
    O: float | None
    S_1to2: float | None
    S_2to1: float | None
    S: float
    M: float
    F: float
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if k == "flags":
                continue
            out[k] = None if v is None else float(v)
        out["zero_prior_flags"] = list(self.flags)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def satisfies_imin(self, tol: float = 1e-12) -> bool:
        return float(self.I) >= min(float(self.S), (1 - float(self.S)) / 2) - tol


def measure_report(model: NPartyModel, tol: float = DEFAULT_TOL) -> MeasureReport:
    """Compute every measure the model supports and flag zero-prior suprema."""
    require_valid(model, tol)
    flags = []
    I = indeterminism(model, validate=False)
    if float(I) > float(_indeterminism_positive(model)) + tol:
        flags.append("I")
    pos = _positive(model.prior)
    O = None
    if model.parties == 2:
        otab = outcome_dependence_table(model)
        O = _max(otab)
        if float(O) > float(_max(otab[pos])) + tol:
            flags.append("O")
    s12, s21, S = signaling(model, validate=False)
    if model.parties >= 2:
        best_pos = 0.0
        for i in range(model.parties):
            for j in range(model.parties):
                if i != j:
                    shifts = _signal_shifts(model, i, j)
                    best_pos = max(best_pos, float(_max(shifts[pos])))
        if float(S) > best_pos + tol:
            flags.append("S")
    M = measurement_dependence(model, validate=False)
    return MeasureReport(I, O, s12, s21, S, M, free_will_fraction(M), flags)
