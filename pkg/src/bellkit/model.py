"""Finite hidden-variable models and the quantities read directly off them.

A model stores two dense tables indexed by setting tuples (row-major over the
per-party setting lists), hidden-variable labels and outcome tuples:

* ``joint[s, l, o]``  = p(outcome tuple o | setting tuple s, lambda l)
* ``prior[s, l]``     = p(lambda l | setting tuple s)

Tables are float64 by default. Passing :class:`fractions.Fraction` entries
gives an object-dtype table on which the measures are evaluated exactly.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    InvalidModelError,
    ModelStructureError,
    ParameterRangeError,
    UnsupportedAlphabetError,
)

DEFAULT_TOL = 1e-9


def _parse_number(value):
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ModelStructureError("empty probability string")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelStructureError(f"cannot parse probability {value!r}") from exc
    if value is None:
        return float("nan")
    return value


def as_table(data, exact: bool | None = None) -> np.ndarray:
    """Convert nested data to a probability table.

    ``exact=None`` keeps Fractions exact only if every entry is rational
    (ints or Fractions); ``exact=False`` forces float64.
    """
    arr = np.asarray(data, dtype=object)
    flat = [_parse_number(v) for v in arr.ravel()]
    if exact is None:
        exact = bool(flat) and all(isinstance(v, (Fraction, int)) and not isinstance(v, bool)
                                   for v in flat) and any(isinstance(v, Fraction) for v in flat)
    if exact:
        out = np.empty(arr.shape, dtype=object)
        out.ravel()[:] = [Fraction(v) for v in flat]
        return out
    return np.array([float(v) for v in flat], dtype=float).reshape(arr.shape)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NPartyModel:
    """Finite N-party hidden-variable model.

    ``settings[i]`` and ``outcomes[i]`` list party i's setting labels and
    outcome values. ``joint`` has shape ``(n_setting_tuples, n_lambdas,
    n_outcome_tuples)`` and ``prior`` has shape ``(n_setting_tuples,
    n_lambdas)``.
    """

    settings: tuple
    outcomes: tuple
    lambdas: tuple
    joint: np.ndarray
    prior: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(tuple(str(s) for s in row) for row in self.settings))
        object.__setattr__(self, "outcomes", tuple(tuple(row) for row in self.outcomes))
        object.__setattr__(self, "lambdas", tuple(str(l) for l in self.lambdas))
        joint = self.joint if isinstance(self.joint, np.ndarray) else as_table(self.joint)
        prior = self.prior if isinstance(self.prior, np.ndarray) else as_table(self.prior)
        object.__setattr__(self, "joint", _freeze(joint))
        object.__setattr__(self, "prior", _freeze(prior))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def parties(self) -> int:
        return len(self.settings)

    @property
    def setting_shape(self) -> tuple:
        return tuple(len(s) for s in self.settings)

    @property
    def outcome_shape(self) -> tuple:
        return tuple(len(o) for o in self.outcomes)

    @property
    def n_setting_tuples(self) -> int:
        return math.prod(self.setting_shape)

    @property
    def n_outcome_tuples(self) -> int:
        return math.prod(self.outcome_shape)

    @property
    def n_lambdas(self) -> int:
        return len(self.lambdas)

    @property
    def is_exact(self) -> bool:
        return self.joint.dtype == object

    def setting_tuples(self) -> list:
        return list(itertools.product(*self.settings))

    def outcome_tuples(self) -> list:
        return list(itertools.product(*self.outcomes))

    def setting_index(self, setting) -> int:
        """Row-major index of a setting tuple given as labels or an int."""
        if isinstance(setting, (int, np.integer)):
            if not 0 <= setting < self.n_setting_tuples:
                raise KeyError(f"setting index {setting} out of range")
            return int(setting)
        setting = tuple(str(s) for s in setting)
        if len(setting) != self.parties:
            raise KeyError(f"setting tuple {setting} has wrong length")
        idx = []
        for party, label in enumerate(setting):
            try:
                idx.append(self.settings[party].index(label))
            except ValueError:
                raise KeyError(f"unknown setting {label!r} for party {party}") from None
        return int(np.ravel_multi_index(idx, self.setting_shape))

    def lambda_index(self, lam) -> int:
        if isinstance(lam, (int, np.integer)) and not isinstance(lam, bool):
            if not 0 <= lam < self.n_lambdas:
                raise KeyError(f"lambda index {lam} out of range")
            return int(lam)
        try:
            return self.lambdas.index(str(lam))
        except ValueError:
            raise KeyError(f"unknown hidden variable {lam!r}") from None

    def joint_by_party(self) -> np.ndarray:
        """Joint table reshaped to ``(n_setting_tuples, n_lambdas, *outcome_shape)``."""
        return self.joint.reshape((self.n_setting_tuples, self.n_lambdas) + self.outcome_shape)

    def marginals(self) -> list:
        """Per-party underlying marginals, each shaped ``(S, L, n_outcomes_i)``."""
        full = self.joint_by_party()
        out = []
        for party in range(self.parties):
            axes = tuple(2 + i for i in range(self.parties) if i != party)
            out.append(full.sum(axis=axes) if axes else full)
        return out

    def with_metadata(self, **extra) -> "NPartyModel":
        meta = dict(self.metadata)
        meta.update(extra)
        return NPartyModel(self.settings, self.outcomes, self.lambdas, self.joint, self.prior, meta)

    @classmethod
    def tabulate(
        cls,
        settings: Sequence[Sequence[str]],
        outcomes: Sequence[Sequence[float]],
        lambdas: Sequence[str],
        joint_fn: Callable[[tuple, str], Sequence],
        prior_fn: Callable[[tuple, str], Any],
        metadata: dict | None = None,
        exact: bool | None = None,
    ) -> "NPartyModel":
        """Build a model from callables of (setting-label tuple, lambda label).

        ``joint_fn`` returns the distribution over outcome tuples (row-major).
        """
        stuples = list(itertools.product(*settings))
        joint = [[list(joint_fn(s, l)) for l in lambdas] for s in stuples]
        prior = [[prior_fn(s, l) for l in lambdas] for s in stuples]
        return cls(settings, outcomes, lambdas, as_table(joint, exact), as_table(prior, exact),
                   metadata or {})


class Violation(NamedTuple):
    kind: str
    location: tuple
    value: float


@dataclass
class ValidationReport:
    structural: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.structural and not self.violations

    def __bool__(self):
        return self.ok

    def raise_if_invalid(self):
        if self.structural:
            raise ModelStructureError("; ".join(self.structural))
        if self.violations:
            shown = ", ".join(f"{v.kind}@{v.location}={float(v.value):.3g}" for v in self.violations[:5])
            more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
            raise InvalidModelError(f"model violates probability invariants: {shown}{more}")

    def to_dict(self) -> dict:
        return {
            "valid": self.ok,
            "structural": list(self.structural),
            "violations": [
                {"kind": v.kind, "location": list(v.location), "value": float(v.value)}
                for v in self.violations
            ],
        }


def validate_model(model: NPartyModel, tol: float = DEFAULT_TOL) -> ValidationReport:
    report = ValidationReport()
    if model.parties < 1:
        report.structural.append("model needs at least one party")
    if len(model.outcomes) != model.parties:
        report.structural.append(
            f"{len(model.outcomes)} outcome lists for {model.parties} parties")
    for i, s in enumerate(model.settings):
        if not s:
            report.structural.append(f"party {i} has no settings")
    for i, o in enumerate(model.outcomes):
        if not o:
            report.structural.append(f"party {i} has no outcomes")
    if not model.lambdas:
        report.structural.append("no hidden-variable values")
    if report.structural:
        return report

    want_joint = (model.n_setting_tuples, model.n_lambdas, model.n_outcome_tuples)
    want_prior = (model.n_setting_tuples, model.n_lambdas)
    if model.joint.shape != want_joint:
        report.structural.append(f"joint has shape {model.joint.shape}, expected {want_joint}")
    if model.prior.shape != want_prior:
        report.structural.append(f"prior has shape {model.prior.shape}, expected {want_prior}")
    if report.structural:
        return report

    for name, table in (("joint", model.joint), ("prior", model.prior)):
        missing = np.argwhere(np.array([_is_missing(v) for v in table.ravel()]).reshape(table.shape))
        for loc in missing[:20]:
            report.structural.append(f"missing {name} entry at {tuple(int(i) for i in loc)}")
    if report.structural:
        return report

    for name, table in (("joint", model.joint), ("prior", model.prior)):
        for loc in np.argwhere(table < -tol):
            loc = tuple(int(i) for i in loc)
            report.violations.append(Violation(f"{name}-negative", loc, table[loc]))
        for loc in np.argwhere(table > 1 + tol):
            loc = tuple(int(i) for i in loc)
            report.violations.append(Violation(f"{name}-exceeds-one", loc, table[loc]))
    jsum = model.joint.sum(axis=2)
    for loc in np.argwhere(abs(jsum - 1) > tol):
        loc = tuple(int(i) for i in loc)
        report.violations.append(Violation("joint-normalization", loc, jsum[loc]))
    psum = model.prior.sum(axis=1)
    for loc in np.argwhere(abs(psum - 1) > tol):
        loc = tuple(int(i) for i in loc)
        report.violations.append(Violation("prior-normalization", loc, psum[loc]))
    return report


def _is_missing(v) -> bool:
    if v is None:
        return True
    try:
        return bool(np.isnan(float(v)))
    except (TypeError, ValueError):
        return True


def require_valid(model: NPartyModel, tol: float = DEFAULT_TOL) -> NPartyModel:
    validate_model(model, tol).raise_if_invalid()
    return model


@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """Observed correlations p(outcome tuple | setting tuple)."""

    settings: tuple
    outcomes: tuple
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", _freeze(np.asarray(self.table)))

    @property
    def parties(self) -> int:
        return len(self.settings)

    def setting_index(self, setting) -> int:
        if isinstance(setting, (int, np.integer)):
            return int(setting)
        shape = tuple(len(s) for s in self.settings)
        idx = [self.settings[i].index(str(lab)) for i, lab in enumerate(setting)]
        return int(np.ravel_multi_index(idx, shape))

    def distribution(self, setting) -> np.ndarray:
        return self.table[self.setting_index(setting)]

    def outcome_tuples(self) -> list:
        return list(itertools.product(*self.outcomes))

    def setting_tuples(self) -> list:
        return list(itertools.product(*self.settings))


def observed_correlations(model: NPartyModel, tol: float = DEFAULT_TOL) -> CorrelationTable:
    """Sum out the hidden variable: p(o|s) = sum_l p(o|s,l) p(l|s)."""
    require_valid(model, tol)
    table = (model.joint * model.prior[:, :, None]).sum(axis=1)
    return CorrelationTable(model.settings, model.outcomes, table)


def _check_pm1(outcomes) -> None:
    for party, vals in enumerate(outcomes):
        if sorted(float(v) for v in vals) != [-1.0, 1.0]:
            raise UnsupportedAlphabetError(
                f"party {party} has outcomes {list(vals)}; correlators need exactly +1 and -1")


def outcome_products(outcomes) -> np.ndarray:
    """Product of outcome values for every outcome tuple (row-major)."""
    return np.array([math.prod(float(v) for v in o) for o in itertools.product(*outcomes)])


def correlator(table: CorrelationTable, setting) -> float:
    """Average product of the +/-1 outcomes at one setting tuple."""
    _check_pm1(table.outcomes)
    dist = table.distribution(setting)
    prods = outcome_products(table.outcomes)
    if dist.dtype == object:
        return sum((Fraction(int(p)) * d for p, d in zip(prods, dist)), Fraction(0))
    return float(np.dot(prods, dist))


def underlying_marginal(model: NPartyModel, party: int, setting, lam) -> np.ndarray:
    """p(outcome of ``party`` | setting tuple, lambda)."""
    if not 0 <= party < model.parties:
        raise KeyError(f"party {party} out of range")
    s = model.setting_index(setting)
    l = model.lambda_index(lam)
    return model.marginals()[party][s, l]


class CmnTriple(NamedTuple):
    """(c, m, n) = (p(+,+), p_A(+), p_B(+)) of a two-party +/-1 distribution."""

    c: float
    m: float
    n: float

    def reconstruct(self) -> tuple:
        c, m, n = self
        return (c, m - c, n - c, 1 + c - m - n)

    def is_consistent(self, tol: float = 0.0) -> bool:
        c, m, n = self
        return max(0, m + n - 1) - tol <= c <= min(m, n) + tol


def decompose_cmn(dist: Sequence, tol: float = DEFAULT_TOL) -> CmnTriple:
    """Split a distribution ordered (++, +-, -+, --) into its (c, m, n) triple."""
    if len(dist) != 4:
        raise ParameterRangeError("expected four probabilities ordered (++, +-, -+, --)")
    if any(p < -tol for p in dist) or abs(sum(dist) - 1) > tol:
        raise ParameterRangeError(f"{list(dist)} is not a probability distribution")
    pp, pm, mp, _ = dist
    return CmnTriple(pp, pp + pm, pp + mp)


# ---------------------------------------------------------------- JSON format

def _encode(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return float(v)


def model_to_dict(model: NPartyModel) -> dict:
    return {
        "parties": model.parties,
        "settings": [list(s) for s in model.settings],
        "outcomes": [[_encode_outcome(v) for v in o] for o in model.outcomes],
        "lambdas": list(model.lambdas),
        "joint": [[[_encode(v) for v in row] for row in block] for block in model.joint],
        "prior": [[_encode(v) for v in row] for row in model.prior],
        "metadata": model.metadata,
    }


def _encode_outcome(v):
    f = float(v)
    return int(f) if f.is_integer() else f


def model_from_dict(doc: dict, exact: bool = False) -> NPartyModel:
    """Parse the interchange format; rational strings such as "2/3" are accepted."""
    try:
        settings = doc["settings"]
        outcomes = doc["outcomes"]
        lambdas = doc["lambdas"]
        joint = doc["joint"]
        prior = doc["prior"]
    except KeyError as exc:
        raise ModelStructureError(f"model document lacks field {exc.args[0]!r}") from None
    if "parties" in doc and doc["parties"] != len(settings):
        raise ModelStructureError(
            f"'parties' is {doc['parties']} but {len(settings)} setting lists were given")
    try:
        joint_t = as_table(joint, exact=exact or None)
        prior_t = as_table(prior, exact=exact or None)
    except ValueError as exc:
        raise ModelStructureError(f"ragged probability table: {exc}") from None
    if not exact:
        joint_t = joint_t.astype(float)
        prior_t = prior_t.astype(float)
    outcomes = [[float(_parse_number(v)) for v in o] for o in outcomes]
    return NPartyModel(settings, outcomes, lambdas, joint_t, prior_t, doc.get("metadata", {}))


def load_model(path, exact: bool = False) -> NPartyModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelStructureError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc, exact=exact)


def dump_model(model: NPartyModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1, sort_keys=True)
        fh.write("\n")


def model_hash(model: NPartyModel) -> str:
    doc = model_to_dict(model)
    doc.pop("metadata")
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
