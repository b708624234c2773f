"""Relaxed Bell bounds B(I, S) for binary two-party functionals by linear programming.

Per hidden variable, each setting pair (j, k) carries a joint distribution
written as (c, m, n): c = p(+,+), m = p_A(+), n = p_B(+). The functional is
linear in these. The marginal box m, n in [0, I] u [1 - I, 1] is not convex,
so every marginal picks one of the two intervals (a "branch"); within a
branch the remaining constraints (simplex positivity and the signaling
couplings |m_jk - m_jk'| <= S, |n_jk - n_j'k| <= S) are linear.

Branch bit p (p < P = |X||Y|) selects the interval of m for pair p = j*|Y| + k;
bit P + p does the same for n. Bit value 0 is [0, I], 1 is [1 - I, 1].

With no measurement dependence the prior is the same for every setting pair,
so the functional averaged over lambda never exceeds its per-lambda maximum
and a single hidden-variable value suffices as a witness.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import _backend
from .errors import BranchCapError, ModelStructureError, ParameterRangeError, UnsupportedAlphabetError
from .model import CorrelationTable, NPartyModel

SINGLE_LAMBDA_NOTE = ("objective is linear in the hidden-variable prior and the prior is "
                      "setting independent, so the per-lambda maximum is attained by one lambda")


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Coefficients alpha[j, k, a, b] of sum alpha p(a, b | x_j, y_k).

    Outcome index 0 is +1 and index 1 is -1.
    """

    alpha: np.ndarray
    correlator: np.ndarray | None = None
    bound: float | None = None
    name: str = ""

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        if alpha.ndim != 4 or alpha.shape[2:] != (2, 2) or alpha.shape[0] < 1 or alpha.shape[1] < 1:
            raise ModelStructureError(f"alpha must have shape (|X|, |Y|, 2, 2), got {alpha.shape}")
        if not np.all(np.isfinite(alpha)):
            raise ParameterRangeError("functional coefficients must be finite")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        if self.correlator is not None:
            corr = np.array(self.correlator, dtype=float)
            corr.setflags(write=False)
            object.__setattr__(self, "correlator", corr)

    @property
    def shape(self) -> tuple:
        return self.alpha.shape[:2]

    def pair_coefficients(self):
        """(kc, km, kn, const): the functional per lambda is const + sum kc*c + km*m + kn*n."""
        a = self.alpha.reshape(-1, 2, 2)
        kc = a[:, 0, 0] - a[:, 0, 1] - a[:, 1, 0] + a[:, 1, 1]
        km = a[:, 0, 1] - a[:, 1, 1]
        kn = a[:, 1, 0] - a[:, 1, 1]
        return kc, km, kn, float(a[:, 1, 1].sum())

    def is_flip_symmetric(self) -> bool:
        """True when relabeling both parties' outcomes leaves the functional unchanged."""
        return bool(np.array_equal(self.alpha, self.alpha[:, :, ::-1, ::-1]))

    def to_dict(self) -> dict:
        doc = {"name": self.name, "alpha": self.alpha.tolist()}
        if self.correlator is not None:
            doc["correlator"] = self.correlator.tolist()
        if self.bound is not None:
            doc["bound"] = self.bound
        return doc


def functional_from_correlators(coeffs, bound=None, name: str = "") -> BellFunctional:
    """Expand sum alpha_jk <X_j Y_k> into outcome-pair coefficients alpha_jk * a * b."""
    corr = np.array(coeffs, dtype=float)
    if corr.ndim != 2:
        raise ModelStructureError("correlator coefficients must form a matrix")
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    alpha = corr[:, :, None, None] * signs
    return BellFunctional(alpha, corr, bound, name)


def functional_from_dict(doc: dict) -> BellFunctional:
    bound = doc.get("bound")
    name = doc.get("name", "")
    if "alpha" in doc:
        return BellFunctional(doc["alpha"], doc.get("correlator"), bound, name)
    if "correlator" in doc:
        return functional_from_correlators(doc["correlator"], bound, name)
    raise ModelStructureError("functional document needs an 'alpha' or 'correlator' field")


def load_functional(path) -> BellFunctional:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelStructureError(f"{path}: not valid JSON ({exc})") from None
    return functional_from_dict(doc)


def builtin_functional(name: str) -> BellFunctional:
    """Load one of the bundled functionals: "chsh", "i3322" or "a4422"."""
    try:
        text = resources.files("bellkit").joinpath(f"data/functionals/{name}.json").read_text()
    except FileNotFoundError:
        raise KeyError(f"no bundled functional named {name!r}") from None
    return functional_from_dict(json.loads(text))


def mm22_correlators(m: int) -> np.ndarray:
    """Coefficients +1 for j + k <= m + 1, -1 for j + k = m + 2, else 0 (1-based)."""
    if m < 2:
        raise ParameterRangeError("need at least two settings per party")
    j, k = np.meshgrid(np.arange(1, m + 1), np.arange(1, m + 1), indexing="ij")
    return np.where(j + k <= m + 1, 1.0, np.where(j + k == m + 2, -1.0, 0.0))


def _outcome_index(values) -> tuple:
    vals = [float(v) for v in values]
    if sorted(vals) != [-1.0, 1.0]:
        raise UnsupportedAlphabetError(f"functionals need +/-1 outcomes, got {values}")
    return vals.index(1.0), vals.index(-1.0)


def evaluate_functional(func: BellFunctional, table: CorrelationTable) -> float:
    """Value of the functional on observed correlations of a two-party +/-1 table."""
    if table.parties != 2:
        raise UnsupportedAlphabetError("functionals are defined for two parties")
    nx, ny = func.shape
    if (len(table.settings[0]), len(table.settings[1])) != (nx, ny):
        raise ModelStructureError("functional and table have different setting counts")
    ia = _outcome_index(table.outcomes[0])
    ib = _outcome_index(table.outcomes[1])
    na, nb = len(table.outcomes[0]), len(table.outcomes[1])
    dist = np.asarray(table.table, dtype=float).reshape(nx, ny, na, nb)
    dist = dist[:, :, list(ia), :][:, :, :, list(ib)]
    return float((func.alpha * dist).sum())


def deterministic_bound(func: BellFunctional, cap: int = 2 ** 24) -> tuple:
    """Exact maximum over deterministic assignments X_j, Y_k in {+1, -1}.

    Returns (bound, strategy) where strategy maps "x<j>"/"y<k>" to outcomes;
    ties go to the first assignment in lexicographic (+1 before -1) order.
    """
    nx, ny = func.shape
    if 2 ** (nx + ny) > cap:
        raise BranchCapError(2 ** (nx + ny), cap)
    ia = np.array(list(itertools.product((0, 1), repeat=nx)), dtype=int)
    ib = np.array(list(itertools.product((0, 1), repeat=ny)), dtype=int)
    total = np.zeros((len(ia), len(ib)))
    for j in range(nx):
        for k in range(ny):
            total += func.alpha[j, k][ia[:, j]][:, ib[:, k]]
    flat = int(np.argmax(total))
    sa, sb = divmod(flat, len(ib))
    strategy = {f"x{j + 1}": 1 - 2 * int(ia[sa, j]) for j in range(nx)}
    strategy.update({f"y{k + 1}": 1 - 2 * int(ib[sb, k]) for k in range(ny)})
    return float(total[sa, sb]), strategy


@dataclass
class LPConfig:
    branch_cap: int = 2 ** 20
    tol: float = 1e-9
    jobs: int = 1
    symmetry: bool = True
    allow_partial: bool = False
    backend: str | None = None
    chunk: int = 4096

    def __post_init__(self):
        if self.branch_cap < 1 or self.jobs < 1 or self.chunk < 1:
            raise ParameterRangeError("LP caps, chunk size and job count must be positive")
        if self.tol < 0:
            raise ParameterRangeError("tolerance must be nonnegative")


@dataclass
class LPResult:
    bound: float
    witness: NPartyModel | None
    mode: str
    branches_total: int
    branches_enumerated: int
    branches_feasible: int
    best_branch: int | None
    partial: bool = False
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .model import model_to_dict

        return {
            "bound": self.bound,
            "mode": self.mode,
            "branches_total": self.branches_total,
            "branches_enumerated": self.branches_enumerated,
            "branches_feasible": self.branches_feasible,
            "best_branch": self.best_branch,
            "partial": self.partial,
            "metadata": self.metadata,
            "witness": model_to_dict(self.witness) if self.witness is not None else None,
        }


def gap_open(I: float, S: float, tol: float) -> bool:
    """True when signaling can carry a marginal across the forbidden interval."""
    return 1 - 2 * I <= S + tol


def _grouped_branches(nx: int, ny: int) -> np.ndarray:
    """Branches whose m bits are equal along each row j and n bits along each column k."""
    P = nx * ny
    out = []
    for bits in range(2 ** (nx + ny)):
        br = 0
        for j in range(nx):
            if (bits >> j) & 1:
                for k in range(ny):
                    br |= 1 << (j * ny + k)
        for k in range(ny):
            if (bits >> (nx + k)) & 1:
                for j in range(nx):
                    br |= 1 << (P + j * ny + k)
        out.append(br)
    return np.array(sorted(out), dtype=np.int64)


def _run_values(kern, kc, km, kn, nx, ny, I, S, tol, branches, config):
    if config.jobs == 1 or len(branches) <= config.chunk:
        return kern.lp_branch_values(kc, km, kn, nx, ny, I, S, tol, branches)
    chunks = [branches[i:i + config.chunk] for i in range(0, len(branches), config.chunk)]
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        parts = list(pool.map(
            lambda br: kern.lp_branch_values(kc, km, kn, nx, ny, I, S, tol, br), chunks))
    return np.concatenate(parts)


def _pair_distribution(x, p, I, branch, P):
    up_m = (branch >> p) & 1
    up_n = (branch >> (P + p)) & 1
    m0, sm = (1 - I, 1.0) if up_m else (I, -1.0)
    n0, sn = (1 - I, 1.0) if up_n else (I, -1.0)
    m = m0 + sm * x[3 * p]
    n = n0 + sn * x[3 * p + 1]
    c = max(0.0, m0 + n0 - 1) + x[3 * p + 2]
    dist = np.clip(np.array([c, m - c, n - c, 1 + c - m - n]), 0.0, None)
    return dist / dist.sum()


def _witness(func, dists, meta) -> NPartyModel:
    nx, ny = func.shape
    joint = np.array([[d] for d in dists])
    settings = [[f"x{j + 1}" for j in range(nx)], [f"y{k + 1}" for k in range(ny)]]
    return NPartyModel(settings, [[1, -1], [1, -1]], ["w"], joint,
                       np.ones((nx * ny, 1)), meta)


def relaxed_bound_lp(func: BellFunctional, I: float, S: float,
                     config: LPConfig | None = None) -> LPResult:
    """Least upper bound of the functional over models with indeterminism <= I,
    signaling <= S and no measurement dependence.
    """
    config = config or LPConfig()
    if not 0 <= I <= 0.5:
        raise ParameterRangeError(f"I must lie in [0, 1/2], got {I}")
    if not 0 <= S <= 1:
        raise ParameterRangeError(f"S must lie in [0, 1], got {S}")
    kern = _backend.get_kernels(config.backend)
    nx, ny = func.shape
    P = nx * ny
    kc, km, kn, const = func.pair_coefficients()
    meta = {"single_lambda": SINGLE_LAMBDA_NOTE, "I": I, "S": S, "backend": kern.__name__}

    if S >= 1:
        # no coupling between pairs: each pair is its own 2-bit problem
        dists = []
        total = const
        for p in range(P):
            sub = (kc[p:p + 1], km[p:p + 1], kn[p:p + 1])
            vals = kern.lp_branch_values(*sub, 1, 1, I, 1.0, config.tol, np.arange(4))
            best = int(np.argmax(vals))
            total += float(vals[best])
            _, x, _ = kern.lp_solve_branch(*sub, 1, 1, I, 1.0, config.tol, best)
            dists.append(_pair_distribution(x, 0, I, best, 1))
        meta["decoupled"] = True
        return LPResult(total, _witness(func, dists, meta), "decoupled", 4 * P, 4 * P, 4 * P, None,
                        False, meta)

    symmetric = config.symmetry and func.is_flip_symmetric()
    if gap_open(I, S, config.tol):
        mode = "full"
        n_all = 2 ** (2 * P)
        needed = n_all // 2 if symmetric else n_all
        make = lambda count: np.arange(count, dtype=np.int64)  # noqa: E731
    else:
        mode = "grouped"
        grouped = _grouped_branches(nx, ny)
        if symmetric:
            grouped = grouped[grouped < 2 ** (2 * P - 1)]
        needed = len(grouped)
        make = lambda count: grouped[:count]  # noqa: E731
    partial = False
    if needed > config.branch_cap:
        if not config.allow_partial:
            raise BranchCapError(needed, config.branch_cap)
        partial = True
        needed = config.branch_cap
    branches = make(needed)
    values = _run_values(kern, kc, km, kn, nx, ny, I, S, config.tol, branches, config)
    feasible = int(np.isfinite(values).sum())
    if feasible == 0:
        raise RuntimeError("no feasible branch; this cannot happen for valid I and S")
    idx = int(np.argmax(values))
    best_branch = int(branches[idx])
    _, x, _ = kern.lp_solve_branch(kc, km, kn, nx, ny, I, S, config.tol, best_branch)
    dists = [_pair_distribution(x, p, I, best_branch, P) for p in range(P)]
    meta.update({"symmetry_reduced": symmetric, "gap_open": mode == "full"})
    return LPResult(float(values[idx]) + const, _witness(func, dists, meta), mode, 2 ** (2 * P),
                    len(branches), feasible, best_branch, partial, meta)
