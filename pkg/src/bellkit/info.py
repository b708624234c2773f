"""Information-theoretic capacities of finite models, in bits.

Channel capacities use the Blahut-Arimoto alternating maximization. Each
iteration yields a lower bound (the mutual information of the current input
law) and an upper bound (the largest per-input divergence), so the returned
value is always achievable and within ``tol`` of the true capacity when the
iteration converges.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidModelError, ParameterRangeError, UnsupportedModelError
from .model import DEFAULT_TOL, NPartyModel, require_valid

LOG2E = math.log2(math.e)
CAPACITY_TOL = 1e-6
CAPACITY_MAX_ITER = 100_000
GOLDEN_TOL = 1e-9


def binary_entropy(x):
    """h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ParameterRangeError(f"binary entropy needs 0 <= x <= 1, got {x}")
    out = entropy(np.stack([arr, 1 - arr]), axis=0)
    return float(out) if out.ndim == 0 else out


def entropy(p, axis=-1):
    """Shannon entropy in bits along ``axis``; 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1)), 0.0)
    return terms.sum(axis=axis)


def mutual_information(joint) -> float:
    """Mutual information in bits of a two-dimensional joint table."""
    joint = np.asarray(joint, dtype=float)
    return float(entropy(joint.sum(axis=1)) + entropy(joint.sum(axis=0)) - entropy(joint.ravel()))


def _kl_rows(W, q):
    """D(W_x || q) in nats for every row x."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(W > 0, W / np.where(q > 0, q, 1), 1.0)
        return np.where(W > 0, W * np.log(ratio), 0.0).sum(axis=1)


@dataclass
class CapacityResult:
    value: float
    upper: float
    iterations: int
    converged: bool
    input_law: np.ndarray = field(repr=False)
    method: str = "blahut-arimoto"

    @property
    def gap(self) -> float:
        return self.upper - self.value

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "upper": self.upper,
            "gap": self.gap,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
        }


def _dedupe_rows(W, bonus):
    key = np.round(np.column_stack([W, bonus]), 14)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    return W[first], bonus[first], first, np.ravel(inverse)


def capacity(W, bonus=None, tol: float = CAPACITY_TOL, max_iter: int = CAPACITY_MAX_ITER,
             init=None) -> CapacityResult:
    """Capacity in bits of the channel with rows ``W[x] = p(y|x)``.

    ``bonus[x]`` (bits) adds a term linear in the input law, which covers
    objectives of the form I(Y; X, Z) where Z is emitted alongside X.
    Duplicate rows are merged first; they never change the capacity.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] == 0:
        raise ParameterRangeError("channel must be a nonempty 2-D table")
    if np.any(W < -1e-12) or np.any(np.abs(W.sum(axis=1) - 1) > 1e-9):
        raise InvalidModelError("channel rows must be probability distributions")
    W = np.clip(W, 0, None)
    W = W / W.sum(axis=1, keepdims=True)
    s = np.zeros(W.shape[0]) if bonus is None else np.asarray(bonus, dtype=float) / LOG2E
    Wd, sd, first, inverse = _dedupe_rows(W, s)
    nx = Wd.shape[0]
    if init is None:
        r = np.full(nx, 1.0 / nx)
    else:
        r = np.bincount(inverse, weights=np.asarray(init, dtype=float), minlength=nx)
        r = r / r.sum()
    tol_nats = tol / LOG2E
    lower = upper = 0.0
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        q = r @ Wd
        c = _kl_rows(Wd, q) + sd
        lower = float(r @ c)
        upper = float(c.max())
        if upper - lower <= tol_nats:
            converged = True
            break
        r = r * np.exp(c - upper)
        r /= r.sum()
    if not converged:
        warnings.warn(f"capacity iteration stopped after {max_iter} steps with gap "
                      f"{(upper - lower) * LOG2E:.3g} bits", RuntimeWarning, stacklevel=2)
    full = np.zeros(W.shape[0])
    full[first] = r
    return CapacityResult(max(lower, 0.0) * LOG2E, upper * LOG2E, it, converged, full)


def capacity_two_inputs(W, tol: float = GOLDEN_TOL) -> CapacityResult:
    """Capacity of a two-row channel by bounded golden-section search over w."""
    W = np.asarray(W, dtype=float)
    if W.shape[0] != 2:
        raise ParameterRangeError("golden-section path needs exactly two inputs")

    def neg_info(w):
        return -mutual_information(np.vstack([(1 - w) * W[0], w * W[1]]))

    res = minimize_scalar(neg_info, bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": tol, "maxiter": 500})
    w = float(res.x)
    best = -float(res.fun)
    for edge in (0.0, 1.0):
        if -neg_info(edge) > best:
            best, w = -neg_info(edge), edge
    return CapacityResult(max(best, 0.0), max(best, 0.0), int(res.nfev), bool(res.success),
                          np.array([1 - w, w]), "golden-section")


def c_random(model: NPartyModel, tol: float = DEFAULT_TOL) -> float:
    """Largest entropy of any underlying single-party marginal."""
    require_valid(model, tol)
    return max(float(entropy(m.astype(float)).max()) for m in model.marginals())


def _outcome_mi_table(model):
    full = model.joint_by_party().astype(float)
    s, l = full.shape[:2]
    out = np.empty((s, l))
    for i in range(s):
        for j in range(l):
            out[i, j] = mutual_information(full[i, j])
    return out


def c_outcome(model: NPartyModel, tol: float = DEFAULT_TOL) -> float:
    """Largest mutual information between the two outcomes at fixed (x, y, lambda)."""
    require_valid(model, tol)
    if model.parties != 2:
        raise UnsupportedModelError("outcome capacity is defined for two parties")
    return float(_outcome_mi_table(model).max())


@dataclass
class SignalingCapacity:
    value: float
    direction: str
    receiver_setting: str
    lam: str
    input_law: np.ndarray = field(repr=False)
    method: str = ""


def signaling_channels(model: NPartyModel):
    """Yield (direction, receiver setting, lambda, channel) for every signaling channel.

    The channel maps the sender's setting to the receiver's outcome at fixed
    receiver setting and lambda.
    """
    if model.parties != 2:
        raise UnsupportedModelError("signaling capacity is defined for two parties")
    nx, ny = model.setting_shape
    margs = [m.astype(float).reshape((nx, ny) + m.shape[1:]) for m in model.marginals()]
    for l, lab in enumerate(model.lambdas):
        for y in range(ny):
            yield "1to2", model.settings[1][y], lab, margs[1][:, y, l, :]
        for x in range(nx):
            yield "2to1", model.settings[0][x], lab, margs[0][x, :, l, :]


def c_sig(model: NPartyModel, tol: float = DEFAULT_TOL, method: str = "auto") -> SignalingCapacity:
    """Largest capacity of any sender-setting to receiver-outcome channel.

    ``method`` is "auto" (golden section for two-row or two-column channels,
    iteration otherwise), "iterate" or "golden".
    """
    require_valid(model, tol)
    best = None
    for direction, rset, lab, W in signaling_channels(model):
        if np.allclose(W, W[0], atol=0, rtol=0):
            res_value, law, used = 0.0, np.full(W.shape[0], 1.0 / W.shape[0]), "trivial"
        elif method in ("golden", "auto") and (W.shape[0] == 2 or W.shape[1] == 2):
            # binary outputs: D(w||q) is convex in w, so the extreme rows suffice
            ends = [0, 1] if W.shape[0] == 2 else [int(np.argmax(W[:, 0])),
                                                   int(np.argmin(W[:, 0]))]
            res = capacity_two_inputs(W[ends])
            law = np.zeros(W.shape[0])
            np.add.at(law, ends, res.input_law)
            res_value, used = res.value, res.method
        else:
            res = capacity(W)
            res_value, law, used = res.value, res.input_law, res.method
        if best is None or res_value > best.value + 1e-15:
            best = SignalingCapacity(res_value, direction, rset, lab, law, used)
    return best


def c_meas_dep(model_or_prior, tol: float = CAPACITY_TOL, max_iter: int = CAPACITY_MAX_ITER
               ) -> CapacityResult:
    """Capacity of the channel setting tuple -> lambda defined by the prior table."""
    prior = model_or_prior.prior if isinstance(model_or_prior, NPartyModel) else model_or_prior
    return capacity(np.asarray(prior, dtype=float), tol=tol, max_iter=max_iter)


@dataclass(frozen=True, eq=False)
class CommModel:
    """A bipartite model plus a message sent from one party to the other.

    ``message_law[x, l, m]`` = p(m | sender setting x, lambda l). A law of shape
    ``(n_x, n_outcomes, n_lambda, n_m)`` lets the message also depend on the
    sender's outcome. ``sender`` is 0 or 1.
    """

    base: NPartyModel
    messages: tuple
    message_law: np.ndarray
    sender: int = 0

    def __post_init__(self):
        law = np.asarray(self.message_law, dtype=float)
        object.__setattr__(self, "message_law", law)
        object.__setattr__(self, "messages", tuple(self.messages))
        if self.base.parties != 2 or self.sender not in (0, 1):
            raise UnsupportedModelError("communication models are bipartite with sender 0 or 1")
        nx = self.base.setting_shape[self.sender]
        lam = self.base.n_lambdas
        nm = len(self.messages)
        nout = self.base.outcome_shape[self.sender]
        if law.shape not in ((nx, lam, nm), (nx, nout, lam, nm)):
            raise InvalidModelError(f"message law has shape {law.shape}")
        if np.any(law < -1e-12) or np.any(np.abs(law.sum(axis=-1) - 1) > DEFAULT_TOL):
            raise InvalidModelError("message law is not normalized")

    @property
    def outcome_dependent(self) -> bool:
        return self.message_law.ndim == 4


def _sender_outcome_law(comm: CommModel, receiver_setting: int):
    """p(a | x, y_fixed, lambda) for the sender, shape (n_x, n_lambda, n_a)."""
    base = comm.base
    nx, ny = base.setting_shape
    marg = base.marginals()[comm.sender].astype(float).reshape((nx, ny) + (base.n_lambdas, -1))
    if comm.sender == 0:
        return marg[:, receiver_setting]
    return np.moveaxis(marg, 1, 0)[:, receiver_setting]


def _message_channel(comm: CommModel, l: int, receiver_setting: int = 0):
    """Channel sender-setting -> message and the per-input bonus in bits."""
    law = comm.message_law
    if not comm.outcome_dependent:
        W = law[:, l, :]
        return W, np.zeros(W.shape[0])
    pa = _sender_outcome_law(comm, receiver_setting)[:, l, :]
    cond = law[:, :, l, :]
    W = np.einsum("xa,xam->xm", pa, cond)
    bonus = entropy(W) - np.einsum("xa,xa->x", pa, entropy(cond))
    return W, bonus


@dataclass
class CommunReport:
    per_lambda: np.ndarray
    capacity: float
    per_lambda_capacity: np.ndarray
    iterations: int

    def to_dict(self) -> dict:
        return {
            "per_lambda": [float(v) for v in self.per_lambda],
            "C_commun": self.capacity,
            "per_lambda_capacity": [float(v) for v in self.per_lambda_capacity],
            "iterations": self.iterations,
        }


def c_commun(comm: CommModel, sender_prior=None, tol: float = CAPACITY_TOL) -> CommunReport:
    """Mutual information between the message and the sender's (setting, outcome).

    Returns its value per lambda at ``sender_prior`` (uniform if omitted) and
    the communication capacity, the sup over lambda of the maximum over
    sender priors. When the message depends on the outcome the receiver's
    setting is taken as the first one.
    """
    nx = comm.base.setting_shape[comm.sender]
    prior = np.full(nx, 1.0 / nx) if sender_prior is None else np.asarray(sender_prior, float)
    if prior.shape != (nx,) or np.any(prior < 0) or abs(prior.sum() - 1) > DEFAULT_TOL:
        raise ParameterRangeError("sender prior must be a distribution over the sender's settings")
    per, caps, iters = [], [], 0
    for l in range(comm.base.n_lambdas):
        W, bonus = _message_channel(comm, l)
        per.append(mutual_information(prior[:, None] * W) + float(prior @ bonus))
        if W.shape[0] == 2 and not np.any(bonus):
            res = capacity_two_inputs(W)
        else:
            res = capacity(W, bonus=bonus, tol=tol)
        caps.append(res.value)
        iters += res.iterations
    caps = np.array(caps)
    return CommunReport(np.array(per), float(caps.max()), caps, iters)


@dataclass
class CapacityReport:
    C_random: float
    C_outcome: float | None
    C_sig: float | None
    C_meas_dep: float
    C_commun: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: (None if v is None else float(v)) for k, v in (
            ("C_random", self.C_random), ("C_outcome", self.C_outcome), ("C_sig", self.C_sig),
            ("C_meas_dep", self.C_meas_dep), ("C_commun", self.C_commun))}
        out["diagnostics"] = self.diagnostics
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def capacity_report(model_or_comm, tol: float = DEFAULT_TOL) -> CapacityReport:
    """Every capacity the model supports; pass a CommModel to include C_commun."""
    comm = model_or_comm if isinstance(model_or_comm, CommModel) else None
    model = comm.base if comm else model_or_comm
    require_valid(model, tol)
    diag = {}
    crand = c_random(model, tol)
    cout = csig = None
    if model.parties == 2:
        cout = c_outcome(model, tol)
        sig = c_sig(model, tol)
        csig = sig.value
        diag["C_sig"] = {"direction": sig.direction, "receiver_setting": sig.receiver_setting,
                         "lambda": sig.lam, "method": sig.method,
                         "input_law": [float(v) for v in sig.input_law]}
    dep = c_meas_dep(model)
    diag["C_meas_dep"] = dep.to_dict()
    ccom = None
    if comm is not None:
        rep = c_commun(comm)
        ccom = rep.capacity
        diag["C_commun"] = {"iterations": rep.iterations}
    return CapacityReport(crand, cout, csig, dep.value, ccom, diag)
