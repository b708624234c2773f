"""Singlet simulation with one bit of communication per run.

Two independent uniform directions l1, l2 are shared. The sender announces
m = sgn(x.l1) sgn(x.l2) and outputs a = -sgn x.l1; the receiver outputs
b = sgn y.(l1 + m l2). For fixed (l1, l2) the message entropy over a uniform
x is h(theta / pi), theta the angle between l1 and l2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..errors import ParameterRangeError
from ..info import CommModel, binary_entropy
from ..model import NPartyModel
from .singlet import singlet_distribution
from .sphere import as_unit, philox, sgn, uniform_directions

DEFAULT_SHARD = 2 ** 16


@dataclass(frozen=True)
class TonerBaconSpec:
    """Seed and sample count; shard ``k`` draws from stream ``k`` of the seed."""

    seed: int = 0
    samples: int = 10 ** 6
    shard: int = DEFAULT_SHARD


def toner_bacon_outcomes(x, y, l1, l2):
    """(a, b, m) arrays for hidden directions of shape (n, 3)."""
    xl1 = l1 @ x
    m = sgn(xl1) * sgn(l2 @ x)
    a = -sgn(xl1)
    b = sgn((l1 + m[:, None] * l2) @ y)
    return a, b, m


def message_entropy(l1, l2):
    """h(arccos(l1.l2) / pi) per sample."""
    cos = np.clip(np.sum(l1 * l2, axis=-1), -1.0, 1.0)
    return binary_entropy(np.arccos(cos) / math.pi)


@dataclass
class TonerBaconRun:
    samples: int
    estimate: np.ndarray
    stderr: np.ndarray
    target: np.ndarray
    z: np.ndarray
    message_plus: float
    mean_message_entropy: float
    message_entropy_stderr: float

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z)))

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "estimate": self.estimate.tolist(),
            "stderr": self.stderr.tolist(),
            "target": self.target.tolist(),
            "z": self.z.tolist(),
            "max_abs_z": self.max_abs_z,
            "message_plus": self.message_plus,
            "mean_message_entropy": self.mean_message_entropy,
            "message_entropy_stderr": self.message_entropy_stderr,
        }


def toner_bacon_run(x, y, spec: TonerBaconSpec | None = None) -> TonerBaconRun:
    """Monte Carlo estimate of p(a, b | x, y) ordered (++, +-, -+, --)."""
    spec = spec or TonerBaconSpec()
    if spec.samples <= 0:
        raise ParameterRangeError("sample count must be positive")
    x = as_unit(x)
    y = as_unit(y)
    counts = np.zeros(4)
    mplus = 0
    hsum = hsq = 0.0
    done, stream = 0, 0
    while done < spec.samples:
        n = min(spec.shard, spec.samples - done)
        rng = philox(spec.seed, stream)
        l1 = uniform_directions(rng, n)
        l2 = uniform_directions(rng, n)
        a, b, m = toner_bacon_outcomes(x, y, l1, l2)
        idx = (a < 0) * 2 + (b < 0)
        counts += np.bincount(idx, minlength=4)
        mplus += int(np.sum(m > 0))
        h = message_entropy(l1, l2)
        hsum += float(h.sum())
        hsq += float(np.sum(h * h))
        done += n
        stream += 1
    N = spec.samples
    est = counts / N
    se = np.sqrt(np.maximum(est * (1 - est), 1e-300) / N)
    target = singlet_distribution(x, y)
    mean_h = hsum / N
    var_h = max(hsq / N - mean_h ** 2, 0.0)
    return TonerBaconRun(N, est, se, target, (est - target) / se, mplus / N, mean_h,
                         math.sqrt(var_h / N))


def mean_message_entropy() -> float:
    """Average of h(theta/pi) over uniform l1, l2; theta has density sin(theta)/2."""
    val, _ = integrate.quad(lambda t: binary_entropy(t / math.pi) * math.sin(t) / 2, 0, math.pi,
                            epsabs=1e-13, epsrel=1e-13)
    return val


def toner_bacon_restriction(xs=None, ys=None, hidden=None):
    """Finite restriction to listed settings and hidden pairs (uniform prior).

    Defaults give one hidden pair l1 = e_z, l2 = e_x and sender settings
    (+-1, 0, 1)/sqrt 2, for which the message, and with it the receiver's
    outcome for y = e_x, flips with the sender's setting.
    Returns (NPartyModel, CommModel) with the sender as party 0.
    """
    r = 1 / math.sqrt(2)
    xs = [np.array([r, 0, r]), np.array([-r, 0, r])] if xs is None else [as_unit(v) for v in xs]
    ys = [np.array([1.0, 0, 0])] if ys is None else [as_unit(v) for v in ys]
    if hidden is None:
        hidden = [(np.array([0, 0, 1.0]), np.array([1.0, 0, 0]))]
    hidden = [(as_unit(p), as_unit(q)) for p, q in hidden]
    L = len(hidden)
    l1 = np.array([h[0] for h in hidden])
    l2 = np.array([h[1] for h in hidden])
    joint = np.zeros((len(xs) * len(ys), L, 4))
    law = np.zeros((len(xs), L, 2))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            a, b, m = toner_bacon_outcomes(x, y, l1, l2)
            joint[i * len(ys) + j, np.arange(L), (a < 0) * 2 + (b < 0)] = 1.0
        _, _, m = toner_bacon_outcomes(x, ys[0], l1, l2)
        law[i, np.arange(L), (m < 0).astype(int)] = 1.0
    model = NPartyModel(
        ([f"x{i + 1}" for i in range(len(xs))], [f"y{j + 1}" for j in range(len(ys))]),
        ((1, -1), (1, -1)), [f"l{k + 1}" for k in range(L)], joint,
        np.full((joint.shape[0], L), 1.0 / L), {"construction": "toner-bacon-restriction"})
    return model, CommModel(model, (1, -1), law, sender=0)
