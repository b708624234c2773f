"""Deterministic, nonsignaling singlet model with setting-dependent density on the sphere.

Outcomes are a = sgn x.lambda and b = -sgn y.lambda. The density of lambda
given (x, y) takes one constant value where the two signs agree and another
where they differ, chosen so the outcome statistics are the singlet ones.

Quadrature uses a frame whose pole is along x cross y: both sign boundaries
are then meridians, the integrand is piecewise constant in azimuth, and a
Gauss rule between the breakpoints integrates it to rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .. import _backend
from ..errors import ParameterRangeError
from ..info import binary_entropy, entropy, mutual_information
from ..model import NPartyModel
from .singlet import singlet_probability
from .sphere import as_unit, orthonormal_frame, planar, sgn

LOG2_4PI = math.log2(4 * math.pi)


@dataclass(frozen=True)
class HallModelSpec:
    """Quadrature and search configuration."""

    n_polar: int = 128
    n_azimuth: int = 16
    search_step_deg: float = 0.5
    refine: bool = True


def _pair_angle(x, y) -> float:
    return math.acos(max(-1.0, min(1.0, float(np.dot(x, y)))))


def agree_density(phi: float) -> float:
    """Density where sgn x.lambda = sgn y.lambda; zero when phi = pi."""
    if phi >= math.pi:
        return 0.0
    return (1 + math.cos(phi)) / (8 * (math.pi - phi))


def differ_density(phi: float) -> float:
    """Density where the signs differ; zero when phi = 0."""
    if phi <= 0.0:
        return 0.0
    return (1 - math.cos(phi)) / (8 * phi)


def hall_density(lam, x, y):
    """p(lambda | x, y) for one direction or an array of shape (n, 3)."""
    x = as_unit(x)
    y = as_unit(y)
    lam = np.asarray(lam, dtype=float)
    phi = _pair_angle(x, y)
    same = sgn(lam @ x) == sgn(lam @ y)
    out = np.where(same, agree_density(phi), differ_density(phi))
    return float(out) if out.ndim == 0 else out


def _quadrature_nodes(x, y, spec: HallModelSpec):
    """Nodes (n, 3) and weights (n,) for integrating over the sphere."""
    cross = np.cross(x, y)
    if np.linalg.norm(cross) < 1e-12:
        pole = orthonormal_frame(x)[0]
    else:
        pole = cross / np.linalg.norm(cross)
    e1, e2 = orthonormal_frame(pole)
    # sign boundaries of x.lambda and y.lambda are meridians at these azimuths
    breaks = []
    for v in (x, y):
        base = math.atan2(float(v @ e2), float(v @ e1))
        breaks += [(base + math.pi / 2) % (2 * math.pi), (base - math.pi / 2) % (2 * math.pi)]
    edges = np.unique(np.concatenate([[0.0, 2 * math.pi], np.array(breaks)]))
    gx, gw = np.polynomial.legendre.leggauss(spec.n_azimuth)
    psi, wpsi = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo < 1e-15:
            continue
        psi.append((hi - lo) / 2 * gx + (hi + lo) / 2)
        wpsi.append((hi - lo) / 2 * gw)
    psi = np.concatenate(psi)
    wpsi = np.concatenate(wpsi)
    u, wu = np.polynomial.legendre.leggauss(spec.n_polar)
    U, P = np.meshgrid(u, psi, indexing="ij")
    s = np.sqrt(1 - U ** 2)
    nodes = (s * np.cos(P))[..., None] * e1 + (s * np.sin(P))[..., None] * e2 + U[..., None] * pole
    weights = np.outer(wu, wpsi)
    return nodes.reshape(-1, 3), weights.ravel()


def hall_outcome_table(x, y, spec: HallModelSpec | None = None) -> np.ndarray:
    """Integrated p(a, b | x, y) ordered (++, +-, -+, --)."""
    spec = spec or HallModelSpec()
    x = as_unit(x)
    y = as_unit(y)
    nodes, w = _quadrature_nodes(x, y, spec)
    rho = hall_density(nodes, x, y) * w
    a = sgn(nodes @ x)
    b = -sgn(nodes @ y)
    return np.array([rho[(a == sa) & (b == sb)].sum() for sa in (1, -1) for sb in (1, -1)])


def hall_normalization(x, y, spec: HallModelSpec | None = None) -> float:
    return float(hall_outcome_table(x, y, spec).sum())


def hall_verify_singlet(x, y, spec: HallModelSpec | None = None) -> float:
    """Largest |p_model(a,b|x,y) - p_singlet(a,b|x,y)| over the four outcome pairs."""
    table = hall_outcome_table(x, y, spec)
    target = np.array([singlet_probability(x, y, a, b) for a in (1, -1) for b in (1, -1)])
    return float(np.max(np.abs(table - target)))


def hall_verify_singlet_mc(x, y, samples: int, seed: int) -> np.ndarray:
    """Importance-sampled estimate of p(a, b | x, y) from uniform directions."""
    from .sphere import philox, uniform_directions

    x = as_unit(x)
    y = as_unit(y)
    lam = uniform_directions(philox(seed), samples)
    wgt = hall_density(lam, x, y) * 4 * math.pi
    a = sgn(lam @ x)
    b = -sgn(lam @ y)
    return np.array([np.mean(wgt * ((a == sa) & (b == sb))) for sa in (1, -1) for sb in (1, -1)])


def hall_setting_entropy(t: float) -> float:
    """Differential entropy in bits of the density at x.y = t."""
    if not -1 <= t <= 1:
        raise ParameterRangeError(f"x.y must lie in [-1, 1], got {t}")
    phi = math.acos(t)
    out = binary_entropy((1 + t) / 2) + 2.0
    if 1 - t > 0:
        out += 0.5 * (1 - t) * math.log2(phi)
    if 1 + t > 0:
        out += 0.5 * (1 + t) * math.log2(math.pi - phi)
    return out


def hall_entropy_minimum(xtol: float = 1e-10) -> tuple:
    """(H_min, x.y) on 0 < x.y < 1; the function is even in x.y."""
    res = optimize.minimize_scalar(hall_setting_entropy, bounds=(0.5, 0.999), method="bounded",
                                   options={"xatol": xtol})
    return float(res.fun), float(res.x)


def hall_mean_entropy() -> float:
    """Average entropy for uniformly and independently chosen x, y (x.y uniform on [-1,1])."""
    val, _ = integrate.quad(hall_setting_entropy, -1, 1, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val / 2


def chsh_setting_entropy_gap() -> float:
    """2 - H(q/3, q/3, q/3, 1-q) with q = (1 + 1/sqrt 2)/2."""
    q = (1 + 1 / math.sqrt(2)) / 2
    return 2 - float(entropy([q / 3, q / 3, q / 3, 1 - q]))


# ------------------------------------------------------------ coplanar models

def hall_discrete_model(x_angles, y_angles, x_labels=None, y_labels=None) -> NPartyModel:
    """Exact finite coarse-graining for directions in one plane.

    Hidden values are the arcs (times the full polar range) between the
    great circles orthogonal to the directions. Outcomes are constant on each
    arc and so is the density, so observed statistics, measurement
    dependence and setting/lambda mutual information all match the
    continuous model.
    """
    xs = [planar(a) for a in x_angles]
    ys = [planar(a) for a in y_angles]
    breaks = []
    for ang in list(x_angles) + list(y_angles):
        breaks += [(ang + math.pi / 2) % (2 * math.pi), (ang - math.pi / 2) % (2 * math.pi)]
    edges = np.unique(np.round(np.concatenate([[0.0, 2 * math.pi], breaks]), 15))
    cells = [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi - lo > 1e-13]
    mids = [planar((lo + hi) / 2) for lo, hi in cells]
    area = np.array([2 * (hi - lo) for lo, hi in cells])
    joint, prior = [], []
    for x in xs:
        for y in ys:
            phi = _pair_angle(x, y)
            rows, pri = [], []
            for mid, ar in zip(mids, area):
                a, b = int(sgn(mid @ x)), int(-sgn(mid @ y))
                dist = np.zeros(4)
                dist[(0 if a == 1 else 2) + (0 if b == 1 else 1)] = 1.0
                rows.append(dist)
                same = int(sgn(mid @ x)) == int(sgn(mid @ y))
                pri.append(ar * (agree_density(phi) if same else differ_density(phi)))
            joint.append(rows)
            prior.append(pri)
    x_labels = x_labels or [f"x{i + 1}" for i in range(len(xs))]
    y_labels = y_labels or [f"y{i + 1}" for i in range(len(ys))]
    lambdas = [f"arc{i}" for i in range(len(cells))]
    return NPartyModel((x_labels, y_labels), ((1, -1), (1, -1)), lambdas, np.array(joint),
                       np.array(prior), {"construction": "hall-coplanar",
                                         "cells": [[lo, hi] for lo, hi in cells]})


def coplanar_distance(p1: float, p2: float, d: float) -> float:
    """Variational distance between densities of two coplanar pairs; see _pykernels."""
    from .._pykernels import hall_coplanar_distance

    return float(hall_coplanar_distance(p1, p2, d))


@dataclass
class HallSearchResult:
    M: float
    angles: tuple
    grid_M: float
    grid_angles: tuple


def hall_measurement_dependence(spec: HallModelSpec | None = None,
                                backend: str | None = None) -> HallSearchResult:
    """Largest variational distance between densities over coplanar setting pairs.

    Grid search over (pair angle 1, pair angle 2, offset) followed by a local
    Nelder-Mead refinement. This is a search, not a proof of the supremum.
    """
    spec = spec or HallModelSpec()
    kern = _backend.get_kernels(backend)
    n = int(round(180 / spec.search_step_deg)) + 1
    gval, g1, g2, gd = kern.hall_coplanar_grid(n)
    best, arg = gval, (g1, g2, gd)
    if spec.refine:
        res = optimize.minimize(lambda v: -coplanar_distance(*np.clip(v, 0, math.pi)),
                                np.array(arg), method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        if -res.fun > best:
            best, arg = float(-res.fun), tuple(float(v) for v in np.clip(res.x, 0, math.pi))
    return HallSearchResult(float(best), tuple(arg), float(gval), (g1, g2, gd))


@dataclass
class HallCapacities:
    C_meas_dep: float
    I_uniform: float
    I_CHSH: float
    M: float
    H_max: float
    H_min: float
    H_min_at: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def hall_capacities(spec: HallModelSpec | None = None) -> HallCapacities:
    h_min, t_min = hall_entropy_minimum()
    search = hall_measurement_dependence(spec)
    return HallCapacities(
        C_meas_dep=LOG2_4PI - h_min,
        I_uniform=LOG2_4PI - hall_mean_entropy(),
        I_CHSH=chsh_setting_entropy_gap(),
        M=search.M,
        H_max=LOG2_4PI,
        H_min=h_min,
        H_min_at=t_min,
    )


def chsh_setting_information() -> float:
    """Mutual information between uniformly chosen CHSH settings and the hidden arc."""
    q = math.pi / 4
    model = hall_discrete_model([0.0, 2 * q], [q + math.pi, -q + math.pi])
    return mutual_information(model.prior / model.prior.shape[0])
