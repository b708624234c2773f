"""Conversion of outcome-independent bipartite models into deterministic ones.

Each hidden value is augmented by two uniform variables alpha, beta on [0, 1).
The first party outputs the k-th outcome when alpha falls in the k-th interval
of the cumulative marginal p(a | x, y, lambda), and likewise for beta. Taking
the union of every cumulative breakpoint over all setting tuples cuts [0, 1)^2
into rectangular cells on which both outcomes are constant, which yields a
finite deterministic model with the same observed statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import UnsupportedModelError
from .measures import measurement_dependence, outcome_dependence, signaling
from .model import DEFAULT_TOL, NPartyModel, model_hash, require_valid

BREAK_TOL = 1e-12


@dataclass(frozen=True)
class AugmentedLambda:
    """A base hidden value together with half-open alpha and beta cells."""

    base: str
    alpha: tuple
    beta: tuple

    @property
    def weight(self):
        return (self.alpha[1] - self.alpha[0]) * (self.beta[1] - self.beta[0])

    @property
    def label(self) -> str:
        return f"{self.base}|a[{self.alpha[0]},{self.alpha[1]})|b[{self.beta[0]},{self.beta[1]})"

    def to_dict(self) -> dict:
        enc = (lambda v: str(v)) if isinstance(self.alpha[0], Fraction) else float
        return {"lambda": self.base, "alpha": [enc(v) for v in self.alpha],
                "beta": [enc(v) for v in self.beta]}


def is_outcome_independent(model: NPartyModel, tol: float = DEFAULT_TOL) -> bool:
    return outcome_dependence(model) <= tol


def _breakpoints(cum, exact):
    """Sorted breakpoints in [0, 1] from an array of cumulative sums."""
    if exact:
        pts = sorted(set(Fraction(v) for v in cum.ravel()) | {Fraction(0), Fraction(1)})
        return [p for p in pts if 0 <= p <= 1]
    pts = np.sort(np.concatenate([[0.0, 1.0], np.clip(cum.ravel().astype(float), 0, 1)]))
    out = [0.0]
    for p in pts[1:]:
        if p - out[-1] > BREAK_TOL:
            out.append(float(p))
    out[-1] = 1.0
    return out


def _outcome_at(cum_row, point) -> int:
    """Index k with cum[k-1] <= point < cum[k]; points past the end go to the last outcome."""
    for k, c in enumerate(cum_row):
        if point < c - (0 if isinstance(c, Fraction) else BREAK_TOL):
            return k
    return len(cum_row) - 1


def to_deterministic(model: NPartyModel, tol: float = DEFAULT_TOL) -> NPartyModel:
    """Deterministic model observationally identical to an outcome-independent one.

    The prior of cell (lambda, A, B) given s is p(lambda | s) |A| |B|, so
    setting dependence of the prior is unchanged. When the input signals the
    cell outcomes depend on both settings. Exact (Fraction) input gives exact
    output.
    """
    if model.parties != 2:
        raise UnsupportedModelError("conversion is implemented for two parties")
    require_valid(model, tol)
    if not is_outcome_independent(model, tol):
        raise UnsupportedModelError("input model is not outcome independent")
    exact = model.is_exact
    marg_a, marg_b = model.marginals()
    cum_a = np.cumsum(marg_a, axis=-1)
    cum_b = np.cumsum(marg_b, axis=-1)
    S, L = model.n_setting_tuples, model.n_lambdas
    na, nb = model.outcome_shape
    zero = Fraction(0) if exact else 0.0
    base_prior = np.array([[Fraction(v) for v in row] for row in model.prior], dtype=object) \
        if exact else model.prior
    cells, joint_rows, prior_cols = [], [], []
    for l in range(L):
        abreaks = _breakpoints(cum_a[:, l], exact)
        bbreaks = _breakpoints(cum_b[:, l], exact)
        for a_lo, a_hi in zip(abreaks[:-1], abreaks[1:]):
            for b_lo, b_hi in zip(bbreaks[:-1], bbreaks[1:]):
                cell = AugmentedLambda(model.lambdas[l], (a_lo, a_hi), (b_lo, b_hi))
                rows = np.full((S, na * nb), zero, dtype=object if exact else float)
                for s in range(S):
                    ka = _outcome_at(cum_a[s, l], a_lo)
                    kb = _outcome_at(cum_b[s, l], b_lo)
                    rows[s, ka * nb + kb] = 1 if not exact else Fraction(1)
                cells.append(cell)
                joint_rows.append(rows)
                prior_cols.append(base_prior[:, l] * cell.weight)
    joint = np.stack(joint_rows, axis=1)
    prior = np.stack(prior_cols, axis=1)
    meta = {"construction": "deterministic-cells", "source_hash": model_hash(model),
            "cells": [c.to_dict() for c in cells]}
    return NPartyModel(model.settings, model.outcomes, [c.label for c in cells], joint, prior, meta)


@dataclass
class CommutationReport:
    S_in: float
    S_out: float
    M_in: float
    M_out: float
    no_signaling_preserved: bool
    independence_preserved: bool

    @property
    def ok(self) -> bool:
        return self.no_signaling_preserved and self.independence_preserved

    def to_dict(self) -> dict:
        return {"S_in": self.S_in, "S_out": self.S_out, "M_in": self.M_in, "M_out": self.M_out,
                "no_signaling_preserved": self.no_signaling_preserved,
                "independence_preserved": self.independence_preserved, "ok": self.ok}


def check_commutation(source: NPartyModel, converted: NPartyModel,
                      tol: float = DEFAULT_TOL) -> CommutationReport:
    """Whether no-signaling and measurement independence hold for both models or neither."""
    s_in = float(signaling(source)[2])
    s_out = float(signaling(converted)[2])
    m_in = float(measurement_dependence(source))
    m_out = float(measurement_dependence(converted))
    return CommutationReport(s_in, s_out, m_in, m_out,
                             (s_in <= tol) == (s_out <= tol), (m_in <= tol) == (m_out <= tol))
