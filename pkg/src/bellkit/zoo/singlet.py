"""Singlet-state target correlations and the trivial single-lambda model."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterRangeError
from ..model import CorrelationTable, NPartyModel
from .sphere import as_unit


def singlet_probability(x, y, a: int, b: int) -> float:
    """p(a, b | x, y) = (1 - ab x.y)/4 for outcomes a, b in {+1, -1}."""
    if a not in (1, -1) or b not in (1, -1):
        raise ParameterRangeError("singlet outcomes are +1 or -1")
    return (1 - a * b * float(np.dot(as_unit(x), as_unit(y)))) / 4


def singlet_distribution(x, y) -> np.ndarray:
    """Distribution ordered (++, +-, -+, --)."""
    return np.array([singlet_probability(x, y, a, b) for a in (1, -1) for b in (1, -1)])


def _labels(prefix, n):
    return [f"{prefix}{i + 1}" for i in range(n)]


def singlet_table(xs, ys, x_labels=None, y_labels=None) -> CorrelationTable:
    """Singlet correlations for every pair from the two direction lists."""
    x_labels = x_labels or _labels("x", len(xs))
    y_labels = y_labels or _labels("y", len(ys))
    table = np.array([singlet_distribution(x, y) for x in xs for y in ys])
    return CorrelationTable((tuple(x_labels), tuple(y_labels)), ((1, -1), (1, -1)), table)


def standard_singlet_model(xs, ys, x_labels=None, y_labels=None) -> NPartyModel:
    """Single-lambda model whose underlying distributions are the singlet ones.

    Every underlying marginal is 1/2, so indeterminism is 1/2 and each party
    generates one random bit per run.
    """
    table = singlet_table(xs, ys, x_labels, y_labels)
    joint = table.table[:, None, :]
    return NPartyModel(table.settings, table.outcomes, ("hs",), joint,
                       np.ones((joint.shape[0], 1)), {"construction": "standard-singlet"})


def chsh_directions() -> tuple:
    """Coplanar x, x', y, y' consecutively 45 degrees apart, maximizing CHSH violation.

    With singlet correlations <XY> = -x.y, so y and y' are reflected to make
    the CHSH combination <XY> + <XY'> + <X'Y> - <X'Y'> equal 2 sqrt 2.
    """
    from .sphere import planar

    q = np.pi / 4
    xs = [planar(0.0), planar(2 * q)]
    ys = [planar(q + np.pi), planar(-q + np.pi)]
    return xs, ys
