"""Finite tabulated models: one-way signaling, setting-determining, and the
measurement-dependent models for perfect-correlation and nonlocality-without-
inequality scenarios."""

from __future__ import annotations

import itertools
import math
import warnings
from fractions import Fraction

import numpy as np

from ..errors import ParameterRangeError
from ..info import CommModel
from ..model import CorrelationTable, NPartyModel, as_table

GAMMA_MAX = (5 * math.sqrt(5) - 11) / 2


def pawlowski_model(p):
    """Two-lambda model whose first party flips with probability p on (x', y').

    Outcomes equal lambda on the other three setting pairs. The second party
    signals to the first, modelled as a message that is 1 with probability p
    when the second party measures y'. Returns (NPartyModel, CommModel).
    """
    if not 0 <= p <= 1:
        raise ParameterRangeError(f"p must lie in [0, 1], got {p}")
    q = 1 - p

    def joint(s, lam):
        v = 1 if lam == "+1" else -1
        b = 0 if v == 1 else 1
        row = [0] * 4
        if s == ("x'", "y'"):
            row[(0 if v == 1 else 2) + b] = q
            row[(2 if v == 1 else 0) + b] = p
        else:
            row[(0 if v == 1 else 2) + b] = 1
        return row

    model = NPartyModel.tabulate(
        (("x", "x'"), ("y", "y'")), ((1, -1), (1, -1)), ("+1", "-1"), joint,
        lambda s, l: Fraction(1, 2) if isinstance(p, Fraction) else 0.5,
        {"construction": "pawlowski", "p": float(p)})
    law = np.array([[[1.0, 0.0]] * 2, [[float(q), float(p)]] * 2])
    return model, CommModel(model, (0, 1), law, sender=1)


def brans_model(target: CorrelationTable) -> NPartyModel:
    """Model whose hidden variable fixes both the setting tuple and the outcomes.

    Hidden values are (setting tuple, outcome tuple) pairs with nonzero target
    probability. Outcomes are deterministic and ignore the actual settings; the
    prior is the target probability on the matching setting tuple and zero
    elsewhere, so observed correlations equal the target exactly.
    """
    settings = target.settings
    stuples = list(itertools.product(*settings))
    otuples = list(itertools.product(*target.outcomes))
    table = target.table
    exact = table.dtype == object
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    support = [(si, oi) for si in range(len(stuples)) for oi in range(len(otuples))
               if table[si, oi] != 0]
    labels = ["|".join(map(str, stuples[si])) + ":" + ",".join(map(str, otuples[oi]))
              for si, oi in support]
    joint = np.full((len(stuples), len(support), len(otuples)), zero, dtype=object if exact else float)
    prior = np.full((len(stuples), len(support)), zero, dtype=joint.dtype)
    for k, (si, oi) in enumerate(support):
        joint[:, k, oi] = one
        prior[si, k] = table[si, oi]
    return NPartyModel(settings, target.outcomes, labels, joint, prior,
                       {"construction": "brans"})


MERMIN_SETTINGS = (("A", "A'"), ("B", "B'"), ("C", "C'"))
# context excluded by each hidden value, and which primed product carries a minus sign
_MERMIN_EXCLUDED = [("A'", "B'", "C'"), ("A'", "B", "C"), ("A", "B'", "C"), ("A", "B", "C'")]
_MERMIN_CONTEXTS = [("A", "B", "C'"), ("A", "B'", "C"), ("A'", "B", "C"), ("A'", "B'", "C'")]


def mermin_model(signs=None, exact: bool = True) -> NPartyModel:
    """Tripartite local deterministic model with perfect correlations
    <ABC'> = <AB'C> = <A'BC> = 1 and <A'B'C'> = -1.

    ``signs`` lists (a_j, b_j, c_j) for the four hidden values (12 values in
    total, default all +1). Hidden value j has A = a_j, B = b_j, C = c_j and
    primed outcomes A' = bc, B' = ac, C' = ab, except that value 2, 3, 4
    negates A', B', C' respectively. Each value gets prior 1/3 on the three
    perfect-correlation contexts it satisfies and 0 on the fourth; the other
    four setting tuples use a uniform prior.
    """
    if signs is None:
        signs = [1] * 12
    signs = [int(s) for s in np.ravel(signs)]
    if len(signs) != 12 or any(s not in (1, -1) for s in signs):
        raise ParameterRangeError("mermin_model needs 12 signs in {+1, -1}")
    outcomes = ((1, -1),) * 3
    lambdas = [f"l{j + 1}" for j in range(4)]
    values = {}
    for j in range(4):
        a, b, c = signs[3 * j: 3 * j + 3]
        flip = [1, 1, 1]
        if j > 0:
            flip[j - 1] = -1
        values[lambdas[j]] = {"A": a, "B": b, "C": c,
                              "A'": flip[0] * b * c, "B'": flip[1] * a * c, "C'": flip[2] * a * b}
    otuples = list(itertools.product(*outcomes))
    one = Fraction(1) if exact else 1.0

    def joint(s, lam):
        out = tuple(values[lam][label] for label in s)
        return [one if o == out else 0 * one for o in otuples]

    def prior(s, lam):
        if s in _MERMIN_CONTEXTS:
            return 0 * one if s == _MERMIN_EXCLUDED[lambdas.index(lam)] else one / 3
        return one / 4

    return NPartyModel.tabulate(MERMIN_SETTINGS, outcomes, lambdas, joint, prior,
                                {"construction": "mermin", "signs": signs}, exact=exact)


HARDY_SETTINGS = (("U", "D"), ("U", "D"))


def hardy_model(gamma, a: int = 0, b: int = 0, exact: bool | None = None) -> NPartyModel:
    """Five-lambda local deterministic model with the Hardy constraints.

    Under (U, U) never u1 = u2 = 1; d1 = 1 forces u2 = 1 and d2 = 1 forces
    u1 = 1; p(d1 = d2 = 1 | D, D) = gamma. Measurement dependence is gamma.
    Values of gamma above the quantum maximum are accepted with a warning.
    """
    if a not in (0, 1) or b not in (0, 1):
        raise ParameterRangeError("a and b are bits")
    if not 0 < gamma <= 1:
        raise ParameterRangeError(f"gamma must lie in (0, 1], got {gamma}")
    if gamma > GAMMA_MAX + 1e-15:
        warnings.warn(f"gamma = {float(gamma)} exceeds the quantum maximum {GAMMA_MAX:.6f}",
                      stacklevel=2)
    if exact is None:
        exact = isinstance(gamma, Fraction)
    g = Fraction(gamma) if exact else float(gamma)
    gp = (1 - g) / 2
    # (u1, u2, d1, d2) per hidden value
    values = [(a, 1 - a, 0, 0), (b, 1 - b, 1 - b, b), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 1, 1)]
    priors = {
        ("U", "U"): [gp, gp, g / 2, g / 2, 0 * g],
        ("U", "D"): [gp, gp, 0 * g, g / 2, g / 2],
        ("D", "U"): [gp, gp, g / 2, 0 * g, g / 2],
        ("D", "D"): [gp, gp, g / 3, g / 3, g / 3],
    }
    lambdas = [f"l{j + 1}" for j in range(5)]
    one = g ** 0

    def joint(s, lam):
        u1, u2, d1, d2 = values[lambdas.index(lam)]
        o1 = u1 if s[0] == "U" else d1
        o2 = u2 if s[1] == "U" else d2
        return [one if (i, j) == (o1, o2) else 0 * one for i in (0, 1) for j in (0, 1)]

    return NPartyModel.tabulate(HARDY_SETTINGS, ((0, 1), (0, 1)), lambdas, joint,
                                lambda s, l: priors[s][lambdas.index(l)],
                                {"construction": "hardy", "gamma": float(gamma), "a": a, "b": b},
                                exact=exact)


def hardy_capacity_bound(gamma) -> float:
    """Upper bound gamma * log2(3/2) on the setting/lambda capacity of the Hardy model."""
    return float(gamma) * math.log2(1.5)


CK_DIRECTIONS = 33


def conway_kochen_prior(exact: bool = True) -> np.ndarray:
    """Prior over 33 hidden values for each of the 33 x 33 direction pairs.

    Hidden value w has probability 0 when it coincides with either setting and
    is otherwise uniform: 1/32 when x = y and 1/31 when x != y.
    Rows are ordered x-major.
    """
    n = CK_DIRECTIONS
    one = Fraction(1) if exact else 1.0
    rows = []
    for x in range(n):
        for y in range(n):
            k = n - 1 if x == y else n - 2
            rows.append([0 * one if w in (x, y) else one / k for w in range(n)])
    return as_table(rows, exact)


def conway_kochen_model(exact: bool = True) -> NPartyModel:
    """The prior wrapped as a model with one trivial outcome per party.

    Only the prior is specified; outcomes are a placeholder so the
    measures that depend on the prior alone can be applied.
    """
    prior = conway_kochen_prior(exact)
    one = Fraction(1) if exact else 1.0
    joint = np.empty(prior.shape + (1,), dtype=prior.dtype)
    joint[...] = one
    labels = [f"d{i + 1}" for i in range(CK_DIRECTIONS)]
    return NPartyModel((labels, labels), ((0,), (0,)), [f"w{i + 1}" for i in range(CK_DIRECTIONS)],
                       joint, prior, {"construction": "conway-kochen", "outcomes": "placeholder"})


def conway_kochen_capacity_bound() -> float:
    """log2(33/31): every row has entropy at least log2 31."""
    return math.log2(CK_DIRECTIONS / (CK_DIRECTIONS - 2))
