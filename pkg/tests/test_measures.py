import math
from fractions import Fraction

import numpy as np
import pytest

from bellkit.bounds import make_chsh_saturating_model
from bellkit.errors import ParameterRangeError, UnsupportedModelError
from bellkit.measures import (free_will_fraction, indeterminism, measure_report,
                              measurement_dependence, outcome_dependence, signaling,
                              signaling_matrix)
from bellkit.model import NPartyModel
from bellkit.zoo import (brans_model, conway_kochen_prior, hardy_model, hall_discrete_model,
                         mermin_model, pawlowski_model, standard_singlet_model, chsh_directions,
                         singlet_table)


def one_lambda(dists):
    joint = np.asarray(dists, dtype=float)[:, None, :]
    return NPartyModel((("x", "x'"), ("y", "y'")), ((1, -1), (1, -1)), ["l"], joint,
                       np.ones((4, 1)))


def test_deterministic_model_all_zero():
    rep = measure_report(one_lambda([[1, 0, 0, 0]] * 4))
    assert (rep.I, rep.O, rep.S, rep.M, rep.F) == (0, 0, 0, 0, 1)


def test_standard_singlet_is_maximally_indeterministic():
    xs, ys = chsh_directions()
    m = standard_singlet_model(xs, ys)
    assert indeterminism(m) == pytest.approx(0.5)
    assert signaling(m)[2] == pytest.approx(0.0, abs=1e-15)


def test_maximal_outcome_dependence():
    m = one_lambda([[0, 0.5, 0.5, 0]] * 4)
    assert outcome_dependence(m) == pytest.approx(1.0)
    assert outcome_dependence(one_lambda([[0.25] * 4] * 4)) == 0


def test_pawlowski_measures():
    p = math.sqrt(2) - 1
    m, _ = pawlowski_model(p)
    s12, s21, S = signaling(m)
    assert s12 == 0 and s21 == pytest.approx(p) and S == pytest.approx(p)
    assert indeterminism(m) == pytest.approx(p)
    assert outcome_dependence(m) == 0


def test_signaling_matrix_multiparty():
    mat = signaling_matrix(mermin_model())
    assert mat.shape == (3, 3)
    assert np.all(mat == 0)
    assert signaling(mermin_model())[:2] == (None, None)


def test_outcome_dependence_needs_two_parties():
    with pytest.raises(UnsupportedModelError):
        outcome_dependence(mermin_model())


def test_measurement_dependence_exact_values():
    assert measurement_dependence(mermin_model()) == Fraction(2, 3)
    assert measurement_dependence(conway_kochen_prior()) == Fraction(4, 31)
    assert measurement_dependence(hardy_model(Fraction(9, 100))) == Fraction(9, 100)


def test_measurement_dependence_of_setting_determining_model():
    target = singlet_table(*chsh_directions())
    m = brans_model(target)
    rep = measure_report(m)
    assert rep.M == 2 and rep.F == 0 and rep.I == 0 and rep.S == 0


def test_hall_discretization_measures():
    q = math.pi / 4
    m = hall_discrete_model([0, 2 * q], [q + math.pi, -q + math.pi])
    rep = measure_report(m)
    assert (rep.I, rep.O, rep.S) == (0, 0, 0)
    assert rep.M == pytest.approx(2 * (math.sqrt(2) - 1) / 3, abs=1e-12)


def test_saturating_measure_budgets():
    m = make_chsh_saturating_model("M-only", M=0.4)
    assert measurement_dependence(m) == pytest.approx(0.4)


def test_free_will_fraction():
    assert free_will_fraction(0) == 1
    assert free_will_fraction(Fraction(2, 3)) == Fraction(2, 3)
    with pytest.raises(ParameterRangeError):
        free_will_fraction(2.5)


def test_zero_prior_flags():
    joint = np.array([[[1, 0, 0, 0], [0.5, 0, 0, 0.5]]] * 4, dtype=float)
    prior = np.array([[1.0, 0.0]] * 4)
    m = NPartyModel((("x", "x'"), ("y", "y'")), ((1, -1), (1, -1)), ["a", "b"], joint, prior)
    rep = measure_report(m)
    assert rep.I == 0.5
    assert "I" in rep.flags and "O" in rep.flags
    assert rep.to_dict()["zero_prior_flags"] == ["I", "O"]


def test_report_json_sorted():
    m, _ = pawlowski_model(0.2)
    text = measure_report(m).to_json()
    assert text.index('"F"') < text.index('"I"') < text.index('"S"')
