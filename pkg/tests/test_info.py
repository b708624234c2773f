import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from bellkit.bounds import c_outcome_closed_form, make_outcome_saturating_model
from bellkit.errors import ParameterRangeError
from bellkit.info import (CommModel, binary_entropy, c_commun, c_meas_dep, c_outcome, c_random,
                          c_sig, capacity, capacity_report, capacity_two_inputs, entropy,
                          mutual_information)
from bellkit.zoo import (chsh_directions, mermin_model, pawlowski_model, standard_singlet_model,
                         toner_bacon_restriction)


def h(p):
    return 0.0 if p in (0, 1) else -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def test_entropy_helpers():
    assert binary_entropy(0.5) == 1
    assert binary_entropy(0.0) == 0
    assert entropy([0.25] * 4) == pytest.approx(2)
    assert mutual_information(np.array([[0.5, 0], [0, 0.5]])) == pytest.approx(1)
    assert mutual_information(np.full((2, 2), 0.25)) == pytest.approx(0)


def test_capacity_of_symmetric_channels():
    eps = 0.11
    bsc = np.array([[1 - eps, eps], [eps, 1 - eps]])
    assert capacity(bsc).value == pytest.approx(1 - h(eps), abs=1e-6)
    assert capacity_two_inputs(bsc).value == pytest.approx(1 - h(eps), abs=1e-9)
    # binary erasure channel
    bec = np.array([[0.7, 0.3, 0.0], [0.0, 0.3, 0.7]])
    assert capacity(bec).value == pytest.approx(0.7, abs=1e-6)


def z_channel_oracle(p):
    """Direct scalar maximization of I(X;Y) for the Z channel (1,0),(1-p,p)."""
    def neg(w):
        py1 = w * p
        return -(h(py1) - w * h(p))
    res = optimize.minimize_scalar(neg, bounds=(0, 1), method="bounded", options={"xatol": 1e-12})
    return -res.fun, res.x


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 0.99))
def test_blahut_arimoto_matches_scalar_oracle(p):
    W = np.array([[1.0, 0.0], [1 - p, p]])
    value, _ = z_channel_oracle(p)
    res = capacity(W)
    assert res.converged
    assert res.value <= value + 1e-9
    assert res.value >= value - 1e-6
    assert res.upper >= value - 1e-9


def test_capacity_gap_bounds_error():
    W = np.random.default_rng(3).dirichlet(np.ones(5), size=4)
    res = capacity(W, tol=1e-9)
    assert 0 <= res.upper - res.value <= 1e-9


def test_pawlowski_capacities():
    p = math.sqrt(2) - 1
    m, comm = pawlowski_model(p)
    assert c_random(m) == pytest.approx(h(p), abs=1e-12)
    sig = c_sig(m)
    oracle, w = z_channel_oracle(p)
    assert sig.value == pytest.approx(oracle, abs=1e-9)
    assert sig.input_law[1] == pytest.approx(w, abs=1e-5)
    assert c_sig(m, method="iterate").value == pytest.approx(oracle, abs=1e-6)
    rep = c_commun(comm)
    assert rep.capacity == pytest.approx(sig.value, abs=1e-9)
    assert rep.per_lambda.max() == pytest.approx(h(p / 2) - h(p) / 2, abs=1e-12)


def test_sender_prior_validation():
    _, comm = pawlowski_model(0.3)
    with pytest.raises(ParameterRangeError):
        c_commun(comm, sender_prior=[0.5, 0.6])


def test_outcome_dependent_message_bonus():
    m = standard_singlet_model(*chsh_directions())
    # the sender's outcome is a fair coin at fixed lambda; copying it carries one bit
    def copy_law(n_lambda):
        law = np.zeros((2, 2, n_lambda, 2))
        law[:, 0, :, 0] = 1
        law[:, 1, :, 1] = 1
        return law

    comm = CommModel(m, (0, 1), copy_law(1), sender=1)
    rep = c_commun(comm)
    assert rep.capacity == pytest.approx(1.0, abs=1e-6)
    assert rep.per_lambda[0] == pytest.approx(1.0, abs=1e-12)
    # a deterministic sender outcome carries nothing at fixed lambda
    det, _ = pawlowski_model(0.0)
    assert c_commun(CommModel(det, (0, 1), copy_law(2), sender=1)).capacity == pytest.approx(0, abs=1e-9)


def test_toner_bacon_restriction_capacity():
    m, comm = toner_bacon_restriction()
    assert c_sig(m).value == pytest.approx(1.0)
    assert c_commun(comm).capacity == pytest.approx(1.0)


def test_outcome_capacity_closed_form():
    O = 2 - math.sqrt(2)
    m = make_outcome_saturating_model(O)
    assert c_outcome(m) == pytest.approx(c_outcome_closed_form(O), abs=1e-12)
    assert c_outcome(m) == pytest.approx(0.480387, abs=1e-6)


def test_mermin_capacity_and_report():
    mm = mermin_model()
    assert c_meas_dep(mm).value == pytest.approx(math.log2(4 / 3), abs=1e-6)
    rep = capacity_report(mm)
    assert rep.C_sig is None and rep.C_outcome is None
    assert rep.to_dict()["C_meas_dep"] == pytest.approx(math.log2(4 / 3), abs=1e-6)


def test_binary_output_reduction_matches_iteration():
    rng = np.random.default_rng(11)
    for _ in range(50):
        W = rng.dirichlet([0.5, 0.5], size=int(rng.integers(3, 6)))
        ends = [int(np.argmax(W[:, 0])), int(np.argmin(W[:, 0]))]
        two = capacity_two_inputs(W[ends]).value
        full = capacity(W, tol=1e-10).value
        assert two == pytest.approx(full, abs=1e-8)
