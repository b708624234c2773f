import itertools
import json

import numpy as np
import pytest
from scipy.optimize import linprog

from bellkit import bounds, lp
from bellkit.errors import BranchCapError, ModelStructureError
from bellkit.measures import indeterminism, signaling
from bellkit.model import observed_correlations


def test_builtin_functionals_deterministic_bounds():
    assert lp.deterministic_bound(lp.builtin_functional("chsh"))[0] == 2
    assert lp.deterministic_bound(lp.builtin_functional("i3322"))[0] == 4
    assert lp.deterministic_bound(lp.builtin_functional("a4422"))[0] == 7
    np.testing.assert_array_equal(lp.mm22_correlators(4), lp.builtin_functional("a4422").correlator)


def test_functional_from_dict_errors(tmp_path):
    with pytest.raises(ModelStructureError):
        lp.functional_from_dict({"name": "x"})
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"correlator": [[1, 1], [1, -1]], "bound": 2}))
    assert lp.load_functional(path).bound == 2
    with pytest.raises(KeyError):
        lp.builtin_functional("nope")


def test_chsh_lp_matches_closed_form():
    chsh = lp.builtin_functional("chsh")
    for I, S in itertools.product([0, 0.1, 0.25, 0.4], [0, 0.3, 0.8, 1]):
        assert lp.relaxed_bound_lp(chsh, I, S).bound == pytest.approx(bounds.b_chsh(I, S, 0),
                                                                      abs=1e-9)


def test_witness_attains_bound_within_budget():
    chsh = lp.builtin_functional("chsh")
    for I, S in ((0.1, 0.0), (0.2, 0.3), (0.2, 0.6)):
        res = lp.relaxed_bound_lp(chsh, I, S)
        w = res.witness
        assert lp.evaluate_functional(chsh, observed_correlations(w)) == pytest.approx(res.bound)
        assert indeterminism(w) <= I + 1e-9
        assert signaling(w)[2] <= S + 1e-9


def test_3322_lp_modes():
    f = lp.builtin_functional("i3322")
    res = lp.relaxed_bound_lp(f, 0.25, 0)
    assert res.bound == pytest.approx(6)
    assert res.mode == "grouped"
    assert lp.relaxed_bound_lp(f, 0.1, 1).mode == "decoupled"


def test_branch_cap():
    f = lp.builtin_functional("i3322")
    with pytest.raises(BranchCapError) as info:
        lp.relaxed_bound_lp(f, 0.45, 0.2, lp.LPConfig(branch_cap=100))
    assert info.value.needed > 100
    res = lp.relaxed_bound_lp(f, 0.45, 0.2, lp.LPConfig(branch_cap=100, allow_partial=True))
    assert res.partial and res.branches_enumerated == 100


def test_jobs_do_not_change_result():
    f = lp.builtin_functional("i3322")
    a = lp.relaxed_bound_lp(f, 0.3, 0.2, lp.LPConfig(jobs=1, chunk=512))
    b = lp.relaxed_bound_lp(f, 0.3, 0.2, lp.LPConfig(jobs=3, chunk=512))
    assert a.bound == b.bound and a.best_branch == b.best_branch


def test_branch_lp_matches_scipy():
    """Each branch LP against scipy's HiGHS on the same constraint matrix."""
    from bellkit import _pykernels

    f = lp.builtin_functional("i3322")
    kc, km, kn, _ = f.pair_coefficients()
    rng = np.random.default_rng(5)
    for _ in range(30):
        I, S = rng.uniform(0, 0.5), rng.uniform(0, 1)
        branch = int(rng.integers(0, 2 ** 18))
        built = _pykernels.branch_lp(kc, km, kn, 3, 3, I, S, branch, 1e-9)
        if built is None:
            continue
        A, b, obj, offset = built
        ref = linprog(-obj, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
        value, _, status = _pykernels.lp_solve_branch(kc, km, kn, 3, 3, I, S, 1e-9, branch)
        assert status == 0
        assert value == pytest.approx(-ref.fun + offset, abs=1e-8)


def test_4422_matches_conjectured_formula():
    f = lp.builtin_functional("a4422")
    for I in (0.0, 0.1, 0.2):
        assert lp.relaxed_bound_lp(f, I, 0).bound == pytest.approx(7 + 12 * I, abs=1e-9)
