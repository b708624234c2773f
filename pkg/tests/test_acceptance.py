"""End-to-end acceptance checks 1-10.

Each test records one entry per check; conftest prints a PASS/FAIL line per
criterion in the terminal summary. Running this file directly prints the
same lines.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellkit import bounds, info, lp, measures, transforms, zoo
from bellkit.model import NPartyModel, observed_correlations

try:
    from conftest import ACCEPTANCE_RESULTS
except ImportError:  # run as a script
    ACCEPTANCE_RESULTS = {}

SQRT2 = math.sqrt(2)
PROPERTY_CASES = 10_000


def record(criterion, passed, detail):
    ACCEPTANCE_RESULTS.setdefault(criterion, []).append((bool(passed), detail))
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}")
    return bool(passed)


def near(criterion, name, value, target, tol):
    return record(criterion, abs(value - target) <= tol,
                  f"{name}={float(value):.10g} target {float(target):.10g} tol {tol:g}")


def exact(criterion, name, value, target):
    return record(criterion, value == target, f"{name}={value} expected {target}")


_start = {}


@pytest.fixture(autouse=True)
def _mark_records():
    """Remember how many records exist so each test only judges its own."""
    _start.clear()
    _start.update({k: len(v) for k, v in ACCEPTANCE_RESULTS.items()})
    yield


def finish(criterion):
    own = ACCEPTANCE_RESULTS.get(criterion, [])[_start.get(criterion, 0):]
    failed = [d for p, d in own if not p]
    assert not failed, failed


# ------------------------------------------------------------------- 1

def test_criterion_01_closed_form_bounds():
    exact(1, "b_chsh(0,0,0)", bounds.b_chsh(0, 0, 0), 2)
    near(1, "b_chsh(0.207,0,0)", bounds.b_chsh(0.207, 0, 0), 2.828, 1e-3)
    near(1, "b_chsh(0,0,0.276)", bounds.b_chsh(0, 0, 0.276), 2.828, 1e-3)
    exact(1, "b_3322(0,0)", bounds.b_3322(0, 0), 4)
    ok = all(bounds.b_3322(I, 0) == 4 + 8 * I for I in np.linspace(0, 0.5, 51))
    record(1, ok, "b_3322(I,0) == 4+8I on 51 points in [0, 1/2]")
    near(1, "b_outcome(2-sqrt2)", bounds.b_outcome(2 - SQRT2), 2 * SQRT2, 1e-9)
    finish(1)


# ------------------------------------------------------------------- 2

def test_criterion_02_lp_matches_closed_form():
    chsh = lp.builtin_functional("chsh")
    t0 = time.perf_counter()
    worst = 0.0
    for I, S in itertools.product(np.linspace(0, 0.5, 11), np.linspace(0, 1, 11)):
        res = lp.relaxed_bound_lp(chsh, I, S)
        worst = max(worst, abs(res.bound - bounds.b_chsh(I, S, 0)))
    elapsed = time.perf_counter() - t0
    record(2, worst <= 1e-7, f"CHSH 11x11 grid max |LP - b_chsh| = {worst:.2e}")
    record(2, elapsed < 10, f"CHSH grid runtime {elapsed:.2f}s < 10s")
    # the jump: just below and at S = 1 - 2I
    below = lp.relaxed_bound_lp(chsh, 0.2, 0.6 - 1e-6).bound
    at = lp.relaxed_bound_lp(chsh, 0.2, 0.6).bound
    record(2, abs(below - 2.8) <= 1e-7 and abs(at - 4) <= 1e-7,
           f"jump at S=1-2I: {below:.9f} -> {at:.9f}")

    i3322 = lp.builtin_functional("i3322")
    worst, slowest = 0.0, 0.0
    for I in np.linspace(0, 0.5, 11):
        for S in (0.0, 1.0):
            t0 = time.perf_counter()
            res = lp.relaxed_bound_lp(i3322, I, S)
            slowest = max(slowest, time.perf_counter() - t0)
            target = 4 + 8 * I if S == 0 else bounds.b_3322(I, S)
            worst = max(worst, abs(res.bound - target))
    record(2, worst <= 1e-7, f"3322 on 11 I points, S in {{0,1}}: max error {worst:.2e}")
    record(2, slowest <= 60, f"slowest 3322 point {slowest:.2f}s")
    finish(2)


# ------------------------------------------------------------------- 3

def test_criterion_03_deterministic_enumeration():
    for name, m in (("chsh", 2), ("i3322", 3), ("a4422", 4)):
        value, _ = lp.deterministic_bound(lp.builtin_functional(name))
        record(3, value == m * (m - 1) / 2 + 1 == lp.builtin_functional(name).bound,
               f"{name}: enumeration {value}, m(m-1)/2+1 = {m * (m - 1) / 2 + 1}")
    finish(3)


# ------------------------------------------------------------------- 4

def _within_budget(model, I, S, M, O=None, tol=1e-9):
    rep = measures.measure_report(model)
    ok = rep.I <= I + tol and rep.S <= S + tol and rep.M <= M + tol
    if O is not None:
        ok = ok and rep.O <= O + tol
    return ok, rep


def test_criterion_04_saturating_constructors():
    cases = [("I-only", I, 0.0, 0.0) for I in (0.0, 0.05, 0.1, 0.207, 0.3, 0.5)]
    cases += [("M-only", 0.0, 0.0, M) for M in (0.0, 0.1, 0.276, 0.5, 2 / 3, 1.0, 2.0)]
    cases += [("gap", I, S, 0.0) for I, S in ((0.2, 0.6), (0.1, 0.9), (0.0, 1.0), (0.4, 0.3))]
    for case, I, S, M in cases:
        model = bounds.make_chsh_saturating_model(case, I, S, M)
        value = bounds.chsh_value(model)
        ok_b, rep = _within_budget(model, I, S, M)
        target = bounds.b_chsh(I, S, M)
        record(4, abs(value - target) <= 1e-9 and ok_b,
               f"{case} I={I:g} S={S:g} M={M:g}: CHSH {value:.12g} vs {target:.12g}, "
               f"measured I={float(rep.I):.3g} S={float(rep.S):.3g} M={float(rep.M):.3g}")
    for O in (0.0, 0.25, 2 - SQRT2, 0.9):
        model = bounds.make_outcome_saturating_model(O)
        value = bounds.chsh_value(model)
        ok_b, rep = _within_budget(model, 0.5, 0.0, 0.0, O)
        record(4, abs(value - bounds.b_outcome(O)) <= 1e-9 and ok_b,
               f"outcome O={O:.6g}: CHSH {value:.12g}, measured O={float(rep.O):.6g}")
    model = bounds.make_outcome_saturating_model(2 - SQRT2)
    near(4, "c_outcome at O=2-sqrt2", info.c_outcome(model), 0.480, 1e-3)
    finish(4)


# ------------------------------------------------------------------- 5

def test_criterion_05_hall_model():
    rng = zoo.sphere.philox(2024)
    devs = []
    for x in zoo.uniform_directions(rng, 20):
        e = zoo.sphere.orthonormal_frame(x)[0]
        devs.append(zoo.hall_verify_singlet(x, -0.5 * x + math.sqrt(0.75) * e))
    record(5, max(devs) < 1e-4, f"singlet deviation over 20 pairs with x.y=-1/2: {max(devs):.2e}")
    pairs = zoo.uniform_directions(rng, 40).reshape(20, 2, 3)
    dev = max(zoo.hall_verify_singlet(x, y) for x, y in pairs)
    record(5, dev < 1e-4, f"singlet deviation over 20 random pairs: {dev:.2e}")
    caps = zoo.hall_capacities()
    near(5, "H_max", caps.H_max, 3.65145, 1e-4)
    near(5, "H_min", caps.H_min, 3.58521, 1e-4)
    near(5, "|x.y| at H_min", caps.H_min_at, 0.9148, 1e-3)
    near(5, "C_meas_dep", caps.C_meas_dep, 0.0663, 5e-4)
    near(5, "I_uniform", caps.I_uniform, 0.0280, 5e-4)
    near(5, "I_CHSH", caps.I_CHSH, 0.0463, 1e-4)
    near(5, "M", caps.M, 0.276, 1e-3)
    finish(5)


# ------------------------------------------------------------------- 6

def test_criterion_06_toner_bacon():
    rng = zoo.sphere.philox(11, 2 ** 40)
    pairs = zoo.uniform_directions(rng, 20).reshape(10, 2, 3)
    worst, entropies = 0.0, []
    for k, (x, y) in enumerate(pairs):
        run = zoo.toner_bacon_run(x, y, zoo.TonerBaconSpec(seed=1000 + k, samples=10 ** 6))
        worst = max(worst, run.max_abs_z)
        entropies.append(run.mean_message_entropy)
    record(6, worst < 4, f"max |z| over 10 pairs x 4 outcomes at N=1e6: {worst:.3f}")
    near(6, "<H_lambda(M)> (Monte Carlo)", float(np.mean(entropies)), 0.85, 0.01)
    near(6, "<H_lambda(M)> (quadrature)", zoo.mean_message_entropy(), 0.85, 0.01)
    finish(6)


# ------------------------------------------------------------------- 7

def test_criterion_07_pawlowski():
    p = SQRT2 - 1
    model, comm = zoo.pawlowski_model(p)
    rep = measures.measure_report(model)
    near(7, "I", rep.I, p, 1e-9)
    near(7, "S", rep.S, p, 1e-9)
    exact(7, "O", float(rep.O), 0.0)
    p_ = SQRT2 - 1
    oracle = -(p_ * math.log2(p_) + (1 - p_) * math.log2(1 - p_))
    near(7, "C_random vs h(sqrt2-1)", info.c_random(model), oracle, 1e-4)
    record(7, round(info.c_random(model), 3) == 0.979, "C_random rounds to 0.979")
    sig = info.c_sig(model)
    near(7, "C_sig", sig.value, 0.256, 1e-3)
    near(7, "w'", sig.input_law[1], 0.393, 1e-2)
    comm_rep = info.c_commun(comm)
    near(7, "C_commun - C_sig", comm_rep.capacity - sig.value, 0.0, 1e-6)
    near(7, "H(M:Y) at w=1/2", comm_rep.per_lambda.max(), 0.247, 1e-3)
    near(7, "CHSH", bounds.chsh_value(model), 2 * SQRT2, 1e-12)
    finish(7)


@pytest.mark.xfail(strict=True, reason="h(sqrt2-1) = 0.978660 lies 3.4e-4 from the rounded "
                   "target 0.979, outside the stated 1e-4 tolerance")
def test_criterion_07_c_random_literal_target():
    model, _ = zoo.pawlowski_model(SQRT2 - 1)
    near(7, "C_random vs literal 0.979 (unattainable, see ledger)", info.c_random(model), 0.979, 1e-4)
    finish(7)


# ------------------------------------------------------------------- 8

def test_criterion_08_perfect_correlation_models():
    mm = zoo.mermin_model()
    table = observed_correlations(mm)
    from bellkit.model import correlator

    corr = [correlator(table, s) for s in
            (("A", "B", "C'"), ("A", "B'", "C"), ("A'", "B", "C"), ("A'", "B'", "C'"))]
    exact(8, "Mermin correlators", corr, [1, 1, 1, -1])
    exact(8, "Mermin M", measures.measurement_dependence(mm), Fraction(2, 3))
    near(8, "Mermin C_meas_dep", info.c_meas_dep(mm).value, math.log2(4 / 3), 1e-6)

    ck = zoo.conway_kochen_prior()
    exact(8, "Conway-Kochen M", measures.measurement_dependence(ck), Fraction(4, 31))
    cap = info.c_meas_dep(ck.astype(float))
    bound = zoo.conway_kochen_capacity_bound()
    record(8, cap.value <= bound, f"Conway-Kochen capacity {cap.value:.9f} <= log2(33/31) = {bound:.9f}")

    gamma = Fraction(9, 100)
    hm = zoo.hardy_model(gamma)
    t = observed_correlations(hm)
    checks = {
        "p(u1=1,u2=1|U,U)": (t.distribution(("U", "U"))[3], 0),
        "p(d1=1,u2=0|D,U)": (t.distribution(("D", "U"))[2], 0),
        "p(u1=0,d2=1|U,D)": (t.distribution(("U", "D"))[1], 0),
        "p(d1=1,d2=1|D,D)": (t.distribution(("D", "D"))[3], gamma),
    }
    for name, (value, target) in checks.items():
        exact(8, f"Hardy {name}", value, target)
    exact(8, "Hardy M", measures.measurement_dependence(hm), gamma)
    hb = zoo.hardy_capacity_bound(gamma)
    hc = info.c_meas_dep(hm).value
    record(8, hc <= hb + 1e-12, f"Hardy capacity {hc:.6f} <= gamma log2(3/2) = {hb:.6f}")
    near(8, "Hardy bound at gamma_max", zoo.hardy_capacity_bound(zoo.GAMMA_MAX), 0.053, 1e-3)
    finish(8)


# ------------------------------------------------------------------- 9

def _h(p):
    return float(info.binary_entropy(p))


def _dist_from(m, n, t):
    lo, hi = max(0.0, m + n - 1), min(m, n)
    c = lo + t * (hi - lo)
    d = np.array([c, m - c, n - c, 1 + c - m - n])
    return np.clip(d, 0, None) / np.clip(d, 0, None).sum()


unit = st.floats(0, 1, allow_nan=False)
edge = st.builds(lambda bit, e: 1 - e if bit else e, st.booleans(), st.floats(0, 0.5))
marg = st.one_of(unit, edge)


@st.composite
def binary_models(draw):
    nx, ny, L = draw(st.integers(1, 3)), draw(st.integers(1, 3)), draw(st.integers(1, 3))
    joint = np.array([[_dist_from(draw(marg), draw(marg), draw(unit)) for _ in range(L)]
                      for _ in range(nx * ny)])
    prior = np.full((nx * ny, L), 1.0 / L)
    return NPartyModel(([f"x{i}" for i in range(nx)], [f"y{j}" for j in range(ny)]),
                       ((1, -1), (1, -1)), [f"l{k}" for k in range(L)], joint, prior)


@st.composite
def ternary_models(draw):
    nx, ny, L = draw(st.integers(1, 2)), draw(st.integers(1, 2)), draw(st.integers(1, 2))
    raw = np.array(draw(st.lists(st.floats(0, 1), min_size=nx * ny * L * 9, max_size=nx * ny * L * 9)))
    raw = raw.reshape(nx * ny, L, 9) + 1e-3
    joint = raw / raw.sum(axis=-1, keepdims=True)
    return NPartyModel(([f"x{i}" for i in range(nx)], [f"y{j}" for j in range(ny)]),
                       ((0, 1, 2), (0, 1, 2)), [f"l{k}" for k in range(L)], joint,
                       np.full((nx * ny, L), 1.0 / L))


class Counter:
    def __init__(self):
        self.n = 0


def _run_property(name, prop):
    counter = Counter()
    failures = []

    def wrapped(case):
        counter.n += 1
        prop(case)

    try:
        wrapped_test = prop.hypothesis_wrapper(wrapped)
        wrapped_test()
    except AssertionError as exc:
        failures.append(str(exc)[:200])
    record(9, not failures and counter.n >= PROPERTY_CASES,
           f"{name}: {counter.n} cases" + (f", counterexample: {failures[0]}" if failures else ""))
    finish(9)


def property_test(strategy):
    """Attach a hypothesis wrapper running PROPERTY_CASES examples of ``strategy``."""
    def deco(fn):
        fn.hypothesis_wrapper = lambda body: settings(max_examples=PROPERTY_CASES, database=None)(
            given(strategy)(body))
        return fn
    return deco


@property_test(binary_models())
def prop_outcome_vs_indeterminism(model):
    O = float(measures.outcome_dependence(model))
    I = float(measures.indeterminism(model))
    assert O <= 4 * I * (1 - I) + 1e-12, (O, I)


@property_test(binary_models())
def prop_indeterminism_vs_signaling(model):
    I = float(measures.indeterminism(model))
    S = float(measures.signaling(model)[2])
    assert I >= min(S, (1 - S) / 2) - 1e-12, (I, S)


@property_test(st.one_of(binary_models(), ternary_models()))
def prop_random_capacity(model):
    I = float(measures.indeterminism(model))
    C = info.c_random(model)
    assert C >= _h(I) - 1e-12, (C, I)
    if model.outcome_shape == (2, 2):
        assert abs(C - _h(I)) <= 1e-9, (C, I)


@property_test(binary_models())
def prop_outcome_capacity(model):
    O = float(measures.outcome_dependence(model))
    C = info.c_outcome(model)
    lower = max(0.5 * O ** 2 * math.log2(math.e), 1 - _h((1 + O) / 2))
    assert C >= lower - 1e-12, (C, O)


@property_test(binary_models())
def prop_signaling_capacity(model):
    S = float(measures.signaling(model)[2])
    C = info.c_sig(model).value
    assert C >= 1 - _h((1 + S) / 2) - 1e-9, (C, S)


@st.composite
def prior_quadruples(draw):
    L = draw(st.integers(1, 6))
    rows = []
    for _ in range(4):
        raw = np.array(draw(st.lists(st.one_of(st.just(0.0), st.floats(0, 1)), min_size=L,
                                     max_size=L)))
        if raw.sum() <= 1e-9:
            raw[draw(st.integers(0, L - 1))] = 1.0
        rows.append(raw / raw.sum())
    return np.array(rows)


@property_test(prior_quadruples())
def prop_overlap(priors):
    M = float(measures.measurement_dependence(priors))
    assert bounds.min_overlap(priors) >= 1 - 1.5 * M - 1e-12, (priors, M)


@property_test(st.tuples(unit, unit, unit))
def prop_correlator_range(mnt):
    m, n, t = mnt
    lo, hi = bounds.correlator_bounds(m, n)
    lo_c, hi_c = max(0.0, m + n - 1), min(m, n)
    c = lo_c + t * (hi_c - lo_c)
    d = np.array([c, m - c, n - c, 1 + c - m - n])
    value = float(d @ np.array([1, -1, -1, 1]))
    assert lo - 1e-12 <= value <= hi + 1e-12, (m, n, t, value)
    assert abs(bounds.correlator_from_cmn(lo_c, m, n) - lo) <= 1e-12
    assert abs(bounds.correlator_from_cmn(hi_c, m, n) - hi) <= 1e-12


PROPERTIES = {
    "O <= 4I(1-I)": prop_outcome_vs_indeterminism,
    "I >= min(S, (1-S)/2)": prop_indeterminism_vs_signaling,
    "C_random >= h(I), equality for binary": prop_random_capacity,
    "C_outcome >= max(O^2 log2(e)/2, 1-h((1+O)/2))": prop_outcome_capacity,
    "C_sig >= 1-h((1+S)/2)": prop_signaling_capacity,
    "min_overlap >= 1-3M/2": prop_overlap,
    "correlator range attained at c extremes": prop_correlator_range,
}


@pytest.mark.parametrize("name", list(PROPERTIES))
def test_criterion_09_property_suites(name):
    _run_property(name, PROPERTIES[name])


# ------------------------------------------------------------------- 10

def _random_oi_model(rng):
    """Random outcome-independent 2x2-setting model with rational entries."""
    L = int(rng.integers(1, 4))
    den = int(rng.integers(2, 9))
    nosig = bool(rng.integers(0, 2))
    indep = bool(rng.integers(0, 2))
    frac = lambda: Fraction(int(rng.integers(0, den + 1)), den)  # noqa: E731
    ma = [[frac() for _ in range(L)] for _ in range(2)]  # p(a=+1 | x, l)
    mb = [[frac() for _ in range(L)] for _ in range(2)]
    joint, prior = [], []
    base = [Fraction(int(v) + 1) for v in rng.integers(0, 4, L)]
    for x in range(2):
        for y in range(2):
            row = []
            for l in range(L):
                m = ma[x][l] if nosig else frac()
                n = mb[y][l] if nosig else frac()
                row.append([m * n, m * (1 - n), (1 - m) * n, (1 - m) * (1 - n)])
            joint.append(row)
            w = base if indep else [Fraction(int(v) + 1) for v in rng.integers(0, 4, L)]
            prior.append([v / sum(w) for v in w])
    return NPartyModel((("x", "x'"), ("y", "y'")), ((1, -1), (1, -1)),
                       [f"l{k}" for k in range(L)], joint, prior)


def test_criterion_10_deterministic_transform():
    rng = np.random.Generator(np.random.Philox(key=10))
    n_models, bad = 1000, []
    for i in range(n_models):
        model = _random_oi_model(rng)
        out = transforms.to_deterministic(model)
        same = np.array_equal(observed_correlations(out).table, observed_correlations(model).table)
        I = measures.indeterminism(out)
        O = measures.outcome_dependence(out)
        comm = transforms.check_commutation(model, out)
        if not (same and I == 0 and O == 0 and comm.ok):
            bad.append(i)
    record(10, not bad, f"{n_models} random outcome-independent models, failures: {bad[:5]}")
    finish(10)


def _run_all():
    """Script entry point: run every criterion and print one summary line each."""
    runs = [fn for name, fn in globals().items()
            if name.startswith("test_criterion_") and name != "test_criterion_09_property_suites"]
    runs += [lambda name=name: _run_property(name, PROPERTIES[name]) for name in PROPERTIES]
    for fn in runs:
        _start.clear()
        _start.update({k: len(v) for k, v in ACCEPTANCE_RESULTS.items()})
        try:
            fn()
        except AssertionError:
            pass
    print()
    for crit in sorted(ACCEPTANCE_RESULTS):
        rows = ACCEPTANCE_RESULTS[crit]
        failed = [d for p, d in rows if not p]
        print(f"criterion {crit:2d}: {'FAIL' if failed else 'PASS'} ({len(rows)} checks)")


if __name__ == "__main__":
    _run_all()
