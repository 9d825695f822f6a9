"""Inequality checkers: discrete exact margins, reports, continuous margins."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liyau.markov import MarkovChain, complete_graph
from liyau.ops import JumpKernel
from liyau.verify import (VerificationReport, differential_harnack_margin,
                          fractional_liyau_margin,
                          key_inequality_margin_discrete,
                          liyau_margin_on_solution, random_key_instance,
                          random_positive_field,
                          reduction_theorem_check_discrete, spike_field,
                          sweep_key_inequality, sweep_reduction)


# ------------------------------------------------------------- reports

def test_report_verdicts():
    r = VerificationReport(name="demo")
    assert r.min_margin is None
    r.add_sample(1.0)
    r.add_sample(0.5, error=0.1)
    assert r.verdict == "pass"
    r.add_sample(-0.05, error=0.1)
    assert r.verdict == "pass-within-error"
    r.add_sample(-0.5, error=0.1)
    assert r.verdict == "fail"
    assert r.min_margin == -0.5


def test_report_json_shape():
    r = VerificationReport(name="demo", params={"n": 3}, seed=11)
    r.add_sample(0.25, 0.01)
    d = r.to_json_dict()
    assert d["schema"] == "liyau-report v1"
    assert d["check"] == "demo"
    assert d["n_samples"] == 1
    assert d["min_margin"] == 0.25
    assert d["verdict"] == "pass"
    assert d["seed"] == 11


# --------------------------------------------- key inequality (discrete)

def _basic_instance():
    rng = np.random.default_rng(42)
    H = np.exp(rng.normal(size=(3, 4)))
    f = np.exp(rng.normal(size=4))
    nu = rng.uniform(0.5, 1.5, size=4)
    kernel = JumpKernel.discrete([[0.0, 1.0, 0.5],
                                  [1.0, 0.0, 2.0],
                                  [0.5, 2.0, 0.0]])
    return H, f, kernel, nu


def test_key_inequality_basic_instance():
    H, f, kernel, nu = _basic_instance()
    for x in range(3):
        assert key_inequality_margin_discrete(H, f, kernel, nu, x) >= -1e-12


def test_key_inequality_equality_for_rank_one():
    # H(z, y) = a(z) b(y) makes the average exact: margin is rounding only
    a = np.array([0.7, 2.0, 5.0])
    b = np.array([1.0, 0.3, 4.0, 0.9])
    H = np.outer(a, b)
    f = np.array([2.0, 1.0, 0.5, 3.0])
    nu = np.array([1.0, 1.0, 0.5, 2.0])
    kernel = JumpKernel.discrete([[0.0, 1.0, 0.5],
                                  [1.0, 0.0, 2.0],
                                  [0.5, 2.0, 0.0]])
    for x in range(3):
        m = key_inequality_margin_discrete(H, f, kernel, nu, x)
        assert abs(m) <= 1e-12 * np.abs(H @ (f * nu)).max()


def test_key_inequality_validation():
    H, f, kernel, nu = _basic_instance()
    with pytest.raises(ValueError, match="discrete"):
        key_inequality_margin_discrete(H, f, JumpKernel.continuous(1.0, 1),
                                       nu, 0)
    with pytest.raises(ValueError, match="positive"):
        key_inequality_margin_discrete(-H, f, kernel, nu, 0)
    with pytest.raises(ValueError, match="rows"):
        key_inequality_margin_discrete(H[:2], f, kernel, nu, 0)
    with pytest.raises(ValueError, match="atom count"):
        key_inequality_margin_discrete(H, f[:3], kernel, nu, 0)
    with pytest.raises(IndexError):
        key_inequality_margin_discrete(H, f, kernel, nu, 3)


def test_key_inequality_random_instances():
    rng = np.random.default_rng(5)
    for _ in range(100):
        H, f, kernel, nu, x = random_key_instance(rng)
        assert key_inequality_margin_discrete(H, f, kernel, nu, x) >= -1e-12


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(1e-3, 1e3))
def test_key_inequality_margin_is_linear_in_f(scale):
    H, f, kernel, nu = _basic_instance()
    base = key_inequality_margin_discrete(H, f, kernel, nu, 1)
    scaled = key_inequality_margin_discrete(H, scale * f, kernel, nu, 1)
    assert scaled == pytest.approx(scale * base, rel=1e-9)


def test_sweep_key_inequality():
    report = sweep_key_inequality(n_samples=200, seed=7)
    # exact inequality: float evaluation may dip a few ulp under zero
    assert report.verdict != "fail"
    assert report.min_margin >= -1e-12
    assert len(report.samples) == 200
    assert report.to_json_dict()["params"]["n_samples"] == 200


# ----------------------------------------------------- reduction theorem

def test_reduction_on_complete_graph():
    chain = complete_graph(5)
    u0 = np.array([1.0, 3.0, 0.2, 5.0, 1.0])
    report = reduction_theorem_check_discrete(chain, u0, 0.4)
    assert report.verdict != "fail"
    assert report.min_margin >= -1e-10
    assert len(report.samples) == 5


def test_reduction_on_path_graph():
    R = np.zeros((4, 4))
    for i in range(3):
        R[i, i + 1] = R[i + 1, i] = 1.0
    chain = MarkovChain.from_rates(R)
    for t in (0.1, 1.0, 5.0):
        report = reduction_theorem_check_discrete(
            chain, [2.0, 0.1, 7.0, 1.0], t)
        assert report.min_margin >= -1e-10


def test_reduction_rejects_reducible_chain():
    R = np.zeros((4, 4))
    R[0, 1] = R[1, 0] = 1.0
    R[2, 3] = R[3, 2] = 1.0  # second component unreachable from the first
    chain = MarkovChain.from_rates(R)
    with pytest.raises(ValueError, match="irreducible"):
        reduction_theorem_check_discrete(chain, np.ones(4), 1.0)


def test_sweep_reduction():
    report = sweep_reduction(n_samples=60, seed=3)
    assert report.verdict != "fail"
    assert report.min_margin >= -1e-10


# ------------------------------------------------- continuous machinery

def test_random_positive_field_reproducible():
    a = random_positive_field(np.random.default_rng(9), spacing=0.05,
                              extent=10.0)
    b = random_positive_field(np.random.default_rng(9), spacing=0.05,
                              extent=10.0)
    assert np.array_equal(a.values, b.values)
    assert a.positive and a.extension.kind == "constant"
    assert np.all(a.values > 0)


def test_spike_field_geometry():
    f = spike_field(0.01, 5.0, x0=1.0)
    i = int(np.argmax(f.values))
    assert f.x[i] == pytest.approx(1.0, abs=1e-12)
    body = float(np.trapezoid(f.values, dx=f.spacing))
    assert body == pytest.approx(1.0, rel=1e-6)


def test_fractional_margin_positive_interior(profile_b1_d1):
    u0 = random_positive_field(np.random.default_rng(3), spacing=0.01,
                               extent=60.0)
    m = fractional_liyau_margin(u0, 1.0, 0.8, 0.5, profile_b1_d1)
    assert m.value >= -m.error
    assert m.error < 0.05


def test_margin_on_solution_matches_two_step(profile_b1_d1):
    from liyau.fraclap import solve_fractional
    u0 = random_positive_field(np.random.default_rng(4), spacing=0.01,
                               extent=60.0)
    u = solve_fractional(u0, 1.0, 1.2, profile_b1_d1)
    a = liyau_margin_on_solution(u, 1.0, 1.2, -0.3, profile_b1_d1)
    b = fractional_liyau_margin(u0, 1.0, 1.2, -0.3, profile_b1_d1)
    assert a.value == pytest.approx(b.value, abs=1e-12)


def test_dh_margin_close_to_liyau_margin(profile_b1_d1):
    u0 = random_positive_field(np.random.default_rng(8), spacing=0.01,
                               extent=60.0)
    for t, x in ((0.7, 0.0), (2.0, 4.0)):
        ly = fractional_liyau_margin(u0, 1.0, t, x, profile_b1_d1)
        dh = differential_harnack_margin(u0, 1.0, t, x, profile_b1_d1)
        assert abs(dh.value - ly.value) <= dh.error + ly.error
