import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from overtake import StructuralError, liminf_estimate, liminf_product_check, tail_infimum

T = np.arange(1, 2001, dtype=float)


def test_tail_infimum():
    assert tail_infimum([3, 1, 2, 5, 4]).tolist() == [1, 1, 2, 4, 4]


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_tail_infimum_invariant(seq):
    m = tail_infimum(seq)
    for i in range(len(seq)):
        assert m[i] == min(seq[i:])
    assert np.all(np.diff(m) >= 0)


def test_constant_sequence():
    est = liminf_estimate(np.ones(50))
    assert est.estimate == 1.0 and not est.caveat


def test_alternating_sequence_tends_to_two():
    est = liminf_estimate(2 + (-1) ** T / T, T)
    assert est.estimate == pytest.approx(2, abs=1e-3)
    assert est.estimate < 2
    assert est.trend == "oscillating"
    # estimates rise towards 2 as the window moves out
    short = liminf_estimate((2 + (-1) ** T / T)[:200]).estimate
    assert short < est.estimate


def test_monotone_sequence():
    seq = 1 + 1 / T
    est = liminf_estimate(seq, T)
    assert est.estimate == seq[-1]
    assert est.trend == "nonincreasing"


def test_window_infima_nonincreasing_as_window_extends():
    rng = np.random.default_rng(3)
    seq = rng.normal(size=300)
    est = liminf_estimate(seq, tail_start_fractions=(0.1, 0.3, 0.5, 0.7, 0.9))
    # longer windows (earlier starts) can only have smaller infima
    assert np.all(np.diff(est.window_infima) >= 0)


def test_caveat_flag():
    seq = np.concatenate([np.zeros(60), np.ones(40)])
    assert liminf_estimate(seq).caveat
    assert not liminf_estimate(np.ones(100)).caveat


def test_structural_errors():
    with pytest.raises(StructuralError):
        liminf_estimate(np.ones(9))
    with pytest.raises(StructuralError):
        liminf_estimate(np.ones(20), tail_start_fractions=(1.0,))
    with pytest.raises(StructuralError):
        liminf_estimate(np.ones(20), grid=np.arange(5))


def test_product_rule_convergent_b():
    a = 2 + (-1) ** T / T
    b = 3 + 1 / T
    chk = liminf_product_check(a, b)
    assert chk.passed and chk.hypotheses_hold
    assert chk.liminf_ab == pytest.approx(6, abs=1e-2)
    assert chk.liminf_a * chk.limit_b == pytest.approx(6, abs=1e-2)


def test_product_rule_constants():
    chk = liminf_product_check(np.ones(20), np.ones(20))
    assert chk.passed
    assert (chk.liminf_a, chk.limit_b, chk.liminf_ab) == (1.0, 1.0, 1.0)


def test_product_rule_alternating_counterexample():
    n = np.arange(100)
    a = np.where(n % 2 == 0, 1.0, 2.0)
    b = np.where(n % 2 == 0, 2.0, 1.0)
    chk = liminf_product_check(a, b)
    assert chk.liminf_ab == 2.0
    assert chk.product_of_liminfs == 1.0
    assert not chk.b_converges
    assert not chk.hypotheses_hold and not chk.passed
    assert "b does not converge" in chk.violations


def test_product_rule_nonpositive_a():
    chk = liminf_product_check(-np.ones(20), np.ones(20))
    assert "liminf a is not positive" in chk.violations
    assert not chk.passed


def test_product_rule_length_mismatch():
    with pytest.raises(StructuralError):
        liminf_product_check(np.ones(20), np.ones(21))


@pytest.mark.parametrize("seed", range(5))
def test_product_rule_random_pairs(seed):
    rng = np.random.default_rng(seed)
    amp, beta = rng.uniform(0.1, 1), rng.uniform(0.5, 5)
    a = 2 + amp * np.sin(rng.uniform(0.5, 3) * T)
    b = beta + rng.uniform(-1, 1) / T
    assert liminf_product_check(a, b).passed
