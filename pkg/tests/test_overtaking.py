import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import appendix_bound_mp, bound_coefficient_F_mp, finite_path_mp, limit_path_mp
from overtake import (
    DomainError,
    InfeasiblePathError,
    ModelSpec,
    SignConventionError,
    StructuralError,
    appendix_bound,
    bound_check,
    catch_up_ratio,
    certify_optimality,
    check_condition_i,
    check_condition_ii,
    check_conditions,
    convert_path,
    limit_path_closed_form,
    solve_closed_form,
)
from overtake.overtaking import (
    Challenger,
    ConvertedPath,
    bound_coefficient_F,
    bound_coefficient_G,
    constant_saving,
    impatient_burst,
    limit_policy,
    numerator_terms,
)


def saving_path(alpha, k0, n, rate):
    c, k = np.empty(n + 1), np.empty(n + 2)
    k[0] = k0
    for t in range(n + 1):
        y = k[t] ** alpha
        k[t + 1] = rate * y
        c[t] = y - k[t + 1]
    return c, k


# -- conversion ------------------------------------------------------------------


def test_convert_optimal_path_is_identity(half):
    p = solve_closed_form(0.5, 0.0625, 8)
    cp = convert_path(p.c, p.k, half, 8)
    assert np.array_equal(cp.c[:8], p.c[:8])
    assert cp.c[8] == pytest.approx(p.c[8], rel=1e-15)
    assert np.array_equal(cp.k, p.k)


def test_convert_constant_saving_at_5(half):
    c, k = saving_path(0.5, 0.0625, 12, 0.5)
    cp = convert_path(c, k, half, 5)
    assert np.array_equal(cp.c[:5], c[:5])
    assert cp.c[5] == k[5] ** 0.5
    assert cp.k[6] == 0.0 and len(cp.k) == 7


def test_convert_at_zero(half):
    c, k = saving_path(0.5, 0.3, 4, 0.5)
    cp = convert_path(c, k, half, 0)
    assert cp.c.tolist() == [0.3**0.5]
    assert cp.k.tolist() == [0.3, 0.0]


def test_convert_rejects_infeasible(half):
    c, k = saving_path(0.5, 0.0625, 6, 0.5)
    c = c.copy()
    c[2] += 0.01
    with pytest.raises(InfeasiblePathError) as info:
        convert_path(c, k, half, 4)
    assert info.value.violation.index == 2
    assert info.value.violation.constraint == "budget"


def test_convert_too_short(half):
    with pytest.raises(StructuralError):
        convert_path([0.1], [0.1, 0.1], half, 3)


# -- comparator ------------------------------------------------------------------


def test_ratio_reflexive(half):
    c, k = saving_path(0.5, 0.0625, 30, 0.5)
    for T in (0, 1, 10, 30):
        cp = convert_path(c, k, half, T)
        assert catch_up_ratio(cp, cp, half, T) == 1.0


@settings(max_examples=40, deadline=None)
@given(rate=st.floats(0.01, 0.99), k0=st.floats(0.01, 0.99), T=st.integers(0, 40))
def test_optimum_beats_any_path_at_its_own_horizon(rate, k0, T):
    m = ModelSpec.log_cobb_douglas(0.5)
    c, k = saving_path(0.5, k0, T, rate)
    opt = solve_closed_form(0.5, k0, T)
    r = catch_up_ratio(convert_path(c, k, m, T), convert_path(opt.c, opt.k, m, T), m, T)
    assert r >= 1 - 1e-12


def test_limit_saving_versus_optimum_at_10(half):
    c, k = saving_path(0.5, 0.0625, 10, 0.5)
    opt = solve_closed_form(0.5, 0.0625, 10)
    r = catch_up_ratio(convert_path(c, k, half, 10), convert_path(opt.c, opt.k, half, 10), half)
    # independent 50-digit evaluation of both sums
    kl, cl = limit_path_mp(0.5, 0.0625, 10)
    ko, co = finite_path_mp(0.5, 0.0625, 10)
    num = sum(mp.log(x) for x in cl[:10]) + mp.log(mp.sqrt(kl[10]))
    den = sum(mp.log(x) for x in co)
    assert r > 1
    assert r == pytest.approx(float(num / den), rel=1e-13)


def test_sign_convention_enforced(half):
    bad = ConvertedPath(1, np.array([0.5, 1.0]), np.array([0.2, 0.1, 0.0]))
    good = ConvertedPath(1, np.array([0.5, 0.4]), np.array([0.2, 0.1, 0.0]))
    with pytest.raises(SignConventionError):
        catch_up_ratio(bad, good, half)
    with pytest.raises(SignConventionError):
        catch_up_ratio(good, bad, half)


def test_ratio_needs_common_horizon(half):
    c, k = saving_path(0.5, 0.1, 6, 0.5)
    with pytest.raises(StructuralError):
        catch_up_ratio(convert_path(c, k, half, 3), convert_path(c, k, half, 4), half)


# -- closed-form bound ------------------------------------------------------------


def test_appendix_bound_half():
    assert appendix_bound(0.5) == pytest.approx(1.2610, abs=1e-4)  # 1.26107, quoted truncated
    assert appendix_bound(0.5) == pytest.approx(float(appendix_bound_mp(0.5)), rel=1e-14)


@pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
def test_F_positive_and_G_negative(alpha):
    F = bound_coefficient_F(alpha)
    assert F > 0
    assert F == pytest.approx(float(bound_coefficient_F_mp(alpha)), rel=1e-12)
    assert bound_coefficient_G(alpha) < 0
    assert bound_coefficient_G(alpha) * (1 - alpha) * alpha * math.log(alpha) == pytest.approx(F, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("k0", [0.0625, 0.25, 0.9])
def test_bound_check_holds(alpha, k0):
    assert bound_check(alpha, k0).holds


def test_bound_check_detects_violation():
    bc = bound_check(0.5, 0.25, range(0, 20))
    tight = dataclasses.replace(bc, envelope=[e - 1.0 for e in bc.envelope])
    assert not tight.holds


# -- conditions --------------------------------------------------------------------


@pytest.mark.parametrize("k0", [0.0625, 0.25])
def test_condition_i(k0):
    ci = check_condition_i(0.5, k0, (10, 20, 40, 80))
    assert ci.strictly_decreasing and ci.satisfied
    assert abs(ci.partial_sums[3]) > 1.9 * abs(ci.partial_sums[2])


def test_condition_i_slope_tends_to_log_c_inf():
    ci = check_condition_i(0.5, 0.25, (100, 1000, 10000))
    assert ci.slope_estimate == pytest.approx(math.log(0.25), rel=1e-6)


def test_limit_path_sum_at_steady_state():
    lp = limit_path_closed_form(0.5, 0.25, 40)
    assert np.sum(np.log(lp.c_star[:40])) == pytest.approx(40 * math.log(0.25), rel=1e-14)


def test_condition_ii_two_point_grid():
    cii = check_condition_ii(0.5, 0.0625, (10, 100))
    assert abs(cii.ratios[1]) < abs(cii.ratios[0])
    assert all(map(math.isfinite, cii.ratios))


@pytest.mark.parametrize("k0", [0.0625, 0.25, 0.9])
def test_condition_ii_numerator_bounded(k0):
    grid = (10, 20, 40, 80, 160, 320, 640)
    cii = check_condition_ii(0.5, k0, grid)
    assert cii.satisfied and cii.numerator_bounded
    assert np.ptp(cii.numerators[2:]) < 1e-9
    assert abs(cii.denominators[-1]) > 60 * abs(cii.numerators[-1])


def test_numerator_term_signs_at_steady_state():
    # finite optima consume at least as much as the limit path before T,
    # and hold less capital at T
    for T in (5, 20, 60):
        terms = numerator_terms(0.5, 0.25, T)
        assert np.all(terms[:T] >= 0)
        assert terms[T] < 0


def test_condition_report_schema(schema_validator):
    rep = check_conditions(0.5, 0.0625)
    assert rep.certified
    schema_validator(rep.to_dict(), "condition_report")


def test_condition_grid_validation():
    with pytest.raises(DomainError):
        check_condition_i(0.5, 0.1, (10,))
    with pytest.raises(DomainError):
        check_condition_ii(0.5, 0.1, (20, 10))


# -- certification ------------------------------------------------------------------


@pytest.fixture(scope="module")
def certified():
    return certify_optimality(0.5, 0.0625, [constant_saving(), impatient_burst(), limit_policy()])


def test_reflexive_challenger(certified):
    rep = certified[2]
    assert rep.challenger == "limit_policy"
    assert np.allclose(rep.ratio_sequence, 1.0, rtol=0, atol=1e-14)
    assert rep.verdict == "overtakes"


def test_constant_saving_strictly_beaten(certified):
    rep = certified[0]
    assert rep.liminf.estimate > 1.1
    assert rep.verdict == "overtakes"


def test_impatient_burst_beaten(certified):
    assert certified[1].liminf.estimate > 1
    assert certified[1].verdict == "overtakes"


def test_report_invariants(certified, schema_validator):
    for rep in certified:
        r, m = np.array(rep.ratio_sequence), np.array(rep.running_tail_infimum)
        for i in range(len(r)):
            assert np.all(m[i] <= r[i:])
        assert rep.factorization_max_error <= 1e-9
        assert rep.finite_dominance_holds
        assert rep.difference_sign_consistent
        assert "U < 0" in rep.sign_convention
        schema_validator(rep.to_dict(), "overtaking_report")


def test_uncertified_conditions_give_inconclusive():
    cond = check_conditions(0.5, 0.0625, range(10, 201))
    broken = dataclasses.replace(cond, condition_i=dataclasses.replace(cond.condition_i, strictly_decreasing=False))
    (rep,) = certify_optimality(0.5, 0.0625, [constant_saving()], conditions=broken)
    assert rep.verdict == "inconclusive"


def test_challenger_beats_limit_path_at_short_horizon():
    # at T=1 front-loading consumption wins; the tail comparison is what counts
    (rep,) = certify_optimality(0.5, 0.0625, [impatient_burst()], T_grid=range(1, 40))
    assert rep.ratio_sequence[0] < 1
    assert rep.verdict == "overtakes"


def test_infeasible_challenger_rejected():
    def build(alpha, k0, n):
        c, k = saving_path(alpha, k0, n, 0.5)
        c = c.copy()
        c[3] += 1.0
        return c, k

    with pytest.raises(InfeasiblePathError):
        certify_optimality(0.5, 0.0625, [Challenger("greedy", build)])


def test_certification_grid_validation():
    with pytest.raises(DomainError):
        certify_optimality(0.5, 0.0625, T_grid=range(10, 15))
