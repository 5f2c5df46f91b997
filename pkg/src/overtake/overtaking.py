"""Overtaking comparison of infinite paths and its sufficient conditions.

Two feasible paths are compared at a truncation date ``T`` after converting
each so that the whole stock is eaten at ``T``::

    total(T) = sum_{t<T} U(c(t)) + U(f(k(T)))

With utilities strictly negative, path 2 catches up to path 1 when the
lower limit of ``total_1(T) / total_2(T)`` is at least one.  The limit of
the finite-horizon optima overtakes every feasible path when

  (i)  the finite optimum's total ``S(T) = sum_{t<=T} U(c_T(t))`` diverges, and
  (ii) ``rho(T) = [sum_{t<T} (U(c_T(t)) - U(c*(t))) + U(f(k_T(T))) - U(f(k*(T)))] / S(T)``
       tends to zero.

Both are checked numerically here for the log/Cobb-Douglas instance, along
with an explicit bound on ``|ln c_T(T)|`` that makes the numerator of
``rho`` bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .asymptotics import limit_logs
from .errors import (
    DegenerateComparisonError,
    DomainError,
    InfeasiblePathError,
    SignConventionError,
    StructuralError,
)
from .liminf import LiminfEstimate, liminf_estimate, tail_infimum
from .model import FinitePath, ModelSpec, _check_alpha, feasibility_check
from .solvers import _check_k0, closed_form_logs

__all__ = [
    "ConvertedPath",
    "convert_path",
    "catch_up_ratio",
    "appendix_bound",
    "bound_coefficient_G",
    "bound_coefficient_F",
    "numerator_terms",
    "ConditionI",
    "ConditionII",
    "BoundCheck",
    "ConditionReport",
    "check_condition_i",
    "check_condition_ii",
    "bound_check",
    "check_conditions",
    "Challenger",
    "constant_saving",
    "impatient_burst",
    "delayed_start",
    "limit_policy",
    "builtin_challengers",
    "OvertakingReport",
    "certify_optimality",
    "DEFAULT_CONDITION_GRID",
    "DEFAULT_CERTIFY_GRID",
    "SIGN_CONVENTION",
]

DEFAULT_CONDITION_GRID = (10, 20, 40, 80, 160)
SIGN_CONVENTION = (
    "U < 0 on every period; ratio = challenger total / limit-path total, "
    "and ratio >= 1 means the limit path catches up to the challenger"
)
CERTIFY_TOL = 1e-9
# The limit path is not optimal at short horizons, so certification starts
# once the comparison is about the tail.
DEFAULT_CERTIFY_GRID = tuple(range(10, 201))


# -- conversion and the comparator -----------------------------------------


@dataclass(frozen=True)
class ConvertedPath:
    """A feasible path whose stock is fully consumed at ``T``.

    ``c`` covers periods ``0..T`` with ``c[T] = f(k[T])``; ``k`` covers
    ``0..T+1`` with ``k[T+1] = 0``.  Consumption and capital are zero
    afterwards and are not stored.
    """

    T: int
    c: np.ndarray
    k: np.ndarray

    def utilities(self, model: ModelSpec) -> np.ndarray:
        return model.utility.value(self.c)

    def total(self, model: ModelSpec) -> float:
        return float(np.sum(self.utilities(model)))


def convert_path(c, k, model: ModelSpec, T: int) -> ConvertedPath:
    """Keep ``c[t]`` for ``t < T``, eat ``f(k[T])`` at ``T``, zero afterwards.

    ``c`` needs at least ``T`` entries and ``k`` at least ``T + 1``.  The
    base path must be feasible on ``[0, T]``; otherwise
    :class:`InfeasiblePathError` carries the first violation.
    """
    if int(T) != T or T < 0:
        raise DomainError("T must be a nonnegative integer")
    T = int(T)
    c = np.asarray(c, dtype=float)
    k = np.asarray(k, dtype=float)
    if len(c) < T or len(k) < T + 1:
        raise StructuralError(f"path too short to convert at T={T}")
    if not k[T] >= 0:
        raise InfeasiblePathError(f"negative capital at T={T}")
    c_new = np.append(c[:T], float(model.production.value(k[T])))
    k_new = np.append(k[: T + 1], 0.0)
    verdict = feasibility_check(
        model, k_new[0], FinitePath(T, c_new, k_new, np.full(T + 1, np.nan))
    )
    if not verdict.feasible:
        v = verdict.first_violation
        raise InfeasiblePathError(
            f"path infeasible at t={v.index} ({v.constraint}, {v.magnitude:g})", v
        )
    c_new.setflags(write=False)
    k_new.setflags(write=False)
    return ConvertedPath(T, c_new, k_new)


def _negative_total(path: ConvertedPath, model: ModelSpec) -> float:
    u = path.utilities(model)
    if np.any(~(u < 0)):
        t = int(np.argmax(~(u < 0)))
        raise SignConventionError(
            f"utility must be negative in every period; U(c[{t}]) = {u[t]:g}"
        )
    return float(np.sum(u))


def catch_up_ratio(path1: ConvertedPath, path2: ConvertedPath, model: ModelSpec, T: Optional[int] = None) -> float:
    """``total_1(T) / total_2(T)`` for two paths converted at the same date.

    Both totals are negative, so a ratio of at least one means path 2 has
    the larger (less negative) total.
    """
    if path1.T != path2.T or (T is not None and T != path1.T):
        raise StructuralError("paths must be converted at the same T")
    num = _negative_total(path1, model)
    den = _negative_total(path2, model)
    if den == 0.0:
        raise DegenerateComparisonError("zero denominator in catch-up ratio")
    return num / den


# -- the bound on |ln c_T(T)| ----------------------------------------------


def bound_coefficient_G(alpha: float) -> float:
    """Signed form of the bound's two terms; negative on (0, 1)."""
    alpha = _check_alpha(alpha)
    la, l1 = math.log(alpha), math.log1p(-alpha)
    return (
        alpha * la / (1 - alpha)
        + alpha * l1
        + (1 - alpha) / (alpha * la) * (-(1 - alpha) * l1 - alpha)
    )


def bound_coefficient_F(alpha: float) -> float:
    """``G(alpha) (1 - alpha) alpha ln(alpha)``, expanded; positive on (0, 1)."""
    alpha = _check_alpha(alpha)
    la, l1 = math.log(alpha), math.log1p(-alpha)
    return (
        alpha**2 * la**2
        + (1 - alpha) * alpha**2 * l1 * la
        - (1 - alpha) ** 3 * l1
        - (1 - alpha) ** 2 * alpha
    )


def appendix_bound(alpha: float) -> float:
    """Large-``T`` bound on ``|ln c_T(T)|``:

    ``|alpha ln a/(1-a) + a ln(1-a)| + (1-a)/(a ln a) [-(1-a) ln(1-a) - a]``
    with ``a = alpha``.  The finite-``T`` envelope adds ``|ln k0| alpha**T``.
    """
    alpha = _check_alpha(alpha)
    la, l1 = math.log(alpha), math.log1p(-alpha)
    return abs(alpha * la / (1 - alpha) + alpha * l1) + (1 - alpha) / (alpha * la) * (
        -(1 - alpha) * l1 - alpha
    )


# -- condition checks ------------------------------------------------------


def _grid(T_grid):
    grid = [int(T) for T in T_grid]
    if len(grid) < 2:
        raise DomainError("condition checks need at least two horizons")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise DomainError("T_grid must be strictly increasing positive integers")
    return grid


def _finite_logs(alpha, k0, T):
    log_k, log_c = closed_form_logs(alpha, k0, T)
    if np.any(log_c >= 0):
        raise SignConventionError("consumption >= 1 makes log utility nonnegative")
    return log_k, log_c


def numerator_terms(alpha: float, k0: float, T: int) -> np.ndarray:
    """Per-period terms of the condition-(ii) numerator.

    Entries ``0..T-1`` are ``ln c_T(t) - ln c*(t)``; entry ``T`` is
    ``ln f(k_T(T)) - ln f(k*(T))``.
    """
    log_k, log_c = _finite_logs(alpha, k0, T)
    lim_k, lim_c = limit_logs(alpha, k0, T)
    terms = log_c - lim_c
    terms[T] = alpha * log_k[T] - alpha * lim_k[T]
    return terms


@dataclass
class ConditionI:
    T_grid: list
    partial_sums: list
    slope_estimate: float
    strictly_decreasing: bool
    linear_growth: bool

    @property
    def satisfied(self) -> bool:
        return self.strictly_decreasing and self.linear_growth

    def to_dict(self):
        d = dict(self.__dict__)
        d["satisfied"] = self.satisfied
        return d


@dataclass
class ConditionII:
    T_grid: list
    numerators: list
    denominators: list
    ratios: list
    eventually_decreasing: bool
    end_below_start: bool
    numerator_bounded: bool

    @property
    def satisfied(self) -> bool:
        return self.eventually_decreasing and self.end_below_start

    def to_dict(self):
        d = dict(self.__dict__)
        d["satisfied"] = self.satisfied
        return d


@dataclass
class BoundCheck:
    alpha: float
    k0: float
    bound: float
    T_grid: list
    abs_log_terminal: list
    envelope: list
    slack: float = 1e-9

    @property
    def holds(self) -> bool:
        return all(v <= e + self.slack for v, e in zip(self.abs_log_terminal, self.envelope))

    def to_dict(self):
        d = dict(self.__dict__)
        d["holds"] = self.holds
        return d


def check_condition_i(alpha: float, k0: float, T_grid: Sequence[int] = DEFAULT_CONDITION_GRID) -> ConditionI:
    """Partial sums ``S(T) = sum_{t<=T} ln c_T(t)`` and a divergence verdict.

    Divergence is declared when ``S`` is strictly decreasing on the grid and
    the last secant slope is at least half the average slope ``S(T)/T``,
    i.e. the sum is still falling linearly rather than levelling off.
    """
    grid = _grid(T_grid)
    sums = [float(np.sum(_finite_logs(alpha, k0, T)[1])) for T in grid]
    slope = (sums[-1] - sums[-2]) / (grid[-1] - grid[-2])
    decreasing = all(b < a for a, b in zip(sums, sums[1:]))
    linear = slope < 0 and abs(slope) >= 0.5 * abs(sums[-1]) / grid[-1]
    return ConditionI(grid, sums, slope, decreasing, bool(linear))


def check_condition_ii(alpha: float, k0: float, T_grid: Sequence[int] = DEFAULT_CONDITION_GRID) -> ConditionII:
    """``rho(T)`` on the grid, with its numerator and denominator.

    ``|rho|`` must decrease strictly over the second half of the grid and
    end below its first value.  The numerator is judged bounded when its
    successive increments do not grow (Cauchy-type evidence), allowing
    1e-12 of rounding.
    """
    grid = _grid(T_grid)
    nums, dens = [], []
    for T in grid:
        dens.append(float(np.sum(_finite_logs(alpha, k0, T)[1])))
        nums.append(float(np.sum(numerator_terms(alpha, k0, T))))
    if any(d == 0 for d in dens):
        raise DegenerateComparisonError("zero denominator in condition (ii)")
    if not all(map(math.isfinite, nums + dens)):
        raise DomainError("non-finite value in condition (ii)")
    ratios = [n / d for n, d in zip(nums, dens)]
    mags = np.abs(ratios)
    half = len(grid) // 2
    tail = mags[min(half, len(grid) - 2):]
    eventually = bool(np.all(np.diff(tail) < 0))
    incr = np.abs(np.diff(nums))
    bounded = bool(np.all(np.diff(incr) <= 1e-12)) if len(incr) > 1 else True
    return ConditionII(grid, nums, dens, ratios, eventually, bool(mags[-1] < mags[0]), bounded)


def bound_check(alpha: float, k0: float, T_grid: Sequence[int] = range(0, 201), slack: float = 1e-9) -> BoundCheck:
    """Compare ``|ln c_T(T)|`` with ``appendix_bound(alpha) + |ln k0| alpha**T``."""
    alpha = _check_alpha(alpha)
    k0 = _check_k0(k0)
    B = appendix_bound(alpha)
    grid = [int(T) for T in T_grid]
    vals, env = [], []
    for T in grid:
        log_c = closed_form_logs(alpha, k0, T)[1]
        vals.append(abs(float(log_c[T])))
        env.append(B + abs(math.log(k0)) * alpha**T)
    return BoundCheck(alpha, k0, B, grid, vals, env, slack)


@dataclass
class ConditionReport:
    alpha: float
    k0: float
    condition_i: ConditionI
    condition_ii: ConditionII
    bound_check: BoundCheck

    @property
    def certified(self) -> bool:
        return self.condition_i.satisfied and self.condition_ii.satisfied

    def to_dict(self):
        return {
            "kind": "condition_report",
            "alpha": self.alpha,
            "k0": self.k0,
            "certified": self.certified,
            "condition_i": self.condition_i.to_dict(),
            "condition_ii": self.condition_ii.to_dict(),
            "bound_check": self.bound_check.to_dict(),
        }


def check_conditions(alpha: float, k0: float, T_grid: Sequence[int] = DEFAULT_CONDITION_GRID) -> ConditionReport:
    grid = _grid(T_grid)
    bound_grid = range(0, max(grid) + 1)
    return ConditionReport(
        float(alpha),
        float(k0),
        check_condition_i(alpha, k0, grid),
        check_condition_ii(alpha, k0, grid),
        bound_check(alpha, k0, bound_grid),
    )


# -- challengers -----------------------------------------------------------


@dataclass(frozen=True)
class Challenger:
    """A named feasible path generator.

    ``build(alpha, k0, n)`` returns ``(c, k)`` with ``c`` over ``0..n`` and
    ``k`` over ``0..n+1``; the path is the truncation of an infinite feasible
    programme, so ``k[n+1]`` is generally positive.
    """

    name: str
    build: Callable
    params: Dict[str, float] = field(default_factory=dict)


def _run_rule(alpha, k0, n, rule):
    c = np.empty(n + 1)
    k = np.empty(n + 2)
    k[0] = k0
    for t in range(n + 1):
        y = k[t] ** alpha
        k[t + 1] = rule(t, k[t], y)
        c[t] = y - k[t + 1]
    return c, k


def constant_saving(rate: float = 0.7) -> Challenger:
    """Save a fixed share ``rate`` of output every period."""
    if not 0 < rate < 1:
        raise DomainError("saving rate must lie in (0, 1)")
    return Challenger(
        "constant_saving",
        lambda alpha, k0, n: _run_rule(alpha, k0, n, lambda t, k, y: rate * y),
        {"rate": rate},
    )


def impatient_burst(fraction: float = 0.5) -> Challenger:
    """Invest only ``fraction`` of the optimal amount at t=0, then save ``alpha``."""
    if not 0 < fraction < 1:
        raise DomainError("fraction must lie in (0, 1)")

    def build(alpha, k0, n):
        return _run_rule(
            alpha, k0, n, lambda t, k, y: (fraction if t == 0 else 1.0) * alpha * y
        )

    return Challenger("impatient_burst", build, {"fraction": fraction})


def delayed_start(delay: int = 5) -> Challenger:
    """Hold capital at ``k0`` for ``delay`` periods, then save ``alpha``."""
    if int(delay) != delay or delay < 0:
        raise DomainError("delay must be a nonnegative integer")

    def build(alpha, k0, n):
        return _run_rule(alpha, k0, n, lambda t, k, y: k if t < delay else alpha * y)

    return Challenger("delayed_start", build, {"delay": int(delay)})


def limit_policy() -> Challenger:
    """The limit path itself (saving share ``alpha`` throughout)."""
    return Challenger(
        "limit_policy",
        lambda alpha, k0, n: _run_rule(alpha, k0, n, lambda t, k, y: alpha * y),
    )


def builtin_challengers():
    return [constant_saving(), impatient_burst(), delayed_start()]


# -- certification ---------------------------------------------------------


@dataclass
class OvertakingReport:
    challenger: str
    params: dict
    alpha: float
    k0: float
    T_grid: list
    numerators: list  # challenger totals
    denominators: list  # limit-path totals
    ratio_sequence: list
    running_tail_infimum: list
    liminf: LiminfEstimate
    verdict: str
    conditions_certified: bool
    finite_optimum_totals: list
    finite_dominance_holds: bool
    factorization_max_error: float
    difference_sign_consistent: bool
    sign_convention: str = SIGN_CONVENTION

    def to_dict(self):
        d = dict(self.__dict__)
        d["liminf"] = self.liminf.to_dict()
        d["kind"] = "overtaking_report"
        return d

    def csv_rows(self):
        return list(
            zip(self.T_grid, self.numerators, self.denominators, self.ratio_sequence, self.running_tail_infimum)
        )


def certify_optimality(
    alpha: float,
    k0: float,
    challengers: Optional[Sequence[Challenger]] = None,
    T_grid: Optional[Sequence[int]] = None,
    conditions: Optional[ConditionReport] = None,
) -> list:
    """Compare each challenger with the limit path at every grid date.

    For each ``T`` the challenger and the limit path are converted at ``T``
    and their totals compared.  The verdict is ``"overtakes"`` (the limit
    path catches up to the challenger, numerically up to ``max(T_grid)``)
    when the tail lower-limit estimate of the ratio is at least
    ``1 - 1e-9``, ``"overtaken"`` when the whole last window sits below
    that, and ``"inconclusive"`` otherwise or when the two sufficient
    conditions were not certified on the grid.

    Each report also reconciles the factorisation
    ``ratio = (challenger / finite optimum) * (finite optimum / limit path)``
    and checks that no challenger beats the finite optimum at its own ``T``.
    The default grid is ``T = 10..200``; at very short horizons a challenger
    that front-loads consumption can beat the limit path, which is expected
    since only the finite optimum is optimal there.
    """
    alpha = _check_alpha(alpha)
    k0 = _check_k0(k0)
    model = ModelSpec.log_cobb_douglas(alpha)
    grid = _grid(DEFAULT_CERTIFY_GRID if T_grid is None else T_grid)
    if len(grid) < 10:
        raise DomainError("certification needs at least 10 grid dates")
    challengers = builtin_challengers() if challengers is None else list(challengers)
    if conditions is None:
        conditions = check_conditions(alpha, k0, grid)
    n = grid[-1]

    lim_k, lim_c = limit_logs(alpha, k0, n)
    cum = np.concatenate([[0.0], np.cumsum(lim_c)])
    # total of the limit path converted at T: sum_{t<T} ln c*(t) + alpha ln k*(T)
    limit_totals = [float(cum[T] + alpha * lim_k[T]) for T in grid]
    finite_totals = [float(np.sum(_finite_logs(alpha, k0, T)[1])) for T in grid]

    reports = []
    for ch in challengers:
        c, k = ch.build(alpha, k0, n)
        nums, ratios, ferr = [], [], 0.0
        dominance, sign_ok = True, True
        for T, den, fin in zip(grid, limit_totals, finite_totals):
            conv = convert_path(c, k, model, T)
            num = _negative_total(conv, model)
            if not den < 0:
                raise SignConventionError("limit-path total must be negative")
            ratio = num / den
            product = (num / fin) * (fin / den)
            ferr = max(ferr, abs(product - ratio))
            dominance &= num <= fin + CERTIFY_TOL
            diff_sign = np.sign(num - den)
            sign_ok &= diff_sign == -np.sign(ratio - 1.0) or abs(ratio - 1.0) <= 1e-15
            nums.append(num)
            ratios.append(ratio)
        tail = tail_infimum(ratios)
        est = liminf_estimate(ratios, grid)
        last = np.asarray(ratios[est.window_starts[-1]:])
        if not conditions.certified:
            verdict = "inconclusive"
        elif est.estimate >= 1 - CERTIFY_TOL:
            verdict = "overtakes"
        elif np.all(last < 1 - CERTIFY_TOL):
            verdict = "overtaken"
        else:
            verdict = "inconclusive"
        reports.append(
            OvertakingReport(
                ch.name, dict(ch.params), alpha, k0, grid, nums, limit_totals, ratios,
                tail.tolist(), est, verdict, conditions.certified, finite_totals,
                bool(dominance), float(ferr), bool(sign_ok),
            )
        )
    return reports
