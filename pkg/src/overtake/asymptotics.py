"""Infinite-horizon limits of the finite solutions and their properties.

The limit path is ``lim_{T -> inf}`` of the finite-horizon optimum at each
fixed period.  For the log/Cobb-Douglas case it has the closed form

    ln k*(t) = ln k_inf + alpha**t * ln(k0 / k_inf),   k_inf = alpha**(1/(1-alpha))

so the saving ratio is exactly ``alpha`` and the log-distance to the steady
state shrinks by ``alpha`` each period.  For other models
:func:`limit_path_numeric` extracts the limit from shooting solutions on a
doubling horizon schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError
from .model import FinitePath, ModelSpec, _check_alpha
from .solvers import ShootingConfig, _check_k0, solve_closed_form, solve_shooting

__all__ = [
    "LimitPath",
    "SteadyState",
    "steady_state",
    "limit_logs",
    "limit_path_closed_form",
    "limit_path_numeric",
    "saving_ratio",
    "log_distance",
    "MonotoneConvergenceReport",
    "monotone_convergence_report",
    "recovery_time_gap",
    "recovery_time",
    "simulated_recovery_gap",
    "ElasticityReport",
    "elasticity_effect_report",
    "HorizonTable",
    "horizon_dependence",
]


@dataclass(frozen=True)
class SteadyState:
    alpha: float
    k_inf: float
    c_inf: float
    lambda_inf: float

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "k_inf": self.k_inf,
            "c_inf": self.c_inf,
            "lambda_inf": self.lambda_inf,
        }


def steady_state(alpha: float) -> SteadyState:
    """Fixed point of ``k -> alpha k**alpha`` and its consumption and price."""
    alpha = _check_alpha(alpha)
    e = 1.0 / (1.0 - alpha)
    k_inf = alpha**e
    c_inf = (1.0 - alpha) * alpha ** (alpha * e)
    lambda_inf = alpha ** (-alpha * e) / (1.0 - alpha)
    return SteadyState(alpha, k_inf, c_inf, lambda_inf)


@dataclass(frozen=True)
class LimitPath:
    """Tabulated limit trajectory for periods ``0..t_max``.

    ``convergence_error[t]`` is the change between the two largest horizons
    used (zero for closed forms).  ``cauchy`` is False when that change grew
    relative to the previous pair of horizons at some period.
    """

    t_max: int
    k_star: np.ndarray
    c_star: np.ndarray
    lambda_star: np.ndarray
    convergence_error: np.ndarray
    horizons_used: tuple = ()
    cauchy: bool = True

    def __post_init__(self):
        for name in ("k_star", "c_star", "lambda_star", "convergence_error"):
            a = np.array(getattr(self, name), dtype=float)
            if len(a) != self.t_max + 1:
                raise DomainError(f"{name} must have t_max + 1 entries")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "horizons_used", tuple(int(h) for h in self.horizons_used))


def _log_ratio(alpha, k0):
    """``ln(k0 / k_inf)`` computed without forming ``k_inf`` first."""
    return math.log(k0) - math.log(alpha) / (1.0 - alpha)


def limit_logs(alpha: float, k0: float, t_max: int):
    """``(ln k*[0..t_max], ln c*[0..t_max])`` in closed form."""
    alpha = _check_alpha(alpha)
    k0 = _check_k0(k0)
    if int(t_max) != t_max or t_max < 0:
        raise DomainError("t_max must be a nonnegative integer")
    ss = steady_state(alpha)
    r = _log_ratio(alpha, k0)
    powers = alpha ** np.arange(int(t_max) + 2, dtype=float)
    log_k = math.log(ss.k_inf) + powers[:-1] * r
    log_k[0] = math.log(k0)
    return log_k, math.log(ss.c_inf) + powers[1:] * r


def limit_path_closed_form(alpha: float, k0: float, t_max: int) -> LimitPath:
    log_k, log_c = limit_logs(alpha, k0, t_max)
    k = np.exp(log_k)
    k[0] = k0
    n = len(k)
    return LimitPath(n - 1, k, np.exp(log_c), np.exp(-log_c), np.zeros(n))


def limit_path_numeric(
    model: ModelSpec,
    k0: float,
    t_max: int,
    horizons: Optional[Sequence[int]] = None,
    cfg: Optional[ShootingConfig] = None,
) -> LimitPath:
    """Limit path read off shooting solutions at increasing horizons.

    Defaults to the doubling schedule ``2, 4, 8`` times ``t_max``.  The table
    holds the solution at the largest horizon.
    """
    if int(t_max) != t_max or t_max < 0:
        raise DomainError("t_max must be a nonnegative integer")
    t_max = int(t_max)
    if horizons is None:
        base = max(t_max, 1)
        horizons = [2 * base, 4 * base, 8 * base]
    horizons = [int(h) for h in horizons]
    if len(horizons) < 2:
        raise DomainError("at least two horizons are required")
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise DomainError("horizons must be strictly increasing")
    if horizons[0] < t_max:
        raise DomainError("every horizon must be at least t_max")

    tables = []
    for T in horizons:
        try:
            path = solve_shooting(model, k0, T, cfg)
        except ConvergenceError as err:
            err.horizon = T
            raise
        tables.append((path.k[: t_max + 1], path.c[: t_max + 1], path.lam[: t_max + 1]))

    def change(i):
        (ka, ca, _), (kb, cb, _) = tables[i - 1], tables[i]
        return np.maximum(np.abs(kb - ka), np.abs(cb - ca))

    err = change(len(tables) - 1)
    cauchy = True
    if len(tables) >= 3:
        prev = change(len(tables) - 2)
        # growth beyond rounding noise means the sequence is not settling
        cauchy = bool(np.all(err <= prev + 1e-14))
    k, c, lam = tables[-1]
    return LimitPath(t_max, k, c, lam, err, tuple(horizons), cauchy)


def saving_ratio(path, model: ModelSpec) -> np.ndarray:
    """``k[t+1] / f(k[t])`` for every period with a successor stock."""
    k = path.k_star if isinstance(path, LimitPath) else path.k
    if len(k) < 2:
        raise DomainError("saving ratio needs at least two capital entries")
    y = model.production.value(k[:-1])
    if np.any(y == 0):
        raise DomainError("output is zero; saving ratio undefined")
    return k[1:] / y


def log_distance(path: LimitPath, alpha: float) -> np.ndarray:
    """``|ln k*(t) - ln k_inf|`` along a limit path."""
    return np.abs(np.log(path.k_star) - math.log(steady_state(alpha).k_inf))


# -- convergence and path dependence ---------------------------------------


@dataclass(frozen=True)
class MonotoneConvergenceReport:
    alpha: float
    k0: float
    t_max: int
    steady_state: SteadyState
    regime: str  # "increasing", "decreasing" or "stationary"
    k_monotone: bool
    c_monotone: bool
    lambda_monotone: bool
    resolved_through: int

    @property
    def consistent(self) -> bool:
        return self.k_monotone and self.c_monotone and self.lambda_monotone

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "k0": self.k0,
            "t_max": self.t_max,
            "steady_state": self.steady_state.to_dict(),
            "regime": self.regime,
            "k_monotone": self.k_monotone,
            "c_monotone": self.c_monotone,
            "lambda_monotone": self.lambda_monotone,
            "resolved_through": self.resolved_through,
        }


def _monotone(x, direction, strict_until):
    """Strict monotonicity on ``x[:strict_until + 1]``, weak afterwards."""
    d = np.diff(x) * direction
    n = min(strict_until, len(d))
    return bool(np.all(d[:n] > 0) and np.all(d[n:] >= 0))


def monotone_convergence_report(alpha: float, k0: float, t_max: int) -> MonotoneConvergenceReport:
    """Classify the approach to the steady state and test monotonicity.

    Once the log-distance ``alpha**t |ln(k0/k_inf)|`` falls to rounding
    level, consecutive values can coincide in double precision; from that
    period (``resolved_through``) on only weak monotonicity is required.
    """
    path = limit_path_closed_form(alpha, k0, t_max)
    ss = steady_state(alpha)
    r = _log_ratio(alpha, k0)
    if abs(r) <= 4 * np.finfo(float).eps:
        regime, sign = "stationary", 0
    elif r < 0:
        regime, sign = "increasing", 1
    else:
        regime, sign = "decreasing", -1

    step = np.abs(r) * alpha ** np.arange(t_max + 1) * (1.0 - alpha)
    resolved = int(np.sum(step > 64 * np.finfo(float).eps))

    if sign == 0:
        flat = [bool(np.all(x == x[0])) for x in (path.k_star, path.c_star, path.lambda_star)]
        k_ok, c_ok, l_ok = flat
    else:
        k_ok = _monotone(path.k_star, sign, resolved)
        c_ok = _monotone(path.c_star, sign, resolved)
        l_ok = _monotone(path.lambda_star, -sign, resolved)
    return MonotoneConvergenceReport(
        float(alpha), float(k0), int(t_max), ss, regime, k_ok, c_ok, l_ok, resolved
    )


def recovery_time_gap(a: float, b: float, alpha: float) -> float:
    """Extra periods needed from ``k_inf / a`` compared with ``k_inf / b``.

    Equals ``ln(ln a / ln b) / (-ln alpha)`` for ``a > b > 1``.
    """
    alpha = _check_alpha(alpha)
    if not (b > 1.0 and a > b):
        raise DomainError("recovery_time_gap requires a > b > 1")
    return math.log(math.log(a) / math.log(b)) / (-math.log(alpha))


def recovery_time(alpha: float, k0: float, delta: float = 1e-6, max_steps: int = 100_000) -> int:
    """Periods until ``|ln(k_inf / k(t))| < delta`` under ``k' = alpha k**alpha``."""
    alpha = _check_alpha(alpha)
    if not delta > 0:
        raise DomainError("delta must be positive")
    target = math.log(steady_state(alpha).k_inf)
    k = float(k0)
    for t in range(max_steps + 1):
        if abs(target - math.log(k)) < delta:
            return t
        k = alpha * k**alpha
    raise DomainError(f"threshold {delta} not reached within {max_steps} periods")


def simulated_recovery_gap(a: float, b: float, alpha: float, delta: float = 1e-6) -> int:
    k_inf = steady_state(alpha).k_inf
    return recovery_time(alpha, k_inf / a, delta) - recovery_time(alpha, k_inf / b, delta)


def _direction(x):
    d = np.diff(x)
    if np.all(d > 0):
        return "increasing"
    if np.all(d < 0):
        return "decreasing"
    return "non-monotone"


@dataclass(frozen=True)
class ElasticityReport:
    alphas: tuple
    k0s: tuple
    t_probe: int
    spread: tuple  # per alpha: max - min of k*(t_probe) across k0s
    max_deviation: tuple  # per alpha: max |k*(t_probe) - k_inf|
    k_inf: tuple
    c_inf: tuple
    k_inf_direction: str
    c_inf_direction: str

    def to_dict(self):
        return {
            "alphas": list(self.alphas),
            "k0s": list(self.k0s),
            "t_probe": self.t_probe,
            "spread": list(self.spread),
            "max_deviation": list(self.max_deviation),
            "k_inf": list(self.k_inf),
            "c_inf": list(self.c_inf),
            "k_inf_direction": self.k_inf_direction,
            "c_inf_direction": self.c_inf_direction,
        }


def elasticity_effect_report(alphas, k0s, t_probe: int) -> ElasticityReport:
    """How far initial conditions still matter at ``t_probe``, and how the
    steady state moves with alpha.  Directions are measured, not assumed."""
    alphas = sorted(float(a) for a in alphas)
    k0s = [float(k) for k in k0s]
    if not alphas or not k0s:
        raise DomainError("alphas and k0s must be nonempty")
    spread, dev, kinf, cinf = [], [], [], []
    for a in alphas:
        ss = steady_state(a)
        probe = np.array([limit_path_closed_form(a, k0, t_probe).k_star[-1] for k0 in k0s])
        spread.append(float(probe.max() - probe.min()))
        dev.append(float(np.max(np.abs(probe - ss.k_inf))))
        kinf.append(ss.k_inf)
        cinf.append(ss.c_inf)
    return ElasticityReport(
        tuple(alphas), tuple(k0s), int(t_probe), tuple(spread), tuple(dev),
        tuple(kinf), tuple(cinf), _direction(kinf), _direction(cinf),
    )


# -- planning-horizon dependence -------------------------------------------


@dataclass(frozen=True)
class HorizonTable:
    """Values at a fixed period ``t`` for horizons ``T = t, t+1, ...``."""

    t: int
    horizons: tuple
    k: np.ndarray
    c: np.ndarray
    lam: np.ndarray

    @property
    def k_increasing(self) -> bool:
        return bool(np.all(np.diff(self.k) > 0))

    @property
    def c_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.c) < 0))

    @property
    def lam_increasing(self) -> bool:
        return bool(np.all(np.diff(self.lam) > 0))

    def to_dict(self):
        return {
            "t": self.t,
            "horizons": list(self.horizons),
            "k": self.k.tolist(),
            "c": self.c.tolist(),
            "lambda": self.lam.tolist(),
            "k_increasing": self.k_increasing,
            "c_decreasing": self.c_decreasing,
            "lambda_increasing": self.lam_increasing,
        }


def horizon_dependence(alpha: float, k0: float, t: int, n_extra: int = 30) -> HorizonTable:
    """Tabulate ``k_T(t), c_T(t), lambda_T(t)`` for ``T = t .. t + n_extra``."""
    horizons = tuple(range(t, t + n_extra + 1))
    k, c, lam = [], [], []
    for T in horizons:
        p: FinitePath = solve_closed_form(alpha, k0, T)
        k.append(p.k[t])
        c.append(p.c[t])
        lam.append(p.lam[t])
    return HorizonTable(int(t), horizons, np.array(k), np.array(c), np.array(lam))
