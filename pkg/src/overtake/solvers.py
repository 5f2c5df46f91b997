"""Finite-horizon solvers: closed form, Euler shooting and a DP oracle.

All three return a :class:`~overtake.model.FinitePath` for the problem of
maximising ``sum_{t=0}^T U(c[t])`` subject to ``k[t+1] = f(k[t]) - c[t]``,
``k[0] = k0`` and ``k[T+1] = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .model import FinitePath, ModelSpec, _check_alpha

__all__ = [
    "ShootingConfig",
    "DPGrid",
    "DPResult",
    "saving_schedule",
    "log_saving_schedule",
    "closed_form_logs",
    "solve_closed_form",
    "solve_shooting",
    "solve_bruteforce_dp",
]


def _check_k0(k0):
    k0 = float(k0)
    if not 0.0 < k0 < 1.0:
        raise DomainError(f"k0 must lie in (0, 1), got {k0!r}")
    return k0


def _check_horizon(T):
    if int(T) != T or T < 0:
        raise DomainError(f"horizon must be a nonnegative integer, got {T!r}")
    return int(T)


# -- closed form -----------------------------------------------------------


def _log1m_pow(log_alpha, n):
    """ln(1 - alpha**n) without forming alpha**n when it underflows."""
    return math.log(-math.expm1(n * log_alpha))


def log_saving_schedule(alpha: float, T: int):
    """Return ``(ln s[t], ln(1 - s[t]))`` for ``t = 0..T`` as arrays.

    ``s[t] = alpha (1 - alpha**m) / (1 - alpha**(m+1))`` with ``m = T - t``;
    ``ln s[T]`` is ``-inf``.
    """
    alpha = _check_alpha(alpha)
    T = _check_horizon(T)
    la = math.log(alpha)
    l1a = math.log1p(-alpha)
    log_s = np.empty(T + 1)
    log_1ms = np.empty(T + 1)
    for t in range(T + 1):
        m = T - t
        tail = _log1m_pow(la, m + 1)
        log_s[t] = la + _log1m_pow(la, m) - tail if m > 0 else -math.inf
        log_1ms[t] = l1a - tail
    return log_s, log_1ms


def saving_schedule(alpha: float, T: int) -> np.ndarray:
    """Optimal saving rates ``k[t+1] / f(k[t])`` for the log/Cobb-Douglas case."""
    log_s, _ = log_saving_schedule(alpha, T)
    return np.exp(log_s)


def closed_form_logs(alpha: float, k0: float, T: int):
    """``(ln k[0..T], ln c[0..T])`` of the log/Cobb-Douglas optimum.

    Capital is accumulated as ``ln k[t+1] = ln s[t] + alpha ln k[t]``, which
    keeps horizons of many thousands of periods free of underflow in the
    ``alpha**T`` factors.
    """
    alpha = _check_alpha(alpha)
    k0 = _check_k0(k0)
    log_s, log_1ms = log_saving_schedule(alpha, T)
    T = len(log_s) - 1
    log_k = np.empty(T + 1)
    log_k[0] = math.log(k0)
    for t in range(T):
        log_k[t + 1] = log_s[t] + alpha * log_k[t]
    return log_k, log_1ms + alpha * log_k


def solve_closed_form(alpha: float, k0: float, T: int) -> FinitePath:
    """Exact optimum of the log/Cobb-Douglas problem, evaluated in logs."""
    log_k, log_c = closed_form_logs(alpha, k0, T)
    k = np.append(np.exp(log_k), 0.0)
    k[0] = float(k0)
    c = np.exp(log_c)
    return FinitePath(len(c) - 1, c, k, np.exp(-log_c))


# -- shooting --------------------------------------------------------------


@dataclass(frozen=True)
class ShootingConfig:
    """Settings for :func:`solve_shooting`.

    ``segment_rtol`` bounds the relative disagreement allowed between the
    trajectories launched from the two ends of a collapsed bracket; steps
    beyond the first disagreement are re-solved from the last trusted stock.
    """

    tolerance: float = 1e-12
    max_bisection_iters: int = 200
    segment_rtol: float = 1e-12

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if int(self.max_bisection_iters) < 1:
            raise DomainError("max_bisection_iters must be at least 1")
        if not self.segment_rtol > 0:
            raise DomainError("segment_rtol must be positive")


# outcome flags for a single forward propagation
_OK, _TOO_BIG, _TOO_SMALL = 0, 1, 2


def _propagate(model, k_start, c_start, n):
    """Run the Euler equation forward ``n`` periods from ``(k_start, c_start)``.

    Returns ``(flag, cs, ks)`` with ``cs[j]`` the consumption of step ``j``
    and ``ks[j]`` the capital entering step ``j + 1``.  A stock that hits zero
    before the horizon ends means the first consumption was too large; a
    stock above the sustainable bound means it was too small.
    """
    U, f = model.utility, model.production
    x_bar = f.max_sustainable
    cs = [c_start]
    ks = [f.value(k_start) - c_start]
    c = c_start
    for _ in range(n):
        k = ks[-1]
        if not k > 0.0:
            return _TOO_BIG, cs, ks
        if k > x_bar:
            return _TOO_SMALL, cs, ks
        c = U.inverse_derivative(U.derivative(c) / f.derivative(k))
        if not math.isfinite(c):
            return _TOO_BIG, cs, ks
        if not c > 0.0:
            return _TOO_SMALL, cs, ks
        cs.append(c)
        ks.append(f.value(k) - c)
    return _OK, cs, ks


def _terminal_sign(flag, ks):
    """+1 when the terminal stock is left over (c too small), -1 otherwise."""
    if flag == _TOO_BIG:
        return -1
    if flag == _TOO_SMALL:
        return 1
    return 1 if ks[-1] > 0 else -1


def _shoot_segment(model, k, n, cfg, horizon):
    """Bisect on the current consumption so that ``n`` steps later k = 0."""
    y = float(model.production.value(k))
    lo, hi = 0.0, y
    # lower end: the tiniest admissible consumption must leave capital over
    c_floor = y * 1e-15
    flag, _, ks = _propagate(model, k, c_floor, n)
    if _terminal_sign(flag, ks) < 0:
        raise ConvergenceError(
            "terminal capital is negative even for vanishing consumption",
            bracket=(lo, hi), horizon=horizon,
        )
    best = None
    for _ in range(cfg.max_bisection_iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        flag, cs, ks = _propagate(model, k, mid, n)
        if flag == _OK and abs(ks[-1]) <= cfg.tolerance:
            best = (cs, ks)
        if _terminal_sign(flag, ks) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi, best


def _trusted_steps(a, b, rtol):
    """Number of leading steps on which two stock trajectories agree."""
    n = min(len(a), len(b))
    for j in range(n):
        if abs(a[j] - b[j]) > rtol * max(abs(a[j]), abs(b[j]), 1e-300):
            return j
    return n


def solve_shooting(
    model: ModelSpec, k0: float, T: int, cfg: ShootingConfig | None = None
) -> FinitePath:
    """Solve the finite-horizon problem by shooting on first-period consumption.

    Bisection on ``c[0]`` in ``(0, f(k0))`` uses the fact that a larger first
    consumption leaves less terminal capital.  The Euler map amplifies
    rounding error by roughly ``1/f'`` per period, so a single long shot
    cannot be trusted to the end of a long horizon.  After each bisection
    the two bracket ends are propagated; the prefix on which they agree to
    ``cfg.segment_rtol`` is kept and the remainder is re-solved from the
    last kept stock.  The final segment is accepted once the terminal stock
    is within ``cfg.tolerance`` of zero, after which it is clamped to 0.

    Raises
    ------
    ConvergenceError
        If the terminal map cannot be bracketed or the bracket fails to
        resolve even the first step within ``cfg.max_bisection_iters``.
    """
    cfg = cfg or ShootingConfig()
    T = _check_horizon(T)
    k0 = float(k0)
    if not 0.0 < k0 <= model.production.max_sustainable:
        raise DomainError(f"k0 must lie in (0, x_bar], got {k0!r}")

    c = np.empty(T + 1)
    k = np.empty(T + 2)
    k[0] = k0
    t = 0
    residual = 0.0
    while t <= T:
        n = T - t
        if n == 0:
            c[T] = float(model.production.value(k[T]))
            k[T + 1] = 0.0
            break
        lo, hi, best = _shoot_segment(model, k[t], n, cfg, T)
        if best is not None:
            cs, ks = best
            c[t:] = cs
            k[t + 1 :] = ks
            residual = ks[-1]
            k[T + 1] = 0.0
            break
        _, cs_lo, ks_lo = _propagate(model, k[t], lo, n)
        _, cs_hi, ks_hi = _propagate(model, k[t], hi, n)
        m = _trusted_steps(ks_lo, ks_hi, cfg.segment_rtol)
        # the last kept step must leave positive capital for the next segment
        m = min(m, n, len(ks_lo))
        while m > 0 and not ks_lo[m - 1] > 0:
            m -= 1
        if m == 0:
            raise ConvergenceError(
                "bisection did not resolve first-period consumption",
                bracket=(lo, hi), horizon=T,
            )
        c[t : t + m] = cs_lo[:m]
        k[t + 1 : t + m + 1] = ks_lo[:m]
        t += m

    return FinitePath(T, c, k, model.utility.derivative(c), terminal_residual=residual)


# -- dynamic programming oracle --------------------------------------------


@dataclass(frozen=True)
class DPGrid:
    grid_points: int = 20001
    k_min: float = 1e-4
    k_max: float = 0.9999

    def __post_init__(self):
        if int(self.grid_points) < 2:
            raise DomainError("grid_points must be at least 2")
        if not 0.0 < self.k_min < self.k_max < 1.0:
            raise DomainError("grid bounds must satisfy 0 < k_min < k_max < 1")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, int(self.grid_points))


@dataclass(frozen=True)
class DPResult:
    path: FinitePath
    objective: float


def _stage_full(U, y, nodes, v_next):
    """Exhaustive argmax over next-period stocks, one state at a time."""
    n = len(nodes)
    value = np.full(n, -np.inf)
    policy = np.zeros(n, dtype=np.int64)
    for i in range(n):
        jmax = int(np.searchsorted(nodes, y[i], side="left"))
        if jmax == 0:
            continue
        obj = U.value(y[i] - nodes[:jmax]) + v_next[:jmax]
        j = int(np.argmax(obj))
        value[i], policy[i] = obj[j], j
    return value, policy


def _stage_monotone(U, y, nodes, v_next):
    """Same result as :func:`_stage_full`, exploiting a monotone argmax.

    ``U(f(k) - k')`` has strictly increasing differences in ``(k, k')`` and
    the feasible set ``{k' < f(k)}`` grows with ``k``, so the smallest
    maximiser is nondecreasing in the state.  Divide and conquer then visits
    each state once with a shrinking candidate window.
    """
    n = len(nodes)
    value = np.full(n, -np.inf)
    policy = np.zeros(n, dtype=np.int64)
    jmax_all = np.searchsorted(nodes, y, side="left")
    stack = [(0, n - 1, 0, n - 1)]
    while stack:
        i_lo, i_hi, j_lo, j_hi = stack.pop()
        if i_lo > i_hi:
            continue
        i = (i_lo + i_hi) // 2
        top = min(j_hi, int(jmax_all[i]) - 1)
        if top < j_lo:
            # no feasible choice inside the window for this state
            j_star = j_lo
        else:
            obj = U.value(y[i] - nodes[j_lo : top + 1]) + v_next[j_lo : top + 1]
            off = int(np.argmax(obj))
            j_star = j_lo + off
            value[i], policy[i] = obj[off], j_star
        stack.append((i_lo, i - 1, j_lo, j_star))
        stack.append((i + 1, i_hi, j_star, j_hi))
    return value, policy


def solve_bruteforce_dp(
    model: ModelSpec,
    k0: float,
    T: int,
    grid: DPGrid | None = None,
    *,
    exhaustive: bool = False,
) -> DPResult:
    """Backward induction on a capital grid with ``c[T] = f(k[T])`` forced.

    The first decision is taken from ``k0`` itself, so ``k0`` need not be a
    node; later stocks are grid nodes.  ``exhaustive=True`` scans every
    candidate for every state (quadratic cost) and serves as a check on the
    default monotone search.
    """
    grid = grid or DPGrid()
    T = _check_horizon(T)
    if T > 6:
        raise DomainError("the DP oracle is limited to T <= 6")
    k0 = float(k0)
    if not grid.k_min <= k0 <= grid.k_max:
        raise DomainError(f"k0={k0!r} outside the grid [{grid.k_min}, {grid.k_max}]")
    U, f = model.utility, model.production

    if T == 0:
        c = np.array([float(f.value(k0))])
        path = FinitePath(0, c, [k0, 0.0], U.derivative(c))
        return DPResult(path, float(np.sum(U.value(c))))

    nodes = grid.nodes
    y = f.value(nodes)
    stage = _stage_full if exhaustive else _stage_monotone
    v = U.value(y)  # period T: consume everything
    policies = []
    for _ in range(T - 1):
        v, pol = stage(U, y, nodes, v)
        policies.append(pol)
    policies.reverse()  # policies[t-1] maps the state at t to the choice at t

    y0 = float(f.value(k0))
    jmax = int(np.searchsorted(nodes, y0, side="left"))
    if jmax == 0:
        raise DomainError("no grid node is a feasible first-period investment")
    obj = U.value(y0 - nodes[:jmax]) + v[:jmax]
    j = int(np.argmax(obj))
    if not np.isfinite(obj[j]):
        raise DomainError("grid admits no feasible path from k0")

    idx = [j]
    for pol in policies:
        idx.append(int(pol[idx[-1]]))
    k = np.concatenate([[k0], nodes[idx], [0.0]])
    c = f.value(k[:-1]) - k[1:]
    path = FinitePath(T, c, k, U.derivative(c))
    return DPResult(path, float(np.sum(U.value(c))))
