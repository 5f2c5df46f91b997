"""Finite-sample evidence about lower limits of sequences.

A lower limit cannot be computed from finitely many terms.  These helpers
report the infimum over trailing windows of the sample, which is the
quantity whose limit defines ``liminf``, together with enough diagnostics
to judge whether the windows have settled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import StructuralError

__all__ = [
    "LiminfEstimate",
    "liminf_estimate",
    "ProductCheck",
    "liminf_product_check",
    "tail_infimum",
]

DEFAULT_FRACTIONS = (0.5, 0.75, 0.9)


def tail_infimum(seq) -> np.ndarray:
    """``out[i] = min(seq[i:])``."""
    seq = np.asarray(seq, dtype=float)
    return np.minimum.accumulate(seq[::-1])[::-1]


@dataclass(frozen=True)
class LiminfEstimate:
    estimate: float
    fractions: tuple
    window_infima: tuple
    window_starts: tuple
    trend: str
    caveat: bool

    def to_dict(self):
        return {
            "estimate": self.estimate,
            "fractions": list(self.fractions),
            "window_infima": list(self.window_infima),
            "window_starts": list(self.window_starts),
            "trend": self.trend,
            "caveat": self.caveat,
        }


def _trend(x):
    d = np.diff(x)
    if np.all(d <= 0):
        return "nonincreasing"
    if np.all(d >= 0):
        return "nondecreasing"
    return "oscillating"


def _window_starts(n, fractions, grid):
    if grid is None:
        return [min(int(np.floor(f * n)), n - 1) for f in fractions]
    grid = np.asarray(grid, dtype=float)
    if len(grid) != n:
        raise StructuralError("grid and sequence lengths differ")
    lo, hi = grid[0], grid[-1]
    return [min(int(np.searchsorted(grid, lo + f * (hi - lo))), n - 1) for f in fractions]


def liminf_estimate(
    seq: Sequence[float],
    grid: Optional[Sequence[float]] = None,
    tail_start_fractions: Sequence[float] = DEFAULT_FRACTIONS,
    *,
    agree_tol: float = 1e-6,
) -> LiminfEstimate:
    """Infimum of ``seq`` over trailing windows.

    Each fraction ``f`` selects the window starting at ``f`` of the way
    through the index grid (by position, or by value when ``grid`` is
    given).  The estimate is the infimum over the shortest window; the
    caveat flag is raised when the window infima differ by more than
    ``agree_tol``.  ``trend`` classifies the last window.
    """
    seq = np.asarray(seq, dtype=float)
    if len(seq) < 10:
        raise StructuralError("liminf_estimate needs at least 10 terms")
    fractions = tuple(sorted(float(f) for f in tail_start_fractions))
    if not fractions or not all(0.0 <= f < 1.0 for f in fractions):
        raise StructuralError("tail fractions must lie in [0, 1)")
    starts = _window_starts(len(seq), fractions, grid)
    tails = [seq[s:] for s in starts]
    if any(len(tail) == 0 for tail in tails):
        raise StructuralError("empty tail window")
    infima = tuple(float(np.min(tail)) for tail in tails)
    caveat = bool(max(infima) - min(infima) > agree_tol)
    return LiminfEstimate(
        infima[-1], fractions, infima, tuple(starts), _trend(tails[-1]), caveat
    )


@dataclass(frozen=True)
class ProductCheck:
    """Outcome of :func:`liminf_product_check`.

    ``hypotheses_hold`` requires a positive lower limit for ``a`` and a
    convergent, positive ``b``.  When it is False the check is reported as
    a hypothesis violation rather than a failure, and ``passed`` is False.
    """

    liminf_a: float
    liminf_b: float
    liminf_ab: float
    limit_b: float
    b_oscillation: float
    b_converges: bool
    hypotheses_hold: bool
    residue: float
    discrepancy: float
    passed: bool
    violations: tuple = ()

    @property
    def product_of_liminfs(self) -> float:
        """``liminf a * liminf b``; differs from ``liminf_ab`` when b oscillates."""
        return self.liminf_a * self.liminf_b

    def to_dict(self):
        out = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}
        out["product_of_liminfs"] = self.product_of_liminfs
        return out


def liminf_product_check(
    a: Sequence[float],
    b: Sequence[float],
    tail_start_fraction: float = 0.9,
    *,
    converge_rtol: float = 1e-2,
) -> ProductCheck:
    """Check ``liminf(a b) = liminf(a) * lim(b)`` on a trailing window.

    On the window, ``b`` lies in ``[beta - eps, beta + eps]`` with ``beta``
    the midpoint of its range; if ``a > 0`` there then
    ``inf(a)(beta - eps) <= inf(a b) <= inf(a)(beta + eps)``.  The check
    passes when the discrepancy stays inside that residue.  ``b`` is taken
    to converge when its window oscillation is below ``converge_rtol``
    times ``|beta|`` and is smaller on the second half of the window than
    on the first.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) != len(b):
        raise StructuralError("sequences must have equal length")
    if len(a) < 10:
        raise StructuralError("liminf_product_check needs at least 10 terms")
    n = len(a)
    s = min(int(np.floor(tail_start_fraction * n)), n - 1)
    at, bt = a[s:], b[s:]
    ab = at * bt
    inf_a, inf_b, inf_ab = float(at.min()), float(bt.min()), float(ab.min())
    beta = 0.5 * float(bt.max() + bt.min())
    eps = 0.5 * float(bt.max() - bt.min())
    half = len(bt) // 2
    osc_early = float(np.ptp(bt[:half])) if half else 0.0
    osc_late = float(np.ptp(bt[half:]))

    violations = []
    if not inf_a > 0:
        violations.append("liminf a is not positive")
    settling = osc_late == 0.0 or osc_late < osc_early
    converges = bool(eps <= converge_rtol * abs(beta) and settling)
    if not converges:
        violations.append("b does not converge")
    if not beta > 0:
        violations.append("lim b is not positive")
    ok = not violations

    residue = abs(inf_a) * eps + 1e-12 * max(1.0, abs(inf_ab))
    discrepancy = abs(inf_ab - inf_a * beta)
    return ProductCheck(
        inf_a, inf_b, inf_ab, beta, 2 * eps, converges, ok, residue, discrepancy,
        bool(ok and discrepancy <= residue), tuple(violations),
    )
