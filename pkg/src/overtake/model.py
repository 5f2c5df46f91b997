"""Economic primitives, path containers and first-order diagnostics.

A model is a pair of primitives: an instantaneous utility ``U`` and a
production function ``f``.  Both are small objects exposing value,
derivative and (for utility) inverse-derivative methods, so any strictly
concave utility and increasing, concave technology can be plugged into the
generic solvers.  :meth:`ModelSpec.log_cobb_douglas` builds the one
instance with closed forms, ``U = ln c`` and ``f(k) = k**alpha``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, StructuralError, UnknownFamilyError

__all__ = [
    "Utility",
    "LogUtility",
    "CRRAUtility",
    "Production",
    "CobbDouglas",
    "ModelSpec",
    "FinitePath",
    "Violation",
    "FeasibilityVerdict",
    "utility",
    "marginal_utility",
    "inverse_marginal_utility",
    "production",
    "production_derivative",
    "euler_residuals",
    "feasibility_check",
    "total_utility",
    "BUDGET_RTOL",
]

# relative tolerance for the budget identity k[t+1] = f(k[t]) - c[t]
BUDGET_RTOL = 1e-12


def _check(x, name, *, strict):
    """Return ``x`` as float or float array, raising on out-of-domain input."""
    if np.ndim(x) == 0:
        x = float(x)
        bad = not (x > 0.0) if strict else not (x >= 0.0)
    else:
        x = np.asarray(x, dtype=float)
        bad = bool(np.any(~(x > 0.0))) if strict else bool(np.any(~(x >= 0.0)))
    if bad:
        rel = "positive" if strict else "nonnegative"
        raise DomainError(f"{name} must be {rel}")
    return x


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


# -- utility ---------------------------------------------------------------


class Utility(ABC):
    """Strictly increasing, strictly concave instantaneous utility."""

    family: str = ""

    @abstractmethod
    def value(self, c):
        ...

    @abstractmethod
    def derivative(self, c):
        ...

    @abstractmethod
    def inverse_derivative(self, m):
        """Consumption level whose marginal utility equals ``m``."""

    def params(self) -> dict:
        return {}


class LogUtility(Utility):
    family = "log"

    def value(self, c):
        return np.log(_check(c, "consumption", strict=True))

    def derivative(self, c):
        return 1.0 / _check(c, "consumption", strict=True)

    def inverse_derivative(self, m):
        return 1.0 / _check(m, "marginal utility", strict=True)

    def __repr__(self):
        return "LogUtility()"

    def __eq__(self, other):
        return isinstance(other, LogUtility)

    def __hash__(self):
        return hash("LogUtility")


@dataclass(frozen=True)
class CRRAUtility(Utility):
    """``U(c) = (c**(1 - sigma) - 1) / (1 - sigma)``; ``sigma = 1`` is log."""

    sigma: float
    family = "crra"

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")

    def value(self, c):
        c = _check(c, "consumption", strict=True)
        if self.sigma == 1.0:
            return np.log(c)
        return (c ** (1.0 - self.sigma) - 1.0) / (1.0 - self.sigma)

    def derivative(self, c):
        return _check(c, "consumption", strict=True) ** (-self.sigma)

    def inverse_derivative(self, m):
        return _check(m, "marginal utility", strict=True) ** (-1.0 / self.sigma)

    def params(self):
        return {"sigma": self.sigma}


# -- production ------------------------------------------------------------


class Production(ABC):
    """Continuous, increasing, weakly concave technology with ``f(0) = 0``."""

    family: str = ""

    @abstractmethod
    def value(self, k):
        ...

    @abstractmethod
    def derivative(self, k):
        ...

    @property
    @abstractmethod
    def max_sustainable(self) -> float:
        """Stock ``x_bar`` above which output falls short of the stock."""

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class CobbDouglas(Production):
    """``f(k) = k**alpha`` with ``alpha`` in (0, 1); sustainable bound is 1."""

    alpha: float
    family = "cobb_douglas"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))

    def value(self, k):
        return _check(k, "capital", strict=False) ** self.alpha

    def derivative(self, k):
        return self.alpha * _check(k, "capital", strict=True) ** (self.alpha - 1.0)

    @property
    def max_sustainable(self):
        return 1.0

    def params(self):
        return {"alpha": self.alpha}


# -- model -----------------------------------------------------------------

_FAMILIES = ("log_cobb_douglas", "crra_cobb_douglas")


@dataclass(frozen=True)
class ModelSpec:
    """A utility/production pair.

    The log/Cobb-Douglas pair is the parametric instance; it is the only one
    for which closed forms, the overtaking comparator and the condition
    checks are available.
    """

    utility: Utility
    production: Production

    @classmethod
    def log_cobb_douglas(cls, alpha: float) -> "ModelSpec":
        return cls(LogUtility(), CobbDouglas(alpha))

    @property
    def is_parametric(self) -> bool:
        return isinstance(self.utility, LogUtility) and isinstance(
            self.production, CobbDouglas
        )

    @property
    def alpha(self) -> float:
        if not isinstance(self.production, CobbDouglas):
            raise DomainError("alpha is defined for Cobb-Douglas production only")
        return self.production.alpha

    @property
    def family(self) -> str:
        if self.is_parametric:
            return "log_cobb_douglas"
        if isinstance(self.utility, CRRAUtility) and isinstance(
            self.production, CobbDouglas
        ):
            return "crra_cobb_douglas"
        return f"{self.utility.family}_{self.production.family}"

    def to_dict(self) -> dict:
        fam = self.family
        if fam not in _FAMILIES:
            raise UnknownFamilyError(fam)
        out = {"family": fam, "alpha": self.alpha}
        out.update(self.utility.params())
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        fam = data.get("family")
        if fam == "log_cobb_douglas":
            return cls.log_cobb_douglas(data["alpha"])
        if fam == "crra_cobb_douglas":
            return cls(CRRAUtility(float(data["sigma"])), CobbDouglas(data["alpha"]))
        raise UnknownFamilyError(fam)


def utility(model: ModelSpec, c):
    return model.utility.value(c)


def marginal_utility(model: ModelSpec, c):
    """U'(c); raises :class:`DomainError` for nonpositive ``c``."""
    return model.utility.derivative(c)


def inverse_marginal_utility(model: ModelSpec, m):
    return model.utility.inverse_derivative(m)


def production(model: ModelSpec, k):
    return model.production.value(k)


def production_derivative(model: ModelSpec, k):
    return model.production.derivative(k)


# -- paths -----------------------------------------------------------------


def _frozen_array(x, name):
    a = np.array(x, dtype=float)
    if a.ndim != 1:
        raise StructuralError(f"{name} must be one-dimensional")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FinitePath:
    """Solved finite-horizon trajectory.

    ``c`` and ``lam`` hold periods ``0..T``; ``k`` holds ``0..T+1``.
    ``terminal_residual`` is the terminal capital before it was clamped to
    zero (always 0 for closed-form and DP solutions).
    """

    T: int
    c: np.ndarray
    k: np.ndarray
    lam: np.ndarray
    terminal_residual: float = 0.0

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 0:
            raise StructuralError("horizon T must be a nonnegative integer")
        object.__setattr__(self, "T", int(self.T))
        c = _frozen_array(self.c, "c")
        k = _frozen_array(self.k, "k")
        lam = _frozen_array(self.lam, "lam")
        n = self.T + 1
        if len(c) != n or len(lam) != n or len(k) != n + 1:
            raise StructuralError(
                f"expected len(c)=len(lam)={n} and len(k)={n + 1}, got "
                f"{len(c)}, {len(lam)}, {len(k)}"
            )
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_consumption(cls, model: ModelSpec, k0: float, c) -> "FinitePath":
        """Build a path by running the budget identity forward from ``k0``."""
        c = np.asarray(c, dtype=float)
        k = np.empty(len(c) + 1)
        k[0] = k0
        for t in range(len(c)):
            k[t + 1] = model.production.value(max(k[t], 0.0)) - c[t]
        if np.all(c > 0):
            lam = model.utility.derivative(c)
        else:
            lam = np.full(len(c), np.nan)
        return cls(len(c) - 1, c, k, lam)

    def __len__(self):
        return self.T + 1


@dataclass(frozen=True)
class Violation:
    index: int
    constraint: str
    magnitude: float


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    first_violation: Optional[Violation] = None

    def __post_init__(self):
        if self.feasible != (self.first_violation is None):
            raise StructuralError("feasible must be True iff there is no violation")

    def __bool__(self):
        return self.feasible


def total_utility(model: ModelSpec, path: FinitePath) -> float:
    return float(np.sum(model.utility.value(path.c)))


def euler_residuals(model: ModelSpec, path: FinitePath) -> np.ndarray:
    """Residuals ``f'(k[t]) U'(c[t]) - U'(c[t-1])`` for ``t = 1..T``.

    Element ``j`` of the result belongs to period ``t = j + 1``; a ``T = 0``
    path has no interior period and yields an empty array.
    """
    if path.T == 0:
        return np.empty(0)
    c = path.c
    if np.any(c <= 0):
        raise DomainError("Euler residuals need strictly positive consumption")
    mu = model.utility.derivative(c)
    fk = model.production.derivative(path.k[1 : path.T + 1])
    return fk * mu[1:] - mu[:-1]


def feasibility_check(model: ModelSpec, k0: float, path: FinitePath) -> FeasibilityVerdict:
    """Check initial stock, budget identity, nonnegativity and exhaustion.

    The first violation is reported in period order; within a period the
    budget identity is tested before the sign constraints.
    """
    c, k, T = path.c, path.k, path.T
    if len(c) != T + 1 or len(k) != T + 2:
        raise StructuralError("path arrays have inconsistent lengths")

    def fail(i, what, mag):
        return FeasibilityVerdict(False, Violation(int(i), what, float(mag)))

    if abs(k[0] - k0) > BUDGET_RTOL * max(1.0, abs(k0)):
        return fail(0, "initial_capital", k[0] - k0)
    for t in range(T + 1):
        if not k[t] >= 0:
            return fail(t, "capital_nonnegative", k[t])
        y = float(model.production.value(k[t]))
        gap = k[t + 1] - (y - c[t])
        if not abs(gap) <= BUDGET_RTOL * max(1.0, y):
            return fail(t, "budget", gap)
        if not c[t] >= 0:
            return fail(t, "consumption_nonnegative", c[t])
        if not k[t + 1] >= 0:
            return fail(t, "capital_nonnegative", k[t + 1])
    y = float(model.production.value(k[T]))
    if not abs(k[T + 1]) <= BUDGET_RTOL * max(1.0, y):
        return fail(T + 1, "terminal_capital", k[T + 1])
    return FeasibilityVerdict(True)
