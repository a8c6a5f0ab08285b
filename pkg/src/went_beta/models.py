"""Plain data types describing the Beta posterior, regimes and weights.

These live in their own module so that the quadrature oracle can use them
without importing any closed-form code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

REGIME_KINDS = ("alpha", "beta_power", "fixed_x", "fixed_gap")
SCALE_KINDS = ("unit", "const", "sqrt_n", "linear_n")


def _floor(v: float) -> int:
    # x(n) = floor(v), guarded against v landing one ulp below an integer
    return int(math.floor(v + 1e-9 * max(1.0, abs(v))))


@dataclass(frozen=True)
class PosteriorSpec:
    """Beta(x + 1, n - x + 1) posterior after ``x`` successes in ``n`` trials."""

    n: int
    x: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.x) != self.x:
            raise DomainError(f"n and x must be integers, got n={self.n}, x={self.x}")
        if self.n < 0 or not 0 <= self.x <= self.n:
            raise DomainError(f"need 0 <= x <= n, got n={self.n}, x={self.x}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "x", int(self.x))

    @property
    def a(self) -> int:
        """First Beta shape parameter, x + 1."""
        return self.x + 1

    @property
    def b(self) -> int:
        """Second Beta shape parameter, n - x + 1."""
        return self.n - self.x + 1


@dataclass(frozen=True)
class RegimeRule:
    """Rule generating the success count x(n) from the trial count.

    kind is one of ``alpha`` (x = floor(alpha n)), ``beta_power``
    (x = floor(n**beta)), ``fixed_x`` (x = c) or ``fixed_gap`` (x = n - c).
    """

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in REGIME_KINDS:
            raise DomainError(f"unknown regime kind {self.kind!r}")
        if self.kind in ("alpha", "beta_power"):
            if not 0.0 < self.param < 1.0:
                raise DomainError(f"{self.kind} parameter must lie in (0, 1), got {self.param}")
        else:
            if int(self.param) != self.param or self.param < 0:
                raise DomainError(f"{self.kind} parameter must be a nonnegative integer")
            object.__setattr__(self, "param", int(self.param))

    def x_for(self, n: int) -> int:
        if self.kind == "alpha":
            return _floor(self.param * n)
        if self.kind == "beta_power":
            return _floor(n ** self.param)
        if self.kind == "fixed_x":
            return self.param
        return n - self.param

    def spec(self, n: int) -> PosteriorSpec:
        return PosteriorSpec(n, self.x_for(n))

    def __str__(self):
        return f"{self.kind}={self.param}"


@dataclass(frozen=True)
class Standardization:
    """Affine map Z -> scale * (Z - shift)."""

    shift: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class WeightSpec:
    """Weight phi(p) proportional to p**(gamma s) (1 - p)**((1 - gamma) s).

    The exponent scale s depends on the trial count through ``scale_kind``:
    ``unit`` (s = 0, phi = 1), ``const`` (s = 1), ``sqrt_n`` (s = sqrt(n),
    real valued) or ``linear_n`` (s = n). The normalizing constant kappa
    is derived from the posterior it is paired with, see
    ``weighted.log_normalizer``.
    """

    gamma: float = 0.5
    scale_kind: str = "unit"

    def __post_init__(self):
        if self.scale_kind not in SCALE_KINDS:
            raise DomainError(f"unknown scale kind {self.scale_kind!r}")
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")

    @property
    def is_unit(self) -> bool:
        return self.scale_kind == "unit"

    def exponent(self, n: int) -> float:
        """Total added exponent s for a posterior with ``n`` trials."""
        if self.scale_kind == "unit":
            return 0.0
        if self.scale_kind == "const":
            return 1.0
        if self.scale_kind == "sqrt_n":
            return math.sqrt(n)
        return float(n)

    def shape(self, spec: PosteriorSpec) -> tuple[float, float]:
        """Beta shape parameters of the tilted density phi f."""
        s = self.exponent(spec.n)
        return spec.x + self.gamma * s + 1.0, spec.n - spec.x + (1.0 - self.gamma) * s + 1.0

    def __str__(self):
        return "unit" if self.is_unit else f"gamma={self.gamma},scale={self.scale_kind}"


UNIT_WEIGHT = WeightSpec()
