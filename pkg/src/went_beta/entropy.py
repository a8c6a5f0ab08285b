"""Closed forms and limit expressions for the unweighted posterior.

Shannon, Renyi and Tsallis entropies and the Fisher information of
Beta(x + 1, n - x + 1), all written through log-gamma and polygamma
functions so that n up to 1e9 poses no overflow problem.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, UnsupportedCombinationError
from .models import PosteriorSpec, RegimeRule, Standardization
from .specfun import (
    EULER_GAMMA, digamma_diff, digamma_remainder, log_beta, log_gamma_diff, log_gamma_remainder, trigamma,
)

# below this distance from 1 the Renyi/Tsallis order is treated as 1
ORDER_ONE_TOL = 1e-8

KINDS = ("shannon", "renyi", "tsallis", "fisher")

LOG_FLOAT_MAX = math.log(sys.float_info.max)


def _log_k(spec: PosteriorSpec) -> float:
    return -log_beta(spec.a, spec.b)


def _check_order(order: float, name: str) -> float:
    order = float(order)
    if not order > 0:
        raise DomainError(f"{name} must be positive, got {order}")
    return order


def beta_cross_entropy(a: float, b: float, da: float = 0.0, db: float = 0.0) -> float:
    """-E[ln g] for g the Beta(a, b) density and the mean over Beta(a + da, b + db).

    Equals ln B(a, b) + (a - 1) (psi(C) - psi(A)) + (b - 1) (psi(C) - psi(B))
    with A = a + da, B = b + db, C = A + B. For large shapes the log-beta
    term is about -(a + b) ln 2 and the digamma terms cancel it, so when
    every shape is at least 10 the leading Stirling pieces are combined by
    hand, leaving ln(2 pi a b / c**3) / 2 (c = a + b), log1p terms in the
    shifts and the small series remainders. The shifts are taken
    separately because A and B alone cannot carry them exactly once
    a + b is large.
    """
    A, B = a + da, b + db
    C = A + B
    if min(a, b, A, B) < 10.0:
        parts = [log_beta(a, b)]
        if a != 1:
            parts.append((a - 1) * digamma_diff(A, C))
        if b != 1:
            parts.append((b - 1) * digamma_diff(B, C))
        return math.fsum(parts)
    c = a + b

    def tail(k, K):
        # (k - 1) (psi(C) - psi(K)) minus its ln(C / K) part
        return (k - 1) * math.fsum([0.5 / K, -0.5 / C, digamma_remainder(K), -digamma_remainder(C)])

    return math.fsum([
        0.5 * math.log(2.0 * math.pi),
        0.5 * (math.log(a) + math.log(b)) - 1.5 * math.log(c),
        -(a - 1) * math.log1p(da / a),
        -(b - 1) * math.log1p(db / b),
        (c - 2) * math.log1p((da + db) / c),
        log_gamma_remainder(a), log_gamma_remainder(b), -log_gamma_remainder(c),
        tail(a, A), tail(b, B),
    ])


def shannon_exact(spec: PosteriorSpec) -> float:
    """Differential entropy h(f) = -E[ln f].

    h = -ln((n+1) C(n,x)) + x (psi(n+2) - psi(x+1)) + (n-x) (psi(n+2) - psi(n-x+1)),
    evaluated by ``beta_cross_entropy`` to avoid cancellation at large n.
    """
    return beta_cross_entropy(spec.a, spec.b)


def shannon_standardized(spec: PosteriorSpec, std: Standardization) -> float:
    """Entropy of scale (Z - shift): h(f) + ln(scale)."""
    return shannon_exact(spec) + math.log(std.scale)


def fixed_x_limit(c: int) -> float:
    """Limit of h(n Z) when x = c stays fixed (a Gamma(c + 1, 1) law).

    c + sum_{i<c} ln(c - i) - c (H_c - gamma_EM) + 1.
    """
    if int(c) != c or c < 0:
        raise DomainError("c must be a nonnegative integer")
    c = int(c)
    log_fact = math.fsum(math.log(c - i) for i in range(c))
    harmonic = math.fsum(1.0 / k for k in range(1, c + 1))
    return c + log_fact - c * (harmonic - EULER_GAMMA) + 1.0


def log_power_integral(spec: PosteriorSpec, nu: float) -> float:
    """ln of the integral of f**nu: nu ln((n+1)C(n,x)) + ln B(nu x + 1, nu (n - x) + 1)."""
    return log_tilted_power_integral(spec.x, spec.n - spec.x, 0.0, 0.0, nu)


def log_tilted_power_integral(x: float, y: float, da: float, db: float, nu: float) -> float:
    """ln of the integral of w f**nu with f the Beta(x + 1, y + 1) density.

    w = p**da (1 - p)**db / kappa, kappa being the integral of p**da (1 - p)**db f,
    so the value is (1 - nu) ln B(a, b) - ln B(A, B) + ln B(A', B') with
    a = x + 1, A = a + da, A' = A + (nu - 1) x and likewise for b.

    The three log-beta terms are of order n ln 2 and cancel to O(ln n);
    near nu = 1 the result is then divided by 1 - nu. When all shapes are at
    least 10 the Stirling leading parts are therefore merged by hand, and
    the value is assembled from log1p terms proportional to nu - 1 and the
    small series remainders.
    """
    u = nu - 1.0
    a, b = x + 1.0, y + 1.0
    A, B = a + da, b + db
    A2, B2 = A + u * x, B + u * y
    n = x + y
    if min(a, b, A, B, A2, B2) < 10.0:
        return math.fsum([
            -u * log_beta(a, b),
            log_gamma_diff(A, u * x), log_gamma_diff(B, u * y), -log_gamma_diff(A + B, u * n),
        ])
    c, C = a + b, A + B
    r = log_gamma_remainder
    return math.fsum([
        -u * 0.5 * math.log(2.0 * math.pi),
        (A - 0.5) * math.log1p(u * x / A),
        (B - 0.5) * math.log1p(u * y / B),
        -(C - 0.5) * math.log1p(u * n / C),
        u * x * math.log1p((da + u * x) / a),
        u * y * math.log1p((db + u * y) / b),
        -u * n * math.log1p((da + db + u * n) / c),
        -u * 0.5 * (math.log(a) + math.log(b) - 3.0 * math.log(c)),
        -u * (r(a) + r(b) - r(c)),
        -(r(A) + r(B) - r(C)),
        r(A2) + r(B2) - r(A2 + B2),
    ])


def renyi_exact(spec: PosteriorSpec, nu: float) -> float:
    """Renyi entropy of order nu; orders within 1e-8 of 1 return Shannon."""
    nu = _check_order(nu, "nu")
    if abs(nu - 1.0) < ORDER_ONE_TOL:
        return shannon_exact(spec)
    return log_power_integral(spec, nu) / (1.0 - nu)


def tsallis_exact(spec: PosteriorSpec, q: float) -> float:
    """Tsallis entropy (1 - integral of f**q) / (q - 1)."""
    q = _check_order(q, "q")
    if abs(q - 1.0) < ORDER_ONE_TOL:
        return shannon_exact(spec)
    return tsallis_from_log(log_power_integral(spec, q), q)


def tsallis_from_log(log_v: float, q: float) -> float:
    """(1 - V) / (q - 1) from ln V; a signed infinity if V overflows."""
    if log_v > LOG_FLOAT_MAX:
        return math.copysign(math.inf, 1.0 - q)
    return -math.expm1(log_v) / (q - 1.0)


def fisher_exact(spec: PosteriorSpec) -> float:
    """Fisher information n**2 (psi'(x+1) + psi'(n-x+1)) in alpha = x/n."""
    if spec.n < 1:
        raise DomainError("Fisher information needs n >= 1")
    n = spec.n
    return n * n * (trigamma(spec.a) + trigamma(spec.b))


def exact(kind: str, spec: PosteriorSpec, order: Optional[float] = None) -> float:
    """Dispatch on the quantity name."""
    if kind == "shannon":
        return shannon_exact(spec)
    if kind == "renyi":
        return renyi_exact(spec, _need_order(order))
    if kind == "tsallis":
        return tsallis_exact(spec, _need_order(order))
    if kind == "fisher":
        return fisher_exact(spec)
    raise DomainError(f"unknown kind {kind!r}")


def _need_order(order):
    if order is None:
        raise DomainError("an order parameter is required")
    return order


def _gauss_log_var(rule: RegimeRule, n: int) -> float:
    # ln(2 pi x (n - x) / n**3) with x = x(n)
    x = rule.x_for(n)
    if x <= 0 or x >= n:
        raise UnsupportedCombinationError("limit needs 0 < x < n")
    return math.log(2.0 * math.pi * x * (n - x) / n**3)


def _renyi_constant(nu: float) -> float:
    # -ln(nu) / (2 (1 - nu)), tending to 1/2 as nu -> 1
    if abs(nu - 1.0) < ORDER_ONE_TOL:
        return 0.5
    return -math.log(nu) / (2.0 * (1.0 - nu))


def asymptotic_prediction(kind: str, rule: RegimeRule, n: int, order: Optional[float] = None) -> float:
    """Large-n expression for the unstandardized quantity.

    shannon: alpha regime 1/2 ln(2 pi e alpha (1 - alpha) / n); beta_power
    regime 1/2 ln(2 pi e (1 - n**(beta-1)) / n**(2-beta)); fixed_x and
    fixed_gap regimes fixed_x_limit(c) - ln n.
    renyi, tsallis: Gaussian forms in x(n) valid while x and n - x grow.
    fisher: alpha regime n / (alpha (1 - alpha)) - (2 alpha**2 - 2 alpha + 1) / (2 alpha**2 (1 - alpha)**2).
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if kind == "shannon":
        if rule.kind == "alpha":
            a = rule.param
            return 0.5 * math.log(2.0 * math.pi * math.e * a * (1.0 - a) / n)
        if rule.kind == "beta_power":
            b = rule.param
            return 0.5 * math.log(2.0 * math.pi * math.e * (1.0 - n ** (b - 1.0)) / n ** (2.0 - b))
        return fixed_x_limit(rule.param) - math.log(n)
    if rule.kind not in ("alpha", "beta_power"):
        raise UnsupportedCombinationError(f"no {kind} limit for the {rule.kind} regime")
    if kind == "renyi":
        nu = _check_order(_need_order(order), "nu")
        return 0.5 * _gauss_log_var(rule, n) + _renyi_constant(nu)
    if kind == "tsallis":
        q = _check_order(_need_order(order), "q")
        if abs(q - 1.0) < ORDER_ONE_TOL:
            return 0.5 * _gauss_log_var(rule, n) + 0.5
        v = q ** -0.5 * math.exp(0.5 * (1.0 - q) * _gauss_log_var(rule, n))
        return (1.0 - v) / (q - 1.0)
    if kind == "fisher":
        if rule.kind != "alpha":
            raise UnsupportedCombinationError("Fisher limit is stated for the alpha regime only")
        a = rule.param
        return n / (a * (1.0 - a)) - (2 * a * a - 2 * a + 1) / (2 * a * a * (1 - a) ** 2)
    raise DomainError(f"unknown kind {kind!r}")


def rate_factor(kind: str, rule: RegimeRule, n: int) -> float:
    """Multiplier that keeps gap(n) bounded: n, or n**beta in the beta_power regime."""
    if rule.kind == "beta_power":
        return n ** rule.param
    return float(n)


@dataclass(frozen=True)
class EntropyReport:
    exact: float
    asymptotic: float
    gap: float
    regime: RegimeRule
    n: int
    kind: str = "shannon"
    order: Optional[float] = None


def report(kind: str, rule: RegimeRule, n: int, order: Optional[float] = None) -> EntropyReport:
    """Exact value, limit expression and their signed difference."""
    value = exact(kind, rule.spec(n), order)
    pred = asymptotic_prediction(kind, rule, n, order)
    return EntropyReport(value, pred, value - pred, rule, n, kind, order)
