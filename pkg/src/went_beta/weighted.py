"""Weighted entropies and Fisher information under phi = p**(gamma s) (1-p)**((1-gamma) s) / kappa.

With f = Beta(x+1, n-x+1), the product phi f is the Beta(a, b) density
with a = x + gamma s + 1 and b = n - x + (1 - gamma) s + 1, which turns
every weighted quantity into log-gamma and polygamma expressions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import oracle
from .entropy import ORDER_ONE_TOL, _check_order, beta_cross_entropy, log_tilted_power_integral, tsallis_from_log
from .errors import DomainError, UnsupportedCombinationError
from .extrapolation import fit_expansion
from .models import PosteriorSpec, RegimeRule, WeightSpec
from .oracle import DEFAULT_CONFIG, QuadratureConfig
from .specfun import digamma_diff, log_beta, trigamma

__all__ = [
    "WeightSpec",
    "WeightedMoments",
    "log_normalizer",
    "weighted_shannon",
    "weighted_renyi",
    "weighted_tsallis",
    "weighted_fisher",
    "weighted_moments",
    "weighted_exact",
    "renyi_nu_derivative",
    "weighted_asymptotic_prediction",
    "fisher_constant_a",
    "fisher_constant_b",
    "fisher_linear_leading",
    "recover_fisher_constants",
]


@dataclass(frozen=True)
class WeightedMoments:
    """Weighted mean g, classical mean e, dg/d(alpha) and kappa'/kappa."""

    g: float
    e: float
    g_prime: float
    kappa_ratio: float


def log_normalizer(spec: PosteriorSpec, w: WeightSpec) -> float:
    """ln kappa, the integral of p**(gamma s) (1-p)**((1-gamma) s) f.

    ln kappa = ln B(a, b) - ln B(x + 1, n - x + 1); zero for the unit weight.
    """
    if w.is_unit:
        return 0.0
    a, b = w.shape(spec)
    return log_beta(a, b) - log_beta(spec.a, spec.b)


def _log_k(spec: PosteriorSpec) -> float:
    return -log_beta(spec.a, spec.b)


def weighted_shannon(spec: PosteriorSpec, w: WeightSpec) -> float:
    """h = -E_{phi f}[ln f] = -ln K + x (psi(a+b) - psi(a)) + (n-x) (psi(a+b) - psi(b))."""
    s = w.exponent(spec.n)
    return beta_cross_entropy(spec.a, spec.b, w.gamma * s, (1.0 - w.gamma) * s)


def log_weighted_power_integral(spec: PosteriorSpec, w: WeightSpec, nu: float) -> float:
    """ln of the integral of phi f**nu."""
    s = w.exponent(spec.n)
    return log_tilted_power_integral(spec.x, spec.n - spec.x, w.gamma * s, (1.0 - w.gamma) * s, nu)


def weighted_renyi(spec: PosteriorSpec, w: WeightSpec, nu: float) -> float:
    """Weighted Renyi entropy ln(integral of phi f**nu) / (1 - nu)."""
    nu = _check_order(nu, "nu")
    if abs(nu - 1.0) < ORDER_ONE_TOL:
        return weighted_shannon(spec, w)
    return log_weighted_power_integral(spec, w, nu) / (1.0 - nu)


def weighted_tsallis(spec: PosteriorSpec, w: WeightSpec, q: float) -> float:
    """Weighted Tsallis entropy (1 - integral of phi f**q) / (q - 1).

    Returns a signed infinity when the integral exceeds the float range.
    """
    q = _check_order(q, "q")
    if abs(q - 1.0) < ORDER_ONE_TOL:
        return weighted_shannon(spec, w)
    return tsallis_from_log(log_weighted_power_integral(spec, w, q), q)


def _shifts(spec: PosteriorSpec, w: WeightSpec) -> tuple[float, float, float, float]:
    a, b = w.shape(spec)
    # psi(a) - psi(x+1) and psi(b) - psi(n-x+1)
    return a, b, digamma_diff(spec.a, a), digamma_diff(spec.b, b)


def weighted_fisher(spec: PosteriorSpec, w: WeightSpec) -> float:
    """E_{phi f}[score**2] for the score n ln p - n ln(1-p) + n (psi(n-x+1) - psi(x+1)).

    Under Beta(a, b) the score has mean n (da - db) and variance
    n**2 (psi'(a) + psi'(b)), where da = psi(a) - psi(x+1) and
    db = psi(b) - psi(n-x+1).
    """
    if spec.n < 1:
        raise DomainError("Fisher information needs n >= 1")
    a, b, da, db = _shifts(spec, w)
    n = spec.n
    return n * n * (trigamma(a) + trigamma(b)) + (n * (da - db)) ** 2


def weighted_moments(spec: PosteriorSpec, w: WeightSpec) -> WeightedMoments:
    """Weighted and classical means with their alpha derivatives.

    g = a / (n + s + 2) and e = (x + 1) / (n + 2); along x = alpha n the
    derivative of g is n / (n + s + 2), and kappa'/kappa =
    n (psi(a) - psi(x+1) - psi(b) + psi(n-x+1)).
    """
    a, b, da, db = _shifts(spec, w)
    n = spec.n
    total = a + b
    return WeightedMoments(
        g=a / total,
        e=spec.a / (n + 2),
        g_prime=n / total,
        kappa_ratio=n * (da - db),
    )


def kappa_second_log_derivative(spec: PosteriorSpec, w: WeightSpec) -> float:
    """(ln kappa)'' = n**2 (psi'(a) + psi'(b) - psi'(x+1) - psi'(n-x+1))."""
    a, b = w.shape(spec)
    n = spec.n
    return n * n * math.fsum([trigamma(a), trigamma(b), -trigamma(spec.a), -trigamma(spec.b)])


def weighted_exact(kind: str, spec: PosteriorSpec, w: WeightSpec, order: Optional[float] = None) -> float:
    if kind == "shannon":
        return weighted_shannon(spec, w)
    if kind == "fisher":
        return weighted_fisher(spec, w)
    if order is None:
        raise DomainError("an order parameter is required")
    if kind == "renyi":
        return weighted_renyi(spec, w, order)
    if kind == "tsallis":
        return weighted_tsallis(spec, w, order)
    raise DomainError(f"unknown kind {kind!r}")


def renyi_nu_derivative(
    spec: PosteriorSpec, w: WeightSpec, nu: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> float:
    """d H_nu / d nu = -(1 - nu)**-2 KL(z || phi f), z = phi f**nu / integral of phi f**nu.

    The divergence is integrated by the oracle: with ln z - ln(phi f) =
    (nu - 1) ln f - ln V, V = integral of phi f**nu, the divergence is
    (nu - 1) E_z[ln f] - ln V.
    """
    nu = _check_order(nu, "nu")
    if nu == 1.0:
        raise DomainError("nu must differ from 1")
    n, x = spec.n, spec.x
    s = w.exponent(n)
    a = nu * x + w.gamma * s
    b = nu * (n - x) + (1.0 - w.gamma) * s
    c = _log_k(spec)

    def log_f(p, q):
        out = np.full(np.shape(p), c)
        if x:
            out = out + x * np.log(p)
        if n - x:
            out = out + (n - x) * np.log(q)
        return out

    mean_log_f = oracle.kernel_expectation(a, b, log_f, cfg)
    log_v = nu * c - oracle.log_weight_normalizer(spec, w, cfg) + oracle.log_kernel_mass(a, b, cfg)
    kl = max((nu - 1.0) * mean_log_f - log_v, 0.0)
    return -kl / (1.0 - nu) ** 2


def fisher_constant_a(alpha: float, gamma: float) -> float:
    """Coefficient of n in the weighted Fisher information for s = sqrt(n)."""
    return 1.0 / (alpha * (1.0 - alpha)) + (alpha - gamma) ** 2 / ((1.0 - alpha) ** 2 * alpha**2)


def fisher_constant_b(alpha: float, gamma: float) -> float:
    """Coefficient of sqrt(n) in the weighted Fisher information for s = sqrt(n)."""
    a, g = alpha, gamma
    d = (1.0 - a) * a
    return (2 * a * g - g - a * a) / d**2 + (a - g) ** 2 / d**3 * (a * (2 * g - 1) - g)


def fisher_linear_leading(alpha: float, gamma: float) -> float:
    """Coefficient of n**2 in the weighted Fisher information for s = n."""
    r = math.log((1.0 - alpha) * (alpha + gamma) / (alpha * (2.0 - alpha - gamma)))
    return r * r


def weighted_asymptotic_prediction(
    kind: str, rule: RegimeRule, n: int, w: WeightSpec, order: Optional[float] = None
) -> float:
    """Large-n expression for a weighted quantity, alpha regime.

    Available for s = sqrt(n) (all four kinds; Fisher without its constant
    term, so the gap tends to that constant) and for the n**2 leading
    term of the Fisher information with s = n. Unit weights defer to the
    unweighted expressions.
    """
    from .entropy import asymptotic_prediction

    if w.is_unit:
        return asymptotic_prediction(kind, rule, n, order)
    if rule.kind != "alpha":
        raise UnsupportedCombinationError("weighted limits are stated for the alpha regime only")
    a, g = rule.param, w.gamma
    shift = (a - g) ** 2 / (2.0 * a * (1.0 - a))
    if w.scale_kind == "sqrt_n":
        base = 0.5 * math.log(2.0 * math.pi * a * (1.0 - a) / n)
        if kind == "shannon":
            return base + 0.5 + shift
        if kind == "renyi":
            nu = _check_order(order, "nu")
            if abs(nu - 1.0) < ORDER_ONE_TOL:
                return base + 0.5 + shift
            return base - math.log(nu) / (2.0 * (1.0 - nu)) + shift / nu
        if kind == "tsallis":
            q = _check_order(order, "q")
            if abs(q - 1.0) < ORDER_ONE_TOL:
                return base + 0.5 + shift
            v = q**-0.5 * math.exp((1.0 - q) * base + (1.0 - q) * shift / q)
            return (1.0 - v) / (q - 1.0)
        if kind == "fisher":
            return fisher_constant_a(a, g) * n + fisher_constant_b(a, g) * math.sqrt(n)
    if w.scale_kind == "linear_n" and kind == "fisher":
        return fisher_linear_leading(a, g) * n * n
    raise UnsupportedCombinationError(f"no weighted {kind} limit for scale {w.scale_kind}")


def recover_fisher_constants(
    alpha: float,
    gamma: float,
    ns=tuple(10_000 * 4**k for k in range(6)),
) -> tuple[float, float, float]:
    """Fit I(n) = A n + B sqrt(n) + C + D / sqrt(n) + E / n and return (A, B, C).

    Uses s = sqrt(n) weights along x = floor(alpha n).
    """
    rule = RegimeRule("alpha", alpha)
    w = WeightSpec(gamma, "sqrt_n")
    values = [weighted_fisher(rule.spec(n), w) for n in ns]
    coef = fit_expansion(ns, values, (1.0, 0.5, 0.0, -0.5, -1.0))
    return float(coef[0]), float(coef[1]), float(coef[2])
