"""The Beta(x + 1, n - x + 1) posterior: density, moments, standardizations."""
from __future__ import annotations

import math

import numpy as np

from . import oracle
from .errors import DomainError
from .models import PosteriorSpec, RegimeRule, Standardization
from .oracle import DEFAULT_CONFIG, QuadratureConfig
from .specfun import gauss_2f1_terminating, log_beta

__all__ = [
    "PosteriorSpec",
    "RegimeRule",
    "Standardization",
    "log_norm_constant",
    "log_pdf",
    "mean",
    "variance",
    "raw_moment",
    "central_moment",
    "central_moment_2f1",
    "standardized_moment",
    "standardization_for",
    "kl_to_standard_gaussian",
]


def log_norm_constant(spec: PosteriorSpec) -> float:
    """ln((n + 1) C(n, x)) = -ln B(x + 1, n - x + 1)."""
    return -log_beta(spec.a, spec.b)


def log_pdf(spec: PosteriorSpec, p):
    """Log density ln f(p) = ln((n+1) C(n,x)) + x ln p + (n - x) ln(1 - p).

    Accepts a scalar or an array; every p must lie in (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    if np.any((arr <= 0.0) | (arr >= 1.0)):
        raise DomainError("density argument must lie in (0, 1)")
    out = log_norm_constant(spec) + spec.x * np.log(arr) + (spec.n - spec.x) * np.log1p(-arr)
    return float(out) if out.ndim == 0 else out


def mean(spec: PosteriorSpec) -> float:
    return spec.a / (spec.n + 2)


def variance(spec: PosteriorSpec) -> float:
    n = spec.n
    return spec.a * spec.b / ((n + 3) * (n + 2) ** 2)


def raw_moment(spec: PosteriorSpec, j: int) -> float:
    """E[Z**j] = prod_{i<j} (x + 1 + i) / (n + 2 + i)."""
    if j < 0:
        raise DomainError("moment order must be nonnegative")
    out = 1.0
    for i in range(j):
        out *= (spec.x + 1 + i) / (spec.n + 2 + i)
    return out


def central_moment(spec: PosteriorSpec, k: int, center: float) -> float:
    """E[(Z - center)**k] by binomial expansion over the raw moments.

    The signed terms are added with ``math.fsum``.
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    terms = []
    m = 1.0
    for j in range(k + 1):
        if j:
            m *= (spec.x + j) / (spec.n + 1 + j)
        terms.append(math.comb(k, j) * m * (-center) ** (k - j))
    return math.fsum(terms)


def central_moment_2f1(spec: PosteriorSpec, k: int) -> float:
    """E[(Z - x/n)**k] through the terminating Gauss series.

    E[(Z - c)**k] = (-c)**k 2F1(-k, x + 1; n + 2; 1/c) with c = x/n; kept
    as an independent cross-check of ``central_moment``.
    """
    if spec.x < 1:
        raise DomainError("the hypergeometric form needs x >= 1")
    c = spec.x / spec.n
    return (-c) ** k * gauss_2f1_terminating(k, spec.x + 1, spec.n + 2, 1.0 / c)


def standardized_moment(spec: PosteriorSpec, std: Standardization, k: int) -> float:
    """E[(scale (Z - shift))**k]."""
    return std.scale ** k * central_moment(spec, k, std.shift)


def standardization_for(rule: RegimeRule, n: int) -> Standardization:
    """Shift and scale that give the regime's limiting law.

    alpha: Gaussian, shift alpha and scale sqrt(n / (alpha (1 - alpha))).
    beta_power: Gaussian, shift n**(beta - 1) and scale n**(1 - beta/2).
    fixed_x: Gamma(c + 1, 1), shift 0 and scale n. fixed_gap mirrors
    fixed_x about 1/2, so it uses shift 1 and scale n (the entropy is
    the same as for Z -> n (1 - Z)).
    """
    if n < 1:
        raise DomainError("standardization needs n >= 1")
    if rule.kind == "alpha":
        a = rule.param
        return Standardization(a, math.sqrt(n / (a * (1.0 - a))))
    if rule.kind == "beta_power":
        b = rule.param
        return Standardization(n ** (b - 1.0), n ** (1.0 - b / 2.0))
    if rule.kind == "fixed_x":
        return Standardization(0.0, float(n))
    return Standardization(1.0, float(n))


def kl_to_standard_gaussian(
    spec: PosteriorSpec, std: Standardization, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> float:
    """KL divergence of the standard normal from the standardized posterior.

    D = E[ln f(Z) - ln scale + ln sqrt(2 pi) + (scale (Z - shift))**2 / 2]
    integrated by the oracle. The double-exponential substitution handles
    the logarithmic endpoint behaviour, so no truncation is needed.
    """
    c = log_norm_constant(spec) - math.log(std.scale) + 0.5 * math.log(2.0 * math.pi)
    n, x = spec.n, spec.x

    def g(p, q):
        out = c + 0.5 * (std.scale * (p - std.shift)) ** 2
        if x:
            out = out + x * np.log(p)
        if n - x:
            out = out + (n - x) * np.log(q)
        return out

    return oracle.kernel_expectation(x, n - x, g, cfg)
