"""Weighted Cramer-Rao, second-order Bhattacharyya and Kullback lower bounds.

The parameter is alpha with x = alpha n held on the curve, the statistic
is T(Z) = Z, and the weighted variance is taken about the classical mean
e = (x + 1) / (n + 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import oracle
from .errors import ConvergenceError, DegenerateInformationError, DomainError, UnsupportedCombinationError
from .extrapolation import fit_expansion
from .models import PosteriorSpec, RegimeRule, WeightSpec
from .oracle import DEFAULT_CONFIG, QuadratureConfig
from .specfun import SeriesControl, log_kummer_1f1, trigamma
from .weighted import kappa_second_log_derivative, weighted_fisher, weighted_moments

BOUND_KINDS = ("cramer_rao", "bhattacharyya2", "kullback")
SLACK_RTOL = 1e-9


@dataclass(frozen=True)
class BhattacharyyaParts:
    """Ingredients of the second-order bound.

    i_matrix holds E_phi[f^(i) f^(j) / f**2]; q1 and q2 hold the weight
    correction terms (Q_1^1, Q_1^2) and (Q_2^1, Q_2^2); g_derivs holds
    (g', g'') of the weighted mean.
    """

    i_matrix: np.ndarray
    j_matrix: np.ndarray
    q1: tuple[float, float]
    q2: tuple[float, float]
    g_derivs: tuple[float, float]
    v: tuple[float, float]


@dataclass(frozen=True)
class BoundReport:
    kind: str
    lhs: float
    bound: float
    slack: float
    valid: bool
    asymptotic_bound: Optional[float] = None
    cramer_rao: Optional[float] = None
    parts: Optional[BhattacharyyaParts] = field(default=None, compare=False)


def _report(kind, lhs, bound, asymptotic=None, cramer_rao=None, parts=None) -> BoundReport:
    slack = lhs - bound
    valid = slack >= -SLACK_RTOL * max(1.0, abs(lhs))
    return BoundReport(kind, lhs, bound, slack, valid, asymptotic, cramer_rao, parts)


def weighted_variance(spec: PosteriorSpec, w: WeightSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """E_{phi f}[(Z - e)**2] by quadrature, e the classical posterior mean."""
    e = spec.a / (spec.n + 2)
    return oracle.weighted_expectation(spec, w, lambda p, q: (p - e) ** 2, cfg)


def _first_order_v(spec: PosteriorSpec, w: WeightSpec) -> float:
    m = weighted_moments(spec, w)
    return m.g_prime - m.kappa_ratio * (m.e - m.g)


def cramer_rao_bound(spec: PosteriorSpec, w: WeightSpec) -> float:
    """(g' - (kappa'/kappa)(e - g))**2 / I_phi."""
    info = weighted_fisher(spec, w)
    if not info > 0:
        raise DegenerateInformationError(f"weighted Fisher information {info} is not positive")
    return _first_order_v(spec, w) ** 2 / info


def cramer_rao_asymptotic(alpha: float, gamma: float, n: int, scale_kind: str) -> float:
    """Two-term large-n form of the Cramer-Rao bound.

    const: alpha(1-alpha)/n + (1 - 14a + 18a**2 + 2g - 8ag + 2g**2)/(2n**2).
    sqrt_n: (alpha(1-alpha) + (alpha-gamma)**2)/n + (-2a + a**2 + g + 2ag - 2g**2)/n**1.5.
    linear_n: (alpha - gamma)**2 / 4 (leading term only).
    unit: alpha(1-alpha)/n.
    """
    a, g = alpha, gamma
    if scale_kind == "unit":
        return a * (1 - a) / n
    if scale_kind == "const":
        return a * (1 - a) / n + (1 - 14 * a + 18 * a * a + 2 * g - 8 * a * g + 2 * g * g) / (2.0 * n * n)
    if scale_kind == "sqrt_n":
        return (a * (1 - a) + (a - g) ** 2) / n + (-2 * a + a * a + g + 2 * a * g - 2 * g * g) / n**1.5
    if scale_kind == "linear_n":
        return (a - g) ** 2 / 4.0
    raise UnsupportedCombinationError(f"unknown scale kind {scale_kind!r}")


def cramer_rao_report(
    spec: PosteriorSpec, w: WeightSpec, cfg: QuadratureConfig = DEFAULT_CONFIG,
    alpha: Optional[float] = None,
) -> BoundReport:
    asym = None
    if alpha is not None:
        asym = cramer_rao_asymptotic(alpha, w.gamma, spec.n, w.scale_kind)
    bound = cramer_rao_bound(spec, w)
    return _report("cramer_rao", weighted_variance(spec, w, cfg), bound, asym, bound)


def bhattacharyya_parts(spec: PosteriorSpec, w: WeightSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> BhattacharyyaParts:
    """Information matrix and correction terms for the second-order bound.

    With S the score and D = n**2 (psi'(x+1) + psi'(n-x+1)) its derivative
    up to sign, f'/f = S and f''/f = S**2 - D. The matrix entries are
    E_phi[S**2], E_phi[S (S**2 - D)] and E_phi[(S**2 - D)**2], all by
    quadrature. The Q terms come from derivatives of 1/kappa:
    with l = ln kappa, Q_1^1 = -l' g, Q_2^1 = -l',
    Q_1^2 = -(l'' + l'**2) g - 2 l' g', Q_2^2 = -(l'' + l'**2).
    """
    n = spec.n
    if n < 1:
        raise DomainError("the bound needs n >= 1")
    m = weighted_moments(spec, w)
    l1 = m.kappa_ratio
    l2 = kappa_second_log_derivative(spec, w)
    g, gp, e = m.g, m.g_prime, m.e
    score = oracle.fisher_score(spec)
    d = n * n * (trigamma(spec.a) + trigamma(spec.b))

    def second(p, q):
        s = score(p, q)
        return s * s - d

    i11 = oracle.weighted_expectation(spec, w, lambda p, q: score(p, q) ** 2, cfg)
    i12 = oracle.weighted_expectation(spec, w, lambda p, q: score(p, q) * second(p, q), cfg)
    i22 = oracle.weighted_expectation(spec, w, lambda p, q: second(p, q) ** 2, cfg)
    info = np.array([[i11, i12], [i12, i22]])
    det = i11 * i22 - i12 * i12
    if not (i11 > 0 and det > 0):
        raise DegenerateInformationError(f"information matrix is not positive definite (det {det:.3g})")
    inv = np.array([[i22, -i12], [-i12, i11]]) / det

    q1 = (-l1 * g, -(l2 + l1 * l1) * g - 2.0 * l1 * gp)
    q2 = (-l1, -(l2 + l1 * l1))
    g_derivs = (gp, 0.0)
    v = (g_derivs[0] - q1[0] + e * q2[0], g_derivs[1] - q1[1] + e * q2[1])
    return BhattacharyyaParts(info, inv, q1, q2, g_derivs, v)


def bhattacharyya2_bound(
    spec: PosteriorSpec, w: WeightSpec, cfg: QuadratureConfig = DEFAULT_CONFIG,
    alpha: Optional[float] = None,
) -> BoundReport:
    """Second-order weighted Bhattacharyya bound v^T I^{-1} v.

    Assembled as v1**2 / I11 + (v2 - I12 v1 / I11)**2 / (I22 - I12**2 / I11),
    the first term being the Cramer-Rao bound, so the refinement is
    visibly nonnegative.
    """
    parts = bhattacharyya_parts(spec, w, cfg)
    (i11, i12), (_, i22) = parts.i_matrix
    v1, v2 = parts.v
    schur = i22 - i12 * i12 / i11
    bound = v1 * v1 / i11 + (v2 - i12 * v1 / i11) ** 2 / schur
    asym = None
    if alpha is not None and w.scale_kind in ("unit", "sqrt_n") and alpha == w.gamma:
        asym = alpha * (1.0 - alpha) / spec.n
    return _report(
        "bhattacharyya2", weighted_variance(spec, w, cfg), bound, asym,
        cramer_rao_bound(spec, w), parts,
    )


def _tilted_shape(spec: PosteriorSpec, w: WeightSpec) -> tuple[float, float]:
    s = w.exponent(spec.n)
    return spec.x + w.gamma * s, spec.n - spec.x + (1.0 - w.gamma) * s


def calibrated_kl(
    spec_f: PosteriorSpec, spec_g: PosteriorSpec, w: WeightSpec, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> float:
    """Calibrated divergence: KL between phi f / C(f) and phi g / C(g).

    C(f) and C(g) are the integrals of phi f and phi g; the common factor
    1/kappa cancels, so the result does not depend on which posterior
    the weight is normalized against.
    """
    if spec_f.n != spec_g.n:
        raise DomainError("both posteriors must share n")
    n = spec_f.n
    cf = oracle.log_posterior_constant(spec_f)
    cg = oracle.log_posterior_constant(spec_g)
    af, bf = _tilted_shape(spec_f, w)
    ag, bg = _tilted_shape(spec_g, w)
    dx = spec_f.x - spec_g.x

    def log_ratio(p, q):
        # ln f - ln g
        return (cf - cg) + dx * (np.log(p) - np.log(q))

    mean_ratio = oracle.kernel_expectation(af, bf, log_ratio, cfg)
    log_cf = cf + oracle.log_kernel_mass(af, bf, cfg)
    log_cg = cg + oracle.log_kernel_mass(ag, bg, cfg)
    return max(mean_ratio + log_cg - log_cf, 0.0)


@dataclass(frozen=True)
class SupremumResult:
    value: float
    t: float
    iterations: int
    iterates: tuple


def _kummer_ctl(t: float) -> SeriesControl:
    return SeriesControl(max_terms=max(1_000_000, int(4 * abs(t)) + 100_000))


def legendre_supremum(mu: float, a: float, c: float, t_max: float, max_iter: int = 100, tol: float = 1e-10) -> SupremumResult:
    """Maximize phi(t) = t mu - ln 1F1(a; c; t) over [-t_max, t_max].

    phi is strictly concave (ln 1F1 is a cumulant generating function), so
    its maximizer solves M'(t)/M(t) = mu. Newton steps from t = 0 are kept
    inside a bracket [lo, hi] on which phi' changes sign and replaced by
    bisection whenever they leave it.
    """
    if not 0.0 < a < c:
        raise DomainError("need 0 < a < c")

    def log_m(t, da=0):
        return log_kummer_1f1(a + da, c + da, t, _kummer_ctl(t))

    def derivs(t):
        lm = log_m(t)
        r1 = a / c * math.exp(log_m(t, 1) - lm)
        r2 = a * (a + 1) / (c * (c + 1)) * math.exp(log_m(t, 2) - lm)
        # phi'(t) = mu - M'/M, phi''(t) = -(M''/M - (M'/M)**2)
        return mu - r1, -(r2 - r1 * r1)

    if not 0.0 < mu < 1.0:
        raise DomainError("mu must lie in (0, 1)")
    lo, hi = -t_max, t_max
    t = 0.0
    iterates = []
    for it in range(1, max_iter + 1):
        d1, d2 = derivs(t)
        iterates.append(t)
        if abs(d1) <= 1e-14:
            return SupremumResult(t * mu - log_m(t), t, it, tuple(iterates))
        if d1 > 0:
            lo = t
        else:
            hi = t
        step = -d1 / d2 if d2 < 0 else math.inf
        t_new = t + step
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= tol * max(1.0, abs(t)) or hi - lo <= tol * max(1.0, abs(t)):
            t = t_new
            value = t * mu - log_m(t)
            return SupremumResult(value, t, it, tuple(iterates))
        t = t_new
    raise ConvergenceError(f"supremum search did not converge in {max_iter} iterations")


def kullback_bound_details(spec_alpha: PosteriorSpec, spec_rho: PosteriorSpec, w: WeightSpec) -> SupremumResult:
    """Supremum of t mu - ln M(t), with the weight normalized against f_rho.

    mu is the mean of the tilted density phi f_alpha / C(f_alpha), which is
    (x_alpha + gamma s + 1) / (n + s + 2), and M(t) = 1F1(a; n + s + 2; t)
    with a = x_rho + gamma s + 1 is the weighted moment generating function
    of f_rho (ln C(f_rho) = 0 under this normalization).
    """
    if spec_alpha.n != spec_rho.n:
        raise DomainError("both posteriors must share n")
    n = spec_alpha.n
    s = w.exponent(n)
    c = n + s + 2.0
    mu = (spec_alpha.x + w.gamma * s + 1.0) / c
    a = spec_rho.x + w.gamma * s + 1.0
    return legendre_supremum(mu, a, c, t_max=4.0 * max(n, 1))


def kullback_bound(spec_alpha: PosteriorSpec, spec_rho: PosteriorSpec, w: WeightSpec) -> float:
    return kullback_bound_details(spec_alpha, spec_rho, w).value


def kullback_asymptotic(alpha: float, rho: float, n: int) -> float:
    """eps**2 (1 + sqrt(n) - n)**2 / (2 alpha (1 - alpha) n) with eps = alpha - rho."""
    eps = alpha - rho
    return eps * eps * (1.0 + math.sqrt(n) - n) ** 2 / (2.0 * alpha * (1.0 - alpha) * n)


def kullback_report(
    spec_alpha: PosteriorSpec, spec_rho: PosteriorSpec, w: WeightSpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG, alpha: Optional[float] = None, rho: Optional[float] = None,
) -> BoundReport:
    asym = None
    if alpha is not None and rho is not None:
        asym = kullback_asymptotic(alpha, rho, spec_alpha.n)
    return _report(
        "kullback", calibrated_kl(spec_alpha, spec_rho, w, cfg),
        kullback_bound(spec_alpha, spec_rho, w), asym,
    )


def recover_cramer_rao_constant(
    alpha: float, gamma: float, ns=tuple(1000 * 2**k for k in range(6))
) -> tuple[float, float]:
    """Fit the s = n Cramer-Rao bound to L + C3/n + c2/n**2 + ... and return (L, C3)."""
    rule = RegimeRule("alpha", alpha)
    w = WeightSpec(gamma, "linear_n")
    values = [cramer_rao_bound(rule.spec(n), w) for n in ns]
    coef = fit_expansion(ns, values, (0.0, -1.0, -2.0, -3.0, -4.0, -5.0))
    return float(coef[0]), float(coef[1])
