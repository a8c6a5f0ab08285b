"""Independent quadrature on (0, 1).

Every closed form in the package is checked against the integrals computed
here. The module depends only on ``specfun`` (for the digamma constants of
the Fisher score) and the data types in ``models``; it never calls the
closed-form entropy, weight or bound code.

Integrands are vectorized callables ``f(p, q)`` where ``q = 1 - p`` is
supplied separately so that it stays accurate when p is close to 1.

In ``variable_transform`` mode (the default) the interval is mapped by the
double-exponential substitution p = (1 + tanh(pi/2 sinh t)) / 2 onto the
real line. Beta kernels, logarithms and their powers become smooth,
double-exponentially decaying functions of t, which are then integrated by
adaptive bisection on [-T, T] with a 20-point Gauss-Legendre rule per
panel; the 10-point rule on the same panel provides the error estimate.
``clip`` mode integrates the untransformed function on [eps, 1 - eps] and
is kept for diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError
from .models import PosteriorSpec, WeightSpec
from .specfun import digamma

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]

_T_MAX = 6.0
_N_INITIAL = 16
_MAX_EVALUATIONS = 3_000_000
# panel errors below this multiple of eps * integral of |f| are rounding noise
_ROUNDOFF = 1024.0 * np.finfo(float).eps
_X20, _W20 = np.polynomial.legendre.leggauss(20)
_X10, _W10 = np.polynomial.legendre.leggauss(10)
_NODES = np.concatenate([_X20, _X10])


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_depth: int = 30
    endpoint_mode: str = "variable_transform"
    clip_eps: float = 1e-12

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be at least 1")
        if self.endpoint_mode not in ("variable_transform", "clip"):
            raise DomainError(f"unknown endpoint mode {self.endpoint_mode!r}")
        if not 0 < self.clip_eps < 0.5:
            raise DomainError("clip_eps must lie in (0, 1/2)")

    def tightened(self, factor: float = 0.5) -> "QuadratureConfig":
        return QuadratureConfig(
            self.abs_tol * factor, self.rel_tol * factor, self.max_depth,
            self.endpoint_mode, self.clip_eps,
        )


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool


def _de_map(t: np.ndarray):
    # p = 1 / (1 + exp(-2u)), q = 1 - p, computed from exp(-2|u|) on both sides
    u = 0.5 * math.pi * np.sinh(t)
    e = np.exp(-2.0 * np.abs(u))
    big = 1.0 / (1.0 + e)
    small = e / (1.0 + e)
    pos = u >= 0
    p = np.where(pos, big, small)
    q = np.where(pos, small, big)
    jac = math.pi * p * q * np.cosh(t)
    return p, q, jac


def _p_to_t(p: float) -> float:
    u = 0.5 * (math.log(p) - math.log1p(-p))
    return math.asinh(2.0 * u / math.pi)


def _evaluate(f: Integrand, lo: np.ndarray, hi: np.ndarray, transform: bool):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    if transform:
        p, q, jac = _de_map(x)
    else:
        p, q, jac = x, 1.0 - x, np.ones_like(x)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(p, q), dtype=float) * jac
    # the integrand may overflow to nan where the weight underflows
    vals = np.where((jac == 0.0) | (p == 0.0) | (q == 0.0), 0.0, vals)
    if not np.all(np.isfinite(vals)):
        raise ConvergenceError("integrand is not finite at a quadrature node")
    hi_rule = half * (vals[:, :20] @ _W20)
    lo_rule = half * (vals[:, 20:] @ _W10)
    mass = half * (np.abs(vals[:, :20]) @ _W20)
    return hi_rule, np.abs(hi_rule - lo_rule), mass


def integrate(
    f: Integrand,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    points: Optional[Iterable[float]] = None,
    noise: float = 0.0,
) -> QuadratureResult:
    """Integrate ``f(p, q)`` over p in (0, 1).

    Parameters
    ----------
    f : callable
        Vectorized integrand taking arrays p and q = 1 - p.
    cfg : QuadratureConfig
        Tolerances, depth limit and endpoint handling.
    points : iterable of float, optional
        Locations in (0, 1) where the integrand has structure (a narrow
        peak). They become panel boundaries of the initial partition so
        that the first sweep cannot step over the feature.
    noise : float, optional
        Relative rounding level of the integrand values. Panels whose
        error estimate is below this fraction of the integral of |f| over
        the panel are accepted.

    Returns
    -------
    QuadratureResult
        ``converged`` is False if some panel hit ``cfg.max_depth`` or the
        evaluation budget ran out; the value is then the best available
        estimate. A panel whose error estimate is at the rounding level of
        the integral of |f| over it is accepted, since no refinement can
        improve it.
    """
    transform = cfg.endpoint_mode == "variable_transform"
    if transform:
        lo_end, hi_end = -_T_MAX, _T_MAX
        to_axis = _p_to_t
    else:
        lo_end, hi_end = cfg.clip_eps, 1.0 - cfg.clip_eps
        to_axis = float
    cuts = set(np.linspace(lo_end, hi_end, _N_INITIAL + 1).tolist())
    for p in points or ():
        if 0.0 < p < 1.0:
            t = to_axis(p)
            if lo_end < t < hi_end:
                cuts.add(t)
    edges = np.array(sorted(cuts))
    lo, hi = edges[:-1], edges[1:]
    depth = np.zeros(lo.size, dtype=int)
    span = hi_end - lo_end
    floor = max(_ROUNDOFF, noise)

    done_lo, done_val, done_err = [], [], []
    evaluations = 0
    converged = True
    while lo.size:
        vals, errs, mass = _evaluate(f, lo, hi, transform)
        evaluations += vals.size * _NODES.size
        estimate = math.fsum(done_val) + math.fsum(vals.tolist())
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(estimate))
        if math.fsum(done_err) + float(errs.sum()) <= tol:
            accept = np.ones(lo.size, dtype=bool)
        else:
            accept = (errs <= tol * (hi - lo) / span) | (errs <= floor * mass)
        stuck = ~accept & (depth >= cfg.max_depth)
        if evaluations >= _MAX_EVALUATIONS:
            stuck = ~accept
        if stuck.any():
            converged = False
            accept |= stuck
        done_lo.extend(lo[accept].tolist())
        done_val.extend(vals[accept].tolist())
        done_err.extend(errs[accept].tolist())
        keep = ~accept
        l, h, d = lo[keep], hi[keep], depth[keep]
        m = 0.5 * (l + h)
        lo = np.concatenate([l, m])
        hi = np.concatenate([m, h])
        depth = np.concatenate([d, d]) + 1
    # deterministic summation order: by panel position
    order = np.argsort(np.asarray(done_lo), kind="stable")
    value = math.fsum(np.asarray(done_val)[order].tolist())
    error = math.fsum(np.asarray(done_err)[order].tolist())
    return QuadratureResult(value, error, evaluations, converged)


def _require(res: QuadratureResult, what: str) -> QuadratureResult:
    if not res.converged:
        raise ConvergenceError(f"quadrature for {what} did not converge (error {res.error_estimate:.3g})")
    return res


def _kernel_points(a: float, b: float) -> list:
    # mode of p**a q**b and a ladder of standard deviations around it
    m = a / (a + b) if a + b > 0 else 0.5
    sd = math.sqrt((a + 1.0) * (b + 1.0) / ((a + b + 2.0) ** 2 * (a + b + 3.0)))
    pts = [m]
    for k in (0.5, 1, 2, 3, 5, 8, 13, 21, 34):
        pts.extend((m - k * sd, m + k * sd))
    return [p for p in pts if 1e-300 < p < 1.0 - 1e-16]


def _kernel_noise(a: float, b: float) -> float:
    # a ln p + b ln q carries an absolute rounding error of order eps (a + b)
    return _ROUNDOFF * (1.0 + 0.0625 * (a + b))


def _log_kernel_peak(a: float, b: float) -> float:
    if a + b == 0:
        return 0.0
    # logs taken separately so a subnormal exponent cannot underflow the ratio
    out, log_total = 0.0, math.log(a + b)
    if a > 0:
        out += a * (math.log(a) - log_total)
    if b > 0:
        out += b * (math.log(b) - log_total)
    return out


def kernel_integral(
    a: float,
    b: float,
    g: Optional[Integrand] = None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> tuple[float, QuadratureResult]:
    """Integral of p**a (1 - p)**b g(p) over (0, 1), returned in scaled form.

    The kernel is divided by its peak value before integration so that
    very large exponents cannot underflow. The integral equals
    ``exp(log_scale) * result.value``.

    Returns
    -------
    log_scale : float
    result : QuadratureResult
    """
    log_scale = _log_kernel_peak(a, b)

    def integrand(p, q):
        k = np.exp(a * np.log(p) + b * np.log(q) - log_scale)
        return k if g is None else k * g(p, q)

    res = integrate(integrand, cfg, points=_kernel_points(a, b), noise=_kernel_noise(a, b))
    return log_scale, _require(res, f"kernel ({a}, {b})")


def log_kernel_mass(a: float, b: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """ln of the integral of p**a (1 - p)**b over (0, 1), by quadrature."""
    scale, res = kernel_integral(a, b, None, cfg)
    return scale + math.log(res.value)


def kernel_expectation(a: float, b: float, g: Integrand, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Mean of g under the density proportional to p**a (1 - p)**b.

    Both the numerator and the normalizing mass are computed by quadrature.
    """
    _, num = kernel_integral(a, b, g, cfg)
    _, den = kernel_integral(a, b, None, cfg)
    return num.value / den.value


def log_posterior_constant(spec: PosteriorSpec) -> float:
    """ln((n + 1) C(n, x)), the constant in front of p**x (1 - p)**(n - x)."""
    n, x = spec.n, spec.x
    return math.lgamma(n + 2) - math.lgamma(x + 1) - math.lgamma(n - x + 1)


def _log_f(spec: PosteriorSpec, c: float, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    out = np.full(np.shape(p), c)
    if spec.x:
        out = out + spec.x * np.log(p)
    if spec.n - spec.x:
        out = out + (spec.n - spec.x) * np.log(q)
    return out


def _tilt(spec: PosteriorSpec, w: WeightSpec) -> tuple[float, float]:
    s = w.exponent(spec.n)
    return w.gamma * s, (1.0 - w.gamma) * s


def log_weight_normalizer(spec: PosteriorSpec, w: WeightSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """ln kappa = ln of the integral of the unnormalized weight times f."""
    if w.is_unit:
        return 0.0
    ga, gb = _tilt(spec, w)
    c = log_posterior_constant(spec)
    return c + log_kernel_mass(spec.x + ga, spec.n - spec.x + gb, cfg)


def weighted_expectation(
    spec: PosteriorSpec, w: WeightSpec, g: Integrand, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> float:
    """Integral of g phi f over (0, 1) with phi normalized by quadrature."""
    ga, gb = _tilt(spec, w)
    return kernel_expectation(spec.x + ga, spec.n - spec.x + gb, g, cfg)


def fisher_score(spec: PosteriorSpec) -> Integrand:
    """Score d/d(alpha) ln f with x = alpha n held on the curve x/n = alpha."""
    n, x = spec.n, spec.x
    c = n * (digamma(n - x + 1) - digamma(x + 1))

    def score(p, q):
        return n * (np.log(p) - np.log(q)) + c

    return score


def weighted_entropy_oracle(
    spec: PosteriorSpec,
    w: WeightSpec,
    kind: str,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    order: Optional[float] = None,
) -> float:
    """Weighted Shannon, Renyi, Tsallis entropy or Fisher information by quadrature.

    Parameters
    ----------
    kind : {'shannon', 'renyi', 'tsallis', 'fisher'}
    order : float, optional
        nu for Renyi, q for Tsallis; must differ from 1.
    """
    c = log_posterior_constant(spec)
    ga, gb = _tilt(spec, w)
    a0, b0 = spec.x + ga, spec.n - spec.x + gb
    if kind == "shannon":
        return -kernel_expectation(a0, b0, lambda p, q: _log_f(spec, c, p, q), cfg)
    if kind == "fisher":
        score = fisher_score(spec)
        return kernel_expectation(a0, b0, lambda p, q: score(p, q) ** 2, cfg)
    if kind in ("renyi", "tsallis"):
        if order is None or not order > 0 or order == 1:
            raise DomainError(f"{kind} needs a positive order different from 1")
        nu = float(order)
        # ln of the integral of phi f**nu = nu c - ln kappa + ln of the tilted kernel mass
        log_kappa = c + log_kernel_mass(a0, b0, cfg) if not w.is_unit else 0.0
        log_v = nu * c - log_kappa + log_kernel_mass(nu * spec.x + ga, nu * (spec.n - spec.x) + gb, cfg)
        if kind == "renyi":
            return log_v / (1.0 - nu)
        return -math.expm1(log_v) / (nu - 1.0)
    raise DomainError(f"unknown entropy kind {kind!r}")


def raw_moment_oracle(spec: PosteriorSpec, k: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """E[Z**k] under the unweighted posterior, by quadrature."""
    return kernel_expectation(spec.x, spec.n - spec.x, lambda p, q: p ** k, cfg)


def central_moment_oracle(
    spec: PosteriorSpec, k: int, center: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> float:
    """E[(Z - center)**k] under the unweighted posterior, by quadrature."""
    return kernel_expectation(spec.x, spec.n - spec.x, lambda p, q: (p - center) ** k, cfg)


def log_integrate(
    logh: Integrand, cfg: QuadratureConfig = DEFAULT_CONFIG, points: Optional[Iterable[float]] = None
) -> float:
    """ln of the integral of exp(logh(p, q)) over (0, 1).

    The integrand is rescaled by its largest value on a probe grid before
    integration, so logh may range far outside the double exponent range.
    """
    points = list(points or ())
    p, q, _ = _de_map(np.linspace(-_T_MAX, _T_MAX, 2001))
    probe_p = np.concatenate([p, np.asarray(points, dtype=float)])
    probe_q = np.concatenate([q, 1.0 - np.asarray(points, dtype=float)])
    with np.errstate(all="ignore"):
        top = float(np.nanmax(logh(probe_p, probe_q)))
    res = integrate(lambda p, q: np.exp(logh(p, q) - top), cfg, points=points, noise=_ROUNDOFF * (1.0 + 0.0625 * abs(top)))
    return top + math.log(_require(res, "log integral").value)


def mgf_oracle(
    spec: PosteriorSpec, w: WeightSpec, t: float, norm_spec: PosteriorSpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """ln of the integral of phi exp(t p) f, phi normalized against ``norm_spec``."""
    ga, gb = _tilt(spec, w)
    a, b = spec.x + ga, spec.n - spec.x + gb
    log_kappa = log_weight_normalizer(norm_spec, w, cfg)
    c = log_posterior_constant(spec)

    def logh(p, q):
        return a * np.log(p) + b * np.log(q) + t * p

    return c - log_kappa + log_integrate(logh, cfg, _kernel_points(a, b))


def standard_points(spec: PosteriorSpec) -> Sequence[float]:
    """Initial partition points adapted to the posterior peak."""
    return _kernel_points(spec.x, spec.n - spec.x)
