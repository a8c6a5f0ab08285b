"""Special functions on the positive real axis.

log-gamma is delegated to ``math.lgamma``. Digamma and trigamma use an
upward recurrence to x >= 10 followed by the Stirling-type asymptotic
series, which gives close to full double precision everywhere. The
hypergeometric helpers cover only the two cases needed here: the
terminating Gauss series and the confluent series with positive terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

EULER_GAMMA = 0.577215664901532860606512090082

_SHIFT = 10.0

# B_{2k} / (2k), k = 1..8, for the digamma series in 1/x**2
_PSI_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
)

# B_{2k}, k = 1..8, for the trigamma series
_PSI1_COEF = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)


@dataclass(frozen=True)
class SeriesControl:
    """Stopping rule for power series."""

    rel_tol: float = 1e-14
    max_terms: int = 1_000_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")


def _positive(x, name="x") -> float:
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"{name} must be positive and finite, got {x}")
    return x


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0."""
    return math.lgamma(_positive(x))


# B_{2k} / (2k (2k - 1)), k = 1..8, for the Stirling remainder of ln Gamma
_LGAMMA_CORR = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirling_remainder(x: float) -> float:
    # ln Gamma(x) - ((x - 1/2) ln x - x + ln(2 pi)/2), x >= 10
    return log_gamma_remainder(x)


def log_gamma_remainder(x: float) -> float:
    """ln Gamma(x) - (x - 1/2) ln x + x - ln(2 pi)/2, for x >= 10."""
    if not x >= _SHIFT:
        raise DomainError(f"remainder series needs x >= {_SHIFT:g}, got {x}")
    z = 1.0 / (x * x)
    acc = 0.0
    for c in reversed(_LGAMMA_CORR):
        acc = acc * z + c
    return acc / x


def log_beta(a: float, b: float) -> float:
    """ln B(a, b).

    Plain log-gamma sums lose absolute accuracy of order eps * ln Gamma(a + b)
    when an argument is large, so above 10 the leading Stirling terms are
    combined analytically and only the small remainders are subtracted.
    """
    a = _positive(a, "a")
    b = _positive(b, "b")
    p, q = min(a, b), max(a, b)
    if q < _SHIFT:
        return math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)
    r = p / (p + q)
    corr = _stirling_remainder(q) - _stirling_remainder(p + q)
    if p < _SHIFT:
        return math.fsum([math.lgamma(p), corr, p, -p * math.log(p + q), (q - 0.5) * math.log1p(-r)])
    return math.fsum([
        -0.5 * math.log(q), _HALF_LOG_2PI, _stirling_remainder(p), corr,
        (p - 0.5) * math.log(r), q * math.log1p(-r),
    ])


def log_gamma_diff(z: float, h: float) -> float:
    """ln Gamma(z + h) - ln Gamma(z) without cancellation for small h.

    Both arguments are shifted to at least 10 with the recurrence, which
    contributes -log1p(h / (z + i)) terms, and the Stirling forms are then
    subtracted analytically: (z - 1/2) log1p(h / z) + h ln(z + h) - h plus
    the difference of the series remainders.
    """
    z = _positive(z, "z")
    _positive(z + h, "z + h")
    if h == 0.0:
        return 0.0
    parts = []
    while min(z, z + h) < _SHIFT:
        parts.append(-math.log1p(h / z))
        z += 1.0
    w = z + h
    parts.extend([
        (z - 0.5) * math.log1p(h / z), h * math.log(w), -h,
        log_gamma_remainder(w), -log_gamma_remainder(z),
    ])
    return math.fsum(parts)


def log_pochhammer(q: float, k: int) -> float:
    """ln of the rising factorial (q)_k for q > 0."""
    q = _positive(q, "q")
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k == 0:
        return 0.0
    # Gamma(q + k) / Gamma(q) = Gamma(k) / B(q, k)
    return math.lgamma(k) - log_beta(q, k)


def pochhammer(q: float, k: int) -> float:
    """Rising factorial (q)_k = q (q + 1) ... (q + k - 1), any real q."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    out = 1.0
    for i in range(k):
        out *= q + i
    return out


def _psi_series(x: float) -> float:
    return math.log(x) - 0.5 / x - _psi_tail(x)


def _psi_tail(x: float) -> float:
    z = 1.0 / (x * x)
    acc = 0.0
    for c in reversed(_PSI_COEF):
        acc = acc * z + c
    return z * acc


def digamma_remainder(x: float) -> float:
    """ln x - 1/(2x) - psi(x), for x >= 10."""
    if not x >= _SHIFT:
        raise DomainError(f"remainder series needs x >= {_SHIFT:g}, got {x}")
    return _psi_tail(x)


def _psi1_series(x: float) -> float:
    z = 1.0 / (x * x)
    acc = 0.0
    for c in reversed(_PSI1_COEF):
        acc = acc * z + c
    return 1.0 / x + 0.5 * z + z * acc / x


def digamma(x: float) -> float:
    """Digamma function psi(x) = d/dx ln Gamma(x) for x > 0."""
    x = _positive(x)
    shifts = []
    while x < _SHIFT:
        shifts.append(1.0 / x)
        x += 1.0
    if not shifts:
        return _psi_series(x)
    return math.fsum([_psi_series(x)] + [-s for s in shifts])


def trigamma(x: float) -> float:
    """Trigamma function psi'(x) for x > 0."""
    x = _positive(x)
    shifts = []
    while x < _SHIFT:
        shifts.append(1.0 / (x * x))
        x += 1.0
    # small terms first
    return math.fsum(shifts[::-1] + [_psi1_series(x)])


def digamma_diff(x: float, y: float) -> float:
    """psi(y) - psi(x) without cancellation when y is close to x.

    Differences such as psi(x + gamma s + 1) - psi(x + 1) are of order
    s / x while each term is of order ln x, so subtracting two digamma
    values loses about log10(x / s) digits. Here the difference is formed
    term by term from y - x.
    """
    x = _positive(x)
    y = _positive(y)
    if x == y:
        return 0.0
    if y < x:
        return -digamma_diff(y, x)
    h = y - x
    parts = []
    while min(x, y) < _SHIFT:
        # 1/(y) - 1/(x) = -h / (x y)
        parts.append(h / (x * y))
        x += 1.0
        y += 1.0
    zx = 1.0 / (x * x)
    zy = 1.0 / (y * y)
    dz = -h * (x + y) * zx * zy
    # sum_k c_k (zy**k - zx**k) = dz * sum_k c_k sum_{j<k} zy**j zx**(k-1-j)
    poly = 0.0
    for k, c in enumerate(_PSI_COEF, start=1):
        poly += c * sum(zy**j * zx ** (k - 1 - j) for j in range(k))
    series = (
        math.log1p(h / x)
        + 0.5 * h / (x * y)
        - dz * poly
    )
    return math.fsum([series] + parts)


def gauss_2f1_terminating(k: int, b: float, c: float, z: float) -> float:
    """Terminating Gauss series 2F1(-k, b; c; z).

    Sum of k + 1 terms (-1)**i C(k, i) (b)_i / (c)_i z**i. The terms
    alternate and cancel strongly for the moment formulas, so they are
    added with ``math.fsum`` (exactly rounded summation).
    """
    if int(k) != k or k < 0:
        raise DomainError("k must be a nonnegative integer")
    k = int(k)
    terms = [1.0]
    t = 1.0
    for i in range(k):
        den = c + i
        if den == 0:
            raise DomainError(f"zero Pochhammer denominator (c)_{i + 1} with c={c}")
        t *= (i - k) * (b + i) / (den * (i + 1)) * z
        terms.append(t)
    return math.fsum(terms)


def _check_c(c: float):
    if c <= 0 and float(c).is_integer():
        raise DomainError(f"c must not be a nonpositive integer, got {c}")


def _log_positive_series(a: float, c: float, t: float, ctl: SeriesControl) -> float:
    # log of sum_k (a)_k / (c)_k t**k / k! with a, c, t > 0; all terms positive
    lt = math.log(t)
    chunk = 256
    pieces = [np.zeros(1)]
    last = 0.0
    top = 0.0
    k0 = 0
    while True:
        k = np.arange(k0, k0 + chunk, dtype=float)
        r = np.log(a + k) - np.log(c + k) - np.log1p(k) + lt
        cum = last + np.cumsum(r)
        pieces.append(cum)
        last = float(cum[-1])
        top = max(top, float(cum.max()))
        k0 += chunk
        # once the term ratio is below 1/2 the tail is bounded by the last term
        if r[-1] < -math.log(2.0) and last < top + math.log(ctl.rel_tol) - 3.0:
            break
        if k0 >= ctl.max_terms:
            raise ConvergenceError(f"1F1({a}; {c}; {t}) did not converge in {ctl.max_terms} terms")
        chunk = min(2 * chunk, 65536)
    logs = np.concatenate(pieces)
    return top + math.log(float(np.sum(np.exp(logs - top))))


def _direct_series(a: float, c: float, t: float, ctl: SeriesControl) -> float:
    terms = [1.0]
    term = 1.0
    for k in range(ctl.max_terms):
        term *= (a + k) / (c + k) * t / (k + 1)
        terms.append(term)
        if term == 0.0:
            return math.fsum(terms)
        if k > abs(t) and abs(term) <= ctl.rel_tol * abs(math.fsum(terms)) * 1e-2:
            return math.fsum(terms)
    raise ConvergenceError(f"1F1({a}; {c}; {t}) did not converge in {ctl.max_terms} terms")


def log_kummer_1f1(a: float, c: float, t: float, ctl: SeriesControl = SeriesControl()) -> float:
    """Natural log of the confluent function 1F1(a; c; t) when it is positive.

    For a, c > 0 and t >= 0 the series has positive terms and is summed in
    the log domain, so values far beyond the double range are fine. For
    t < 0 the Kummer transformation 1F1(a; c; t) = e**t 1F1(c - a; c; -t)
    is used when c - a > 0.
    """
    _check_c(c)
    if t == 0.0:
        return 0.0
    if a == c:
        return float(t)
    if a == 0.0:
        return 0.0
    if t < 0.0 and c > 0 and c - a > 0:
        return t + log_kummer_1f1(c - a, c, -t, ctl)
    if t > 0.0 and a > 0 and c > 0:
        return _log_positive_series(a, c, t, ctl)
    v = _direct_series(a, c, t, ctl)
    if not v > 0:
        raise DomainError(f"1F1({a}; {c}; {t}) = {v} is not positive")
    return math.log(v)


def kummer_1f1(a: float, c: float, t: float, ctl: SeriesControl = SeriesControl()) -> float:
    """Confluent hypergeometric function 1F1(a; c; t) by its power series."""
    _check_c(c)
    positive = (t >= 0 and a >= 0 and c > 0) or (t < 0 and c > 0 and c - a > 0)
    if positive:
        return math.exp(log_kummer_1f1(a, c, t, ctl))
    return _direct_series(a, c, t, ctl)
