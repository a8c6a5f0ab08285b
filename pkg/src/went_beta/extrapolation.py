"""Recovery of expansion coefficients from a sequence of exact values."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DomainError


def fit_expansion(ns: Sequence[float], values: Sequence[float], exponents: Sequence[float]) -> np.ndarray:
    """Coefficients c_i of values(n) = sum_i c_i n**e_i, by exact interpolation.

    With as many sample points as exponents this is generalized Richardson
    extrapolation: the remainder terms are eliminated order by order. With
    more points the system is solved in the least-squares sense. Columns
    are scaled to unit size at the largest n before solving.
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    exponents = np.asarray(exponents, dtype=float)
    if ns.ndim != 1 or ns.shape != values.shape:
        raise DomainError("ns and values must be 1-D and of equal length")
    if ns.size < exponents.size:
        raise DomainError("need at least as many samples as exponents")
    scale = ns.max() ** exponents
    design = ns[:, None] ** exponents[None, :] / scale[None, :]
    if ns.size == exponents.size:
        coef = np.linalg.solve(design, values)
    else:
        coef = np.linalg.lstsq(design, values, rcond=None)[0]
    return coef / scale
