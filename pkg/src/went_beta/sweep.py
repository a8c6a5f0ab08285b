"""Grid sweeps behind the command line tools, and their report formats."""
from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import entropy, inequalities, oracle, weighted
from .errors import DomainError, UnsupportedCombinationError
from .models import SCALE_KINDS, PosteriorSpec, RegimeRule, WeightSpec
from .posterior import standardization_for

THREADS_ENV = "WENT_BETA_THREADS"

CONVERGE_SCHEMA = "converge/1"
CONVERGE_COLUMNS = (
    "n", "x", "regime", "gamma", "scale", "kind", "order",
    "exact", "asymptotic", "gap", "rate_factor", "scaled_gap", "standardized",
)
BOUNDS_SCHEMA = "bounds/1"
BOUNDS_COLUMNS = (
    "kind", "n", "alpha", "rho", "gamma", "scale",
    "lhs", "bound", "slack", "valid", "cramer_rao", "asymptotic_bound",
)
ORACLE_SCHEMA = "oracle-check/1"
ORACLE_COLUMNS = (
    "quantity", "n", "x", "gamma", "scale", "order", "closed_form", "oracle", "rel_dev",
)

ORDERED_KINDS = ("renyi", "tsallis")


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition shared by the ``converge`` and ``bounds`` commands."""

    n_grid: tuple = (1000, 10000, 100000, 1000000)
    regime: RegimeRule = RegimeRule("alpha", 0.5)
    gamma_grid: tuple = (0.5,)
    scale_kinds: tuple = ("unit",)
    entropy_kinds: tuple = ("shannon",)
    order_params: tuple = (2.0,)
    output_path: Optional[str] = None
    format: str = "csv"
    alpha_grid: tuple = (0.3, 0.5)
    rho_grid: tuple = (0.4, 0.5, 0.6)
    bound_kinds: tuple = inequalities.BOUND_KINDS

    def __post_init__(self):
        for name in ("n_grid", "gamma_grid", "scale_kinds", "entropy_kinds", "alpha_grid", "bound_kinds"):
            if not getattr(self, name):
                raise DomainError(f"{name} must not be empty")
        if any(int(n) != n or n < 1 for n in self.n_grid):
            raise DomainError("n values must be integers >= 1")
        for s in self.scale_kinds:
            if s not in SCALE_KINDS:
                raise DomainError(f"unknown scale kind {s!r}")
        for k in self.entropy_kinds:
            if k not in entropy.KINDS:
                raise DomainError(f"unknown entropy kind {k!r}")
        for k in self.bound_kinds:
            if k not in inequalities.BOUND_KINDS:
                raise DomainError(f"unknown bound kind {k!r}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"unknown format {self.format!r}")
        if any(k in ORDERED_KINDS for k in self.entropy_kinds) and not self.order_params:
            raise DomainError("order_params must not be empty for renyi/tsallis")


def thread_count() -> int:
    """Worker count from WENT_BETA_THREADS (default 1)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, value)


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Map in parallel, returning results in input order."""
    workers = thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _weights(scale_kinds, gamma_grid) -> list:
    out = []
    for s in scale_kinds:
        if s == "unit":
            out.append(WeightSpec())
        else:
            out.extend(WeightSpec(g, s) for g in gamma_grid)
    return out


def _nan_if_unsupported(fn):
    try:
        return fn()
    except UnsupportedCombinationError:
        return math.nan


def converge_row(item) -> dict:
    n, rule, w, kind, order = item
    spec = rule.spec(n)
    exact = weighted.weighted_exact(kind, spec, w, order)
    asym = _nan_if_unsupported(lambda: weighted.weighted_asymptotic_prediction(kind, rule, n, w, order))
    gap = exact - asym
    rate = entropy.rate_factor(kind, rule, n)
    standardized = math.nan
    if kind == "shannon" and w.is_unit:
        standardized = entropy.shannon_standardized(spec, standardization_for(rule, n))
    return {
        "n": n,
        "x": spec.x,
        "regime": str(rule),
        "gamma": None if w.is_unit else w.gamma,
        "scale": w.scale_kind,
        "kind": kind,
        "order": order,
        "exact": exact,
        "asymptotic": asym,
        "gap": gap,
        "rate_factor": rate,
        "scaled_gap": gap * rate,
        "standardized": standardized,
    }


def converge_items(cfg: SweepConfig) -> list:
    items = []
    for n in cfg.n_grid:
        for w in _weights(cfg.scale_kinds, cfg.gamma_grid):
            for kind in cfg.entropy_kinds:
                orders = cfg.order_params if kind in ORDERED_KINDS else (None,)
                for order in orders:
                    items.append((int(n), cfg.regime, w, kind, order))
    return items


def converge_rows(cfg: SweepConfig) -> list:
    return parallel_map(converge_row, converge_items(cfg))


def bounds_row(item) -> dict:
    kind, n, alpha, rho, w = item
    rule = RegimeRule("alpha", alpha)
    spec = rule.spec(n)
    if kind == "cramer_rao":
        rep = inequalities.cramer_rao_report(spec, w, alpha=alpha)
    elif kind == "bhattacharyya2":
        rep = inequalities.bhattacharyya2_bound(spec, w, alpha=alpha)
    else:
        rep = inequalities.kullback_report(spec, RegimeRule("alpha", rho).spec(n), w, alpha=alpha, rho=rho)
    return {
        "kind": kind,
        "n": n,
        "alpha": alpha,
        "rho": rho,
        "gamma": None if w.is_unit else w.gamma,
        "scale": w.scale_kind,
        "lhs": rep.lhs,
        "bound": rep.bound,
        "slack": rep.slack,
        "valid": rep.valid,
        "cramer_rao": rep.cramer_rao,
        "asymptotic_bound": rep.asymptotic_bound,
    }


def bounds_items(cfg: SweepConfig) -> list:
    items = []
    weights = _weights(cfg.scale_kinds, cfg.gamma_grid)
    for kind in cfg.bound_kinds:
        for n in cfg.n_grid:
            for alpha in cfg.alpha_grid:
                rhos = cfg.rho_grid if kind == "kullback" else (None,)
                for rho in rhos:
                    for w in weights:
                        items.append((kind, int(n), alpha, rho, w))
    return items


def bounds_rows(cfg: SweepConfig) -> list:
    return parallel_map(bounds_row, bounds_items(cfg))


# ---------------------------------------------------------------- oracle grid

STANDARD_N = (2, 10, 100, 1000, 10000)
WEIGHTED_N = (10, 100, 1000, 10000)
WEIGHTED_GAMMAS = (0.2, 0.5, 0.8)
WEIGHTED_SCALES = ("const", "sqrt_n", "linear_n")
RENYI_ORDERS = (0.5, 2.0, 5.0)
TSALLIS_ORDERS = (0.5, 2.0)


def standard_grid() -> list:
    """(quantity, spec, weight, order) tuples checked against the oracle.

    Weighted Tsallis points whose power integral exceeds the float range
    are left out, since neither side can represent them.
    """
    items = []
    for n in STANDARD_N:
        xs = sorted({0, 1, n // 4, n // 2, n})
        for x in xs:
            spec = PosteriorSpec(n, x)
            w = WeightSpec()
            items.append(("shannon", spec, w, None))
            items.extend(("renyi", spec, w, nu) for nu in RENYI_ORDERS)
            items.extend(("tsallis", spec, w, q) for q in TSALLIS_ORDERS)
            items.append(("fisher", spec, w, None))
    for n in WEIGHTED_N:
        for g in WEIGHTED_GAMMAS:
            for s in WEIGHTED_SCALES:
                w = WeightSpec(g, s)
                for x in (n // 4, n // 2):
                    spec = PosteriorSpec(n, x)
                    items.append(("log_normalizer", spec, w, None))
                    items.append(("weighted_mean", spec, w, None))
                    items.append(("shannon", spec, w, None))
                    items.extend(("renyi", spec, w, nu) for nu in (0.5, 2.0))
                    items.extend(
                        ("tsallis", spec, w, q) for q in (0.5, 2.0)
                        if weighted.log_weighted_power_integral(spec, w, q) < entropy.LOG_FLOAT_MAX
                    )
                    items.append(("fisher", spec, w, None))
    return items


def closed_form(quantity: str, spec: PosteriorSpec, w: WeightSpec, order) -> float:
    if quantity == "log_normalizer":
        return weighted.log_normalizer(spec, w)
    if quantity == "weighted_mean":
        return weighted.weighted_moments(spec, w).g
    if w.is_unit:
        return entropy.exact(quantity, spec, order)
    return weighted.weighted_exact(quantity, spec, w, order)


def oracle_value(quantity: str, spec: PosteriorSpec, w: WeightSpec, order, cfg=oracle.DEFAULT_CONFIG) -> float:
    if quantity == "log_normalizer":
        return oracle.log_weight_normalizer(spec, w, cfg)
    if quantity == "weighted_mean":
        return oracle.weighted_expectation(spec, w, lambda p, q: p, cfg)
    return oracle.weighted_entropy_oracle(spec, w, quantity, cfg, order)


def relative_deviation(a: float, b: float) -> float:
    """|a - b| / max(1, |b|): relative for large values, absolute near zero."""
    return abs(a - b) / max(1.0, abs(b))


def oracle_row(item) -> dict:
    quantity, spec, w, order = item
    cf = closed_form(quantity, spec, w, order)
    ov = oracle_value(quantity, spec, w, order)
    return {
        "quantity": quantity,
        "n": spec.n,
        "x": spec.x,
        "gamma": None if w.is_unit else w.gamma,
        "scale": w.scale_kind,
        "order": order,
        "closed_form": cf,
        "oracle": ov,
        "rel_dev": relative_deviation(cf, ov),
    }


def oracle_rows(items: Optional[Iterable] = None) -> list:
    return parallel_map(oracle_row, list(items if items is not None else standard_grid()))


# ---------------------------------------------------------------- emission

def _plain(v):
    # numpy scalars become builtins so CSV and JSON agree
    return v.item() if isinstance(v, np.generic) else v


def format_value(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v + 0.0, ".17g")
    return str(v)


def _json_value(v):
    v = _plain(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render(rows: Sequence[dict], schema: str, columns: Sequence[str], fmt: str) -> str:
    """Serialize rows as versioned CSV or JSON text."""
    if fmt == "json":
        doc = {
            "schema": schema,
            "columns": list(columns),
            "rows": [{c: _json_value(r[c]) for c in columns} for r in rows],
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema={schema}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(format_value(r[c]) for c in columns) + "\n")
    return buf.getvalue()
