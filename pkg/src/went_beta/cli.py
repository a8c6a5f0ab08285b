"""Command line front end: ``entropy``, ``converge``, ``bounds`` and ``oracle-check``.

Exit codes: 0 success, 2 argument error, 3 numerical failure or oracle
mismatch, 4 inequality violation.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

from . import entropy, oracle, sweep, weighted
from .errors import DomainError, UnsupportedCombinationError
from .models import REGIME_KINDS, PosteriorSpec, RegimeRule, WeightSpec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_VIOLATION = 4

CONVERGE_DEFAULTS = {
    "n_grid": "1000,10000,100000,1000000",
    "regime": "alpha=0.5",
    "gamma_grid": "0.5",
    "scales": "unit",
    "kinds": "shannon",
    "orders": "2",
    "format": "csv",
}
BOUNDS_DEFAULTS = {
    "n_grid": "100,1000,10000",
    "alphas": "0.3,0.5",
    "rhos": "0.4,0.5,0.6",
    "gamma_grid": "0.3,0.5",
    "scales": "const,sqrt_n,linear_n",
    "bounds": ",".join(sweep.inequalities.BOUND_KINDS),
    "format": "csv",
}


class UsageError(Exception):
    """Raised for malformed flags or config files; maps to exit code 2."""


def parse_regime(text: str) -> RegimeRule:
    """``alpha=0.5``, ``beta_power=0.3``, ``fixed_x=2`` or ``fixed_gap=2``."""
    kind, sep, value = text.partition("=")
    kind = kind.strip()
    if not sep or kind not in REGIME_KINDS:
        raise UsageError(f"regime must be one of {', '.join(k + '=<v>' for k in REGIME_KINDS)}; got {text!r}")
    try:
        param = int(value) if kind in ("fixed_x", "fixed_gap") else float(value)
        return RegimeRule(kind, param)
    except (ValueError, DomainError) as exc:
        raise UsageError(f"bad regime {text!r}: {exc}") from None


def parse_weight(text: Optional[str]) -> WeightSpec:
    """``unit`` or ``gamma=<g>,scale=<kind>``."""
    if text is None or text.strip() == "unit":
        return WeightSpec()
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise UsageError(f"weight fields must be key=value, got {part!r}")
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"gamma", "scale"}
    if unknown:
        raise UsageError(f"unknown weight fields: {', '.join(sorted(unknown))}")
    try:
        return WeightSpec(float(fields.get("gamma", 0.5)), fields.get("scale", "const"))
    except (ValueError, DomainError) as exc:
        raise UsageError(f"bad weight {text!r}: {exc}") from None


def _split(text: str) -> list:
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _ints(text: str) -> tuple:
    out = []
    for t in _split(text):
        try:
            v = float(t)
        except ValueError:
            raise UsageError(f"expected an integer, got {t!r}") from None
        if v != int(v):
            raise UsageError(f"expected an integer, got {t!r}")
        out.append(int(v))
    return tuple(out)


def _floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in _split(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_config(path: str) -> dict:
    """Parse a key=value file; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    """Defaults, then the config file, then explicit flags."""
    values = dict(defaults)
    if args.config:
        cfg = read_config(args.config)
        unknown = set(cfg) - set(defaults) - {"output"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(cfg)
    for key in list(defaults) + ["output"]:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def converge_config(args: argparse.Namespace) -> sweep.SweepConfig:
    v = _merged(args, CONVERGE_DEFAULTS)
    try:
        return sweep.SweepConfig(
            n_grid=_ints(v["n_grid"]),
            regime=parse_regime(v["regime"]),
            gamma_grid=_floats(v["gamma_grid"]),
            scale_kinds=tuple(_split(v["scales"])),
            entropy_kinds=tuple(_split(v["kinds"])),
            order_params=_floats(v["orders"]),
            output_path=v.get("output"),
            format=v["format"],
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def bounds_config(args: argparse.Namespace) -> sweep.SweepConfig:
    v = _merged(args, BOUNDS_DEFAULTS)
    try:
        return sweep.SweepConfig(
            n_grid=_ints(v["n_grid"]),
            alpha_grid=_floats(v["alphas"]),
            rho_grid=_floats(v["rhos"]),
            gamma_grid=_floats(v["gamma_grid"]),
            scale_kinds=tuple(_split(v["scales"])),
            bound_kinds=tuple(_split(v["bounds"])),
            output_path=v.get("output"),
            format=v["format"],
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_converge(config: sweep.SweepConfig) -> int:
    """Convergence table, one row per (n, gamma, scale, kind, order)."""
    rows = sweep.converge_rows(config)
    _emit(sweep.render(rows, sweep.CONVERGE_SCHEMA, sweep.CONVERGE_COLUMNS, config.format), config.output_path)
    return EXIT_OK


def cmd_bounds(config: sweep.SweepConfig) -> int:
    """Inequality sweep; returns 4 if any row is invalid."""
    rows = sweep.bounds_rows(config)
    _emit(sweep.render(rows, sweep.BOUNDS_SCHEMA, sweep.BOUNDS_COLUMNS, config.format), config.output_path)
    bad = [r for r in rows if not r["valid"]]
    for r in bad:
        print(
            f"violation: {r['kind']} n={r['n']} alpha={r['alpha']} rho={r['rho']} "
            f"gamma={r['gamma']} scale={r['scale']} slack={r['slack']:.3e}",
            file=sys.stderr,
        )
    return EXIT_VIOLATION if bad else EXIT_OK


def _entropy_values(args: argparse.Namespace) -> dict:
    w = parse_weight(args.weight)
    if args.kind in sweep.ORDERED_KINDS and args.order is None:
        raise UsageError(f"--order is required for {args.kind}")
    order = args.order if args.kind in sweep.ORDERED_KINDS else None
    if args.regime is not None:
        if args.x is not None:
            raise UsageError("give either --x or --regime, not both")
        rule = parse_regime(args.regime)
        spec = rule.spec(args.n)
    else:
        if args.x is None:
            raise UsageError("one of --x or --regime is required")
        spec = PosteriorSpec(args.n, args.x)
        # the limit expression is evaluated at alpha = x / n
        try:
            rule = RegimeRule("alpha", args.x / args.n)
        except (DomainError, ZeroDivisionError):
            rule = None
    exact = sweep.closed_form(args.kind, spec, w, order)
    asym = math.nan
    if rule is not None:
        try:
            asym = weighted.weighted_asymptotic_prediction(args.kind, rule, spec.n, w, order)
        except (UnsupportedCombinationError, DomainError):
            pass
    value = {
        "kind": args.kind,
        "n": spec.n,
        "x": spec.x,
        "weight": str(w),
        "order": order,
        "exact": exact,
        "asymptotic": asym,
        "gap": exact - asym,
    }
    if not args.no_oracle:
        ov = sweep.oracle_value(args.kind, spec, w, order, oracle.DEFAULT_CONFIG)
        value["oracle"] = ov
        value["oracle_dev"] = sweep.relative_deviation(exact, ov)
    return value


def cmd_entropy(args: argparse.Namespace) -> int:
    """Exact value, limit expression, gap and oracle value for one posterior."""
    value = _entropy_values(args)
    if args.format == "json":
        sys.stdout.write(json.dumps({k: sweep._json_value(v) for k, v in value.items()}, indent=1) + "\n")
    else:
        for k, v in value.items():
            sys.stdout.write(f"{k:<11} {sweep.format_value(v)}\n")
    if "oracle_dev" in value and not value["oracle_dev"] <= args.tol:
        print(f"oracle mismatch: deviation {value['oracle_dev']:.3e} > {args.tol:g}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    """Closed forms against the quadrature oracle over the standard grid."""
    rows = sweep.oracle_rows()
    _emit(sweep.render(rows, sweep.ORACLE_SCHEMA, sweep.ORACLE_COLUMNS, args.format), args.output)
    worst = max(rows, key=lambda r: r["rel_dev"])
    failed = [r for r in rows if not r["rel_dev"] <= args.tol]
    print(
        f"oracle-check: {len(rows)} points, {len(failed)} above {args.tol:g}, "
        f"max deviation {worst['rel_dev']:.3e} ({worst['quantity']} n={worst['n']} x={worst['x']})",
        file=sys.stderr,
    )
    return EXIT_NUMERIC if failed else EXIT_OK


def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override its entries")
    p.add_argument("--n-grid", dest="n_grid", help="comma separated trial counts")
    p.add_argument("--gamma-grid", dest="gamma_grid", help="comma separated emphasis points")
    p.add_argument("--scales", help="comma separated scale kinds: unit,const,sqrt_n,linear_n")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--output", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="went-beta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="one posterior: exact, limit, gap, oracle")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=int)
    p.add_argument("--regime", help="alpha=<a>, beta_power=<b>, fixed_x=<c> or fixed_gap=<c>")
    p.add_argument("--weight", help="unit or gamma=<g>,scale=<kind>")
    p.add_argument("--kind", choices=entropy.KINDS, default="shannon")
    p.add_argument("--order", type=float, help="Renyi nu or Tsallis q")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--tol", type=float, default=1e-8, help="allowed oracle deviation")
    p.add_argument("--no-oracle", action="store_true", help="skip the quadrature cross-check")

    p = sub.add_parser("converge", help="convergence table over an n grid")
    _add_sweep_flags(p)
    p.add_argument("--regime")
    p.add_argument("--kinds", help="comma separated: shannon,renyi,tsallis,fisher")
    p.add_argument("--orders", help="comma separated Renyi/Tsallis orders")

    p = sub.add_parser("bounds", help="weighted variance bounds sweep")
    _add_sweep_flags(p)
    p.add_argument("--alphas", help="comma separated alpha values (x = floor(alpha n))")
    p.add_argument("--rhos", help="comma separated rho values for the Kullback bound")
    p.add_argument("--bounds", help="comma separated: cramer_rao,bhattacharyya2,kullback")

    p = sub.add_parser("oracle-check", help="closed forms against quadrature on the standard grid")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.add_argument("--tol", type=float, default=1e-8)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "entropy":
            return cmd_entropy(args)
        if args.command == "converge":
            return cmd_converge(converge_config(args))
        if args.command == "bounds":
            return cmd_bounds(bounds_config(args))
        return cmd_oracle_check(args)
    except (UsageError, DomainError, UnsupportedCombinationError) as exc:
        print(f"went-beta: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"went-beta: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
