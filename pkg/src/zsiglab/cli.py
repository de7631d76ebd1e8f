"""Command line runner: ``zsiglab <orbit|zsigmondy|family-scan|abc|galois> [flags]``.

Exit codes: 0 success (Partial and Inconclusive rows included), 2 configuration
error, 3 resource cap (digit cap, expansion cap, factoring budget), 4
precondition violation (preperiodic start, PCF map, reducible base).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import __version__
from .abc import DegenerateTriple, check_imprimitive_bound, check_rad_lower_bound, orbit_abc_triple
from .dynamics import (
    DEFAULT_DIGIT_CAP,
    ExpansionCap,
    OperandOverflow,
    PCFBase,
    UnicriticalMap,
    detect_periodicity,
    iterate,
    nu,
    sample_wandering,
    taunec_family,
)
from .factoring import FactorBudget
from .galois import ReducibleBase, tower_report, verify_example_family
from .heights import BoundCheckConfig, canonical_height, height
from .numfield import BudgetExceeded, NumberField, UnsupportedField, field_from_spec, parse_element
from .primdiv import PreperiodicOrbit, ZeroIterate, zsigmondy_set

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_PRECONDITION = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class ResourceCap(RuntimeError):
    pass


class Precondition(ValueError):
    pass


# --------------------------------------------------------------------------
# config


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    field: NumberField
    maps: tuple[UnicriticalMap, ...]
    alpha: str | None
    n_min: int
    n_max: int
    budget: FactorBudget
    bounds: BoundCheckConfig
    fmt: str
    out: str | None
    seed: int
    jobs: int
    extra: dict

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "field": self.field.name,
            "maps": [str(f) for f in self.maps],
            "alpha": self.alpha,
            "n_min": self.n_min,
            "n_max": self.n_max,
            "trial_bound": self.budget.trial_bound,
            "rho_iters": self.budget.rho_iterations,
            "epsilon": self.bounds.epsilon,
            "delta": self.bounds.delta,
            "format": self.fmt,
            "seed": self.seed,
            **self.extra,
        }


def _parse_range(text: str) -> tuple[int, int]:
    """'a..b' or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return int(lo), int(hi)
        v = int(text)
        return v, v
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}") from exc


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    try:
        K = field_from_spec(args.field)
    except (ValueError, UnsupportedField) as exc:
        raise ConfigError(str(exc)) from exc
    try:
        maps = [UnicriticalMap.parse(m, K) for m in (args.map or [])]
        if args.alpha is not None:
            parse_element(K, args.alpha)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc
    extra: dict = {}
    random_count = getattr(args, "random", 0) or 0
    if random_count:
        rng = random.Random(args.seed)
        pairs = sample_wandering(rng, random_count, degrees=(2, 3), bound=args.bound, K=K)
        maps.extend(f for f, _ in pairs)
        extra["random_alphas"] = [str(a) for _, a in pairs]
        extra["random"] = random_count
        extra["bound"] = args.bound
    try:
        budget = FactorBudget(trial_bound=args.trial_bound, rho_iterations=args.rho_iters)
        bounds = BoundCheckConfig(epsilon=args.epsilon, delta=args.delta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    if args.n_max is not None and args.n_max < 1:
        raise ConfigError("--n-max must be >= 1")
    n_min = getattr(args, "n_min", None) or 2
    for name in ("d", "base", "N", "family", "i_max"):
        if hasattr(args, name):
            extra[name] = getattr(args, name)
    return ExperimentConfig(
        args.command,
        K,
        tuple(maps),
        args.alpha,
        n_min,
        args.n_max if args.n_max is not None else 6,
        budget,
        bounds,
        args.format,
        args.out,
        args.seed,
        args.jobs,
        extra,
    )


def _tasks(config: ExperimentConfig) -> list[tuple[UnicriticalMap, str]]:
    """(map, alpha text) pairs; random draws carry their own starts."""
    if not config.maps:
        raise ConfigError("no map given (use --map or --random)")
    alphas = list(config.extra.get("random_alphas", []))
    n_fixed = len(config.maps) - len(alphas)
    out = []
    for i, f in enumerate(config.maps):
        if i < n_fixed:
            out.append((f, config.alpha if config.alpha is not None else str(f.gamma)))
        else:
            out.append((f, alphas[i - n_fixed]))
    return out


def _run(fn, items: list, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# --------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(config: ExperimentConfig, rows: list[dict], summary: dict) -> str:
    header = {"version": __version__, **config.as_dict()}
    if config.fmt == "json":
        doc = {"config": header, "rows": rows, "summary": summary}
        return json.dumps(doc, indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    buf.write("# config " + json.dumps(header, sort_keys=True) + "\n")
    buf.write("# summary " + json.dumps(summary, sort_keys=True) + "\n")
    columns: list[str] = []
    for row in rows:
        for k in row:
            if k not in columns:
                columns.append(k)
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(k)) for k in columns])
    return buf.getvalue()


def read_csv_report(text: str) -> tuple[dict, dict, list[dict]]:
    """Inverse of the CSV rendering: (config, summary, rows as strings)."""
    lines = text.splitlines(keepends=True)
    config = json.loads(lines[0][len("# config ") :])
    summary = json.loads(lines[1][len("# summary ") :])
    reader = csv.DictReader(io.StringIO("".join(lines[2:])))
    return config, summary, list(reader)


# --------------------------------------------------------------------------
# subcommands


def _orbit_task(item):
    f, alpha_text, n_max, digit_cap = item
    alpha = parse_element(f.K, alpha_text)
    orbit = iterate(f, alpha, n_max, digit_cap)
    verdict = detect_periodicity(f, alpha)
    rows = []
    for n, x in enumerate(orbit.values):
        rows.append(
            {"map": str(f), "alpha": str(alpha), "n": n, "value": str(x), "height": height(x)}
        )
    summary = {"map": str(f), "periodicity": verdict.kind}
    if verdict.is_preperiodic:
        summary.update(preperiod=verdict.preperiod, period=verdict.period, canonical_height=0.0)
    else:
        levels = max(1, orbit.n_max)
        try:
            ch = canonical_height(f, alpha, levels, digit_cap)
            summary.update(canonical_height=ch.value, tail=ch.error_bound, levels=levels)
        except OperandOverflow:
            summary.update(canonical_height=None)
    summary["overflow_at"] = orbit.overflow_at
    return rows, summary


def cmd_orbit(config: ExperimentConfig):
    items = [(f, a, config.n_max, DEFAULT_DIGIT_CAP) for f, a in _tasks(config)]
    results = _run(_orbit_task, items, config.jobs)
    rows = [r for rs, _ in results for r in rs]
    summaries = [s for _, s in results]
    code = EXIT_OK
    if any(s["overflow_at"] is not None for s in summaries):
        code = EXIT_RESOURCE
    return rows, {"orbits": summaries}, code


def _zsig_task(item):
    f, alpha_text, n_max, budget, find = item
    alpha = parse_element(f.K, alpha_text)
    report = zsigmondy_set(f, alpha, n_max, budget, find_witnesses=find)
    rows = []
    for lv in report.levels:
        rows.append(
            {
                "map": str(f),
                "alpha": str(alpha),
                "n": lv.n,
                "value_digits": lv.value.height_digits(),
                "primitive_part_digits": "" if lv.primitive_part is None else lv.primitive_part.height_digits(),
                "in_zsigmondy": lv.in_zsigmondy,
                "witness": "" if lv.mult_one_witness is None else str(lv.mult_one_witness),
                "status": lv.status,
            }
        )
    summary = {
        "map": str(f),
        "alpha": str(alpha),
        "zsigmondy_set": report.zsigmondy_set,
        "status": report.status,
        "overflow_at": report.overflow_at,
    }
    return rows, summary


def cmd_zsigmondy(config: ExperimentConfig):
    items = [(f, a, config.n_max, config.budget, True) for f, a in _tasks(config)]
    results = _run(_zsig_task, items, config.jobs)
    rows = [r for rs, _ in results for r in rs]
    return rows, {"orbits": [s for _, s in results]}, EXIT_OK


def fit_line(points: list[tuple[float, float]]) -> tuple[float, float]:
    """Least squares y = slope x + intercept."""
    n = len(points)
    if n < 2:
        return math.nan, math.nan
    mx = sum(x for x, _ in points) / n
    my = sum(y for _, y in points) / n
    sxx = sum((x - mx) ** 2 for x, _ in points)
    if sxx == 0:
        return math.nan, math.nan
    slope = sum((x - mx) * (y - my) for x, y in points) / sxx
    return slope, my - slope * mx


# ln 2 < 6932/10000, so bit_length * 6932/10000 bounds log|x| from above
_LN2_UP = (6932, 10000)


def nu_certificate(f: UnicriticalMap, N: int) -> bool:
    """Exact check of log+ nu(f) - log d < N log d, i.e. nu(f) < d^(N+1).

    Over Q with integral gamma: nu <= log|gamma| < bits(gamma) ln 2, and the
    denominator max(1, h(c - gamma)) is at least 1.
    """
    g = f.gamma
    if f.K.D != 0 or not g.is_integral():
        v, _ = nu(f)
        return v < f.d ** (N + 1)
    bits = abs(int(g.a)).bit_length()
    return bits * _LN2_UP[0] < f.d ** (N + 1) * _LN2_UP[1]


def _family_task(item):
    K, d, base, N, extra_levels, budget = item
    f = taunec_family(K, d, base, N)
    value, lp = nu(f)
    report = zsigmondy_set(f, f.gamma, N + extra_levels, budget, find_witnesses=False)
    zs = report.zsigmondy_set
    return {
        "N": N,
        "map": str(f),
        "nu": value,
        "log_plus_nu": lp,
        "zsigmondy_set": " ".join(map(str, zs)),
        "max_zsigmondy": max(zs) if zs else "",
        "N_in_set": N in zs,
        "certificate": nu_certificate(f, N),
        "margin": (N + 1) * math.log(d) - lp,
    }


def cmd_family_scan(config: ExperimentConfig):
    d = config.extra.get("d") or 2
    base = config.extra.get("base") or "2"
    lo, hi = _parse_range(config.extra.get("N") or "2..10")
    if hi < lo:
        raise ConfigError(f"empty N range {lo}..{hi}")
    K = config.field
    items = [(K, d, parse_element(K, base), N, 1, config.budget) for N in range(lo, hi + 1)]
    rows = _run(_family_task, items, config.jobs)
    points = [(r["log_plus_nu"], float(r["N"])) for r in rows]
    slope, intercept = fit_line(points)
    summary = {
        "slope": slope,
        "intercept": intercept,
        "reference_slope": 1 / math.log(d),
        "all_N_in_set": all(r["N_in_set"] for r in rows),
        "all_certified": all(r["certificate"] for r in rows),
    }
    return rows, summary, EXIT_OK


def _abc_task(item):
    f, alpha_text, n_min, n_max, eps, delta, budget = item
    alpha = parse_element(f.K, alpha_text)
    rows = []
    for n in range(n_min, n_max + 1):
        row = {"map": str(f), "alpha": str(alpha), "n": n}
        try:
            t = orbit_abc_triple(f, alpha, n, budget)
            rad = check_rad_lower_bound(f, alpha, n, eps, budget)
            imp = check_imprimitive_bound(f, alpha, n, delta, budget)
        except DegenerateTriple as exc:
            row.update(status="Skipped", note=str(exc))
            rows.append(row)
            continue
        except BudgetExceeded as exc:
            row.update(status="Partial", note=str(exc))
            rows.append(row)
            continue
        row.update(
            a=str(t.a),
            b=str(t.b),
            s=str(t.s),
            h=t.h_proj,
            rad=t.rad,
            quality=t.quality,
            rad_margin=rad.margin,
            rad_holds=rad.holds,
            imprimitive_margin=imp.margin,
            imprimitive_holds=imp.holds,
            status="Exact",
            note="",
        )
        rows.append(row)
    return rows


def cmd_abc(config: ExperimentConfig):
    items = [
        (f, a, config.n_min, config.n_max, config.bounds.epsilon, config.bounds.delta, config.budget)
        for f, a in _tasks(config)
    ]
    rows = [r for rs in _run(_abc_task, items, config.jobs) for r in rs]
    exact = [r for r in rows if r["status"] == "Exact"]
    summary = {
        "levels": len(rows),
        "skipped": sum(r["status"] == "Skipped" for r in rows),
        "partial": sum(r["status"] == "Partial" for r in rows),
        "max_quality": max((r["quality"] for r in exact), default=None),
        "rad_holds_from": _holds_from(exact, "rad_holds"),
        "imprimitive_holds_from": _holds_from(exact, "imprimitive_holds"),
    }
    return rows, summary, EXIT_OK


def _holds_from(rows: list[dict], key: str) -> dict:
    """Per orbit, the least n from which the check held at every later computed level."""
    out: dict = {}
    for r in rows:
        name = f"{r['map']}@{r['alpha']}"
        if not r[key]:
            out[name] = None
        elif out.get(name) is None:
            out[name] = r["n"]
    return out


def _galois_task(item):
    f, n_max, budget = item
    report = tower_report(f, n_max, budget)
    stab = str(report.stability) if report.stability else ""
    rows = []
    for row in report.rows():
        row["stability"] = stab
        rows.append(row)
    return rows


def cmd_galois(config: ExperimentConfig):
    if config.extra.get("family") == "example":
        checks = verify_example_family(config.extra.get("i_max") or 6)
        rows = [c.as_dict() for c in checks]
        return rows, {"all_verified": all(c.ok for c in checks)}, EXIT_OK
    if not config.maps:
        raise ConfigError("no map given (use --map or --family example)")
    items = [(f, config.n_max, config.budget) for f in config.maps]
    rows = [r for rs in _run(_galois_task, items, config.jobs) for r in rs]
    return rows, {"maps": [str(f) for f in config.maps]}, EXIT_OK


COMMANDS = {
    "orbit": cmd_orbit,
    "zsigmondy": cmd_zsigmondy,
    "family-scan": cmd_family_scan,
    "abc": cmd_abc,
    "galois": cmd_galois,
}


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--field", default="Q", help="Q, Qi or Q(-D) with D of class number one")
    p.add_argument("--map", action="append", help='"d;gamma;c"; may be repeated')
    p.add_argument("--alpha", help="start point (defaults to gamma)")
    p.add_argument("--n-max", "--n", dest="n_max", type=int)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--trial-bound", type=int, default=10**6)
    p.add_argument("--rho-iters", type=int, default=10**7)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.add_argument("--random", type=int, default=0, help="add this many seeded random wandering maps")
    p.add_argument("--bound", type=int, default=10, help="coefficient bound for --random")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zsiglab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"zsiglab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("orbit", "zsigmondy"):
        _common(sub.add_parser(name))
    p = sub.add_parser("family-scan")
    _common(p)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--base", default="2")
    p.add_argument("--N", default="2..10", help="range a..b")
    p = sub.add_parser("abc")
    _common(p)
    p.add_argument("--n-min", type=int, default=2)
    p = sub.add_parser("galois")
    _common(p)
    p.add_argument("--family", choices=("example",))
    p.add_argument("--i-max", type=int, default=6)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        rows, summary, code = COMMANDS[config.command](config)
    except ConfigError as exc:
        print(f"zsiglab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OperandOverflow, ExpansionCap, BudgetExceeded, ResourceCap) as exc:
        print(f"zsiglab: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (PreperiodicOrbit, PCFBase, ReducibleBase, ZeroIterate, Precondition) as exc:
        print(f"zsiglab: precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    text = render(config, rows, summary)
    if config.out:
        with open(config.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
