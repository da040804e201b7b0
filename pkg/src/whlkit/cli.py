"""Command-line front end.

Subcommands::

    whlkit estimate INPUT.csv            all thirteen estimator variants
    whlkit pairs INPUT.csv               dump one pairwise value/weight set
    whlkit breakdown --n-max 20          breakdown-point table
    whlkit simulate --sample 4           bias / relative-efficiency study
    whlkit sensitivity --case 5          outlier-sensitivity sweep

Every subcommand is deterministic given its flags: the seed defaults to
20240101 (override with --seed or the WHL_SEED environment variable; the
flag wins) and output bytes do not depend on --workers. CSV output uses
'#'-prefixed metadata lines, a header row, '.' decimals, and floats with
six significant digits. Exit codes: 0 success, 2 usage/input error,
1 internal error.
"""

import argparse
import csv
import math
import os
import sys

from . import __version__
from ._kernels import BACKEND
from .breakdown import WeightFamily, bp_table
from .errors import EmptyPairSet, WhlkitError
from .estimators import EstimatorKind, all_kinds, estimate
from .samples import PairScheme, WeightedSample, build_pairs, pair_indices
from .simkit import (
    DEFAULT_SEED,
    GENERATOR_ID,
    SENSITIVITY_N,
    SampleSpec,
    run_replications,
    sensitivity_case,
    sensitivity_sweep,
    table_sample,
)

DEFAULT_GRID = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25)


class UsageError(Exception):
    """Bad flags or malformed input; mapped to exit code 2."""


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        args.handler(args)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WhlkitError as exc:
        # library-level validation failures are input errors at the CLI
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="whlkit", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=f"whlkit {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="evaluate every estimator variant on a value,weight CSV")
    p.add_argument("input", help="CSV file with header 'value,weight'")
    _common_flags(p, seed=False, workers=False)
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser("pairs", help="dump the pairwise value/weight set for one scheme")
    p.add_argument("input", help="CSV file with header 'value,weight'")
    p.add_argument("--scheme", default="strict", choices=["strict", "diag", "all"])
    _common_flags(p, seed=False, workers=False)
    p.set_defaults(handler=_cmd_pairs)

    p = sub.add_parser("breakdown", help="breakdown-point table for n = 1..n-max")
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument(
        "--family",
        default="equal",
        choices=["equal", "arith", "csv"],
        help="weight family: equal, arithmetic progression, or explicit CSV weights",
    )
    p.add_argument("--spread", type=float, default=None, help="fix the arithmetic spread (default: sweep)")
    p.add_argument("--weights", default=None, help="value,weight CSV supplying the explicit family")
    _common_flags(p, seed=False, workers=False, gnuplot=True)
    p.set_defaults(handler=_cmd_breakdown)

    p = sub.add_parser("simulate", help="bias / relative-efficiency replication study")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--sample", type=int, help="benchmark sample id 1..6")
    src.add_argument("--spec", help="CSV with header 'mu,sigma,weight' describing one sample")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=15)
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--scheme", default="all3", choices=["strict", "diag", "all", "all3"])
    _common_flags(p, gnuplot=False)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("sensitivity", help="outlier-sensitivity sweep for one case id")
    p.add_argument("--case", type=int, required=True, help="case id 1..12")
    p.add_argument("--grid", default=None, help="comma-separated outlier proportions in [0, 0.25]")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--shift", type=float, default=5.0, help="outlier shift in population sigmas")
    _common_flags(p, gnuplot=True)
    p.set_defaults(handler=_cmd_sensitivity)
    return top


def _common_flags(p, seed=True, workers=True, gnuplot=False):
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    if seed:
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: WHL_SEED or 20240101)")
    if workers:
        p.add_argument("--workers", type=int, default=1, help="worker processes (output is identical for any value)")
    if gnuplot:
        p.add_argument("--gnuplot", action="store_true", help="also write a ready-to-run OUT.gp plot script")


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("WHL_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"WHL_SEED={env!r} is not an integer") from None
    return DEFAULT_SEED


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _write_csv(args, meta: list[str], header: list[str], rows) -> str | None:
    lines = [f"# {m}" for m in meta]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return None
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return args.out


def _read_value_weight_csv(path: str) -> WeightedSample:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    values: list[float] = []
    weights: list[float] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise UsageError(f"{path}:1: empty input")
        if [h.strip().lower() for h in header] != ["value", "weight"]:
            raise UsageError(f"{path}:1: header must be 'value,weight'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 2:
                raise UsageError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                v, w = float(row[0]), float(row[1])
            except ValueError:
                raise UsageError(f"{path}:{lineno}: non-numeric field") from None
            if not (math.isfinite(v) and math.isfinite(w)):
                raise UsageError(f"{path}:{lineno}: values must be finite")
            if w <= 0:
                raise UsageError(f"{path}:{lineno}: weight must be > 0, got {w:g}")
            values.append(v)
            weights.append(w)
    if not values:
        raise UsageError(f"{path}: no data rows")
    return WeightedSample(values, weights)


def _meta(command: str, **fields) -> list[str]:
    lines = [f"whlkit {command} v{__version__}", f"rng={GENERATOR_ID} kernel={BACKEND}"]
    if fields:
        lines.append(" ".join(f"{k}={v}" for k, v in fields.items()))
    return lines


def _cmd_estimate(args):
    sample = _read_value_weight_csv(args.input)
    rows = []
    for kind in all_kinds():
        family, scheme = kind.label
        try:
            value = estimate(sample, kind)
        except EmptyPairSet:
            value = math.nan  # n=1 has no strict pairs; keep all 13 rows
        rows.append((family, scheme, value))
    _write_csv(args, _meta("estimate", n=sample.n), ["estimator", "scheme", "estimate"], rows)


def _cmd_pairs(args):
    sample = _read_value_weight_csv(args.input)
    scheme = PairScheme.from_token(args.scheme)
    pset = build_pairs(sample, scheme)
    i, j = pair_indices(sample.n, scheme)
    rows = zip(i.tolist(), j.tolist(), pset.pair_values.tolist(), pset.pair_weights.tolist())
    meta = _meta("pairs", scheme=scheme.value, n=sample.n, m=pset.m)
    _write_csv(args, meta, ["i", "j", "value", "weight"], rows)


_BREAKDOWN_HEADER = [
    "n",
    "bp_median",
    "wm_lower",
    "wm_upper",
    "pairs_strict",
    "bp_whl1_strict",
    "pairs_diag",
    "bp_whl1_diag",
    "pairs_all",
    "bp_whl1_all",
    "whl2_lower_strict",
    "whl2_upper_strict",
    "whl2_lower_diag",
    "whl2_upper_diag",
    "whl2_lower_all",
    "whl2_upper_all",
]


def _cmd_breakdown(args):
    if not 1 <= args.n_max <= 200:
        raise UsageError(f"--n-max must be in 1..200, got {args.n_max}")
    if args.family == "csv":
        if not args.weights:
            raise UsageError("--family csv requires --weights PATH")
        family = WeightFamily.explicit(_read_value_weight_csv(args.weights).weights)
        desc = f"explicit({args.weights})"
    elif args.family == "arith":
        family = WeightFamily.arithmetic(args.spread)
        desc = "arith(sweep)" if args.spread is None else f"arith(spread={args.spread:g})"
    else:
        if args.spread is not None:
            raise UsageError("--spread only applies to --family arith")
        family = WeightFamily.equal()
        desc = "equal"

    by_n: dict[int, dict] = {}
    for rep in bp_table(args.n_max, family):
        cell = by_n.setdefault(rep.n, {})
        cell[rep.estimator] = rep
    rows = []
    for n in sorted(by_n):
        cell = by_n[n]
        wm = cell[EstimatorKind("weighted_median")].bp
        row = [n, cell[EstimatorKind("median")].bp.value, wm.lower, wm.upper]
        for scheme in PairScheme:
            rep = cell[EstimatorKind("whl1", scheme)]
            row.extend([rep.m, rep.bp.value])
        for scheme in PairScheme:
            bp = cell[EstimatorKind("whl2", scheme)].bp
            row.extend([math.nan, math.nan] if bp is None else [bp.lower, bp.upper])
        rows.append(row)
    path = _write_csv(args, _meta("breakdown", family=desc), _BREAKDOWN_HEADER, rows)
    if args.gnuplot:
        _write_gnuplot_breakdown(path)


_SIM_HEADER = [
    "sample",
    "n",
    "estimator",
    "scheme",
    "reps",
    "seed",
    "theta",
    "var_theta",
    "bias",
    "var_hat",
    "relative_efficiency",
]


def _sim_kinds(scheme_token: str) -> tuple[EstimatorKind, ...]:
    schemes = list(PairScheme) if scheme_token == "all3" else [PairScheme.from_token(scheme_token)]
    kinds = [EstimatorKind("weighted_mean"), EstimatorKind("weighted_median")]
    for family in ("whl1", "whl2"):
        kinds.extend(EstimatorKind(family, s) for s in schemes)
    return tuple(kinds)


def _read_spec_csv(path: str) -> SampleSpec:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    mus, sigmas, weights = [], [], []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["mu", "sigma", "weight"]:
            raise UsageError(f"{path}:1: header must be 'mu,sigma,weight'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 3:
                raise UsageError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                mu, sigma, w = (float(f) for f in row)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: non-numeric field") from None
            mus.append(mu)
            sigmas.append(sigma)
            weights.append(w)
    if not mus:
        raise UsageError(f"{path}: no data rows")
    return SampleSpec(tuple(mus), tuple(sigmas), tuple(weights), id=os.path.basename(path))


def _cmd_simulate(args):
    if args.reps < 2:
        raise UsageError(f"--reps must be at least 2, got {args.reps}")
    seed = _resolve_seed(args)
    kinds = _sim_kinds(args.scheme)
    if args.spec is not None:
        specs = [_read_spec_csv(args.spec)]
        label = specs[0].id
    else:
        if args.sample == 1:
            specs = [table_sample(1)]
        else:
            if not 1 <= args.n_min <= args.n_max:
                raise UsageError("need 1 <= --n-min <= --n-max")
            # table_sample validates the id itself
            specs = [table_sample(args.sample, n) for n in range(args.n_min, args.n_max + 1)]
        label = f"sample{args.sample}"
    rows = []
    for spec in specs:
        for mr in run_replications(spec, kinds, args.reps, seed=seed, workers=args.workers):
            family, scheme = mr.estimator.label
            rows.append(
                (
                    label,
                    mr.n,
                    family,
                    scheme,
                    mr.replications,
                    mr.seed,
                    mr.theta,
                    mr.var_theta,
                    mr.bias,
                    mr.var_hat,
                    mr.relative_efficiency,
                )
            )
    meta = _meta("simulate", sample=label, reps=args.reps, seed=seed, scheme=args.scheme)
    _write_csv(args, meta, _SIM_HEADER, rows)


_SENS_HEADER = ["case", "proportion", "estimator", "scheme", "avg_bias", "stderr", "reps", "seed"]


def _cmd_sensitivity(args):
    if args.reps < 2:
        raise UsageError(f"--reps must be at least 2, got {args.reps}")
    if not 1 <= args.case <= 12:
        raise UsageError(f"--case must be in 1..12, got {args.case}")
    if args.grid is None:
        grid = DEFAULT_GRID
    else:
        try:
            grid = tuple(float(p) for p in args.grid.split(","))
        except ValueError:
            raise UsageError(f"--grid {args.grid!r} is not a comma-separated float list") from None
    for p in grid:
        if not 0.0 <= p <= 0.25:
            raise UsageError(f"grid proportion {p:g} outside [0, 0.25]")
    seed = _resolve_seed(args)
    dist, mode = sensitivity_case(args.case)
    rows = []
    for sr in sensitivity_sweep(
        args.case, grid, args.reps, seed=seed, workers=args.workers, shift_multiplier=args.shift
    ):
        family, scheme = sr.estimator.label
        rows.append(
            (sr.case, sr.proportion, family, scheme, sr.avg_bias, sr.stderr, sr.replications, sr.seed)
        )
    meta = _meta(
        "sensitivity",
        case=args.case,
        distribution=dist.label,
        weights=mode,
        n=SENSITIVITY_N,
        reps=args.reps,
        seed=seed,
    )
    meta.append(
        "contamination=additive +{:g}*sigma_pop on ceil(p*n) uniformly chosen indices "
        "(weights untouched); bias baseline=uncontaminated weighted mean per replication".format(
            args.shift
        )
    )
    path = _write_csv(args, meta, _SENS_HEADER, rows)
    if args.gnuplot:
        _write_gnuplot_sensitivity(path)


def _require_out_for_gnuplot(path: str | None) -> str:
    if path is None:
        raise UsageError("--gnuplot requires --out PATH")
    return path


def _write_gnuplot_breakdown(path: str | None):
    path = _require_out_for_gnuplot(path)
    script = f"""set datafile separator comma
set key autotitle columnhead outside
set xlabel 'sample size n'
set ylabel 'breakdown point'
set yrange [0:1]
set term png size 900,600
set output '{path}.png'
plot '{path}' using 'n':'bp_median' with linespoints, \\
     '' using 'n':'bp_whl1_strict' with linespoints, \\
     '' using 'n':'bp_whl1_diag' with linespoints, \\
     '' using 'n':'bp_whl1_all' with linespoints, \\
     '' using 'n':'wm_lower' with lines, \\
     '' using 'n':'wm_upper' with lines, \\
     '' using 'n':'whl2_lower_all' with lines, \\
     '' using 'n':'whl2_upper_all' with lines
"""
    _write_script(path + ".gp", script)


def _write_gnuplot_sensitivity(path: str | None):
    path = _require_out_for_gnuplot(path)
    rows = [
        ("weighted_mean", ""),
        ("hl", "all"),
        ("whl1", "all"),
        ("whl2", "all"),
    ]
    plots = ", \\\n     ".join(
        f"\"< awk -F, '$3==\\\"{fam}\\\" && $4==\\\"{sch}\\\"' {path}\" "
        f"using 2:5 with linespoints title '{(fam + ' ' + sch).strip()}'"
        for fam, sch in rows
    )
    script = f"""set datafile separator comma
set xlabel 'outlier proportion'
set ylabel 'average bias'
set term png size 900,600
set output '{path}.png'
plot {plots}
"""
    _write_script(path + ".gp", script)


def _write_script(path: str, content: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(content)


if __name__ == "__main__":
    sys.exit(main())
