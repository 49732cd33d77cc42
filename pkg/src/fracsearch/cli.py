"""``fracsearch`` command-line front end.

Exit codes: 0 success, 2 usage/domain error, 3 numeric integrity failure,
4 resource guard.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__, io
from ._kernels import set_threads
from .analysis import (
    CARPET,
    GASKET,
    TETRAHEDRON,
    DimensionSet,
    PowerLawFit,
    check_hypothesis,
    estimate_period,
    fit_series,
    gasket_spectral_dimension,
    inverse_spectral_comparison,
    mean_peak_probability,
    power_law_fit,
    spectral_dimension_from_fit,
)
from .classical import ClassicalConfig, exact_memory_bytes, return_series
from .errors import (
    ConfigurationError,
    DomainError,
    InsufficientSpan,
    MalformedInput,
    NoDominantOscillation,
    NormDriftError,
    OutputExists,
    ResourceLimitError,
)
from .lattice import adjacency_rows, build_lattice, resolve_marked
from .pipeline import ClassicalSpec, PipelineSpec, auto_steps, check_memory, run_pipeline
from .quantum import evolve, search_memory_bytes

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_RESOURCE = 0, 2, 3, 4


def _pair(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected tmin:tmax, got {text!r}")
    return float(lo), float(hi)


def parse_stages(text: str) -> list[int]:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",")]


def _gib(text: str) -> int:
    return int(float(text) * 2**30)


def _emit(payload: dict, out: Path | None, name: str, force: bool) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=io._jsonable)
    print(text)
    if out is not None:
        io.write_json(out / name, payload, force=force)


# -- subcommands ---------------------------------------------------------------------


def cmd_lattice(args) -> int:
    lattice = build_lattice(args.stage, args.marked)
    summary = lattice.summary()
    if args.out is None:
        if args.format == "csv":
            sys.stdout.write("vertex,+x,-x,+y,-y\n")
            for row in adjacency_rows(lattice):
                sys.stdout.write(",".join(map(str, row)) + "\n")
        else:
            print(json.dumps(summary, indent=2))
        return EXIT_OK
    files = []
    if args.format == "csv":
        files.append(io.write_rows(args.out / f"lattice_s{args.stage}_adjacency.csv",
                                   ["vertex", "+x", "-x", "+y", "-y"], adjacency_rows(lattice), force=args.force))
    summary["files"] = {p.name: io.digest(p) for p in files}
    io.write_json(args.out / f"lattice_s{args.stage}.json", summary, force=args.force)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_search(args) -> int:
    set_threads(args.threads)
    check_memory(search_memory_bytes(args.stage), args.max_memory, f"stage-{args.stage} search")
    lattice = build_lattice(args.stage, args.marked)
    steps = auto_steps(lattice.vertex_count) if args.steps == "auto" else int(args.steps)
    snaps = [args.snapshot] if args.snapshot is not None else []
    stem = args.out / f"search_s{args.stage}"
    csv_path = io.guard(stem.with_suffix(".csv"), args.force)
    io.guard(stem.with_suffix(".json"), args.force)

    run = evolve(lattice, steps, stride=args.stride, snapshot_steps=snaps, progress=not args.quiet)
    files = [io.write_series(csv_path, run.series, force=args.force)]
    for step, dist in run.snapshots.items():
        rows = ((int(i), int(j), io.fmt(p)) for (i, j), p in zip(lattice.coords, dist))
        files.append(io.write_rows(args.out / f"search_s{args.stage}_snapshot_t{step}.csv", ["i", "j", "P"], rows,
                                   force=args.force))
    man = io.manifest("search", asdict(run.config), files, run.wall_time,
                      N=lattice.vertex_count, final_norm_sq=run.final_norm_sq)
    io.write_json(stem.with_suffix(".json"), man, force=args.force)
    print(json.dumps({"csv": str(csv_path), "steps": steps, "N": lattice.vertex_count,
                      "final_norm_sq": run.final_norm_sq}, indent=2))
    return EXIT_OK


def cmd_classical(args) -> int:
    set_threads(args.threads)
    if args.method == "exact":
        check_memory(exact_memory_bytes(args.stage), args.max_memory, f"stage-{args.stage} exact propagation")
    start = tuple(resolve_marked(args.start, args.stage))
    config = ClassicalConfig(args.stage, args.steps, args.method, args.walkers, args.seed, start, args.rule)
    lattice = build_lattice(args.stage, start)
    stem = args.out / f"classical_s{args.stage}_{args.method}"
    io.guard(stem.with_suffix(".csv"), args.force)
    io.guard(stem.with_suffix(".json"), args.force)
    t0 = time.perf_counter()
    series = return_series(config, lattice)
    wall = time.perf_counter() - t0
    csv_path = io.write_series(stem.with_suffix(".csv"), series, force=args.force)
    man = io.manifest("classical", asdict(config), [csv_path], wall, N=lattice.vertex_count)
    io.write_json(stem.with_suffix(".json"), man, force=args.force)
    print(json.dumps({"csv": str(csv_path), "steps": args.steps, "method": args.method}, indent=2))
    return EXIT_OK


def cmd_period(args) -> int:
    series = io.read_series(args.input)
    est = estimate_period(series, window=args.window)
    payload = est.to_dict()
    try:
        payload["mean_peak_probability"] = mean_peak_probability(series, est.period_Q)
    except InsufficientSpan:
        payload["mean_peak_probability"] = None
    _emit(payload, args.out, f"{Path(args.input).stem}_period.json", args.force)
    return EXIT_OK


def _read_points(path: Path):
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedInput(f"{path}: empty file")
    points = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            points.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError) as exc:
            raise MalformedInput(f"{path}:{lineno}: {exc}") from None
    return [h.strip() for h in rows[0]], points


def cmd_fit(args) -> int:
    header, _ = _read_points(args.input)
    if header[:2] == ["t", "P"]:
        series = io.read_series(args.input)
        lo, hi = args.window if args.window else (None, None)
        fit = fit_series(series, lo, hi)
        payload = fit.to_dict()
        if fit.exponent <= 0:
            d_s, err = spectral_dimension_from_fit(fit)
            payload.update(d_s=d_s, d_s_err=err)
    else:
        _, points = _read_points(args.input)
        fit = power_law_fit(points, args.window)
        payload = fit.to_dict()
    _emit(payload, args.out, f"{Path(args.input).stem}_fit.json", args.force)
    return EXIT_OK


_PRESETS = {"carpet": CARPET, "gasket": GASKET, "tetrahedron": TETRAHEDRON}


def cmd_hypothesis(args) -> int:
    if args.summary is not None:
        with open(args.summary) as fh:
            summ = json.load(fh)
        if "q_fit" not in summ or "p_fit" not in summ:
            raise MalformedInput(f"{args.summary}: missing q_fit/p_fit (pipeline incomplete?)")
        b_fit = PowerLawFit(**{k: summ["q_fit"][k] for k in PowerLawFit.__dataclass_fields__})
        a_fit = PowerLawFit(**{k: summ["p_fit"][k] for k in PowerLawFit.__dataclass_fields__})
        cl = summ["classical"]
        ds, dserr = cl["d_s"], cl["d_s_err"]
        geom = dict(CARPET)
    else:
        geom = dict(_PRESETS[args.preset]) if args.preset else dict(CARPET)
        for key in ("dE", "M", "s"):
            val = getattr(args, key)
            if val is not None:
                geom["d_E" if key == "dE" else key] = val
        ds, dserr = args.ds, args.dserr
        if ds is None:
            if args.preset in ("gasket", "tetrahedron"):
                ds = gasket_spectral_dimension(geom["d_E"])
            else:
                raise DomainError("--ds is required unless a gasket/tetrahedron preset supplies it")
        b_fit = None if args.b is None else PowerLawFit.literature(args.b, args.berr)
        a_fit = None if args.a is None else PowerLawFit.literature(-args.a, args.aerr)

    dims = DimensionSet.from_pieces(d_s=ds, d_s_err=dserr, **geom)
    if args.df is not None:
        dims = DimensionSet(dims.d_E, args.df, dims.d_s, dims.d_s_err, dims.s, dims.M)
    payload = {"dimensions": asdict(dims)}
    if b_fit is not None and a_fit is not None:
        payload["hypothesis"] = check_hypothesis(b_fit, a_fit, dims).to_dict()
    else:
        # rhs only: lhs inputs missing
        rep = check_hypothesis(PowerLawFit.literature(0.0), PowerLawFit.literature(0.0), dims)
        payload["hypothesis"] = {k: v for k, v in rep.to_dict().items() if k.startswith("rhs")}
    if b_fit is not None:
        payload["inverse_spectral"] = inverse_spectral_comparison(b_fit, ds, dserr).to_dict()
    _emit(payload, args.out, "hypothesis.json", args.force)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    set_threads(args.threads)
    steps = None
    if args.steps != "auto":
        values = [int(s) for s in args.steps.split(",")]
        if len(values) == 1:
            values = values * len(args.stages)
        if len(values) != len(args.stages):
            raise ConfigurationError("--steps needs one value or one per stage")
        steps = dict(zip(args.stages, values))
    classical = ClassicalSpec(
        stage=args.classical_stage,
        steps=args.classical_steps,
        method=args.method,
        walkers=args.walkers,
        seed=args.seed,
        rule=args.rule,
        start=tuple(resolve_marked(args.start, args.classical_stage)),
        window=args.window,
    )
    spec = PipelineSpec(stages=args.stages, out=args.out, steps=steps, marked=args.marked, classical=classical,
                        p_fit_stages=args.p_fit_stages, period_window=args.period_window,
                        memory_limit=args.max_memory, force=args.force)
    summary = run_pipeline(spec, quiet=args.quiet)
    brief = {k: summary[k] for k in ("q_fit", "p_fit", "classical", "hypothesis", "inverse_spectral")}
    print(json.dumps(brief, indent=2, default=io._jsonable))
    return EXIT_OK


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracsearch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--out", type=Path, required=out_required, help="output directory")
        p.add_argument("--force", action="store_true", help="overwrite existing output files")

    def compute(p):
        p.add_argument("--threads", type=int, default=None, help="worker threads (env FRACSEARCH_THREADS)")
        p.add_argument("--max-memory", type=_gib, default=None, metavar="GIB",
                       help="memory guard in GiB (default: available physical memory)")
        p.add_argument("--quiet", action="store_true", help="no progress on stderr")

    p = sub.add_parser("lattice", help="build a carpet and report its summary")
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--marked", default=None, help="'hole' (default), 'corner' or i,j")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    common(p)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("search", help="run the quantum walk search and record P(marked, t)")
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--steps", default="auto", help="number of steps or 'auto'")
    p.add_argument("--marked", default=None)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--snapshot", type=int, default=None, help="step at which to dump the distribution")
    common(p, out_required=True)
    compute(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("classical", help="classical return probability P_c(start, t)")
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--walkers", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rule", choices=("stay", "neighbor"), default="stay")
    p.add_argument("--start", default="corner", help="'corner' (default), 'hole' or i,j")
    common(p, out_required=True)
    compute(p)
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("period", help="dominant period of a t,P series")
    p.add_argument("input", type=Path)
    p.add_argument("--window", choices=("none", "hann"), default="none")
    common(p)
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("fit", help="log-log power-law fit of a two-column CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--window", type=_pair, default=None, metavar="TMIN:TMAX")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("hypothesis", help="evaluate c = b + a/2 against d_s/(d_E-1) + d_f - s")
    p.add_argument("--summary", type=Path, default=None, help="pipeline summary.json")
    p.add_argument("--preset", choices=sorted(_PRESETS), default=None)
    p.add_argument("--b", type=float)
    p.add_argument("--berr", type=float, default=0.0)
    p.add_argument("--a", type=float)
    p.add_argument("--aerr", type=float, default=0.0)
    p.add_argument("--ds", type=float)
    p.add_argument("--dserr", type=float, default=0.0)
    p.add_argument("--dE", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--df", type=float, help="override log M / log s")
    common(p)
    p.set_defaults(func=cmd_hypothesis)

    p = sub.add_parser("pipeline", help="stages -> Q and P scaling, d_s, hypothesis")
    p.add_argument("--stages", type=parse_stages, default=[1, 2, 3, 4, 5], help="e.g. 1-5 or 1,2,3")
    p.add_argument("--steps", default="auto", help="'auto', one value, or one per stage")
    p.add_argument("--marked", default=None)
    p.add_argument("--p-fit-stages", type=int, default=4)
    p.add_argument("--period-window", choices=("none", "hann"), default="none")
    p.add_argument("--classical-stage", type=int, default=7)
    p.add_argument("--classical-steps", type=int, default=20_000)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--walkers", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rule", choices=("stay", "neighbor"), default="stay")
    p.add_argument("--start", default="corner")
    p.add_argument("--window", type=_pair, default=(100.0, 10_000.0), metavar="TMIN:TMAX")
    common(p, out_required=True)
    compute(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NormDriftError as exc:
        print(f"fracsearch: numeric integrity failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ResourceLimitError as exc:
        print(f"fracsearch: resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NoDominantOscillation as exc:
        print(f"fracsearch: NoDominantOscillation: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ConfigurationError, InsufficientSpan, MalformedInput, OutputExists, FileNotFoundError) as exc:
        print(f"fracsearch: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
