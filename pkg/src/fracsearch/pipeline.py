"""End-to-end reproduction: per-stage searches, scaling fits, spectral dimension."""

from __future__ import annotations

import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import io
from .analysis import (
    CARPET,
    DimensionSet,
    check_hypothesis,
    estimate_period,
    fit_series,
    inverse_spectral_comparison,
    mean_peak_probability,
    power_law_fit,
    spectral_dimension_from_fit,
)
from .classical import ClassicalConfig, exact_memory_bytes, return_series
from .errors import ConfigurationError, ResourceLimitError
from .lattice import build_lattice
from .quantum import evolve, search_memory_bytes

# seed for the automatic step budget: Q ~ 3.79 N^0.5647
Q_SEED_PREFACTOR = 3.79
Q_SEED_EXPONENT = 0.5647
PERIODS_PER_RUN = 16
MIN_STEPS = 64


def auto_steps(n_vertices: int) -> int:
    """About 16 expected periods, rounded up to a power of two."""
    want = math.ceil(PERIODS_PER_RUN * Q_SEED_PREFACTOR * n_vertices**Q_SEED_EXPONENT)
    return max(MIN_STEPS, 1 << (want - 1).bit_length())


def check_memory(needed: int, limit: int | None, what: str) -> None:
    if limit is None:
        limit = io.available_memory()
    if limit is not None and needed > limit:
        raise ResourceLimitError(f"{what} needs {needed / 2**30:.2f} GiB, only {limit / 2**30:.2f} GiB allowed")


@dataclass
class ClassicalSpec:
    stage: int = 7
    steps: int = 20_000
    method: str = "exact"
    walkers: int = 100_000
    seed: int = 0
    rule: str = "stay"
    start: tuple[int, int] = (0, 0)
    window: tuple[float, float] = (100.0, 10_000.0)


@dataclass
class PipelineSpec:
    stages: list[int]
    out: Path
    steps: dict[int, int] | None = None  # None -> auto for every stage
    marked: str | None = None
    classical: ClassicalSpec = field(default_factory=ClassicalSpec)
    p_fit_stages: int = 4
    period_window: str = "none"
    memory_limit: int | None = None
    force: bool = False

    def __post_init__(self):
        self.out = Path(self.out)
        if not self.stages:
            raise ConfigurationError("no stages given")
        if any(b <= a for a, b in zip(self.stages, self.stages[1:])):
            raise ConfigurationError(f"stages must be strictly increasing, got {self.stages}")
        for s in self.stages:
            if self.steps_for(s) < MIN_STEPS:
                raise ConfigurationError(f"stage {s}: steps must be >= {MIN_STEPS}")

    def steps_for(self, stage: int) -> int:
        if self.steps and stage in self.steps:
            return int(self.steps[stage])
        return auto_steps(8**stage)


def _log(msg: str, quiet: bool) -> None:
    if not quiet:
        print(msg, file=sys.stderr, flush=True)


def run_search_stage(stage: int, steps: int, out: Path, *, marked=None, force=False, memory_limit=None,
                     period_window="none", quiet=True) -> dict:
    """One stage: evolve, persist ``t,P`` + manifest, extract Q and mean peak."""
    check_memory(search_memory_bytes(stage), memory_limit, f"stage-{stage} search")
    lattice = build_lattice(stage, marked)
    run = evolve(lattice, steps, progress=not quiet)
    csv_path = io.write_series(out / f"search_s{stage}.csv", run.series, force=force)

    period = estimate_period(run.series, window=period_window)
    peak = mean_peak_probability(run.series, period.period_Q)
    record = {
        "stage": stage,
        "N": lattice.vertex_count,
        "steps": steps,
        "marked": list(lattice.marked_coord),
        "period": period.to_dict(),
        "mean_peak_probability": peak,
        "max_probability": float(run.series.values.max()),
        "final_norm_sq": run.final_norm_sq,
    }
    man = io.manifest(
        "search",
        asdict(run.config),
        [csv_path],
        run.wall_time,
        N=lattice.vertex_count,
        final_norm_sq=run.final_norm_sq,
        analysis={k: record[k] for k in ("period", "mean_peak_probability")},
    )
    man_path = io.write_json(out / f"search_s{stage}.json", man, force=force)
    record["manifest"] = man_path.name
    return record


def run_classical(spec: ClassicalSpec, out: Path, *, force=False, memory_limit=None) -> dict:
    if spec.method == "exact":
        check_memory(exact_memory_bytes(spec.stage), memory_limit, f"stage-{spec.stage} exact propagation")
    config = ClassicalConfig(spec.stage, spec.steps, spec.method, spec.walkers, spec.seed, tuple(spec.start), spec.rule)
    lattice = build_lattice(spec.stage, spec.start)
    t0 = time.perf_counter()
    series = return_series(config, lattice)
    wall = time.perf_counter() - t0
    csv_path = io.write_series(out / f"classical_s{spec.stage}.csv", series, force=force)

    fit = fit_series(series, *spec.window)
    d_s, d_s_err = spectral_dimension_from_fit(fit)
    man = io.manifest("classical", asdict(config), [csv_path], wall, fit=fit.to_dict(), d_s=d_s, d_s_err=d_s_err)
    man_path = io.write_json(out / f"classical_s{spec.stage}.json", man, force=force)
    return {"fit": fit, "d_s": d_s, "d_s_err": d_s_err, "manifest": man_path.name}


def run_pipeline(spec: PipelineSpec, quiet: bool = True) -> dict:
    """Run every stage, fit the scalings, measure d_s, and check the hypothesis.

    ``summary.json`` is written even when a stage fails, listing what
    finished; the exception is then re-raised.
    """
    out = spec.out
    out.mkdir(parents=True, exist_ok=True)
    summary_path = out / "summary.json"
    io.guard(summary_path, spec.force)
    t0 = time.perf_counter()
    summary: dict = {
        "command": "pipeline",
        "config": {
            "stages": spec.stages,
            "steps": {s: spec.steps_for(s) for s in spec.stages},
            "marked": spec.marked or "hole",
            "classical": asdict(spec.classical),
            "p_fit_stages": spec.p_fit_stages,
            "period_window": spec.period_window,
        },
        "stages": [],
        "status": "running",
    }
    try:
        for stage in spec.stages:
            steps = spec.steps_for(stage)
            _log(f"[pipeline] stage {stage}: {steps} steps", quiet)
            summary["stages"].append(
                run_search_stage(stage, steps, out, marked=spec.marked, force=spec.force,
                                 memory_limit=spec.memory_limit, period_window=spec.period_window, quiet=quiet)
            )

        recs = summary["stages"]
        q_fit = power_law_fit([(r["N"], r["period"]["period_Q"]) for r in recs])
        p_recs = recs[-spec.p_fit_stages:] if len(recs) > spec.p_fit_stages else recs
        p_fit = power_law_fit([(r["N"], r["mean_peak_probability"]) for r in p_recs])
        summary["q_fit"] = q_fit.to_dict()
        summary["p_fit"] = p_fit.to_dict()
        summary["p_fit_stage_list"] = [r["stage"] for r in p_recs]

        _log(f"[pipeline] classical stage {spec.classical.stage} ({spec.classical.method})", quiet)
        cl = run_classical(spec.classical, out, force=spec.force, memory_limit=spec.memory_limit)
        summary["classical"] = {"fit": cl["fit"].to_dict(), "d_s": cl["d_s"], "d_s_err": cl["d_s_err"],
                                "manifest": cl["manifest"]}

        dims = DimensionSet.from_pieces(d_s=cl["d_s"], d_s_err=cl["d_s_err"], **CARPET)
        summary["dimensions"] = asdict(dims)
        summary["hypothesis"] = check_hypothesis(q_fit, p_fit, dims).to_dict()
        summary["inverse_spectral"] = inverse_spectral_comparison(q_fit, cl["d_s"], cl["d_s_err"]).to_dict()
        summary["status"] = "ok"
    except Exception as exc:
        summary["status"] = "failed"
        summary["error"] = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        summary["wall_time_s"] = time.perf_counter() - t0
        summary["manifests"] = [r["manifest"] for r in summary["stages"]]
        if "classical" in summary:
            summary["manifests"].append(summary["classical"]["manifest"])
        io.write_json(summary_path, summary, force=True)
    return summary
