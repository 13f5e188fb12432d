"""Config-driven command line: simulate, estimate, and replicate experiments.

Subcommands
-----------
``simulate``              write one trajectory CSV per (sample size, replicate)
``estimate``              turn one trajectory CSV into cumulative and rate curves
``experiment``            full pipeline with replicate summaries and plot data
``print-default-config``  emit the default configuration

Every number of the reference experiment is a config default, not a
constant; other setups need only a different config file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NumericError, ParseError
from .estimate import CI_NOTE, global_cumulative, write_cumulative_csv
from .metrics import boxplot_summary, integrated_square_error
from .model import cumulative_rate, model_by_name
from .partition import uniform_partition
from .simulate import (derive_seed, read_trajectory_csv, simulate_chain,
                       write_trajectory_csv)
from .smooth import SampledCurve, global_rate, kernel_by_name, write_rate_csv


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, picklable experiment description; every field has a default."""

    model: str = "machine"
    z0: float = 30.0
    sample_sizes: tuple[int, ...] = (200, 300, 400)
    replicates: int = 100
    master_seed: int = 7
    region_low: float = 18.0
    region_high: float = 22.0
    partition_width: float = 4.0
    center_mark: float = 20.0
    cell_radius: float = 2.0
    t_max: float = 0.9
    report_r1: float = 0.2
    report_r2: float = 0.8
    kernel: str = "epanechnikov"
    alpha: float = 0.25
    grid_points: int = 512
    output_dir: str = "out"

    def __post_init__(self):
        if not 0.0 < self.report_r1 < self.report_r2 < self.t_max:
            raise ValueError(
                "need 0 < report_r1 < report_r2 < t_max, got "
                f"{self.report_r1}, {self.report_r2}, {self.t_max}"
            )
        if self.replicates < 1:
            raise ValueError(f"replicates must be at least 1, got {self.replicates}")
        if any(n < 0 for n in self.sample_sizes):
            raise ValueError("sample sizes must be nonnegative")


_FIELD_HELP = {
    "model": "built-in model name: machine | constant:<c>",
    "z0": "start mark of every simulated trajectory",
    "sample_sizes": "jump counts, comma separated",
    "replicates": "independent trajectories per sample size",
    "master_seed": "64-bit seed; per-replicate seeds are derived from it",
    "region_low": "lower edge of the partitioned mark region",
    "region_high": "upper edge of the partitioned mark region",
    "partition_width": "cell width; the default covers the region with one cell",
    "center_mark": "mark at which estimates and errors are reported",
    "cell_radius": "half-width of the reporting cell around center_mark",
    "t_max": "upper end of the estimation window (must be below the horizon)",
    "report_r1": "lower end of the trustworthy window for the smoothed rate",
    "report_r2": "upper end of the trustworthy window for the smoothed rate",
    "kernel": "smoothing kernel: epanechnikov | biweight | triangular",
    "alpha": "bandwidth exponent: bandwidth = visits**(-alpha)",
    "grid_points": "uniform grid resolution of exported curves",
    "output_dir": "where commands write their files",
}


def config_to_text(config: ExperimentConfig) -> str:
    lines = ["# jumprate experiment configuration"]
    for f in dataclasses.fields(ExperimentConfig):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ", ".join(str(v) for v in value)
        lines.append(f"# {_FIELD_HELP[f.name]}")
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def _convert(name: str, raw: str):
    if name == "sample_sizes":
        return tuple(int(part.strip()) for part in raw.split(",") if part.strip())
    kind = typing.get_type_hints(ExperimentConfig)[name]
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines into a config; unknown keys are errors."""
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ParseError(f"unknown config key {key!r}", lineno)
        try:
            overrides[key] = _convert(key, value.strip())
        except ValueError:
            raise ParseError(f"bad value for {key!r}: {value.strip()!r}", lineno) from None
    return ExperimentConfig(**overrides)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _partition_for(config: ExperimentConfig, spec):
    return uniform_partition(config.region_low, config.region_high,
                             config.partition_width, spec.state_space)


def cmd_simulate(config: ExperimentConfig, output_dir=None) -> list[Path]:
    """Write one trajectory CSV per (sample size, replicate)."""
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = model_by_name(config.model)
    written = []
    for size in config.sample_sizes:
        for rep in range(config.replicates):
            seed = derive_seed(config.master_seed, size, rep)
            traj = simulate_chain(spec, config.z0, size, seed)
            path = out / f"traj_n{size}_r{rep:03d}.csv"
            write_trajectory_csv(traj, path)
            written.append(path)
    return written


def cmd_estimate(trajectory_path, config: ExperimentConfig, output_dir=None) -> dict:
    """Estimate the cumulative and smoothed rates for the cell holding ``center_mark``."""
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = model_by_name(config.model)
    traj = read_trajectory_csv(trajectory_path)
    partition = _partition_for(config, spec)

    gc = global_cumulative(traj, partition, spec, config.t_max)
    ce = gc.cell_for(config.center_mark)
    if ce is None:
        raise ValueError(
            f"center_mark {config.center_mark} outside the partition region"
        )
    gr = global_rate(traj, partition, spec, kernel_by_name(config.kernel),
                     config.alpha, config.t_max,
                     (config.report_r1, config.report_r2), config.grid_points)

    stem = Path(trajectory_path).stem
    cumulative_path = out / f"{stem}_cumulative.csv"
    rate_path = out / f"{stem}_rate.csv"
    write_cumulative_csv(ce, config.t_max, cumulative_path,
                         grid_points=config.grid_points)
    write_rate_csv(gr, config.center_mark, rate_path)
    if not ce.threshold_passed:
        print(
            f"warning: visit fraction {ce.nu_hat:.4g} below threshold; "
            "curves written as zero",
            file=sys.stderr,
        )
    return {
        "cumulative_csv": str(cumulative_path),
        "rate_csv": str(rate_path),
        "visits": ce.visits,
        "visit_fraction": ce.nu_hat,
        "threshold_passed": ce.threshold_passed,
    }


def _run_replicate(args) -> dict:
    """Simulate and estimate one replicate; returns plain data for merging."""
    config, size, rep = args
    result = {
        "sample_size": size,
        "replicate": rep,
        "ise_lambda_cum": None,
        "ise_lambda": None,
        "visit_fraction": None,
        "simulate_seconds": 0.0,
        "estimate_seconds": 0.0,
        "error": None,
    }
    try:
        spec = model_by_name(config.model)
        seed = derive_seed(config.master_seed, size, rep)
        t0 = time.perf_counter()
        traj = simulate_chain(spec, config.z0, size, seed)
        result["simulate_seconds"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        partition = _partition_for(config, spec)
        center = config.center_mark
        window = (config.report_r1, config.report_r2)

        gc = global_cumulative(traj, partition, spec, config.t_max)
        ce = gc.cell_for(center)
        if ce is None:
            raise ValueError(f"center_mark {center} outside the partition region")
        grid = np.linspace(0.0, config.t_max, config.grid_points)
        cum_values = ce.lhat.value(grid) if ce.threshold_passed else np.zeros_like(grid)
        ise_cum = integrated_square_error(
            SampledCurve(grid, cum_values),
            lambda t: cumulative_rate(spec, center, t),
            (0.0, config.report_r2),
        )

        gr = global_rate(traj, partition, spec, kernel_by_name(config.kernel),
                         config.alpha, config.t_max, window, config.grid_points)
        re = gr.cell_for(center)
        rate_values = re.curve.values if re.threshold_passed else np.zeros_like(grid)
        ise_rate = integrated_square_error(
            SampledCurve(grid, rate_values),
            lambda t: spec.jump_rate(center, t),
            window,
        )
        result["estimate_seconds"] = time.perf_counter() - t0
        result["ise_lambda_cum"] = ise_cum
        result["ise_lambda"] = ise_rate
        result["visit_fraction"] = ce.nu_hat
    except Exception as exc:  # noqa: BLE001 - replicate failures are reported, not fatal
        result["error"] = f"{type(exc).__name__}: {exc}"
    return result


def cmd_experiment(config: ExperimentConfig, jobs: int = 1, output_dir=None) -> dict:
    """Run the full replicate study and write ``report.json`` plus ``ise.csv``."""
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = model_by_name(config.model)
    partition = _partition_for(config, spec)

    tasks = [(config, size, rep)
             for size in config.sample_sizes
             for rep in range(config.replicates)]
    wall0 = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_replicate, tasks, chunksize=4))
    else:
        results = [_run_replicate(task) for task in tasks]
    wall = time.perf_counter() - wall0
    results.sort(key=lambda r: (r["sample_size"], r["replicate"]))

    ok = [r for r in results if r["error"] is None]
    failures = [
        {"sample_size": r["sample_size"], "replicate": r["replicate"], "error": r["error"]}
        for r in results
        if r["error"] is not None
    ]
    for failure in failures:
        print(
            f"warning: replicate {failure['replicate']} at n={failure['sample_size']} "
            f"failed: {failure['error']}",
            file=sys.stderr,
        )

    summaries = []
    for size in config.sample_sizes:
        rows = [r for r in ok if r["sample_size"] == size]
        if not rows:
            continue
        for metric, key in (("ISE_Lambda", "ise_lambda_cum"), ("ISE_lambda", "ise_lambda")):
            summary = boxplot_summary([r[key] for r in rows])
            summaries.append(summary.to_record(size, metric))

    report = {
        "config": dataclasses.asdict(config),
        "partition": [[c.low, c.high] for c in partition.cells],
        "summaries": summaries,
        "visit_fraction_mean": (
            float(np.mean([r["visit_fraction"] for r in ok])) if ok else None
        ),
        "failures": failures,
        "ci_note": CI_NOTE,
        "runtime": {
            "simulate_seconds": float(sum(r["simulate_seconds"] for r in results)),
            "estimate_seconds": float(sum(r["estimate_seconds"] for r in results)),
            "wall_seconds": wall,
            "jobs": jobs,
        },
    }

    ise_path = out / "ise.csv"
    with open(ise_path, "w", encoding="utf-8") as fh:
        fh.write("sample_size,replicate,ise_lambda_cum,ise_lambda\n")
        for r in ok:
            fh.write(
                f"{r['sample_size']},{r['replicate']},"
                f"{r['ise_lambda_cum']:.17g},{r['ise_lambda']:.17g}\n"
            )
    report_path = out / "report.json"
    report_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n",
                           encoding="utf-8")
    report["report_path"] = str(report_path)
    report["ise_path"] = str(ise_path)
    return report


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jumprate",
        description="Simulate marked renewal processes and estimate their jump rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="config file (flat key = value)")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--output", type=Path, help="override output_dir")

    p_sim = sub.add_parser("simulate", help="write trajectory CSVs")
    common(p_sim)

    p_est = sub.add_parser("estimate", help="estimate from one trajectory CSV")
    p_est.add_argument("trajectory", type=Path)
    common(p_est)

    p_exp = sub.add_parser("experiment", help="replicate study with summaries")
    common(p_exp)
    p_exp.add_argument("--jobs", type=int, default=1, help="parallel workers")

    sub.add_parser("print-default-config", help="emit the default configuration")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "print-default-config":
        sys.stdout.write(config_to_text(ExperimentConfig()))
        return 0
    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            config = dataclasses.replace(config, master_seed=args.seed)
        output = args.output
        if args.command == "simulate":
            written = cmd_simulate(config, output)
            print(f"wrote {len(written)} trajectories to "
                  f"{output if output is not None else config.output_dir}")
        elif args.command == "estimate":
            info = cmd_estimate(args.trajectory, config, output)
            print(f"wrote {info['cumulative_csv']} and {info['rate_csv']}")
        elif args.command == "experiment":
            report = cmd_experiment(config, jobs=args.jobs, output_dir=output)
            print(f"wrote {report['report_path']} and {report['ise_path']}")
    except (ValueError, NumericError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
