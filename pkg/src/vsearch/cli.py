"""Command-line entry point: run shipped presets or parsed experiment files,
export results, traces, encoding tables, and plots."""
from __future__ import annotations

import dataclasses
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import click

from . import __version__
from .analysis import (
    curve_from_cells,
    fit_linear,
    fit_log,
    fit_r2_vs_reference,
    load_reference_csv,
    ms_per_iteration,
    slope_between,
)
from .engine import EngineParams
from .experiments import (
    PRESET_IDS,
    aggregate_csv,
    compile_conditions,
    preset,
    results_csv,
    run_experiment,
    run_one_trial,
    trial_rng,
)
from .grammar import ParseError, parse_experiment, serialize_experiment
from .features import export_tables_csv
from .plotting import plot_curves_svg
from .stimuli import ExperimentSpec


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_trace(spec: ExperimentSpec, out: Path) -> None:
    """Export a per-iteration trace of the first trial of every condition."""
    params = EngineParams().override(spec.params)
    compiled = compile_conditions(spec)
    lines = ["condition,set_size,iteration,phase,event,attended,"
             "fixation_x,fixation_y,priorities,states"]
    for cond in compiled:
        for ssi, set_size in enumerate(spec.set_sizes):
            rows: list = []
            rng = trial_rng(spec.seed, 0, cond.index, ssi * spec.trials_per_cell)
            run_one_trial(cond, set_size, params, rng, trace=rows)
            for row in rows:
                lines.append(
                    f"{cond.name},{set_size},{row['iteration']},{row['phase']},"
                    f"{row['event']},{row['attended']},{row['fixation_x']:.6f},"
                    f"{row['fixation_y']:.6f},{row['priorities']},{row['states']}")
    _atomic_write(out / f"{spec.name}_trace.csv", "\n".join(lines) + "\n")


def _execute(spec: ExperimentSpec, out_dir: str, reference: str | None,
             trace: bool, workers: int) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    cells = run_experiment(spec, workers=workers)
    results_path = out / f"{spec.name}_results.csv"
    aggregate_path = out / f"{spec.name}_aggregate.csv"
    plot_path = out / f"{spec.name}_curves.svg"
    _atomic_write(results_path, results_csv(spec, cells))
    _atomic_write(aggregate_path, aggregate_csv(spec, cells))

    condition_names = [c.name for c in spec.conditions]
    curves = [curve_from_cells(cells, name) for name in condition_names]
    plot_curves_svg(curves, spec.name, str(plot_path))
    if trace:
        _write_trace(spec, out)

    references = None
    if reference:
        references = load_reference_csv(Path(reference).read_text(encoding="utf-8"),
                                        provenance=reference)

    click.echo(f"{spec.name}: {len(cells)} cells, "
               f"{len(cells) * spec.trials_per_cell} trials")
    for curve in curves:
        include_1 = len(curve.set_sizes) <= 3  # mirror the small-grid analyses
        slope, _, r2_lin = fit_linear(curve, include_target_only=include_1)
        log_slope, _, r2_log = fit_log(curve, include_target_only=include_1)
        line = (f"  {curve.condition}: linear slope {slope:.2f} it/item "
                f"(R2 {r2_lin:.3f}), log slope {log_slope:.2f} it/log-unit "
                f"(R2 {r2_log:.3f})")
        if 2 in curve.set_sizes and 8 in curve.set_sizes:
            line += f", slope(2-8) {slope_between(curve, 2, 8):.2f} it/item"
        click.echo(line)
        if references:
            by_label = {r.label: r for r in references}
            ref = by_label.get(curve.condition)
            if ref is not None:
                exclude = not include_1
                per_cond, _ = fit_r2_vs_reference([curve], [ref],
                                                  exclude_target_only=exclude)
                ratio = ms_per_iteration(curve, ref, exclude_target_only=exclude)
                click.echo(f"    vs reference: R2 {per_cond[curve.condition]:.3f}, "
                           f"{ratio:.2f} ms/iteration")
    if references:
        by_label = {r.label: r for r in references}
        matched = [(c, by_label[c.condition]) for c in curves
                   if c.condition in by_label]
        if matched:
            _, combined = fit_r2_vs_reference(
                [c for c, _ in matched], [r for _, r in matched])
            click.echo(f"  combined R2 vs reference: {combined:.3f}")

    n_timeout = sum(c.n_timeout for c in cells)
    manifest = {
        "spec": serialize_experiment(spec),
        "engine_params": dataclasses.asdict(EngineParams().override(spec.params)),
        "seed": spec.seed,
        "artifacts": {
            "results": results_path.name,
            "aggregate": aggregate_path.name,
            "plot": plot_path.name,
        },
        "version": __version__,
        "workers": workers,
        "wall_time_s": round(time.time() - started, 3),
        "n_timeout_trials": n_timeout,
    }
    _atomic_write(out / f"{spec.name}_manifest.json",
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if n_timeout:
        click.echo(f"warning: {n_timeout} trial(s) hit the iteration cap",
                   err=True)
        return 1
    return 0


def _apply_overrides(spec: ExperimentSpec, seed: int | None,
                     subjects: int | None, trials: int | None) -> ExperimentSpec:
    return ExperimentSpec(
        name=spec.name,
        conditions=spec.conditions,
        set_sizes=spec.set_sizes,
        trials_per_cell=trials if trials is not None else spec.trials_per_cell,
        n_subjects=subjects if subjects is not None else spec.n_subjects,
        seed=seed if seed is not None else spec.seed,
        params=dict(spec.params),
    )


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Deterministic visual-search simulator and analysis harness."""


_shared_options = [
    click.option("--seed", type=click.IntRange(min=0), default=None,
                 help="Master seed override."),
    click.option("--out", "out_dir", type=click.Path(file_okay=False),
                 default="results", show_default=True, help="Output directory."),
    click.option("--subjects", type=click.IntRange(min=1), default=None,
                 help="Virtual-subject count override."),
    click.option("--trials", type=click.IntRange(min=1), default=None,
                 help="Trials-per-cell override."),
    click.option("--reference", type=click.Path(exists=True, dir_okay=False),
                 default=None,
                 help="Human reference CSV (label,set_size,mean_rt_ms)."),
    click.option("--trace", is_flag=True,
                 help="Export a per-iteration trace of one trial per cell row."),
    click.option("--workers", type=click.IntRange(min=1), default=1,
                 show_default=True, help="Parallel worker processes."),
]


def _with_shared_options(fn):
    for option in reversed(_shared_options):
        fn = option(fn)
    return fn


@main.command()
@click.argument("sim_id", type=click.Choice(PRESET_IDS))
@_with_shared_options
def replicate(sim_id, seed, out_dir, subjects, trials, reference, trace,
              workers) -> None:
    """Run one of the ten shipped simulation presets."""
    spec = _apply_overrides(preset(sim_id), seed, subjects, trials)
    sys.exit(_execute(spec, out_dir, reference, trace, workers))


@main.command()
@click.argument("experiment_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dump-spec", is_flag=True,
              help="Print the canonical serialized spec and exit.")
@_with_shared_options
def run(experiment_file, dump_spec, seed, out_dir, subjects, trials, reference,
        trace, workers) -> None:
    """Run an experiment defined in a stimulus-definition file."""
    text = Path(experiment_file).read_text(encoding="utf-8")
    try:
        spec = parse_experiment(text)
    except ParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(2)
    spec = _apply_overrides(spec, seed, subjects, trials)
    if dump_spec:
        click.echo(serialize_experiment(spec), nl=False)
        sys.exit(0)
    sys.exit(_execute(spec, out_dir, reference, trace, workers))


@main.command()
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default="results", show_default=True)
def tables(out_dir) -> None:
    """Export the canonical color and shape encoding tables as CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    color_csv, shape_csv = export_tables_csv()
    _atomic_write(out / "colors.csv", color_csv)
    _atomic_write(out / "shapes.csv", shape_csv)
    click.echo(f"wrote {out / 'colors.csv'} and {out / 'shapes.csv'}")


if __name__ == "__main__":
    main()
