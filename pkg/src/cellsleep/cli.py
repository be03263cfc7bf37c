"""Command-line runner: single episodes, controller comparisons, the
protocol server, config validation and plot-ready CSV series.

Exit codes: 0 success, 2 configuration errors, 3 aborted episodes.
"""

from __future__ import annotations

import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from . import baselines, protocol
from .scenario import build_default_scenario, load_scenario, validate

SUMMARY_FIELDS = ("controller", "seed", "energy_j", "mean_tput_mbps",
                  "switches", "reward_sum")


def _load_config(scenario_path: str | None, seed: int):
    if scenario_path is None:
        return build_default_scenario(seed)
    try:
        config = load_scenario(scenario_path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        click.echo(f"error: cannot load scenario: {exc}", err=True)
        sys.exit(2)
    violations = validate(config)
    if violations:
        for v in violations:
            click.echo(f"invalid scenario: {v}", err=True)
        sys.exit(2)
    return config


def _maybe_override_steps(config, steps: int | None):
    if steps is None:
        return config
    from dataclasses import replace
    return replace(config, episode_steps=steps)


@click.group()
def main():
    """Desk-scale 5G NSA cell on/off energy-saving simulator."""


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              default=None, help="Scenario JSON (default: built-in demo).")
@click.option("--controller", default=baselines.ALL_ON, show_default=True,
              help="all_on | random | threshold | external:host:port")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--steps", default=None, type=int, help="Override episode_steps.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory for per-step and KPM CSV exports.")
def run(scenario_path, controller, seed, steps, out_dir):
    """Run one episode and print its report."""
    config = _maybe_override_steps(_load_config(scenario_path, seed), steps)
    steps_csv = None
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        steps_csv = str(Path(out_dir) / f"steps_{controller}_{seed}.csv")
    try:
        report = baselines.run_episode(config, controller, seed, steps_csv)
    except baselines.AbortedEpisodeError as exc:
        click.echo(f"aborted: {exc} (partial report: "
                   f"{len(exc.report.steps)} steps)", err=True)
        sys.exit(3)
    click.echo(
        f"controller={report.controller} seed={report.seed} "
        f"energy_j={report.energy_j:.3f} mean_tput_mbps="
        f"{report.mean_tput_mbps:.3f} switches={report.switches} "
        f"reward_sum={report.reward_sum:.4f}")


def _episode_job(args):
    scenario_path, seed_default, steps, kind, seed = args
    config = _maybe_override_steps(
        _load_config(scenario_path, seed_default), steps)
    report = baselines.run_episode(config, kind, seed)
    return report


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              default=None)
@click.option("--controllers", default="all_on,random,threshold",
              show_default=True, help="Comma-separated controller kinds.")
@click.option("--seeds", default="1,2,3,4,5", show_default=True,
              help="Comma-separated seeds.")
@click.option("--steps", default=None, type=int)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--jobs", default=1, show_default=True, type=int,
              help="Parallel episode workers.")
def compare(scenario_path, controllers, seeds, steps, out_dir, jobs):
    """Run a controllers x seeds matrix; write per-step CSVs and a summary."""
    kinds = [c.strip() for c in controllers.split(",") if c.strip()]
    seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    _load_config(scenario_path, 0)  # fail fast on a broken scenario file

    tasks = [(scenario_path, 0, steps, kind, seed)
             for kind in kinds for seed in seed_list]
    aborted = False
    reports = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_episode_job, task): task for task in tasks}
            for future in futures:
                try:
                    report = future.result()
                except baselines.AbortedEpisodeError as exc:
                    click.echo(f"aborted: {exc}", err=True)
                    aborted = True
                    continue
                reports[(report.controller, report.seed)] = report
    else:
        for task in tasks:
            try:
                report = _episode_job(task)
            except baselines.AbortedEpisodeError as exc:
                click.echo(f"aborted: {exc}", err=True)
                aborted = True
                continue
            reports[(report.controller, report.seed)] = report

    summary_path = Path(out_dir) / "summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_FIELDS)
        # deterministic merge order regardless of execution order
        for kind in kinds:
            for seed in seed_list:
                report = reports.get((kind, seed))
                if report is None:
                    continue
                baselines.write_steps_csv(
                    report.steps, str(Path(out_dir) / f"steps_{kind}_{seed}.csv"))
                writer.writerow([
                    report.controller, report.seed, report.energy_j,
                    report.mean_tput_mbps, report.switches, report.reward_sum,
                ])
    click.echo(f"summary written to {summary_path}")
    if aborted:
        sys.exit(3)


@main.command()
@click.option("--bind", default="127.0.0.1", show_default=True)
@click.option("--port", default=9500, show_default=True, type=int)
def serve(bind, port):
    """Run the wire-protocol server (one simulation per connection)."""
    protocol.serve(bind, port)


@main.command("validate")
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              required=True)
def validate_cmd(scenario_path):
    """Check a scenario file; exit 0 when valid, 2 when not."""
    try:
        config = load_scenario(scenario_path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        click.echo(f"error: cannot load scenario: {exc}", err=True)
        sys.exit(2)
    violations = validate(config)
    if violations:
        for v in violations:
            click.echo(v)
        sys.exit(2)
    click.echo("ok")


@main.command("export-plots")
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              default=None)
@click.option("--controller", default=baselines.ALL_ON, show_default=True)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--steps", default=None, type=int)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def export_plots(scenario_path, controller, seed, steps, out_dir):
    """Emit a plot-ready per-step energy/throughput series as CSV."""
    config = _maybe_override_steps(_load_config(scenario_path, seed), steps)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    try:
        report = baselines.run_episode(config, controller, seed)
    except baselines.AbortedEpisodeError as exc:
        click.echo(f"aborted: {exc}", err=True)
        sys.exit(3)
    path = Path(out_dir) / f"series_{controller}_{seed}.csv"
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "sim_time_ms", "tput_mbps", "power_w",
                         "energy_j", "cum_energy_j", "reward"])
        cum = 0.0
        for r in report.steps:
            cum = math.fsum([cum, r.energy_j])
            writer.writerow([r.step, r.sim_time_ms, r.tput_mbps, r.power_w,
                             r.energy_j, cum, r.reward])
    click.echo(f"series written to {path}")


if __name__ == "__main__":
    main()
