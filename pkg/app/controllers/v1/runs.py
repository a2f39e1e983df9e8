from pathlib import Path
from typing import Annotated, List, Optional

import typer
from rich import box
from rich.console import Console
from rich.table import Table

from app.request_models import RunConfig
from app.services import pipeline_service

router = typer.Typer(help="simulate -> analyze -> perturb -> report workflows")

console = Console()


def parse_checkpoints(value: Optional[str]) -> Optional[List[int]]:
    """'64,128,256' -> [64, 128, 256]"""
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise typer.BadParameter(f"checkpoints must be a comma-separated list of integers, got '{value}'")


ConfigOption = Annotated[Path, typer.Option("--config", "-c", help="TOML run config")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Output directory")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", min=0, max=2**64 - 1, help="Override [run].seed")]
CheckpointsOption = Annotated[
    Optional[str], typer.Option("--checkpoints", help="Override the checkpoint schedule, e.g. 64,128,256,512")
]
TolOption = Annotated[Optional[float], typer.Option("--tol", help="Override the analysis tolerance")]
SnapshotOption = Annotated[Optional[Path], typer.Option("--snapshot", help="Snapshot to read instead of <out>/snapshot.bin")]


def load_config(
    config: Path,
    seed: Optional[int] = None,
    checkpoints: Optional[str] = None,
    tol: Optional[float] = None,
) -> RunConfig:
    return RunConfig.load(config).with_overrides(seed=seed, checkpoints=parse_checkpoints(checkpoints), tol=tol)


def _flag(value: bool) -> str:
    return "[green]yes[/green]" if value else "[red]no[/red]"


@router.command()
def simulate(
    config: ConfigOption,
    out: OutOption = None,
    seed: SeedOption = None,
    checkpoints: CheckpointsOption = None,
    tol: TolOption = None,
):
    """Generate the configured family and write snapshot.bin (plus consistency_report.json for Euler runs)"""
    run_config = load_config(config, seed, checkpoints, tol)
    result = pipeline_service.run_simulate(run_config, out)
    console.print(f"snapshot: {result.snapshot} ({result.sequence.length} members, D = {result.sequence.D})")
    if result.consistency is None:
        return

    table = Table(title="Consistency", box=box.ROUNDED, header_style="bold magenta")
    for column in ("member", "cells", "eps", "max e1", "max e2", "min energy defect", "mass drift"):
        table.add_column(column, justify="right")
    for member in result.consistency.members:
        table.add_row(
            str(member.member),
            str(member.cells),
            f"{member.eps:g}",
            f"{member.e1_max:.3e}",
            f"{member.e2_max:.3e}",
            f"{member.min_energy_defect:.3e}",
            f"{member.mass_drift:.1e}",
        )
    console.print(table)
    console.print(f"energies nonincreasing: {_flag(result.consistency.energies_nonincreasing)}")


@router.command()
def analyze(
    config: ConfigOption,
    out: OutOption = None,
    seed: SeedOption = None,
    checkpoints: CheckpointsOption = None,
    tol: TolOption = None,
    snapshot: SnapshotOption = None,
):
    """Estimate the (S)-limit and write s_report.json, s_report.csv and limit_measure.csv"""
    run_config = load_config(config, seed, checkpoints, tol)
    result = pipeline_service.run_analyze(run_config, out, snapshot)
    report = result.report

    table = Table(title="(S)-convergence", box=box.ROUNDED, header_style="bold magenta")
    table.add_column("b", justify="right")
    table.add_column("w")
    table.add_column("estimate", justify="right")
    table.add_column("tail gap", justify="right")
    table.add_column("converged")
    for entry in report.entries:
        verdict = entry.verdict
        table.add_row(
            str(entry.observable_id), entry.weight, f"{verdict.estimate:.4f}", f"{verdict.tail_gap:.2e}",
            _flag(verdict.converged),
        )
    console.print(table)
    console.print(f"weight independent: {_flag(report.weight_independent)}  converged: {_flag(report.converged)}")
    if report.correlation_converged is not None:
        console.print(f"correlation side converged: {_flag(report.correlation_converged)}")
    if report.euler is not None:
        console.print(
            f"Reynolds defect min eigenvalue {report.euler.reynolds_min_eigenvalue:.3e}, "
            f"boundary energy gap {report.euler.boundary_energy_gap:.3e}"
        )
    console.print(f"report: {result.report_path}")


@router.command()
def perturb(
    config: ConfigOption,
    out: OutOption = None,
    seed: SeedOption = None,
    checkpoints: CheckpointsOption = None,
    tol: TolOption = None,
    snapshot: SnapshotOption = None,
):
    """Perturb a snapshot on an index set (or by a vanishing amount) and record the finite-N bounds"""
    run_config = load_config(config, seed, checkpoints, tol)
    result = pipeline_service.run_perturb(run_config, out, snapshot)

    table = Table(title="Perturbation bounds", box=box.ROUNDED, header_style="bold magenta")
    for column in ("N", "density", "Cesaro bound", "measure bound"):
        table.add_column(column, justify="right")
    for bound in result.record.bounds:
        table.add_row(str(bound.N), f"{bound.density:.4f}", f"{bound.cesaro_bound:.4e}", f"{bound.measure_bound:.4e}")
    console.print(table)
    console.print(f"modified {result.record.indices_modified} members -> {result.snapshot}")


@router.command()
def report(
    config: Annotated[Optional[Path], typer.Option("--config", "-c", help="TOML run config")] = None,
    out: OutOption = None,
):
    """Merge the JSON reports under the output directory into report_table.csv"""
    if out is None and config is None:
        raise typer.BadParameter("report needs --out or --config")
    directory = out if out is not None else pipeline_service.output_dir(RunConfig.load(config))
    result = pipeline_service.run_report(directory)

    table = Table(title="Reports", box=box.ROUNDED, header_style="bold magenta")
    table.add_column("report")
    table.add_column("verdicts", justify="right")
    table.add_column("converged")
    table.add_column("dirac gap", justify="right")
    for name, s_report in result.reports.items():
        table.add_row(name, str(len(s_report.entries)), _flag(s_report.converged), f"{s_report.dirac_gap:.3e}")
    console.print(table)
    console.print(f"table: {result.table} ({result.rows} rows)")
