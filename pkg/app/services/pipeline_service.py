"""
Workflow orchestration behind the CLI.

Each run_* function reads a validated RunConfig, calls the numeric services and
writes its artifacts under one output directory. Nothing written here carries a
timestamp, so identical configs and seeds give byte-identical files.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import settings
from app.data_models import (
    CompactObservable,
    EulerFamily,
    EulerParams,
    FieldSequence,
    ObservableDictionary,
    ParametrizedMeasure,
    Profile,
    Weight,
    WeightKind,
)
from app.request_models import (
    CheckpointBound,
    ConsistencyReport,
    DictionaryRecord,
    EulerDiagnostics,
    PerturbationRecord,
    RunConfig,
    SReport,
)
from app.request_models.run_config import EulerFamilySection
from app.services import (
    consistency_service,
    ergodic_service,
    euler_service,
    fixture_service,
    measure_service,
    observable_service,
    perturbation_service,
    snapshot_service,
)
from app.utils.error_handlers import ValidationError, wrap_service_errors

logger = logging.getLogger(__name__)

SNAPSHOT_FILE = "snapshot.bin"
PERTURBED_SNAPSHOT_FILE = "perturbed_snapshot.bin"
DICTIONARY_FILE = "dictionary.json"
CONSISTENCY_FILE = "consistency_report.json"
S_REPORT_FILE = "s_report.json"
S_REPORT_CSV = "s_report.csv"
MEASURE_CSV = "limit_measure.csv"
PERTURBATION_FILE = "perturbation_record.json"
REPORT_TABLE = "report_table.csv"

REPORT_COLUMNS = ("report", "b", "w", "checkpoint", "value", "tail_gap", "converged")


@dataclass
class SimulateResult:
    out: Path
    snapshot: Path
    sequence: FieldSequence
    consistency: Optional[ConsistencyReport] = None
    consistency_path: Optional[Path] = None


@dataclass
class AnalyzeResult:
    out: Path
    report: SReport
    report_path: Path
    csv_path: Path
    measure_path: Path


@dataclass
class PerturbResult:
    out: Path
    snapshot: Path
    record: PerturbationRecord
    record_path: Path
    sequence: FieldSequence


@dataclass
class ReportResult:
    out: Path
    table: Path
    reports: Dict[str, SReport] = field(default_factory=dict)
    rows: int = 0


def output_dir(config: RunConfig, out: Optional[Union[str, Path]] = None) -> Path:
    """--out wins over [run].out, which wins over <settings.output_dir>/<run name>"""
    if out is not None:
        return Path(out)
    if config.run.out:
        return Path(config.run.out)
    return Path(settings.output_dir) / config.run.name


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def _write_json(path: Path, model) -> Path:
    return _write_text(path, model.model_dump_json(indent=2) + "\n")


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _cell(value: object) -> str:
    """repr-exact floats, plain text otherwise"""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def euler_params(config: RunConfig, d: int) -> EulerParams:
    return EulerParams(a=config.solver.a, gamma=config.solver.gamma, d=d, cfl=config.solver.cfl)


def build_sequence(config: RunConfig) -> Tuple[FieldSequence, Optional[EulerFamily]]:
    """The family a config describes; the EulerFamily is returned for simulated families only"""
    family = config.family
    if isinstance(family, EulerFamilySection):
        euler_family = euler_service.simulate_family(config)
        return euler_family.sequence, euler_family
    grid = fixture_service.fixture_grid(
        d=family.d, cells=family.cells, time_steps=family.time_steps, T=family.T, length=family.torus_length)
    seq = fixture_service.build_fixture(
        family.fixture, grid, family.length, period=family.period, amplitude=family.amplitude, seed=config.run.seed)
    return seq, None


def build_dictionary(config: RunConfig, seq: FieldSequence) -> ObservableDictionary:
    """Explicit observables when listed, otherwise a lattice over the data range"""
    section = config.analysis.dictionary
    if section.observables is not None:
        observables = []
        for item in section.observables:
            if len(item.center) != seq.D:
                raise ValidationError(
                    f"observable center has {len(item.center)} components, data has D = {seq.D}",
                    field="dictionary",
                )
            observables.append(CompactObservable(center=item.center, radius=item.radius, profile=Profile(item.profile)))
        return observable_service.dictionary_from_observables(observables)
    return observable_service.lattice_dictionary(
        seq.values, points_per_dim=section.points_per_dim, profile=Profile(section.profile), padding=section.padding)


def save_dictionary(config: RunConfig, dictionary: ObservableDictionary, out: Path) -> Path:
    record = DictionaryRecord.from_dictionary(dictionary, config.analysis.dictionary)
    return _write_json(out / DICTIONARY_FILE, record)


def resolve_dictionary(config: RunConfig, seq: FieldSequence, out: Path) -> ObservableDictionary:
    """
    The dictionary every analysis under out shares

    Explicit observables come from the config. A lattice is read from dictionary.json
    when it was built with the current lattice settings; otherwise it is rebuilt over
    the original snapshot.bin (or seq when there is none) and written back, so a
    perturbed snapshot is analyzed with the observables of the family it came from.
    """
    section = config.analysis.dictionary
    if section.observables is not None:
        return build_dictionary(config, seq)
    path = out / DICTIONARY_FILE
    if path.exists():
        record = DictionaryRecord.model_validate_json(path.read_text(encoding="utf-8"))
        if record.matches(section, seq.D):
            return record.to_dictionary()
        logger.info(f"{path} was built with other lattice settings; rebuilding it")
    basis = seq
    original = out / SNAPSHOT_FILE
    if original.exists():
        stored = snapshot_service.load_snapshot(original)
        if stored.D == seq.D:
            basis = stored
    dictionary = build_dictionary(config, basis)
    save_dictionary(config, dictionary, out)
    return dictionary


def build_weights(config: RunConfig) -> List[Weight]:
    sections = config.analysis.weights
    if sections is None:
        return observable_service.default_weights()
    return [Weight(kind=WeightKind(w.kind), degree=w.degree, center=w.center, width=w.width) for w in sections]


def _directions(config: RunConfig, D: int) -> Optional[np.ndarray]:
    if D == 1:
        return None
    return measure_service.slice_directions(D, config.analysis.slice_directions)


def _load_or_build(config: RunConfig, snapshot: Optional[Union[str, Path]], out: Path) -> FieldSequence:
    if snapshot is not None:
        return snapshot_service.load_snapshot(snapshot)
    default = out / SNAPSHOT_FILE
    if default.exists():
        return snapshot_service.load_snapshot(default)
    logger.info(f"No snapshot under {out}; generating the family from the config")
    seq, _ = build_sequence(config)
    return seq


def _report_prefix(snapshot: Optional[Union[str, Path]]) -> str:
    """'' for snapshot.bin, 'perturbed_' for perturbed_snapshot.bin"""
    if snapshot is None:
        return ""
    stem = Path(snapshot).stem
    return stem[: -len("snapshot")] if stem.endswith("snapshot") else f"{stem}_"


@wrap_service_errors
def run_simulate(config: RunConfig, out: Optional[Union[str, Path]] = None) -> SimulateResult:
    """
    Generate the family and persist it

    Writes snapshot.bin, dictionary.json for lattice dictionaries and, for simulated
    Euler families, consistency_report.json.
    """
    out = output_dir(config, out)
    seq, family = build_sequence(config)
    snapshot = snapshot_service.save_snapshot(seq, out / SNAPSHOT_FILE)
    if config.analysis.dictionary.observables is None:
        save_dictionary(config, build_dictionary(config, seq), out)
    result = SimulateResult(out=out, snapshot=snapshot, sequence=seq)
    if family is not None:
        result.consistency = consistency_service.consistency_report(family)
        result.consistency_path = _write_json(out / CONSISTENCY_FILE, result.consistency)
    return result


def euler_diagnostics(config: RunConfig, seq: FieldSequence, N: int) -> Optional[EulerDiagnostics]:
    """Reynolds defect and boundary energy check when the data are Euler states (rho, m)"""
    d = seq.grid.d
    if seq.D != 1 + d:
        return None
    if np.min(seq.head(N)[..., 0]) <= 0:
        logger.info("Skipping Euler diagnostics: density is not strictly positive")
        return None
    params = euler_params(config, d)
    defect = consistency_service.reynolds_defect(seq, N, params)
    width = config.analysis.boundary_width
    return EulerDiagnostics(
        N=N,
        reynolds_min_eigenvalue=float(defect.min_eigenvalues().min()),
        reynolds_max_frobenius=float(defect.frobenius_norm().max()),
        reynolds_trace_weight=consistency_service.reynolds_trace_weight(params.gamma),
        boundary_width=width,
        boundary_energy_gap=consistency_service.boundary_energy_check(seq, N, width, params),
    )


def measure_rows(measure: ParametrizedMeasure) -> List[List[str]]:
    rows = []
    for index, cell in enumerate(measure.measures):
        for point, weight in zip(cell.points, cell.weights):
            rows.append([str(index), *(_cell(u) for u in point), _cell(weight)])
    return rows


def write_measure_csv(path: Path, measure: ParametrizedMeasure) -> Path:
    header = ["cell", *(f"u{k}" for k in range(measure.D)), "weight"]
    return _write_csv(path, header, measure_rows(measure))


@wrap_service_errors
def run_analyze(
    config: RunConfig,
    out: Optional[Union[str, Path]] = None,
    snapshot: Optional[Union[str, Path]] = None,
) -> AnalyzeResult:
    """
    (S)-limit analysis of a snapshot

    Writes <prefix>s_report.json, <prefix>s_report.csv and <prefix>limit_measure.csv,
    where the prefix is taken from the snapshot name (perturbed_snapshot.bin -> perturbed_).
    """
    out = output_dir(config, out)
    seq = _load_or_build(config, snapshot, out)
    analysis = config.analysis
    if analysis.checkpoints[-1] > seq.length:
        raise ValidationError(
            f"checkpoint {analysis.checkpoints[-1]} exceeds the {seq.length} members in the snapshot",
            field="checkpoints",
        )
    dictionary = resolve_dictionary(config, seq, out)
    weights = build_weights(config)
    report = ergodic_service.s_limit_report(
        seq,
        dictionary,
        weights,
        analysis.checkpoints,
        analysis.tol,
        s=analysis.s,
        m_span=analysis.m_span,
        directions=_directions(config, seq.D),
    )
    report.observables = DictionaryRecord.from_dictionary(dictionary).observables
    report.euler = euler_diagnostics(config, seq, analysis.checkpoints[-1])

    prefix = _report_prefix(snapshot)
    report_path = _write_json(out / f"{prefix}{S_REPORT_FILE}", report)
    rows = [[_cell(row[column]) for column in REPORT_COLUMNS[1:]] for row in report.rows()]
    csv_path = _write_csv(out / f"{prefix}{S_REPORT_CSV}", REPORT_COLUMNS[1:], rows)
    measure_path = write_measure_csv(out / f"{prefix}{MEASURE_CSV}", report.measure)
    return AnalyzeResult(out=out, report=report, report_path=report_path, csv_path=csv_path, measure_path=measure_path)


def _max_lipschitz(dictionary: ObservableDictionary) -> float:
    return max(b.lipschitz for b in dictionary)


def checkpoint_bounds(
    config: RunConfig,
    seq: FieldSequence,
    dictionary: ObservableDictionary,
    members: Sequence[int],
) -> List[CheckpointBound]:
    """
    Finite-N bounds on the change of Cesaro means and of the Cesaro parametrized measure

    Index-set mode: the sequences agree exactly off the set, so the bounds reduce to the
    counted density. Vanishing mode: every member moves by at most magnitude sqrt(D) / n.
    """
    perturb = config.perturb
    measure = seq.grid.measure
    lipschitz = _max_lipschitz(dictionary)
    bounds = []
    for N in config.analysis.checkpoints:
        if perturb.mode == "vanishing":
            harmonic = math.fsum(1.0 / n for n in range(1, N + 1)) / N
            displacement = perturbation_service.measure_perturbation_bound(harmonic, perturb.magnitude, seq.D, measure)
            bounds.append(CheckpointBound(
                N=N,
                density=0.0,
                cesaro_bound=perturbation_service.cesaro_perturbation_bound(0.0, lipschitz, displacement, measure),
                measure_bound=displacement,
            ))
            continue
        density = perturbation_service.index_set_density(members, N)
        bounds.append(CheckpointBound(
            N=N,
            density=density,
            cesaro_bound=perturbation_service.cesaro_perturbation_bound(density, lipschitz, 0.0, measure),
            measure_bound=perturbation_service.measure_perturbation_bound(density, perturb.magnitude, seq.D, measure),
        ))
    return bounds


@wrap_service_errors
def run_perturb(
    config: RunConfig,
    out: Optional[Union[str, Path]] = None,
    snapshot: Optional[Union[str, Path]] = None,
) -> PerturbResult:
    """Write perturbed_snapshot.bin and perturbation_record.json with the finite-N bounds"""
    out = output_dir(config, out)
    seq = _load_or_build(config, snapshot, out)
    perturb, seed = config.perturb, config.run.seed
    if perturb.mode == "vanishing":
        perturbed = perturbation_service.perturb_vanishing(seq, perturb.magnitude, seed)
        members = list(range(1, seq.length + 1))
    else:
        members = perturbation_service.index_set_members(perturb.index_set, seq.length, perturb.indices)
        perturbed = perturbation_service.perturb_on_index_set(
            seq, perturb.index_set, perturb.magnitude, seed, perturb.indices)

    dictionary = resolve_dictionary(config, seq, out)
    record = PerturbationRecord(
        mode=perturb.mode,
        index_set=perturb.index_set if perturb.mode == "index-set" else "all",
        indices_modified=len(members),
        magnitude=perturb.magnitude,
        seed=seed,
        bounds=checkpoint_bounds(config, seq, dictionary, members),
    )
    path = snapshot_service.save_snapshot(perturbed, out / PERTURBED_SNAPSHOT_FILE)
    record_path = _write_json(out / PERTURBATION_FILE, record)
    return PerturbResult(out=out, snapshot=path, record=record, record_path=record_path, sequence=perturbed)


def load_report(path: Union[str, Path]) -> SReport:
    return SReport.model_validate_json(Path(path).read_text(encoding="utf-8"))


@wrap_service_errors
def run_report(out: Union[str, Path], reports: Optional[Sequence[Union[str, Path]]] = None) -> ReportResult:
    """
    Merge SReport JSON files into report_table.csv, one row per (report, b, w, checkpoint)

    Raises:
        ValidationError: If no report is found
    """
    out = Path(out)
    paths = [Path(p) for p in reports] if reports else sorted(out.glob(f"*{S_REPORT_FILE}"))
    if not paths:
        raise ValidationError(f"no {S_REPORT_FILE} found under {out}", field="out")

    result = ReportResult(out=out, table=out / REPORT_TABLE)
    rows = []
    for path in paths:
        name = path.name[: -len(".json")] if path.name.endswith(".json") else path.name
        report = load_report(path)
        result.reports[name] = report
        for row in report.rows():
            rows.append([name, *(_cell(row[column]) for column in REPORT_COLUMNS[1:])])
    _write_csv(result.table, REPORT_COLUMNS, rows)
    result.rows = len(rows)
    logger.info(f"Merged {len(paths)} reports into {result.table} ({len(rows)} rows)")
    return result
