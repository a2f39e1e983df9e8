from typing import Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.data_models import CompactObservable, ObservableDictionary, ParametrizedMeasure, Profile
from app.request_models.run_config import DictionarySection


class ConvergenceVerdict(BaseModel):
    """Finite-N Cauchy verdict over a checkpoint schedule"""

    estimate: float
    tail_gap: float = Field(ge=0)
    tol: float = Field(gt=0)
    converged: bool
    checkpoints: List[int]
    values: List[float] = Field(default_factory=list, description="Statistic at each checkpoint")

    @model_validator(mode="after")
    def validate_converged(self):
        if self.converged != (self.tail_gap <= self.tol):
            raise ValueError(f"converged={self.converged} contradicts tail_gap {self.tail_gap} vs tol {self.tol}")
        return self

    @classmethod
    def from_values(
        cls,
        values: Sequence[float],
        checkpoints: Sequence[int],
        tol: float,
        tail_gap: Optional[float] = None,
    ) -> "ConvergenceVerdict":
        """Build a verdict whose tail gap is the spread of values unless given"""
        values = [float(v) for v in values]
        gap = float(max(values) - min(values)) if tail_gap is None else float(tail_gap)
        return cls(
            estimate=values[-1],
            tail_gap=gap,
            tol=tol,
            converged=gap <= tol,
            checkpoints=list(checkpoints),
            values=values,
        )


class StationarityModulus(BaseModel):
    observable_id: int
    k: int = Field(ge=1)
    modulus: float = Field(ge=0)
    samples: int = Field(ge=0)
    max_shift: int = Field(ge=0)
    enumerated: bool = True


class VerdictEntry(BaseModel):
    observable_id: int
    weight: str
    verdict: ConvergenceVerdict


class WeightSpread(BaseModel):
    observable_id: int
    N: int
    spread: float = Field(ge=0)
    independent: bool


class CorrelationEntry(BaseModel):
    """Correlation side of the equivalence principle for one observable"""

    observable_id: int
    limit_gap: float
    disintegration_gap: float
    converged: bool


class MeasureDistance(BaseModel):
    from_checkpoint: int
    to_checkpoint: int
    wasserstein: float
    weak_star: float


class EulerDiagnostics(BaseModel):
    N: int
    reynolds_min_eigenvalue: float
    reynolds_max_frobenius: float
    reynolds_trace_weight: float
    boundary_width: float
    boundary_energy_gap: float


class ObservableEntry(BaseModel):
    id: int
    center: List[float]
    radius: float = Field(gt=0)
    profile: Literal["tent", "smooth-bump"] = "tent"


class DictionaryRecord(BaseModel):
    """Observable definitions shared by every analysis written to one output directory"""

    source: Literal["lattice", "explicit"]
    points_per_dim: Optional[int] = None
    profile: Optional[str] = None
    padding: Optional[float] = None
    lower: List[float]
    upper: List[float]
    observables: List[ObservableEntry]

    @classmethod
    def from_dictionary(cls, dictionary: ObservableDictionary, section: Optional[DictionarySection] = None) -> "DictionaryRecord":
        """Record a dictionary; lattice settings are kept only when section describes a lattice"""
        lattice = section is not None and section.observables is None
        return cls(
            source="lattice" if lattice else "explicit",
            points_per_dim=section.points_per_dim if lattice else None,
            profile=section.profile if lattice else None,
            padding=section.padding if lattice else None,
            lower=list(dictionary.lower),
            upper=list(dictionary.upper),
            observables=[
                ObservableEntry(id=b.id, center=list(b.center), radius=b.radius, profile=b.profile.value)
                for b in dictionary
            ],
        )

    def matches(self, section: DictionarySection, D: int) -> bool:
        """True when built by the same lattice settings in state dimension D"""
        return (
            self.source == "lattice"
            and (self.points_per_dim, self.profile, self.padding) == (section.points_per_dim, section.profile, section.padding)
            and len(self.lower) == D
        )

    def to_dictionary(self) -> ObservableDictionary:
        observables = tuple(
            CompactObservable(center=tuple(b.center), radius=b.radius, profile=Profile(b.profile), id=b.id)
            for b in self.observables
        )
        return ObservableDictionary(observables=observables, lower=tuple(self.lower), upper=tuple(self.upper))


class SReport(BaseModel):
    """Aggregated (S)-convergence report; the estimated limit measure is attached but not serialized"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    checkpoints: List[int]
    tol: float
    s: float
    dictionary_size: int
    observables: List[ObservableEntry] = Field(default_factory=list)
    weights: List[str]
    entries: List[VerdictEntry]
    weight_spread: List[WeightSpread]
    weight_independent: bool
    converged: bool
    correlation: List[CorrelationEntry] = Field(default_factory=list)
    correlation_converged: Optional[bool] = None
    distances: List[MeasureDistance] = Field(default_factory=list)
    barycenter_range: List[Tuple[float, float]] = Field(default_factory=list)
    dirac_gap: float = 0.0
    euler: Optional[EulerDiagnostics] = None
    measure: Optional[ParametrizedMeasure] = Field(default=None, exclude=True)

    def rows(self) -> List[Dict[str, object]]:
        """One row per (b, w, checkpoint)"""
        rows = []
        for entry in self.entries:
            for N, value in zip(entry.verdict.checkpoints, entry.verdict.values):
                rows.append({
                    "b": entry.observable_id,
                    "w": entry.weight,
                    "checkpoint": N,
                    "value": value,
                    "tail_gap": entry.verdict.tail_gap,
                    "converged": entry.verdict.converged,
                })
        return rows


class MemberConsistency(BaseModel):
    member: int
    cells: int
    eps: float
    e1: List[float]
    e2: List[float]
    e1_max: float
    e2_max: float
    initial_energy: float
    energy_defect: List[float]
    min_energy_defect: float
    mass_drift: float
    initial_data_error: float
    admissible: bool


class ConsistencyReport(BaseModel):
    preset: str
    test_functions: List[str]
    members: List[MemberConsistency]
    reference_energy: float
    trace_weight: float
    energies_nonincreasing: bool
    energy_limsup_ok: bool


class CheckpointBound(BaseModel):
    N: int
    density: float = Field(ge=0, le=1)
    cesaro_bound: float = Field(ge=0)
    measure_bound: float = Field(ge=0)


class PerturbationRecord(BaseModel):
    mode: str
    index_set: str
    indices_modified: int
    magnitude: float
    seed: int
    bounds: List[CheckpointBound]
