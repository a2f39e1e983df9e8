"""
Run configuration schema.

One TOML file describes a run: the family to generate (a synthetic fixture or a
simulated Euler family), the solver parameters, the analysis dictionary, the weight
list, the checkpoint schedule and the perturbation. Everything is validated here
before any compute starts.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings
from app.utils.error_handlers import ConfigError
from app.utils.validators import ErrorMessages, Validators

FIXTURE_NAMES = (
    "constant",
    "alternating",
    "periodic",
    "strongly-convergent",
    "block",
    "geometric-noise",
    "alternating-momentum",
    "pseudo-random",
)
PRESET_NAMES = ("constant", "smooth-wave", "riemann", "alternating-momentum-fixture", "compact-bump")


class StrictSection(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunSection(StrictSection):
    name: str = Field(default="run", min_length=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    out: Optional[str] = None


class SolverSection(StrictSection):
    a: float = Field(default=1.0, gt=0)
    gamma: float = Field(default=1.4)
    cfl: float = Field(default=0.45)

    @field_validator("gamma")
    @classmethod
    def validate_gamma(cls, v):
        if not v > 1:
            raise ValueError(ErrorMessages.GAMMA_RANGE.format(value=v))
        return v

    @field_validator("cfl")
    @classmethod
    def validate_cfl(cls, v):
        if not 0 < v < 1:
            raise ValueError(ErrorMessages.CFL_RANGE.format(value=v))
        return v


class FixtureFamily(StrictSection):
    """Synthetic sequence generated in closed form"""

    kind: Literal["fixture"] = "fixture"
    fixture: Literal[FIXTURE_NAMES] = "alternating"
    length: int = Field(default=512, ge=1)
    d: int = Field(default=1, ge=1, le=2)
    cells: int = Field(default=4, ge=1)
    time_steps: int = Field(default=1, ge=1)
    T: float = Field(default=1.0, gt=0)
    torus_length: float = Field(default=1.0, gt=0)
    period: int = Field(default=3, ge=1)
    amplitude: float = Field(default=1.0, gt=0)


class EulerFamilySection(StrictSection):
    """Family of finite-volume runs, member n uses member_cells[n] and member_eps[n]"""

    kind: Literal["euler"] = "euler"
    preset: Literal[PRESET_NAMES] = "smooth-wave"
    d: int = Field(default=1, ge=1, le=2)
    member_cells: List[int] = Field(default_factory=lambda: [64])
    member_eps: List[float] = Field(default_factory=lambda: [0.0])
    length: Optional[int] = Field(default=None, ge=1)
    analysis_cells: Optional[int] = Field(default=None, ge=1)
    time_steps: int = Field(default=8, ge=1)
    T: float = Field(default=0.1, gt=0)
    torus_length: float = Field(default=1.0, gt=0)
    amplitude: float = Field(default=0.2, gt=0)

    @field_validator("member_cells")
    @classmethod
    def validate_member_cells(cls, v):
        Validators.validate_non_empty(v, "member_cells must not be empty")
        for cells in v:
            Validators.validate_positive_int(cells, "member_cells")
        return v

    @field_validator("member_eps")
    @classmethod
    def validate_member_eps(cls, v):
        Validators.validate_non_empty(v, "member_eps must not be empty")
        if any(eps < 0 for eps in v):
            raise ValueError("member_eps values must be >= 0")
        return v

    @model_validator(mode="after")
    def validate_schedule_lengths(self):
        counts = {len(self.member_cells), len(self.member_eps)} - {1}
        if len(counts) > 1:
            raise ValueError("member_cells and member_eps must have equal length or length 1")
        members = self.member_count
        if self.length is not None and self.length != members:
            raise ValueError(f"length {self.length} disagrees with the {members} scheduled members")
        coarsest = min(self.member_cells)
        analysis = self.analysis_cells or coarsest
        if analysis > coarsest or any(cells % analysis for cells in self.member_cells):
            raise ValueError(ErrorMessages.CELLS_NOT_MULTIPLE.format(cells=self.member_cells, analysis=analysis))
        return self

    @property
    def member_count(self) -> int:
        if self.length is not None and len(self.member_cells) == len(self.member_eps) == 1:
            return self.length
        return max(len(self.member_cells), len(self.member_eps))

    def schedule(self) -> List[tuple]:
        """(cells, eps) per member, single entries broadcast"""
        count = self.member_count
        cells = self.member_cells * count if len(self.member_cells) == 1 else self.member_cells
        eps = self.member_eps * count if len(self.member_eps) == 1 else self.member_eps
        return list(zip(cells, eps))


class ObservableSpec(StrictSection):
    center: List[float] = Field(..., min_length=1)
    radius: float = Field(..., gt=0)
    profile: Literal["tent", "smooth-bump"] = "tent"


class DictionarySection(StrictSection):
    """Either an explicit observable list or a lattice over the data range"""

    points_per_dim: int = Field(default=3, ge=1)
    profile: Literal["tent", "smooth-bump"] = "tent"
    padding: float = Field(default=0.1, ge=0)
    observables: Optional[List[ObservableSpec]] = None

    @field_validator("observables")
    @classmethod
    def validate_observables(cls, v):
        if v is not None:
            Validators.validate_non_empty(v, ErrorMessages.DICTIONARY_EMPTY)
        return v


class WeightSpec(StrictSection):
    kind: Literal["constant", "linear", "polynomial", "tent"] = "constant"
    degree: int = Field(default=0, ge=0)
    center: float = 0.5
    width: float = 0.5

    @model_validator(mode="after")
    def validate_tent_support(self):
        if self.kind == "tent":
            low, high = self.center - self.width / 2, self.center + self.width / 2
            if not self.width > 0 or low < 0 or high > 1:
                raise ValueError(ErrorMessages.TENT_OUTSIDE_UNIT.format(low=low, high=high))
        return self


class AnalysisSection(StrictSection):
    checkpoints: List[int] = Field(default_factory=lambda: list(settings.default_checkpoints))
    tol: float = Field(default=settings.default_tol)
    s: float = Field(default=1.0)
    m_span: List[int] = Field(default_factory=lambda: [1, 2, 3])
    slice_directions: int = Field(default=settings.slice_directions, ge=1)
    boundary_width: float = Field(default=0.125, gt=0)
    dictionary: DictionarySection = Field(default_factory=DictionarySection)
    weights: Optional[List[WeightSpec]] = None

    @field_validator("checkpoints")
    @classmethod
    def validate_checkpoints(cls, v):
        return Validators.validate_schedule(v)

    @field_validator("tol")
    @classmethod
    def validate_tol(cls, v):
        return Validators.validate_tolerance(v)

    @field_validator("s")
    @classmethod
    def validate_s(cls, v):
        return Validators.validate_order(v)

    @field_validator("m_span")
    @classmethod
    def validate_m_span(cls, v):
        Validators.validate_non_empty(v, "m_span must not be empty")
        return [Validators.validate_positive_int(m, "m") for m in v]

    @field_validator("weights")
    @classmethod
    def validate_weights(cls, v):
        if v is not None:
            Validators.validate_non_empty(v, ErrorMessages.WEIGHTS_EMPTY)
        return v


class PerturbSection(StrictSection):
    mode: Literal["index-set", "vanishing"] = "index-set"
    index_set: Literal["squares", "powers_of_two", "custom"] = "squares"
    indices: List[int] = Field(default_factory=list)
    magnitude: float = Field(default=10.0, gt=0)

    @field_validator("indices")
    @classmethod
    def validate_indices(cls, v):
        return sorted({Validators.validate_positive_int(n, "index") for n in v})


class RunConfig(StrictSection):
    """Complete description of one reproducible run"""

    run: RunSection = Field(default_factory=RunSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    family: Union[FixtureFamily, EulerFamilySection] = Field(default_factory=FixtureFamily, discriminator="kind")
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    perturb: PerturbSection = Field(default_factory=PerturbSection)

    @model_validator(mode="after")
    def validate_schedule_fits_family(self):
        length = self.family_length
        if self.analysis.checkpoints[-1] > length:
            raise ValueError(ErrorMessages.INDEX_OUT_OF_RANGE.format(
                name="checkpoint", value=self.analysis.checkpoints[-1], limit=length))
        return self

    @property
    def family_length(self) -> int:
        if isinstance(self.family, EulerFamilySection):
            return self.family.member_count
        return self.family.length

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        """
        Read and validate a TOML run config

        Raises:
            ConfigError: If the file cannot be read or is not valid TOML
            pydantic.ValidationError: If a value violates the schema
        """
        path = Path(path)
        try:
            with path.open("rb") as handle:
                data = tomllib.load(handle)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e.strerror or e}", path=str(path))
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"config {path} is not valid TOML: {e}", path=str(path))
        return cls.model_validate(data)

    def with_overrides(
        self,
        seed: Optional[int] = None,
        checkpoints: Optional[List[int]] = None,
        tol: Optional[float] = None,
    ) -> "RunConfig":
        """Apply CLI flag overrides and revalidate"""
        data = self.model_dump()
        if seed is not None:
            data["run"]["seed"] = seed
        if checkpoints is not None:
            data["analysis"]["checkpoints"] = checkpoints
        if tol is not None:
            data["analysis"]["tol"] = tol
        return RunConfig.model_validate(data)


__all__ = [
    "RunConfig", "RunSection", "SolverSection", "FixtureFamily", "EulerFamilySection",
    "DictionarySection", "ObservableSpec", "WeightSpec", "AnalysisSection", "PerturbSection",
    "FIXTURE_NAMES", "PRESET_NAMES",
]
