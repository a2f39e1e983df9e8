from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .grid import FieldSequence, Grid, _frozen
from ..utils.validators import ErrorMessages


@dataclass(frozen=True)
class EulerParams:
    """Isentropic EOS p = a rho^gamma plus scheme knobs"""

    a: float = 1.0
    gamma: float = 1.4
    d: int = 1
    eps: float = 0.0
    cfl: float = 0.45

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"pressure coefficient a must be > 0, got {self.a}")
        if not self.gamma > 1:
            raise ValueError(ErrorMessages.GAMMA_RANGE.format(value=self.gamma))
        if not 0 < self.cfl < 1:
            raise ValueError(ErrorMessages.CFL_RANGE.format(value=self.cfl))
        if self.eps < 0:
            raise ValueError(f"viscosity eps must be >= 0, got {self.eps}")
        if self.d not in (1, 2):
            raise ValueError(f"space dimension must be 1 or 2, got {self.d}")


@dataclass(frozen=True, eq=False)
class EulerState:
    """Density (cells...) and momentum (cells..., d) at time t on a periodic box"""

    rho: np.ndarray
    m: np.ndarray
    lengths: Tuple[float, ...]
    t: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.float64)
        m = np.asarray(self.m, dtype=np.float64)
        if m.shape != (*rho.shape, rho.ndim):
            raise ValueError(ErrorMessages.SHAPE_MISMATCH.format(shape=m.shape, expected=(*rho.shape, rho.ndim)))
        object.__setattr__(self, "rho", _frozen(rho))
        object.__setattr__(self, "m", _frozen(m))
        object.__setattr__(self, "lengths", tuple(float(length) for length in self.lengths))

    @property
    def d(self) -> int:
        return self.rho.ndim

    @property
    def cells(self) -> Tuple[int, ...]:
        return self.rho.shape

    @property
    def dx(self) -> Tuple[float, ...]:
        return tuple(length / n for length, n in zip(self.lengths, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    def total_mass(self) -> float:
        return float(self.rho.sum() * self.cell_volume)


@dataclass(frozen=True)
class TestFunction:
    """phi(t, x) = psi(t) prod_j mode_j(x_j), psi(t) = (1 - t/T)^2

    A mode is ('cos' | 'sin', k) meaning cos or sin of 2 pi k x / L; ('cos', 0) is the constant 1.
    """

    __test__ = False

    modes: Tuple[Tuple[str, int], ...]
    T: float = 1.0
    lengths: Tuple[float, ...] = field(default=None)

    def __post_init__(self):
        modes = tuple((str(kind), int(k)) for kind, k in self.modes)
        if any(kind not in ("cos", "sin") for kind, _ in modes):
            raise ValueError(f"unknown trigonometric mode in {modes}")
        object.__setattr__(self, "modes", modes)
        lengths = self.lengths if self.lengths is not None else (1.0,) * len(modes)
        object.__setattr__(self, "lengths", tuple(float(length) for length in lengths))

    @property
    def d(self) -> int:
        return len(self.modes)

    @property
    def label(self) -> str:
        return "*".join("1" if k == 0 else f"{kind}{k}" for kind, k in self.modes)


@dataclass(frozen=True, eq=False)
class MemberFields:
    """One family member sampled on the analysis grid

    rho (K, cells...), m (K, cells..., d) at the analysis sample times; rho0 / m0 its
    initial data cell-averaged onto the analysis grid.
    """

    grid: Grid
    rho: np.ndarray
    m: np.ndarray
    rho0: np.ndarray
    m0: np.ndarray

    def __post_init__(self):
        for name in ("rho", "m", "rho0", "m0"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.rho.shape != self.grid.shape or self.rho0.shape != self.grid.spatial_shape:
            raise ValueError(ErrorMessages.SHAPE_MISMATCH.format(shape=self.rho.shape, expected=self.grid.shape))


@dataclass(frozen=True, eq=False)
class EulerFamily:
    """A simulated consistent-approximation family and its bookkeeping"""

    sequence: FieldSequence
    members: Tuple[MemberFields, ...]
    params: EulerParams
    preset: str
    member_cells: Tuple[int, ...]
    member_eps: Tuple[float, ...]
    initial_energies: np.ndarray
    reference_energy: float
    energy_histories: Tuple[np.ndarray, ...]
    mass_histories: Tuple[np.ndarray, ...]

    @property
    def grid(self) -> Grid:
        return self.sequence.grid

    @property
    def length(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class ReynoldsDefectField:
    """Per-cell symmetric d x d defect; scheme part R1 is identically zero"""

    grid: Grid
    oscillation: np.ndarray
    N: int

    def __post_init__(self):
        object.__setattr__(self, "oscillation", _frozen(self.oscillation))

    @property
    def scheme(self) -> np.ndarray:
        return np.zeros_like(self.oscillation)

    @property
    def matrices(self) -> np.ndarray:
        """R = R1 + R2, shape (*grid.shape, d, d)"""
        return self.scheme + self.oscillation

    def trace(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=-2, axis2=-1)

    def min_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrices)[..., 0]

    def frobenius_norm(self) -> np.ndarray:
        return np.linalg.norm(self.matrices, axis=(-2, -1))
