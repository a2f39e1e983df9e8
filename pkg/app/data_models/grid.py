from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..utils.validators import ErrorMessages


def _frozen(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Grid:
    """Space-time grid Q = (0, T) x torus, cellwise constant fields"""

    d: int
    cells_per_dim: Tuple[int, ...]
    time_steps: int
    T: float = 1.0
    torus_length: Tuple[float, ...] = field(default=None)

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"space dimension must be 1 or 2, got {self.d}")
        cells = tuple(int(c) for c in self.cells_per_dim)
        lengths = self.torus_length if self.torus_length is not None else (1.0,) * self.d
        lengths = tuple(float(length) for length in lengths)
        if len(cells) != self.d or len(lengths) != self.d:
            raise ValueError(f"grid needs {self.d} cell counts and lengths, got {cells} and {lengths}")
        if min(cells) < 1 or self.time_steps < 1:
            raise ValueError("grid cell counts and time steps must be positive")
        if not self.T > 0 or min(lengths) <= 0:
            raise ValueError("final time and torus lengths must be positive")
        object.__setattr__(self, "cells_per_dim", cells)
        object.__setattr__(self, "torus_length", lengths)
        object.__setattr__(self, "T", float(self.T))

    @classmethod
    def uniform(cls, d: int, cells: int, time_steps: int = 1, T: float = 1.0, length: float = 1.0) -> "Grid":
        return cls(d=d, cells_per_dim=(cells,) * d, time_steps=time_steps, T=T, torus_length=(length,) * d)

    @property
    def spatial_shape(self) -> Tuple[int, ...]:
        return self.cells_per_dim

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.time_steps, *self.cells_per_dim)

    @property
    def dx(self) -> Tuple[float, ...]:
        return tuple(length / cells for length, cells in zip(self.torus_length, self.cells_per_dim))

    @property
    def dt(self) -> float:
        return self.T / self.time_steps

    @property
    def spatial_cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def cell_volume(self) -> float:
        """Space-time volume of one cell"""
        return self.dt * self.spatial_cell_volume

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def domain_volume(self) -> float:
        return float(np.prod(self.torus_length))

    @property
    def measure(self) -> float:
        """|Q| = T x |torus|"""
        return self.T * self.domain_volume

    def time_centers(self) -> np.ndarray:
        return (np.arange(self.time_steps) + 0.5) * self.dt

    def cell_centers(self) -> Tuple[np.ndarray, ...]:
        """Cell-center coordinates, one meshgrid array per dimension (ij indexing)"""
        axes = [(np.arange(n) + 0.5) * h for n, h in zip(self.cells_per_dim, self.dx)]
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True, eq=False)
class FieldSequence:
    """Indexed family U_1..U_Nmax of fields Q -> R^D on one grid

    values has shape (N_max, time_steps, *cells, D); member n is values[n - 1].
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == len(self.grid.shape) + 1:
            values = values[..., np.newaxis]
        expected = len(self.grid.shape) + 2
        if values.ndim != expected or values.shape[1:-1] != self.grid.shape or values.shape[0] < 1:
            raise ValueError(ErrorMessages.SHAPE_MISMATCH.format(
                shape=values.shape, expected=("N", *self.grid.shape, "D")))
        if not np.all(np.isfinite(values)):
            raise ValueError(ErrorMessages.NON_FINITE_VALUES)
        object.__setattr__(self, "values", _frozen(values))

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def D(self) -> int:
        return self.values.shape[-1]

    def member(self, n: int) -> np.ndarray:
        """Member U_n (1-based), shape (*grid.shape, D)"""
        return self.values[n - 1]

    def head(self, N: int) -> np.ndarray:
        return self.values[:N]

    def with_values(self, values: np.ndarray) -> "FieldSequence":
        return FieldSequence(grid=self.grid, values=values)

    def equals(self, other: "FieldSequence") -> bool:
        """Bit-exact equality of grid and payload"""
        return (
            self.grid == other.grid
            and self.values.shape == other.values.shape
            and self.values.tobytes() == other.values.tobytes()
        )
