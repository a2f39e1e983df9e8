from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .grid import Grid, _frozen


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Finite atomic measure: points (K, D) with non-negative weights (K,)"""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, np.newaxis]
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if points.ndim != 2 or points.shape[0] != weights.shape[0] or points.shape[0] == 0:
            raise ValueError(f"measure needs matching non-empty atoms, got {points.shape} and {weights.shape}")
        if np.any(weights < 0):
            raise ValueError("atom weights must be non-negative")
        object.__setattr__(self, "points", _frozen(points))
        object.__setattr__(self, "weights", _frozen(weights))

    @classmethod
    def dirac(cls, point) -> "EmpiricalMeasure":
        return cls(points=np.atleast_1d(np.asarray(point, dtype=np.float64))[np.newaxis, :], weights=[1.0])

    @property
    def D(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True, eq=False)
class ParametrizedMeasure:
    """One empirical measure per space-time cell, C order over grid.shape"""

    grid: Grid
    measures: Tuple[EmpiricalMeasure, ...]

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(self.measures))
        if len(self.measures) != self.grid.n_cells:
            raise ValueError(f"expected {self.grid.n_cells} cell measures, got {len(self.measures)}")

    @property
    def D(self) -> int:
        return self.measures[0].D

    def cell(self, index: Tuple[int, ...]) -> EmpiricalMeasure:
        return self.measures[int(np.ravel_multi_index(index, self.grid.shape))]


@dataclass(frozen=True, eq=False)
class MomentSummary:
    barycenter: np.ndarray
    second_moment: np.ndarray
    variance: np.ndarray
    deviation: np.ndarray
    absolute_moment: float
    order: float
