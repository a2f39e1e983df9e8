"""
Empirical and parametrized measures built from weighted ergodic averages.

The estimated (S)-limit is a per-cell atomic measure. Distances are Wasserstein
(exact monotone coupling in 1D through POT, sliced above) and a dictionary-based weak-star series.
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import ot

from app.config import settings
from app.data_models import (
    CompactObservable,
    EmpiricalMeasure,
    FieldSequence,
    Grid,
    MomentSummary,
    ObservableDictionary,
    ParametrizedMeasure,
    Weight,
)
from app.services.observable_service import eval_observable, evaluate_sequence, normalized_weights
from app.utils.error_handlers import GridMismatchError
from app.utils.validators import Validators

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def weighted_ergodic_mean(seq: FieldSequence, b: CompactObservable, w: Weight, N: int) -> np.ndarray:
    """
    y -> (1/w_N) sum_{n<=N} w(n/N) b(U_n(y))

    Returns:
        Field of shape grid.shape with values in [0, 1]
    """
    values = evaluate_sequence(b, seq, N)
    mean = np.tensordot(normalized_weights(w, N), values, axes=1)
    return np.clip(mean, 0.0, 1.0)


def merge_atoms(points: np.ndarray, weights: np.ndarray, tol: float = None) -> EmpiricalMeasure:
    """
    Merge atoms within tol of each other in max-norm, drop zero weights

    Exact duplicates are collapsed first; the remaining points are swept in lexicographic
    order and each unassigned point absorbs every unassigned point within tol of it.
    """
    tol = settings.merge_tol if tol is None else tol
    points = np.asarray(points, dtype=np.float64).reshape(len(weights), -1)
    weights = np.asarray(weights, dtype=np.float64)

    points, inverse = np.unique(points, axis=0, return_inverse=True)
    weights = np.bincount(inverse.ravel(), weights=weights, minlength=len(points))
    labels = np.full(len(points), -1)
    representatives = []
    for i in range(len(points)):
        if labels[i] >= 0:
            continue
        near = (labels < 0) & (np.abs(points - points[i]).max(axis=1) <= tol)
        labels[near] = len(representatives)
        representatives.append(i)
    merged_points = points[representatives]
    merged_weights = np.bincount(labels, weights=weights, minlength=len(representatives))

    keep = merged_weights > 0
    if not keep.any():
        keep[:] = True
    return EmpiricalMeasure(points=merged_points[keep], weights=merged_weights[keep])


def _cell_index(grid: Grid, cell: Union[int, Tuple[int, ...]]) -> Tuple[int, ...]:
    if isinstance(cell, (int, np.integer)):
        return tuple(int(i) for i in np.unravel_index(int(cell), grid.shape))
    cell = tuple(int(i) for i in cell)
    if len(cell) != len(grid.shape):
        raise ValueError(f"cell index {cell} does not address grid shape {grid.shape}")
    return cell


def empirical_measure(
    seq: FieldSequence,
    cell: Union[int, Tuple[int, ...]],
    w: Weight,
    N: int,
) -> EmpiricalMeasure:
    """
    Atoms at U_n(y), n <= N, with weights w(n/N)/w_N; duplicate points merged

    Args:
        seq: Field sequence
        cell: Space-time cell, a (t, x1[, x2]) tuple or a flat C-order index
        w: Weight
        N: Averaging level
    """
    N = Validators.validate_index(N, seq.length)
    index = _cell_index(seq.grid, cell)
    points = seq.head(N)[(slice(None), *index)]
    return merge_atoms(points, normalized_weights(w, N))


def parametrized_measure(seq: FieldSequence, w: Weight, N: int) -> ParametrizedMeasure:
    """Empirical measure in every space-time cell"""
    N = Validators.validate_index(N, seq.length)
    coefficients = normalized_weights(w, N)
    flat = seq.head(N).reshape(N, seq.grid.n_cells, seq.D)
    measures = tuple(merge_atoms(flat[:, cell], coefficients) for cell in range(seq.grid.n_cells))
    return ParametrizedMeasure(grid=seq.grid, measures=measures)


def dirac_field(grid: Grid, U: np.ndarray) -> ParametrizedMeasure:
    """delta_{U(y)} in every cell; U has shape (*grid.shape, D) or grid.shape"""
    U = np.asarray(U, dtype=np.float64)
    if U.shape == grid.shape:
        U = U[..., np.newaxis]
    flat = U.reshape(grid.n_cells, -1)
    return ParametrizedMeasure(grid=grid, measures=tuple(EmpiricalMeasure.dirac(point) for point in flat))


def slice_directions(D: int, K: int = None) -> np.ndarray:
    """
    Deterministic unit directions of shape (K, D)

    D = 1 uses K copies of +1, D = 2 equal angles pi k / K on the half circle, D = 3 a
    golden-spiral point set on the upper hemisphere, D > 3 seeded Gaussian directions.
    """
    K = Validators.validate_positive_int(settings.slice_directions if K is None else K, "K")
    if D == 1:
        return np.ones((K, 1))
    if D == 2:
        theta = np.pi * np.arange(K) / K
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if D == 3:
        z = 1.0 - (np.arange(K) + 0.5) / K
        r = np.sqrt(1.0 - z * z)
        phi = GOLDEN_ANGLE * np.arange(K)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    directions = np.random.default_rng(D).standard_normal((K, D))
    directions[:, -1] = np.abs(directions[:, -1])
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def _transport_cost(x: np.ndarray, a: np.ndarray, y: np.ndarray, c: np.ndarray, s: float) -> float:
    """Optimal cost sum gamma_ij |x_i - y_j|^s between two atomic laws on the line, i.e. W_s^s"""
    a = a / a.sum()
    c = c / c.sum()
    cost = ot.lp.emd2_1d(x, y, a, c, metric="minkowski", p=float(s), dense=False)
    return max(float(cost), 0.0)


def wasserstein_1d(mu: EmpiricalMeasure, nu: EmpiricalMeasure, s: float = 1.0) -> float:
    """Exact W_s between measures on the line by the monotone (quantile) coupling"""
    s = Validators.validate_order(s)
    cost = _transport_cost(mu.points[:, 0], mu.weights, nu.points[:, 0], nu.weights, s)
    return cost ** (1.0 / s)


def sliced_wasserstein(
    mu: EmpiricalMeasure,
    nu: EmpiricalMeasure,
    s: float = 1.0,
    directions: Optional[np.ndarray] = None,
) -> float:
    """(mean over directions of W_s^s of the projections)^(1/s)"""
    s = Validators.validate_order(s)
    if mu.D != nu.D:
        raise ValueError(f"measures live in R^{mu.D} and R^{nu.D}")
    directions = slice_directions(mu.D) if directions is None else np.asarray(directions, dtype=np.float64)
    costs = [
        _transport_cost(mu.points @ theta, mu.weights, nu.points @ theta, nu.weights, s)
        for theta in directions
    ]
    return float(np.mean(costs)) ** (1.0 / s)


def wasserstein(mu: EmpiricalMeasure, nu: EmpiricalMeasure, s: float = 1.0, directions: Optional[np.ndarray] = None) -> float:
    """
    Wasserstein distance of order s

    Exact in 1D; for D > 1 the sliced approximation over a fixed direction set.

    Raises:
        ValueError: If s < 1 or the state dimensions differ
    """
    s = Validators.validate_order(s)
    if mu.D != nu.D:
        raise ValueError(f"measures live in R^{mu.D} and R^{nu.D}")
    if mu.D == 1:
        return wasserstein_1d(mu, nu, s)
    return sliced_wasserstein(mu, nu, s, directions)


def pairing(mu: EmpiricalMeasure, b: CompactObservable) -> float:
    """<mu, b> = sum of atom weights times b(atom)"""
    return float(mu.weights @ np.atleast_1d(eval_observable(b, mu.points)))


def weak_star_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure, dictionary: ObservableDictionary) -> float:
    """sum_j 2^-j |<mu - nu, b_j>| / (1 + |<mu - nu, b_j>|), j counted from 1"""
    Validators.validate_non_empty(dictionary.observables, "dictionary must contain at least one observable")
    total = 0.0
    for j, b in enumerate(dictionary, start=1):
        gap = abs(pairing(mu, b) - pairing(nu, b))
        total += 2.0 ** (-j) * gap / (1.0 + gap)
    return total


def moments(mu: EmpiricalMeasure, s: float = 1.0) -> MomentSummary:
    """Barycenter, componentwise second moment and variance, and the s-th absolute moment"""
    s = Validators.validate_order(s)
    barycenter = mu.weights @ mu.points
    second = mu.weights @ (mu.points ** 2)
    variance = mu.weights @ ((mu.points - barycenter) ** 2)
    return MomentSummary(
        barycenter=barycenter,
        second_moment=second,
        variance=variance,
        deviation=np.sqrt(variance),
        absolute_moment=float(mu.weights @ np.linalg.norm(mu.points, axis=1) ** s),
        order=s,
    )


def _require_same_grid(P1: ParametrizedMeasure, P2: ParametrizedMeasure) -> None:
    if P1.grid != P2.grid:
        raise GridMismatchError(P1.grid, P2.grid)


def parametrized_distance(
    P1: ParametrizedMeasure,
    P2: ParametrizedMeasure,
    s: float = 1.0,
    directions: Optional[np.ndarray] = None,
) -> float:
    """
    (sum over cells of cell volume * W_s^s)^(1/s)

    Raises:
        GridMismatchError: If the measures live on different grids
    """
    _require_same_grid(P1, P2)
    s = Validators.validate_order(s)
    costs = np.array([wasserstein(a, b, s, directions) ** s for a, b in zip(P1.measures, P2.measures)])
    return float(P1.grid.cell_volume * costs.sum()) ** (1.0 / s)


def parametrized_weak_star_distance(
    P1: ParametrizedMeasure,
    P2: ParametrizedMeasure,
    dictionary: ObservableDictionary,
) -> float:
    """Integral over Q of the cellwise weak-star distance"""
    _require_same_grid(P1, P2)
    gaps = np.array([weak_star_distance(a, b, dictionary) for a, b in zip(P1.measures, P2.measures)])
    return float(P1.grid.cell_volume * gaps.sum())


def barycenter_field(P: ParametrizedMeasure) -> np.ndarray:
    """Barycenters, shape (*grid.shape, D)"""
    centers = np.array([m.weights @ m.points for m in P.measures])
    return centers.reshape(*P.grid.shape, -1)


def dirac_gap(P: ParametrizedMeasure, s: float = 1.0, directions: Optional[np.ndarray] = None) -> float:
    """Distance of P to the Dirac field at its own barycenters; zero iff P is a parametrized Dirac mass"""
    return parametrized_distance(P, dirac_field(P.grid, barycenter_field(P)), s, directions)


def ergodic_means(
    seq: FieldSequence,
    b: CompactObservable,
    w: Weight,
    checkpoints: Sequence[int],
) -> np.ndarray:
    """weighted_ergodic_mean at every checkpoint, shape (len(checkpoints), *grid.shape)"""
    values = evaluate_sequence(b, seq, max(checkpoints))
    means = [
        np.clip(np.tensordot(normalized_weights(w, N), values[:N], axes=1), 0.0, 1.0)
        for N in checkpoints
    ]
    return np.stack(means)
