import itertools
import logging
from typing import List, Sequence

import numpy as np

from app.data_models import CompactObservable, FieldSequence, ObservableDictionary, Profile, Weight, WeightKind
from app.utils.validators import ErrorMessages, Validators

logger = logging.getLogger(__name__)


def eval_observable(b: CompactObservable, u) -> np.ndarray:
    """
    Evaluate b at a point or at an array of points

    Args:
        b: Observable
        u: Point of shape (D,) or array of points (..., D); a scalar is a point when D = 1

    Returns:
        float for a single point, otherwise an array of shape u.shape[:-1]
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim == 0:
        u = u.reshape(1)
    if u.shape[-1] != b.dimension:
        raise ValueError(ErrorMessages.STATE_DIMENSION.format(D=u.shape[-1], expected=b.dimension))

    scaled = np.abs(u - np.asarray(b.center)) / b.radius
    if b.profile is Profile.TENT:
        values = np.maximum(0.0, 1.0 - scaled.max(axis=-1))
    else:
        t = np.minimum(scaled, 1.0)
        values = np.prod((1.0 - t * t) ** 2, axis=-1)

    if values.ndim == 0:
        return float(values)
    return values


def evaluate_sequence(b: CompactObservable, seq: FieldSequence, N: int) -> np.ndarray:
    """b(U_n(y)) for n = 1..N, shape (N, *grid.shape)"""
    N = Validators.validate_index(N, seq.length)
    return eval_observable(b, seq.head(N))


def _bump_stretch(D: int) -> float:
    """Radius over spacing so a smooth bump is >= 1/2 within half a spacing per coordinate"""
    t = np.sqrt(1.0 - 2.0 ** (-1.0 / (2 * D)))
    return max(1.0, 1.0 / (2.0 * t))


def lattice_dictionary(
    values: np.ndarray,
    points_per_dim: int = 3,
    profile: Profile = Profile.TENT,
    padding: float = 0.1,
) -> ObservableDictionary:
    """
    Build a tensor lattice of observables over the padded data range

    Every point of the box lies within half a spacing of some center in each coordinate.
    Tents use the spacing as radius; smooth bumps are widened so that such a point
    still sees a value of at least 1/2.

    Args:
        values: Data of shape (..., D), typically FieldSequence.values
        points_per_dim: Lattice points along the widest component
        profile: Observable profile
        padding: Fraction of the component width added on both sides

    Returns:
        ObservableDictionary covering [lower, upper]
    """
    Validators.validate_positive_int(points_per_dim, "points_per_dim")
    profile = Profile(profile)
    values = np.asarray(values, dtype=np.float64)
    flat = values.reshape(-1, values.shape[-1])
    lo, hi = flat.min(axis=0), flat.max(axis=0)
    span = hi - lo
    degenerate = span <= 0
    lower = np.where(degenerate, lo - 0.5, lo - padding * span)
    upper = np.where(degenerate, hi + 0.5, hi + padding * span)
    widths = upper - lower

    if points_per_dim == 1:
        spacing = float(widths.max())
        axes = [np.array([(a + b) / 2]) for a, b in zip(lower, upper)]
    else:
        spacing = float(widths.max()) / (points_per_dim - 1)
        axes = []
        for a, width in zip(lower, widths):
            count = int(np.ceil(width / spacing - 1e-12)) + 1
            axes.append(a + spacing * np.arange(count))
    radius = spacing if profile is Profile.TENT else spacing * _bump_stretch(flat.shape[1])

    observables = tuple(
        CompactObservable(center=center, radius=radius, profile=profile, id=index)
        for index, center in enumerate(itertools.product(*axes))
    )
    logger.debug(f"Lattice dictionary with {len(observables)} observables, radius {radius:.4g}")
    return ObservableDictionary(observables=observables, lower=tuple(lower), upper=tuple(upper))


def evaluate_weight(w: Weight, z) -> np.ndarray:
    """w(z), vectorized over z"""
    z = np.asarray(z, dtype=np.float64)
    if w.kind is WeightKind.CONSTANT:
        return np.ones_like(z)
    if w.kind is WeightKind.TENT:
        h = w.half_width
        s = (z - w.center) / h
        return np.where(np.abs(s) < 1.0, 15.0 / (16.0 * h) * (1.0 - s * s) ** 2, 0.0)
    k = w.degree
    return (k + 1) * z ** k


def weight_derivative(w: Weight, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if w.kind is WeightKind.CONSTANT:
        return np.zeros_like(z)
    if w.kind is WeightKind.TENT:
        h = w.half_width
        s = (z - w.center) / h
        return np.where(np.abs(s) < 1.0, -15.0 / (4.0 * h * h) * s * (1.0 - s * s), 0.0)
    k = w.degree
    if k == 0:
        return np.zeros_like(z)
    return (k + 1) * k * z ** (k - 1)


def weight_values(w: Weight, N: int) -> np.ndarray:
    """w(n/N) for n = 1..N"""
    N = Validators.validate_positive_int(N)
    return evaluate_weight(w, np.arange(1, N + 1) / N)


def weight_partial_sum(w: Weight, N: int) -> float:
    """
    Normalizer w_N = sum_{n=1}^N w(n/N)

    Raises:
        ValueError: If N < 1 or the weight vanishes on every node
    """
    total = float(weight_values(w, N).sum())
    if not total > 0:
        raise ValueError(ErrorMessages.WEIGHT_VANISHES.format(weight=w.label, N=N))
    return total


def normalized_weights(w: Weight, N: int) -> np.ndarray:
    """w(n/N) / w_N for n = 1..N"""
    return weight_values(w, N) / weight_partial_sum(w, N)


def default_weights() -> List[Weight]:
    """The shipped family: 1, 2z, 3z^2 and tents at 1/4, 1/2, 3/4 of width 1/2"""
    return [
        Weight(WeightKind.CONSTANT),
        Weight(WeightKind.LINEAR),
        Weight(WeightKind.POLYNOMIAL, degree=2),
        Weight(WeightKind.TENT, center=0.25, width=0.5),
        Weight(WeightKind.TENT, center=0.5, width=0.5),
        Weight(WeightKind.TENT, center=0.75, width=0.5),
    ]


def dictionary_from_observables(observables: Sequence[CompactObservable]) -> ObservableDictionary:
    """Wrap an explicit observable list; the covered box is the union of supports"""
    Validators.validate_non_empty(observables, ErrorMessages.DICTIONARY_EMPTY)
    observables = tuple(
        CompactObservable(center=b.center, radius=b.radius, profile=b.profile, id=index)
        for index, b in enumerate(observables)
    )
    centers = np.array([b.center for b in observables])
    radii = np.array([b.radius for b in observables])[:, np.newaxis]
    return ObservableDictionary(
        observables=observables,
        lower=tuple((centers - radii).min(axis=0)),
        upper=tuple((centers + radii).max(axis=0)),
    )
