import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from app.data_models import FieldSequence
from app.utils.validators import ErrorMessages, Validators

logger = logging.getLogger(__name__)

INDEX_SETS = ("squares", "powers_of_two", "custom")


def index_set_members(index_set: str, length: int, indices: Optional[Sequence[int]] = None) -> List[int]:
    """
    Indices n <= length belonging to the named set

    Raises:
        ValueError: On an unknown set name or a custom index beyond length
    """
    if index_set == "squares":
        return [j * j for j in range(1, math.isqrt(length) + 1)]
    if index_set == "powers_of_two":
        return [2 ** j for j in range(length.bit_length()) if 2 ** j <= length]
    if index_set == "custom":
        members = sorted({Validators.validate_positive_int(n, "index") for n in (indices or [])})
        if members and members[-1] > length:
            raise ValueError(ErrorMessages.INDEX_OUT_OF_RANGE.format(name="index", value=members[-1], limit=length))
        return members
    raise ValueError(f"unknown index set '{index_set}', expected one of {INDEX_SETS}")


def member_noise(seed: int, n: int, shape) -> np.ndarray:
    """Uniform noise in [-1, 1] that depends only on (seed, n)"""
    return np.random.default_rng([seed, n]).uniform(-1.0, 1.0, size=shape)


def perturb_on_index_set(
    seq: FieldSequence,
    index_set: str,
    magnitude: float,
    rng_seed: int,
    indices: Optional[Sequence[int]] = None,
) -> FieldSequence:
    """Copy of seq with U_n + magnitude * noise(seed, n) exactly for n in the index set"""
    members = index_set_members(index_set, seq.length, indices)
    values = np.array(seq.values)
    shape = values.shape[1:]
    for n in members:
        values[n - 1] += magnitude * member_noise(rng_seed, n, shape)
    logger.info(f"Perturbed {len(members)} of {seq.length} members on '{index_set}' with magnitude {magnitude:g}")
    return seq.with_values(values)


def perturb_vanishing(seq: FieldSequence, magnitude: float, rng_seed: int) -> FieldSequence:
    """U_n + magnitude * noise(seed, n) / n for every n; the perturbation tends to 0 in L1"""
    values = np.array(seq.values)
    shape = values.shape[1:]
    for n in range(1, seq.length + 1):
        values[n - 1] += magnitude * member_noise(rng_seed, n, shape) / n
    return seq.with_values(values)


def index_set_density(indices: Sequence[int], N: int) -> float:
    """#{n in indices : n <= N} / N"""
    N = Validators.validate_positive_int(N)
    return sum(1 for n in set(indices) if 1 <= n <= N) / N


def cesaro_perturbation_bound(density: float, lipschitz: float, eps: float, measure: float) -> float:
    """L1 bound on the change of a Cesaro mean of b: 2 delta_N |Q| + Lip(b) eps"""
    return 2.0 * density * measure + lipschitz * eps


def measure_perturbation_bound(density: float, magnitude: float, D: int, measure: float) -> float:
    """W1 bound between Cesaro parametrized measures: each moved atom carries 1/N and travels <= magnitude sqrt(D)"""
    return density * magnitude * math.sqrt(D) * measure
