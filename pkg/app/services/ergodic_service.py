"""
(S)-convergence decision machinery.

Correlation matrices and the finite-N verdicts built on them (weak and strong
correlation limits, disintegration gaps, windowed averages), stationarity moduli,
and the aggregated report comparing the ergodic-mean side with the correlation side.
All verdicts normalize correlation integrals by |Q| before applying a tolerance.
"""

import itertools
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from app.config import settings
from app.data_models import CompactObservable, CorrelationRecord, FieldSequence, ObservableDictionary, Weight
from app.request_models.reports import (
    ConvergenceVerdict,
    CorrelationEntry,
    MeasureDistance,
    SReport,
    StationarityModulus,
    VerdictEntry,
    WeightSpread,
)
from app.services import measure_service
from app.services.observable_service import evaluate_sequence, normalized_weights
from app.utils.error_handlers import GridMismatchError
from app.utils.validators import ErrorMessages, Validators

logger = logging.getLogger(__name__)


def correlation_matrix(seq: FieldSequence, b: CompactObservable, N: int) -> CorrelationRecord:
    """C[n, m] = integral over Q of b(U_n) b(U_m) dy by the midpoint rule, exactly symmetric"""
    values = evaluate_sequence(b, seq, N).reshape(N, -1)
    matrix = (values * seq.grid.cell_volume) @ values.T
    upper = np.triu(matrix)
    matrix = upper + np.triu(matrix, 1).T
    return CorrelationRecord(observable_id=b.id, N=N, matrix=matrix, measure=seq.grid.measure)


def _weighted_column_mean(rec: CorrelationRecord, w: Weight, N: int, m: int) -> float:
    """(1/w_N) sum_{n<=N} w(n/N) C[n, m] / |Q|"""
    return float(normalized_weights(w, N) @ rec.matrix[:N, m - 1]) / rec.measure


def _correlation_verdict(
    rec: CorrelationRecord,
    m: int,
    weights: Sequence[Weight],
    schedule: Sequence[int],
    tol: float,
) -> ConvergenceVerdict:
    Validators.validate_non_empty(weights, ErrorMessages.WEIGHTS_EMPTY)
    Validators.validate_index(m, rec.N, "m")
    schedule = Validators.validate_schedule(schedule, rec.N)
    tol = Validators.validate_tolerance(tol)

    table = np.array([[_weighted_column_mean(rec, w, N, m) for N in schedule] for w in weights])
    per_weight_gap = float((table.max(axis=1) - table.min(axis=1)).max())
    final = table[:, -1]
    spread = float(final.max() - final.min())
    return ConvergenceVerdict.from_values(table[0], schedule, tol, tail_gap=max(per_weight_gap, spread))


def weak_correlation_verdict(rec: CorrelationRecord, m: int, schedule: Sequence[int], tol: float) -> ConvergenceVerdict:
    """
    Existence of lim_N (1/N) sum_{n<=N} C[n, m] judged over the checkpoint schedule

    Raises:
        ValueError: If m > rec.N or the schedule is not increasing within 1..rec.N
    """
    return _correlation_verdict(rec, m, [Weight()], schedule, tol)


def strong_correlation_verdict(
    rec: CorrelationRecord,
    m: int,
    weights: Sequence[Weight],
    schedule: Sequence[int],
    tol: float,
) -> ConvergenceVerdict:
    """
    Weighted correlation limits, required to exist for each weight and agree across weights

    The tail gap is the larger of the worst per-weight checkpoint spread and the
    cross-weight spread at the final checkpoint.
    """
    return _correlation_verdict(rec, m, weights, schedule, tol)


def pointwise_correlation_verdict(rec: CorrelationRecord, m: int, schedule: Sequence[int], tol: float) -> ConvergenceVerdict:
    """Existence of lim_n C[n, m] without averaging"""
    Validators.validate_index(m, rec.N, "m")
    schedule = Validators.validate_schedule(schedule, rec.N)
    values = [rec.entry(N, m) / rec.measure for N in schedule]
    return ConvergenceVerdict.from_values(values, schedule, Validators.validate_tolerance(tol))


def windowed_correlation(rec: CorrelationRecord, alpha: float, beta: float, m: int, N: int) -> float:
    """
    (1/(beta - alpha)) (1/N) sum_{alpha N <= n <= beta N, n >= 1} C[n, m] / |Q|

    Raises:
        ValueError: If the window is invalid or holds no index at N
    """
    alpha, beta = Validators.validate_window(alpha, beta)
    N = Validators.validate_index(N, rec.N)
    Validators.validate_index(m, rec.N, "m")
    first = max(1, math.ceil(alpha * N))
    last = math.floor(beta * N)
    if last < first:
        raise ValueError(ErrorMessages.WINDOW_EMPTY.format(alpha=alpha, beta=beta, N=N))
    total = float(rec.matrix[first - 1:last, m - 1].sum())
    return total / (N * (beta - alpha)) / rec.measure


def disintegration_gap(rec: CorrelationRecord, w: Weight, N: int, M: int) -> float:
    """
    |LHS(N) - RHS(M, N)| of the correlation disintegration identity

    LHS = sum_{n,m<=N} w(n/N) w(m/N) C[n, m] / w_N^2 and
    RHS = (1/w_M) sum_{m<=M} w(m/M) (1/w_N) sum_{n<=N} w(n/N) C[n, m], both divided by |Q|.
    """
    N = Validators.validate_index(N, rec.N)
    M = Validators.validate_index(M, N, "M")
    a = normalized_weights(w, N)
    block = rec.matrix[:N, :N] / rec.measure
    inner = a @ block
    lhs = float(inner @ a)
    rhs = float(normalized_weights(w, M) @ inner[:M])
    return abs(lhs - rhs)


def pairing_sequence(seq: FieldSequence, b: CompactObservable, m: int, schedule: Sequence[int]) -> List[float]:
    """integral over Q of B_N b(U_m) / |Q| at every checkpoint, B_N the Cesaro mean of b"""
    schedule = Validators.validate_schedule(schedule, seq.length)
    Validators.validate_index(m, seq.length, "m")
    target = evaluate_sequence(b, seq, m)[m - 1]
    means = measure_service.ergodic_means(seq, b, Weight(), schedule)
    return [float((mean * target).sum() * seq.grid.cell_volume / seq.grid.measure) for mean in means]


def _count_triples(length: int, k: int, shifts: Sequence[int]) -> int:
    total = 0
    for shift in shifts:
        span = length - shift - k + 1
        total += span * (span + 1) // 2 if span > 0 else 0
    return total


def stationarity_modulus(
    seq: FieldSequence,
    b: CompactObservable,
    k: int,
    max_shift: int,
    samples: int = 10_000,
    seed: int = 0,
    shift_step: int = 1,
) -> StationarityModulus:
    """
    omega(b, k) = max |C[k1, k2] - C[k1 + n, k2 + n]| over k <= k1 <= k2, 0 <= n <= max_shift

    Integrals are raw (not divided by |Q|). All triples are enumerated when their count
    is within the configured limit; otherwise a seeded sample stratified over the shift
    n draws about samples / (number of shifts) pairs per shift. shift_step restricts
    the shifts to multiples of it.

    Raises:
        ValueError: If the sequence is too short for k and max_shift
    """
    k = Validators.validate_positive_int(k, "k")
    if max_shift < 0:
        raise ValueError(f"max_shift must be >= 0, got {max_shift}")
    length = seq.length
    if k + max_shift > length:
        raise ValueError(ErrorMessages.SEQUENCE_TOO_SHORT.format(length=length, required=k + max_shift))

    shifts = range(0, max_shift + 1, Validators.validate_positive_int(shift_step, "shift_step"))
    C = correlation_matrix(seq, b, length).matrix
    count = _count_triples(length, k, shifts)
    enumerated = count <= settings.stationarity_enumeration_limit
    modulus = 0.0

    if enumerated:
        for shift in shifts:
            top = length - shift
            diff = np.abs(C[k - 1:top, k - 1:top] - C[k - 1 + shift:, k - 1 + shift:])
            modulus = max(modulus, float(np.triu(diff).max()))
        used = count
    else:
        rng = np.random.default_rng(seed)
        per_shift = max(1, Validators.validate_positive_int(samples, "samples") // len(shifts))
        used = 0
        for shift in shifts:
            top = length - shift
            pairs = np.sort(rng.integers(k, top + 1, size=(per_shift, 2)), axis=1)
            k1, k2 = pairs[:, 0] - 1, pairs[:, 1] - 1
            diff = np.abs(C[k1, k2] - C[k1 + shift, k2 + shift])
            modulus = max(modulus, float(diff.max()))
            used += per_shift
        logger.debug(f"Stationarity modulus sampled {used} of {count} triples")

    return StationarityModulus(
        observable_id=b.id, k=k, modulus=modulus, samples=used, max_shift=max_shift, enumerated=enumerated
    )


def averaged_stationarity_modulus(seq: FieldSequence, b: CompactObservable, k: int, N: int) -> float:
    """(1/N^2) sum over 0 <= n, m <= N of |C[k+n, k+m] - C[k, k+|n-m|]| with raw integrals"""
    k = Validators.validate_positive_int(k, "k")
    N = Validators.validate_positive_int(N)
    if k + N > seq.length:
        raise ValueError(ErrorMessages.SEQUENCE_TOO_SHORT.format(length=seq.length, required=k + N))
    C = correlation_matrix(seq, b, k + N).matrix
    idx = np.arange(0, N + 1)
    shifted = C[np.ix_(k + idx - 1, k + idx - 1)]
    lag = np.abs(idx[:, np.newaxis] - idx[np.newaxis, :])
    reference = C[k - 1, k + lag - 1]
    return float(np.abs(shifted - reference).sum() / (N * N))


def statistical_density_gap(seqU: FieldSequence, seqV: FieldSequence, eps: float, N: int) -> float:
    """
    #{n <= N : integral over Q of |U_n - V_n| dy > eps} / N

    Raises:
        GridMismatchError: If the sequences live on different grids
    """
    if seqU.grid != seqV.grid or seqU.D != seqV.D:
        raise GridMismatchError(seqU.grid, seqV.grid)
    N = Validators.validate_index(N, min(seqU.length, seqV.length))
    diff = np.linalg.norm(seqU.head(N) - seqV.head(N), axis=-1)
    distances = diff.reshape(N, -1).sum(axis=1) * seqU.grid.cell_volume
    return int(np.count_nonzero(distances > eps)) / N


def l1_distance(a: np.ndarray, b: np.ndarray, cell_volume: float, measure: float) -> float:
    """integral over Q of |a - b| divided by |Q|"""
    return float(np.abs(a - b).sum() * cell_volume / measure)


def ergodic_mean_verdict(
    seq: FieldSequence,
    b: CompactObservable,
    w: Weight,
    schedule: Sequence[int],
    tol: float,
) -> ConvergenceVerdict:
    """Cauchy verdict on weighted ergodic means: tail gap is the largest L1 gap between checkpoints"""
    schedule = Validators.validate_schedule(schedule, seq.length)
    tol = Validators.validate_tolerance(tol)
    grid = seq.grid
    means = measure_service.ergodic_means(seq, b, w, schedule)
    gaps = [
        l1_distance(means[i], means[j], grid.cell_volume, grid.measure)
        for i, j in itertools.combinations(range(len(schedule)), 2)
    ]
    values = [float(mean.sum() * grid.cell_volume / grid.measure) for mean in means]
    return ConvergenceVerdict.from_values(values, schedule, tol, tail_gap=max(gaps, default=0.0))


def weight_spread(seq: FieldSequence, b: CompactObservable, weights: Sequence[Weight], N: int) -> float:
    """Largest L1 distance (over |Q|) between weighted ergodic means at N across the weights"""
    Validators.validate_non_empty(weights, ErrorMessages.WEIGHTS_EMPTY)
    grid = seq.grid
    means = [measure_service.weighted_ergodic_mean(seq, b, w, N) for w in weights]
    return max(
        (l1_distance(p, q, grid.cell_volume, grid.measure) for p, q in itertools.combinations(means, 2)),
        default=0.0,
    )


def correlation_s_verdict(
    seq: FieldSequence,
    dictionary: ObservableDictionary,
    weights: Sequence[Weight],
    schedule: Sequence[int],
    tol: float,
    m_span: Sequence[int] = (1, 2, 3),
) -> List[CorrelationEntry]:
    """
    Correlation side of the equivalence principle, one entry per observable

    An observable passes when the strong correlation limits exist for every m in the
    span and every disintegration gap between the final checkpoint N and each earlier
    checkpoint M stays within tol.
    """
    schedule = Validators.validate_schedule(schedule, seq.length)
    Validators.validate_non_empty(dictionary.observables, ErrorMessages.DICTIONARY_EMPTY)
    N = schedule[-1]
    lower = schedule[:-1] or schedule
    entries = []
    for b in dictionary:
        rec = correlation_matrix(seq, b, N)
        limit_gap = max(
            strong_correlation_verdict(rec, m, weights, schedule, tol).tail_gap
            for m in m_span
            if m <= rec.N
        )
        gap = max(disintegration_gap(rec, w, N, M) for w in weights for M in lower)
        entries.append(CorrelationEntry(
            observable_id=b.id,
            limit_gap=limit_gap,
            disintegration_gap=gap,
            converged=limit_gap <= tol and gap <= tol,
        ))
    return entries


def s_limit_report(
    seq: FieldSequence,
    dictionary: ObservableDictionary,
    weights: Sequence[Weight],
    schedule: Sequence[int],
    tol: float,
    s: float = 1.0,
    m_span: Optional[Sequence[int]] = None,
    directions: Optional[np.ndarray] = None,
) -> SReport:
    """
    Aggregate (S)-convergence report

    Args:
        seq: Sequence under analysis
        dictionary: Observables b
        weights: Weights w
        schedule: Increasing checkpoints within 1..seq.length
        tol: Tolerance for every Cauchy and spread test
        s: Wasserstein order for the measure distances
        m_span: When given, also run the correlation side for these m
        directions: Slice directions for D > 1

    Returns:
        SReport with one verdict per (b, w), weight spreads at the final checkpoint,
        the Cesaro parametrized measure at the final checkpoint attached, and distances
        between the measures at consecutive checkpoints

    Raises:
        ValueError: If the dictionary, weights or schedule are empty or invalid
    """
    Validators.validate_non_empty(dictionary.observables, ErrorMessages.DICTIONARY_EMPTY)
    Validators.validate_non_empty(weights, ErrorMessages.WEIGHTS_EMPTY)
    schedule = Validators.validate_schedule(schedule, seq.length)
    tol = Validators.validate_tolerance(tol)
    s = Validators.validate_order(s)
    N = schedule[-1]

    entries = []
    spreads = []
    for b in dictionary:
        for w in weights:
            verdict = ergodic_mean_verdict(seq, b, w, schedule, tol)
            entries.append(VerdictEntry(observable_id=b.id, weight=w.label, verdict=verdict))
        spread = weight_spread(seq, b, weights, N)
        spreads.append(WeightSpread(observable_id=b.id, N=N, spread=spread, independent=spread <= tol))

    cesaro = Weight()
    measures = [measure_service.parametrized_measure(seq, cesaro, checkpoint) for checkpoint in schedule]
    distances = [
        MeasureDistance(
            from_checkpoint=schedule[i],
            to_checkpoint=schedule[i + 1],
            wasserstein=measure_service.parametrized_distance(measures[i], measures[i + 1], s, directions),
            weak_star=measure_service.parametrized_weak_star_distance(measures[i], measures[i + 1], dictionary),
        )
        for i in range(len(schedule) - 1)
    ]
    limit = measures[-1]
    centers = measure_service.barycenter_field(limit).reshape(-1, limit.D)

    weight_independent = all(entry.independent for entry in spreads)
    converged = weight_independent and all(entry.verdict.converged for entry in entries)

    correlation = []
    correlation_converged = None
    if m_span is not None:
        correlation = correlation_s_verdict(seq, dictionary, weights, schedule, tol, m_span)
        correlation_converged = all(entry.converged for entry in correlation)

    logger.info(
        f"(S)-limit report: {len(entries)} verdicts, converged={converged}, "
        f"weight_independent={weight_independent}"
    )
    return SReport(
        checkpoints=schedule,
        tol=tol,
        s=s,
        dictionary_size=len(dictionary),
        weights=[w.label for w in weights],
        entries=entries,
        weight_spread=spreads,
        weight_independent=weight_independent,
        converged=converged,
        correlation=correlation,
        correlation_converged=correlation_converged,
        distances=distances,
        barycenter_range=[(float(lo), float(hi)) for lo, hi in zip(centers.min(axis=0), centers.max(axis=0))],
        dirac_gap=measure_service.dirac_gap(limit, s, directions),
        measure=limit,
    )
