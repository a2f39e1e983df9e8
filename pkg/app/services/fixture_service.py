"""Synthetic field sequences with known (S)-convergence behaviour"""

import logging

import numpy as np

from app.data_models import FieldSequence, Grid

logger = logging.getLogger(__name__)


def fixture_grid(d: int = 1, cells: int = 4, time_steps: int = 1, T: float = 1.0, length: float = 1.0) -> Grid:
    return Grid.uniform(d=d, cells=cells, time_steps=time_steps, T=T, length=length)


def _indices(length: int) -> np.ndarray:
    return np.arange(1, length + 1)


def _broadcast(grid: Grid, per_member: np.ndarray) -> np.ndarray:
    """(N,) or (N, D) member values -> (N, *grid.shape, D)"""
    per_member = np.asarray(per_member, dtype=np.float64)
    if per_member.ndim == 1:
        per_member = per_member[:, np.newaxis]
    shape = (per_member.shape[0], *grid.shape, per_member.shape[1])
    expanded = per_member.reshape(per_member.shape[0], *([1] * len(grid.shape)), per_member.shape[1])
    return np.broadcast_to(expanded, shape)


def constant(grid: Grid, length: int, value: float = 0.5) -> FieldSequence:
    return FieldSequence(grid=grid, values=_broadcast(grid, np.full(length, value)))


def alternating(grid: Grid, length: int) -> FieldSequence:
    """U_n = 1 for odd n, 0 for even n"""
    return FieldSequence(grid=grid, values=_broadcast(grid, (_indices(length) % 2).astype(float)))


def periodic(grid: Grid, length: int, period: int = 3) -> FieldSequence:
    """U_n(y) = ((n + j(y)) mod p) / (p - 1), j(y) the flat index of the space-time cell"""
    n = _indices(length).reshape(-1, *([1] * len(grid.shape)))
    phase = np.arange(grid.n_cells).reshape(grid.shape)
    residues = (n + phase) % period
    values = residues / (period - 1) if period > 1 else np.zeros_like(residues, dtype=float)
    return FieldSequence(grid=grid, values=values)


def _spatial_profile(grid: Grid) -> np.ndarray:
    """1 + sin(2 pi x1 / L1), broadcast over time, shape grid.shape"""
    x = grid.cell_centers()[0]
    profile = 1.0 + np.sin(2.0 * np.pi * x / grid.torus_length[0])
    return np.broadcast_to(profile, grid.shape)


def strongly_convergent(grid: Grid, length: int, scale: float = 50.0) -> FieldSequence:
    """U_n = U + 1/n with U = scale (1 + sin 2 pi x1)"""
    limit = scale * _spatial_profile(grid)
    n = _indices(length).reshape(-1, *([1] * len(grid.shape)))
    return FieldSequence(grid=grid, values=limit + 1.0 / n)


def limit_of_strongly_convergent(grid: Grid, scale: float = 50.0) -> np.ndarray:
    return scale * _spatial_profile(grid)


def in_block(n: np.ndarray) -> np.ndarray:
    """True when 4^j <= n < 2 * 4^j for some j"""
    n = np.asarray(n, dtype=np.int64)
    bits = np.array([int(v).bit_length() - 1 for v in n.ravel()], dtype=np.int64).reshape(n.shape)
    return bits % 2 == 0


def block(grid: Grid, length: int) -> FieldSequence:
    """U_n = 1 on the index blocks [4^j, 2 * 4^j), 0 elsewhere; not (S)-convergent"""
    return FieldSequence(grid=grid, values=_broadcast(grid, in_block(_indices(length)).astype(float)))


def geometric_noise(grid: Grid, length: int, center: float = 0.5, seed: int = 0) -> FieldSequence:
    """U_n = c + 2^-n noise_n with noise uniform in [-1, 1]"""
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=(length, *grid.shape))
    n = _indices(length).reshape(-1, *([1] * len(grid.shape)))
    return FieldSequence(grid=grid, values=center + noise * 2.0 ** (-n))


def pseudo_random_signs(grid: Grid, length: int, seed: int = 0) -> FieldSequence:
    rng = np.random.default_rng(seed)
    return FieldSequence(grid=grid, values=rng.choice([-1.0, 1.0], size=(length, *grid.shape)))


def alternating_momentum(grid: Grid, length: int) -> FieldSequence:
    """Euler-state fixture: rho = 1, m = (-1)^(n+1) e_1, state (rho, m_1[, m_2])"""
    n = _indices(length)
    states = np.zeros((length, 1 + grid.d))
    states[:, 0] = 1.0
    states[:, 1] = np.where(n % 2 == 1, 1.0, -1.0)
    return FieldSequence(grid=grid, values=_broadcast(grid, states))


def build_fixture(
    name: str,
    grid: Grid,
    length: int,
    period: int = 3,
    amplitude: float = 1.0,
    seed: int = 0,
) -> FieldSequence:
    """
    Build a named fixture

    Raises:
        ValueError: On an unknown fixture name
    """
    builders = {
        "constant": lambda: constant(grid, length, value=0.5 * amplitude),
        "alternating": lambda: alternating(grid, length),
        "periodic": lambda: periodic(grid, length, period),
        "strongly-convergent": lambda: strongly_convergent(grid, length, scale=50.0 * amplitude),
        "block": lambda: block(grid, length),
        "geometric-noise": lambda: geometric_noise(grid, length, seed=seed),
        "alternating-momentum": lambda: alternating_momentum(grid, length),
        "pseudo-random": lambda: pseudo_random_signs(grid, length, seed=seed),
    }
    if name not in builders:
        raise ValueError(f"unknown fixture '{name}'")
    logger.info(f"Building fixture '{name}' with {length} members on grid {grid.shape}")
    return builders[name]()
