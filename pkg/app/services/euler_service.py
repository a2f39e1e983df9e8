"""
Isentropic Euler generator.

Conservative Lax-Friedrichs (Rusanov) finite volumes on the periodic box with an
optional explicit viscosity, producing families of consistent approximations sampled
on a common analysis grid.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.data_models import EulerFamily, EulerParams, EulerState, FieldSequence, Grid, MemberFields
from app.utils.error_handlers import CFLViolationError, SchemeError
from app.utils.validators import ErrorMessages

logger = logging.getLogger(__name__)

VACUUM_FLOOR = 1e-8
SUBCELLS = 4


def pressure(rho, params: EulerParams):
    """p = a rho^gamma"""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        raise ValueError(ErrorMessages.NEGATIVE_DENSITY)
    result = params.a * rho ** params.gamma
    return float(result) if result.ndim == 0 else result


def pressure_potential(rho, params: EulerParams):
    """P = a rho^gamma / (gamma - 1), so that P'' = p' / rho"""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        raise ValueError(ErrorMessages.NEGATIVE_DENSITY)
    result = params.a * rho ** params.gamma / (params.gamma - 1.0)
    return float(result) if result.ndim == 0 else result


def _momentum_squared(rho: np.ndarray, m: np.ndarray) -> np.ndarray:
    """|m|^2 where m is either shaped like rho (d = 1) or carries a trailing component axis"""
    m = np.asarray(m, dtype=np.float64)
    if m.shape == rho.shape:
        return m * m
    return np.sum(m * m, axis=-1)


def energy_density(rho, m, params: EulerParams):
    """
    E = |m|^2 / (2 rho) + P(rho) for rho > 0, 0 for rho = 0 and m = 0, +inf otherwise

    The infinite branch is the inadmissibility flag; callers test it with np.isfinite.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        raise ValueError(ErrorMessages.NEGATIVE_DENSITY)
    m2 = _momentum_squared(rho, m)
    positive = rho > 0
    safe = np.where(positive, rho, 1.0)
    result = np.where(
        positive,
        0.5 * m2 / safe + params.a * rho ** params.gamma / (params.gamma - 1.0),
        np.where(m2 == 0, 0.0, np.inf),
    )
    return float(result) if result.ndim == 0 else result


def sound_speed(rho, params: EulerParams):
    rho = np.asarray(rho, dtype=np.float64)
    return np.sqrt(params.a * params.gamma * rho ** (params.gamma - 1.0))


def max_wave_speed(state: EulerState, params: EulerParams) -> float:
    """max over cells and directions of |u_j| + c"""
    velocity = np.abs(state.m / state.rho[..., np.newaxis])
    return float((velocity.max(axis=-1) + sound_speed(state.rho, params)).max())


def _courant(speed: float, dt: float, dx: Sequence[float], eps: float) -> float:
    return dt * sum(speed / h + 2.0 * eps / (h * h) for h in dx)


def stable_time_step(state: EulerState, params: EulerParams) -> float:
    """dt = cfl / sum_j (a / dx_j + 2 eps / dx_j^2)"""
    return params.cfl / _courant(max_wave_speed(state, params), 1.0, state.dx, params.eps)


def _physical_flux(rho: np.ndarray, m: np.ndarray, p: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """Flux of (rho, m) through faces normal to axis"""
    normal = m[..., axis]
    momentum_flux = m * (normal / rho)[..., np.newaxis]
    momentum_flux[..., axis] += p
    return normal, momentum_flux


def lf_step(state: EulerState, params: EulerParams, dt: Optional[float] = None, member: Optional[int] = None) -> EulerState:
    """
    One conservative Lax-Friedrichs step with optional viscosity eps * Laplacian

    Args:
        state: Current state
        params: EOS and scheme parameters
        dt: Requested step, capped at the stable step
        member: Member id reported in diagnostics

    Returns:
        State at t + dt

    Raises:
        CFLViolationError: If the wave speed grew past the stability bound during the step
        SchemeError: On a non-finite value or a non-positive density
    """
    speed = max_wave_speed(state, params)
    stable = params.cfl / _courant(speed, 1.0, state.dx, params.eps)
    dt = stable if dt is None else min(dt, stable)

    rho, m = state.rho, state.m
    p = params.a * rho ** params.gamma
    new_rho = rho.copy()
    new_m = m.copy()

    for axis, h in enumerate(state.dx):
        f_rho, f_m = _physical_flux(rho, m, p, axis)
        rho_right = np.roll(rho, -1, axis=axis)
        m_right = np.roll(m, -1, axis=axis)
        # face i+1/2 between cell i and cell i+1
        face_rho = 0.5 * (f_rho + np.roll(f_rho, -1, axis=axis)) - 0.5 * speed * (rho_right - rho)
        face_m = 0.5 * (f_m + np.roll(f_m, -1, axis=axis)) - 0.5 * speed * (m_right - m)
        if params.eps > 0:
            face_rho = face_rho - params.eps * (rho_right - rho) / h
            face_m = face_m - params.eps * (m_right - m) / h
        new_rho -= dt / h * (face_rho - np.roll(face_rho, 1, axis=axis))
        new_m -= dt / h * (face_m - np.roll(face_m, 1, axis=axis))

    if not (np.all(np.isfinite(new_rho)) and np.all(np.isfinite(new_m))):
        raise SchemeError(f"non-finite values at t = {state.t + dt:.6g}", member=member)
    if np.any(new_rho <= 0):
        raise SchemeError(f"non-positive density at t = {state.t + dt:.6g}", member=member)

    result = EulerState(rho=new_rho, m=new_m, lengths=state.lengths, t=state.t + dt)
    courant = _courant(max_wave_speed(result, params), dt, state.dx, params.eps)
    if courant > 1.0:
        raise CFLViolationError(courant, member=member)
    return result


def total_energy(state: EulerState, params: EulerParams) -> float:
    return float(np.sum(energy_density(state.rho, state.m, params)) * state.cell_volume)


# Initial-data presets: point functions (coordinates, lengths, amplitude, member) -> (rho, m)

def _constant(x, lengths, amplitude, member):
    return np.ones_like(x[0]), np.zeros((*x[0].shape, len(x)))


def _smooth_wave(x, lengths, amplitude, member):
    rho = 1.0 + amplitude * np.sin(2.0 * np.pi * x[0] / lengths[0])
    return rho, np.zeros((*x[0].shape, len(x)))


def _riemann(x, lengths, amplitude, member):
    inside = (x[0] >= lengths[0] / 4) & (x[0] < 3 * lengths[0] / 4)
    return np.where(inside, 2.0, 1.0), np.zeros((*x[0].shape, len(x)))


def _alternating_momentum(x, lengths, amplitude, member):
    m = np.zeros((*x[0].shape, len(x)))
    m[..., 0] = 1.0 if member % 2 == 1 else -1.0
    return np.ones_like(x[0]), m


def _compact_bump(x, lengths, amplitude, member):
    s = np.max([np.abs(xi - L / 2) / (L / 8) for xi, L in zip(x, lengths)], axis=0)
    bump = np.where(s < 1.0, (1.0 - s * s) ** 2, 0.0)
    return 1.0 + amplitude * bump, np.zeros((*x[0].shape, len(x)))


PRESETS: Dict[str, Callable] = {
    "constant": _constant,
    "smooth-wave": _smooth_wave,
    "riemann": _riemann,
    "alternating-momentum-fixture": _alternating_momentum,
    "compact-bump": _compact_bump,
}


def initial_data(
    preset: str,
    cells: Sequence[int],
    lengths: Sequence[float],
    amplitude: float = 0.2,
    member: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cell averages of a preset by midpoint quadrature on SUBCELLS points per dimension

    Raises:
        ValueError: On an unknown preset or a density below the vacuum floor
    """
    if preset not in PRESETS:
        raise ValueError(ErrorMessages.UNKNOWN_PRESET.format(preset=preset))
    fine = [n * SUBCELLS for n in cells]
    axes = [(np.arange(n) + 0.5) * L / n for n, L in zip(fine, lengths)]
    x = np.meshgrid(*axes, indexing="ij")
    rho, m = PRESETS[preset](x, lengths, amplitude, member)
    rho = average_cells(rho, SUBCELLS)
    m = average_cells(m, SUBCELLS, trailing=1)
    if rho.min() < VACUUM_FLOOR:
        raise ValueError(ErrorMessages.VACUUM_INITIAL_DATA.format(value=rho.min(), floor=VACUUM_FLOOR))
    return rho, m


def reference_energy(preset: str, cells: Sequence[int], lengths: Sequence[float], params: EulerParams, amplitude: float = 0.2) -> float:
    """Integral of E(rho_0, m_0) by point-value midpoint quadrature on the subcell lattice"""
    fine = [n * SUBCELLS for n in cells]
    axes = [(np.arange(n) + 0.5) * L / n for n, L in zip(fine, lengths)]
    x = np.meshgrid(*axes, indexing="ij")
    rho, m = PRESETS[preset](x, lengths, amplitude, 1)
    volume = float(np.prod([L / n for n, L in zip(fine, lengths)]))
    return float(np.sum(energy_density(rho, m, params)) * volume)


def average_cells(values: np.ndarray, factor: int, trailing: int = 0, leading: int = 0) -> np.ndarray:
    """Exact averages over blocks of factor^d fine cells on the spatial axes"""
    if factor == 1:
        return np.asarray(values)
    values = np.asarray(values)
    lead = values.shape[:leading]
    tail = values.shape[values.ndim - trailing:]
    spatial = values.shape[leading:values.ndim - trailing]
    shape = list(lead)
    for n in spatial:
        shape += [n // factor, factor]
    shape += list(tail)
    reshaped = values.reshape(shape)
    axes = tuple(leading + 2 * j + 1 for j in range(len(spatial)))
    return reshaped.mean(axis=axes)


def sample_times(T: float, time_steps: int) -> np.ndarray:
    """Analysis sample times (k + 1/2) T / K"""
    return (np.arange(time_steps) + 0.5) * T / time_steps


def simulate_member(
    state: EulerState,
    params: EulerParams,
    times: Sequence[float],
    member: Optional[int] = None,
) -> Tuple[List[EulerState], np.ndarray, np.ndarray]:
    """
    Advance to each sample time, clipping the last step onto it

    Returns:
        (states at the sample times, total energy at the sample times, total mass at t = 0 and the sample times)
    """
    states, energies, masses = [], [], [state.total_mass()]
    current = state
    steps = 0
    for target in times:
        while target - current.t > 1e-14 * max(1.0, target):
            current = lf_step(current, params, dt=target - current.t, member=member)
            steps += 1
        current = EulerState(rho=current.rho, m=current.m, lengths=current.lengths, t=float(target))
        states.append(current)
        energies.append(total_energy(current, params))
        masses.append(current.total_mass())
    logger.debug(f"Member {member}: {steps} steps to t = {current.t:.4g}")
    return states, np.array(energies), np.array(masses)


def simulate_schedule(
    preset: str,
    params: EulerParams,
    schedule: Sequence[Tuple[int, float]],
    analysis_cells: Optional[int] = None,
    time_steps: int = 8,
    T: float = 0.1,
    torus_length: float = 1.0,
    amplitude: float = 0.2,
) -> EulerFamily:
    """
    Run one member per (cells, eps) entry and restrict every member to the analysis grid

    Raises:
        ValueError: On inconsistent cell counts, an unknown preset or vacuum initial data
        SchemeError: If a member blows up, with the member id in details
    """
    d = params.d
    cells_list = [int(c) for c, _ in schedule]
    analysis = analysis_cells or min(cells_list)
    if any(c % analysis for c in cells_list):
        raise ValueError(ErrorMessages.CELLS_NOT_MULTIPLE.format(cells=cells_list, analysis=analysis))
    lengths = (float(torus_length),) * d
    grid = Grid(d=d, cells_per_dim=(analysis,) * d, time_steps=time_steps, T=T, torus_length=lengths)
    times = sample_times(T, time_steps)

    members, values, initial_energies, energy_histories, mass_histories = [], [], [], [], []
    for n, (cells, eps) in enumerate(schedule, start=1):
        member_params = EulerParams(a=params.a, gamma=params.gamma, d=d, eps=float(eps), cfl=params.cfl)
        rho0, m0 = initial_data(preset, (cells,) * d, lengths, amplitude, member=n)
        start = EulerState(rho=rho0, m=m0, lengths=lengths, t=0.0)
        initial_energies.append(total_energy(start, member_params))
        states, energies, masses = simulate_member(start, member_params, times, member=n)

        factor = cells // analysis
        rho = average_cells(np.stack([s.rho for s in states]), factor, leading=1)
        m = average_cells(np.stack([s.m for s in states]), factor, trailing=1, leading=1)
        fields = MemberFields(
            grid=grid,
            rho=rho,
            m=m,
            rho0=average_cells(rho0, factor),
            m0=average_cells(m0, factor, trailing=1),
        )
        members.append(fields)
        values.append(np.concatenate([rho[..., np.newaxis], m], axis=-1))
        energy_histories.append(energies)
        mass_histories.append(masses)
        logger.info(f"Member {n}: {cells} cells, eps {eps:g}, E_n = {initial_energies[-1]:.6g}")

    finest = max(cells_list)
    return EulerFamily(
        sequence=FieldSequence(grid=grid, values=np.stack(values)),
        members=tuple(members),
        params=params,
        preset=preset,
        member_cells=tuple(cells_list),
        member_eps=tuple(float(eps) for _, eps in schedule),
        initial_energies=np.array(initial_energies),
        reference_energy=reference_energy(preset, (finest,) * d, lengths, params, amplitude),
        energy_histories=tuple(energy_histories),
        mass_histories=tuple(mass_histories),
    )


def simulate_family(config) -> EulerFamily:
    """
    Simulate the Euler family a RunConfig describes

    Args:
        config: RunConfig whose family section has kind "euler"

    Returns:
        EulerFamily whose sequence holds (rho, m) on the analysis grid
    """
    family, solver = config.family, config.solver
    if family.kind != "euler":
        raise ValueError(f"family kind '{family.kind}' is not an Euler family")
    params = EulerParams(a=solver.a, gamma=solver.gamma, d=family.d, eps=0.0, cfl=solver.cfl)
    return simulate_schedule(
        preset=family.preset,
        params=params,
        schedule=family.schedule(),
        analysis_cells=family.analysis_cells,
        time_steps=family.time_steps,
        T=family.T,
        torus_length=family.torus_length,
        amplitude=family.amplitude,
    )
