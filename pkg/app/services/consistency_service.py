"""
Consistency diagnostics for Euler families.

Weak-formulation residuals against smooth test functions, energy-balance defects,
the Reynolds defect of Cesaro averages and the far-field energy check.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.data_models import EulerFamily, EulerParams, FieldSequence, Grid, MemberFields, ReynoldsDefectField, TestFunction
from app.request_models.reports import ConsistencyReport, MemberConsistency
from app.services.euler_service import energy_density, pressure
from app.utils.error_handlers import GridMismatchError, InadmissibleMemberError
from app.utils.validators import ErrorMessages, Validators

logger = logging.getLogger(__name__)

SPATIAL_MODES_1D = [
    (("cos", 0),),
    (("cos", 1),),
    (("sin", 1),),
    (("cos", 2),),
    (("sin", 2),),
    (("cos", 3),),
    (("sin", 3),),
    (("cos", 4),),
]
SPATIAL_MODES_2D = [
    (("cos", 0), ("cos", 0)),
    (("cos", 1), ("cos", 0)),
    (("sin", 1), ("cos", 0)),
    (("cos", 0), ("cos", 1)),
    (("cos", 0), ("sin", 1)),
    (("cos", 1), ("cos", 1)),
    (("sin", 1), ("sin", 1)),
    (("cos", 2), ("sin", 1)),
]


def shipped_test_functions(grid: Grid) -> List[TestFunction]:
    """The shipped eight tensor trigonometric modes times psi(t) = (1 - t/T)^2"""
    modes = SPATIAL_MODES_1D if grid.d == 1 else SPATIAL_MODES_2D
    return [TestFunction(modes=m, T=grid.T, lengths=grid.torus_length) for m in modes]


def _mode(kind: str, k: int, x: np.ndarray, length: float) -> Tuple[np.ndarray, np.ndarray]:
    omega = 2.0 * np.pi * k / length
    if kind == "cos":
        return np.cos(omega * x), -omega * np.sin(omega * x)
    return np.sin(omega * x), omega * np.cos(omega * x)


def temporal_profile(phi: TestFunction, t) -> Tuple[np.ndarray, np.ndarray]:
    """psi and psi' at t"""
    t = np.asarray(t, dtype=np.float64)
    s = 1.0 - t / phi.T
    return s * s, -2.0 * s / phi.T


def spatial_profile(phi: TestFunction, x: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """chi(x) and its gradient (..., d) for phi = psi(t) chi(x)"""
    values, derivatives = zip(*(_mode(kind, k, xi, L) for (kind, k), xi, L in zip(phi.modes, x, phi.lengths)))
    chi = np.prod(values, axis=0)
    grad = []
    for j in range(phi.d):
        factors = [derivatives[i] if i == j else values[i] for i in range(phi.d)]
        grad.append(np.prod(factors, axis=0))
    return chi, np.stack(grad, axis=-1)


def evaluate_test_function(phi: TestFunction, t, x: Sequence[np.ndarray]):
    """
    phi, d_t phi and grad_x phi at (t, x); t broadcasts against the leading axis

    Returns:
        (phi, dphi_dt, grad) with grad carrying a trailing axis of length d
    """
    psi, dpsi = temporal_profile(phi, t)
    chi, grad_chi = spatial_profile(phi, x)
    psi = np.reshape(psi, np.shape(psi) + (1,) * chi.ndim)
    dpsi = np.reshape(dpsi, np.shape(dpsi) + (1,) * chi.ndim)
    return psi * chi, dpsi * chi, psi[..., np.newaxis] * grad_chi


def _momentum_flux(rho: np.ndarray, m: np.ndarray, params: EulerParams) -> np.ndarray:
    """1_{rho>0} m (x) m / rho + p(rho) I, shape (..., d, d)"""
    positive = rho > 0
    inverse = np.where(positive, 1.0 / np.where(positive, rho, 1.0), 0.0)
    flux = m[..., :, np.newaxis] * m[..., np.newaxis, :] * inverse[..., np.newaxis, np.newaxis]
    d = m.shape[-1]
    flux = flux + pressure(rho, params)[..., np.newaxis, np.newaxis] * np.eye(d)
    return flux


def consistency_residuals(
    member: MemberFields,
    testset: Sequence[TestFunction],
    params: EulerParams,
) -> List[Tuple[float, np.ndarray]]:
    """
    Residuals (e1, e2) of the weak continuity and momentum equations per test function

    e1 = int int rho d_t phi + m . grad phi + int rho_0 phi(0, .)
    e2 = int int m d_t phi + (1_{rho>0} m (x) m / rho + p I) grad phi + int m_0 phi(0, .)
    by the midpoint rule on the member grid; e2 is a vector with one entry per component.

    Raises:
        GridMismatchError: If a test function lives on another box
    """
    grid = member.grid
    x = grid.cell_centers()
    t = grid.time_centers()
    flux = _momentum_flux(member.rho, member.m, params)
    residuals = []
    for phi in testset:
        if phi.lengths != grid.torus_length or phi.T != grid.T:
            raise GridMismatchError((phi.T, phi.lengths), (grid.T, grid.torus_length))
        _, dt_phi, grad = evaluate_test_function(phi, t, x)
        phi0, _, _ = evaluate_test_function(phi, 0.0, x)

        e1 = (member.rho * dt_phi + np.sum(member.m * grad, axis=-1)).sum() * grid.cell_volume
        e1 += (member.rho0 * phi0).sum() * grid.spatial_cell_volume

        transport = member.m * dt_phi[..., np.newaxis] + np.einsum("...ji,...i->...j", flux, grad)
        axes = tuple(range(transport.ndim - 1))
        e2 = transport.sum(axis=axes) * grid.cell_volume
        e2 += (member.m0 * phi0[..., np.newaxis]).sum(axis=tuple(range(phi0.ndim))) * grid.spatial_cell_volume
        residuals.append((float(e1), np.asarray(e2)))
    return residuals


def energy_profile(member: MemberFields, params: EulerParams, member_id: Optional[int] = None) -> np.ndarray:
    """
    Integral of E(rho_n, m_n)(t) over the torus at every sample time

    Raises:
        InadmissibleMemberError: If a cell carries infinite energy
    """
    energy = energy_density(member.rho, member.m, params)
    bad = ~np.isfinite(energy)
    if bad.any():
        raise InadmissibleMemberError(member=member_id, cells=int(bad.sum()))
    axes = tuple(range(1, energy.ndim))
    return energy.sum(axis=axes) * member.grid.spatial_cell_volume


def energy_balance_defect(member: MemberFields, E_n: float, params: EulerParams, member_id: Optional[int] = None) -> np.ndarray:
    """E_n minus the total energy at each sample time; the trace term of the scheme defect is zero here"""
    return E_n - energy_profile(member, params, member_id)


def reynolds_trace_weight(gamma: float) -> float:
    """min{1/2, 1/gamma}, the weight of tr R in the energy balance"""
    return min(0.5, 1.0 / gamma)


def _split_state(seq: FieldSequence, N: int) -> Tuple[np.ndarray, np.ndarray]:
    d = seq.grid.d
    if seq.D != 1 + d:
        raise ValueError(ErrorMessages.STATE_DIMENSION.format(D=seq.D, expected=1 + d))
    N = Validators.validate_index(N, seq.length)
    head = seq.head(N)
    return head[..., 0], head[..., 1:]


def reynolds_defect(seq: FieldSequence, N: int, params: EulerParams) -> ReynoldsDefectField:
    """
    Cesaro mean of the momentum flux minus the flux of the Cesaro means, per cell

    Raises:
        ValueError: If the state dimension is not 1 + d or N exceeds the sequence
    """
    rho, m = _split_state(seq, N)
    mean_flux = _momentum_flux(rho, m, params).mean(axis=0)
    flux_of_means = _momentum_flux(rho.mean(axis=0), m.mean(axis=0), params)
    defect = mean_flux - flux_of_means
    defect = 0.5 * (defect + np.swapaxes(defect, -1, -2))
    return ReynoldsDefectField(grid=seq.grid, oscillation=defect, N=N)


def _kinetic(rho: np.ndarray, m: np.ndarray) -> np.ndarray:
    positive = rho > 0
    return np.where(positive, 0.5 * np.sum(m * m, axis=-1) / np.where(positive, rho, 1.0), 0.0)


def kinetic_pressure_mismatch(seq: FieldSequence, N: int, params: EulerParams) -> np.ndarray:
    """2 (mean kinetic - kinetic of means) + d (mean p - p of mean), the trace of the Reynolds defect"""
    rho, m = _split_state(seq, N)
    d = seq.grid.d
    kinetic = _kinetic(rho, m).mean(axis=0) - _kinetic(rho.mean(axis=0), m.mean(axis=0))
    pressures = pressure(rho, params).mean(axis=0) - pressure(rho.mean(axis=0), params)
    return 2.0 * kinetic + d * pressures


def boundary_mask(grid: Grid, width: float) -> np.ndarray:
    """Spatial cells whose center lies within width of the box boundary"""
    half = min(grid.torus_length) / 2
    if not 0 < width < half:
        raise ValueError(ErrorMessages.BOUNDARY_WIDTH.format(width=width, half=half))
    x = grid.cell_centers()
    near = [np.minimum(xi, L - xi) < width for xi, L in zip(x, grid.torus_length)]
    return np.logical_or.reduce(near)


def boundary_energy_check(seq: FieldSequence, N: int, width: float, params: EulerParams) -> float:
    """
    |Cesaro mean of int_U E(rho_n, m_n) - int_U E(rho_bar, m_bar)| over (0, T) x U

    Raises:
        ValueError: If width is not below half the box
    """
    mask = boundary_mask(seq.grid, width)
    rho, m = _split_state(seq, N)
    mean_energy = energy_density(rho, m, params).mean(axis=0)
    energy_of_means = energy_density(rho.mean(axis=0), m.mean(axis=0), params)
    gap = (mean_energy - energy_of_means)[:, mask].sum() * seq.grid.cell_volume
    return float(abs(gap))


def cesaro_average_member(family: EulerFamily, N: int) -> MemberFields:
    """Average of the first N members; again a consistent approximation, residual e1 is linear in it"""
    N = Validators.validate_index(N, family.length)
    members = family.members[:N]
    return MemberFields(
        grid=family.grid,
        rho=np.mean([f.rho for f in members], axis=0),
        m=np.mean([f.m for f in members], axis=0),
        rho0=np.mean([f.rho0 for f in members], axis=0),
        m0=np.mean([f.m0 for f in members], axis=0),
    )


def initial_data_errors(family: EulerFamily) -> np.ndarray:
    """L1 distance of each member's (rho_0, m_0) to the finest member's, on the analysis grid"""
    finest = family.members[int(np.argmax(family.member_cells))]
    volume = family.grid.spatial_cell_volume
    return np.array([
        (np.abs(f.rho0 - finest.rho0).sum() + np.abs(f.m0 - finest.m0).sum()) * volume
        for f in family.members
    ])


def energy_limsup_check(family: EulerFamily, tol: float = 1e-8) -> Tuple[bool, bool]:
    """(E_n nonincreasing in n, every E_n <= integral of E(rho_0, m_0)) within relative tol"""
    energies = family.initial_energies
    scale = max(abs(family.reference_energy), 1.0)
    nonincreasing = bool(np.all(np.diff(energies) <= tol * scale))
    limsup_ok = bool(np.all(energies <= family.reference_energy + tol * scale))
    return nonincreasing, limsup_ok


def consistency_report(family: EulerFamily, testset: Optional[Sequence[TestFunction]] = None) -> ConsistencyReport:
    """Residuals, energy defects, mass drift and initial-data errors for every member"""
    testset = list(testset) if testset is not None else shipped_test_functions(family.grid)
    params = family.params
    grid = family.grid
    if grid.dt > min(grid.dx):
        logger.warning(
            f"Sample spacing T/K = {grid.dt:.3g} exceeds the mesh width {min(grid.dx):.3g}; "
            "residuals carry an O((T/K)^2) time-quadrature error that does not shrink with the mesh"
        )
    errors = initial_data_errors(family)
    members = []
    for n, fields in enumerate(family.members, start=1):
        residuals = consistency_residuals(fields, testset, params)
        e1 = [abs(r[0]) for r in residuals]
        e2 = [float(np.abs(r[1]).max()) for r in residuals]
        E_n = float(family.initial_energies[n - 1])
        admissible = True
        try:
            defect = energy_balance_defect(fields, E_n, params, member_id=n)
        except InadmissibleMemberError:
            logger.warning(f"Member {n} carries infinite energy and is marked inadmissible")
            admissible = False
            defect = np.full(family.grid.time_steps, -np.inf)
        masses = family.mass_histories[n - 1]
        members.append(MemberConsistency(
            member=n,
            cells=family.member_cells[n - 1],
            eps=family.member_eps[n - 1],
            e1=e1,
            e2=e2,
            e1_max=max(e1),
            e2_max=max(e2),
            initial_energy=E_n,
            energy_defect=[float(v) for v in defect],
            min_energy_defect=float(defect.min()),
            mass_drift=float(np.abs(masses - masses[0]).max() / abs(masses[0])),
            initial_data_error=float(errors[n - 1]),
            admissible=admissible,
        ))
    nonincreasing, limsup_ok = energy_limsup_check(family)
    return ConsistencyReport(
        preset=family.preset,
        test_functions=[phi.label for phi in testset],
        members=members,
        reference_energy=family.reference_energy,
        trace_weight=reynolds_trace_weight(params.gamma),
        energies_nonincreasing=nonincreasing,
        energy_limsup_ok=limsup_ok,
    )
