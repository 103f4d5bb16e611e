"""Liouvillian assembly, steady states, time evolution and heat currents."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dissipation import Dissipator
from .linalg import as_matrix, dag, hermitianize, is_hermitian, matrix_exp, partial_trace, spost, spre
from .models import MachineModel
from .thermo import VirtualTemperature

log = logging.getLogger(__name__)

# row-major superoperators of this size stay within a few hundred MB
MAX_LIOUVILLE_DIM = 64
SVD_LIMIT = 512  # above this the bordered LU solve is used; SVD cost grows too fast
CURRENT_IMAG_TOL = 1e-8
REFINE_STEPS = 2


class SolverError(RuntimeError):
    """The steady-state or propagation solve did not produce a valid state."""


class DegenerateSteadyState(SolverError):
    def __init__(self, kernel_dim):
        super().__init__(f"Liouvillian kernel has dimension {kernel_dim}; steady state is not unique")
        self.kernel_dim = kernel_dim


@dataclass
class Liouvillian:
    matrix: np.ndarray
    hamiltonian: np.ndarray
    dissipators: list

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ rho.reshape(-1)).reshape(rho.shape)


@dataclass
class SteadyStateReport:
    rho_ss: np.ndarray
    currents: dict
    entropy_rate: float
    residual: float
    temperatures: dict = field(default_factory=dict)

    def first_law_ok(self, rtol=1e-10, atol=1e-16) -> bool:
        """|sum J| <= rtol max|J|; ``atol`` is a rounding floor for machines with no net flow."""
        js = np.array(list(self.currents.values()))
        return bool(abs(js.sum()) <= max(rtol * np.max(np.abs(js)), atol))

    def second_law_ok(self, atol=1e-12) -> bool:
        return self.entropy_rate >= -atol


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, d, d)


def dissipator_superoperator(d: Dissipator) -> np.ndarray:
    n = d.dim
    terms = [(op, rate) for op, rate in d.terms if rate != 0]
    if not terms:
        return np.zeros((n * n, n * n), dtype=complex)
    ops = np.array([op for op, _ in terms], dtype=complex)
    rates = np.array([rate for _, rate in terms])
    # sum_t r_t L_t (x) conj(L_t) as one product: [(i,k),(j,l)] -> [(i,j),(k,l)]
    a = (rates[:, None, None] * ops).reshape(len(terms), n * n)
    jump = (a.T @ ops.conj().reshape(len(terms), n * n)).reshape(n, n, n, n)
    out = jump.transpose(0, 2, 1, 3).reshape(n * n, n * n)
    k = np.einsum("t,tji,tjk->ik", rates, ops.conj(), ops)
    # anticommutator terms share one superoperator
    return out - 0.5 * (spre(k) + spost(k))


def liouvillian(h, dissipators) -> Liouvillian:
    """Superoperator of rho' = -i[H, rho] + sum of dissipators, on row-major vec(rho)."""
    h = as_matrix(h)
    if not is_hermitian(h, 1e-10):
        raise ValueError("Hamiltonian is not Hermitian")
    n = h.shape[0]
    if n > MAX_LIOUVILLE_DIM:
        raise ValueError(f"Hilbert dimension {n} exceeds the dense Liouvillian limit {MAX_LIOUVILLE_DIM}")
    mat = -1j * (spre(h) - spost(h))
    for d in dissipators:
        if d.dim != n:
            raise ValueError(f"dissipator dimension {d.dim} does not match Hamiltonian dimension {n}")
        mat += dissipator_superoperator(d)
    return Liouvillian(mat, h, list(dissipators))


def _normalize_state(x: np.ndarray) -> np.ndarray:
    rho = x.reshape(int(round(np.sqrt(x.size))), -1)
    rho = hermitianize(rho / np.trace(rho))
    w, v = np.linalg.eigh(rho)
    if w[0] < -1e-8:
        raise SolverError(f"steady state has negative eigenvalue {w[0]:.3g}")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        rho = (v * w) @ dag(v)
        rho /= np.trace(rho).real
    return rho


def _residual_ld(mat: np.ndarray, x: np.ndarray) -> np.ndarray:
    """mat @ x accumulated in extended precision, rounded back to double."""
    return (mat.astype(np.clongdouble) @ x.astype(np.clongdouble)).astype(complex)


def _null_vector(mat: np.ndarray, n: int) -> np.ndarray:
    size = mat.shape[0]
    if size <= SVD_LIMIT:
        u, s, vh = np.linalg.svd(mat)
        tol = s[0] * 1e-12
        kernel = int(np.sum(s < tol))
        if kernel > 1:
            raise DegenerateSteadyState(kernel)
        if kernel == 0 and s[-1] > 1e-8 * s[0]:
            raise SolverError(f"Liouvillian has no kernel (smallest singular value {s[-1]:.3g})")
        x = vh[-1].conj()
        # the unitary part dominates |L|, so a plain SVD leaves a residual of
        # eps*|H|; refine against residuals accumulated in extended precision
        for _ in range(REFINE_STEPS):
            r = _residual_ld(mat, x)
            coef = (u[:, :-1].conj().T @ r) / s[:-1]
            x = x - vh[:-1].conj().T @ coef
        return x
    # trace-preservation makes the rho_00 equation redundant; swap it for Tr rho = 1
    bordered = mat.copy()
    bordered[0, :] = np.eye(n).reshape(-1)
    rhs = np.zeros(size, dtype=complex)
    rhs[0] = 1.0
    lu, piv = scipy.linalg.lu_factor(bordered, overwrite_a=True, check_finite=False)
    anorm = np.linalg.norm(mat, 1)
    (rcond, info) = scipy.linalg.lapack.zgecon(lu, anorm, norm="1")
    if rcond < 1e-14:
        raise DegenerateSteadyState(-1)
    x = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    trace_row = np.eye(n).reshape(-1)
    for _ in range(REFINE_STEPS):
        r = _residual_ld(mat, x)
        r[0] = trace_row @ x - 1.0
        x = x - scipy.linalg.lu_solve((lu, piv), r, check_finite=False)
    return x


def heat_current(h, d: Dissipator, rho) -> float:
    """Energy current Tr{H D[rho]} flowing into the machine through one dissipator."""
    h = as_matrix(h)
    rho = as_matrix(rho)
    if h.shape != rho.shape or d.dim != h.shape[0]:
        raise ValueError("dimension mismatch in heat_current")
    j = np.trace(h @ d.apply(rho))
    scale = max(1.0, abs(j.real)) * max(1.0, float(np.max(np.abs(h))))
    if abs(j.imag) > CURRENT_IMAG_TOL * scale:
        raise ValueError(f"heat current has imaginary part {j.imag:.3g}; inconsistent inputs")
    return float(j.real)


def entropy_production_rate(dsdt: float, currents, temperatures) -> float:
    """sigma = dS/dt - sum_a J_a / T_a; baths with T = None (work-like sinks) are skipped."""
    currents = list(currents)
    temperatures = list(temperatures)
    if len(currents) != len(temperatures):
        raise ValueError("currents and temperatures must have equal length")
    return float(dsdt - sum(j / t for j, t in zip(currents, temperatures) if t is not None))


def _bath_key(d: Dissipator) -> str:
    if d.bath is not None:
        return d.bath.label
    return d.flavor if d.flavor != "decay" else "tick"


def steady_state(l: Liouvillian, energy=None) -> SteadyStateReport:
    """Unique fixed point of the Liouvillian plus per-bath currents and entropy production.

    ``energy`` is the operator currents are measured with; it defaults to the
    full Hamiltonian. Local models should pass the free Hamiltonian.
    """
    n = l.dim
    x = _null_vector(l.matrix, n)
    rho = _normalize_state(x)
    residual = float(np.linalg.norm(l.matrix @ rho.reshape(-1)))
    if residual > 1e-10 * max(1.0, float(np.max(np.abs(l.matrix)))):
        raise SolverError(f"steady-state residual {residual:.3g} too large")
    h_e = l.hamiltonian if energy is None else as_matrix(energy)
    currents, temps = {}, {}
    for d in l.dissipators:
        key = _bath_key(d)
        currents[key] = currents.get(key, 0.0) + heat_current(h_e, d, rho)
        temps[key] = None if d.bath is None else d.bath.temperature
    sigma = entropy_production_rate(0.0, currents.values(), temps.values())
    return SteadyStateReport(rho, currents, sigma, residual, temps)


def evolve(rho0, l: Liouvillian, times, check_tol: float = 1e-6) -> Trajectory:
    """Propagate rho0 through ``times`` by exact exponential steps exp(L dt)."""
    rho0 = as_matrix(rho0)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a non-decreasing 1-d grid")
    n = l.dim
    states = np.empty((len(times), n, n), dtype=complex)
    x = rho0.reshape(-1).copy()
    props = {}
    t_prev = times[0]
    for k, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            key = round(dt, 12)
            if key not in props:
                props[key] = matrix_exp(l.matrix, dt)
            x = props[key] @ x
        t_prev = t
        rho = x.reshape(n, n)
        tr = np.trace(rho).real
        lmin = np.linalg.eigvalsh(hermitianize(rho))[0]
        if abs(tr - 1) > check_tol or lmin < -check_tol:
            raise SolverError(f"state left the density-matrix set at t={t:g} (trace {tr:.3g}, min eig {lmin:.3g})")
        states[k] = rho
    return Trajectory(times, states)


def internal_current(machine: MachineModel, rho) -> float:
    """Excitation current k = 2 g Im<B> through the three-body interaction g (B + B^dag).

    For a fridge B = A_c A_h^dag A_w and k > 0 means the cold subsystem is
    being cooled; for an engine B = A_c^dag A_h A_w^dag and k > 0 means the
    load is being pushed up its ladder.
    """
    if machine.topology not in ("fridge", "engine"):
        raise ValueError("internal current is defined for three-body machines only")
    b = machine.interaction_op
    return float(2.0 * machine.g * np.imag(np.trace(b @ as_matrix(rho))))


def qubit_temperature(rho_q, omega: float) -> VirtualTemperature:
    """Effective temperature omega / ln(p0/p1) of a two-level reduced state."""
    p0, p1 = float(rho_q[0, 0].real), float(rho_q[1, 1].real)
    if p1 <= 0:
        return VirtualTemperature(np.inf)
    if p0 <= 0:
        return VirtualTemperature(-np.inf)
    return VirtualTemperature.from_beta(np.log(p0 / p1) / omega)


def product_gibbs_state(machine: MachineModel, temperatures: dict) -> np.ndarray:
    """Each subsystem in equilibrium with its own bath."""
    from .linalg import kron
    from .models import local_hamiltonian

    factors = []
    for s in machine.subsystems:
        e = np.diag(local_hamiltonian(s)).real
        p = np.exp(-e / temperatures[s.label])
        factors.append(np.diag(p / p.sum()))
    return kron(*factors)


def add_interaction_coherence(machine: MachineModel, rho: np.ndarray, amplitude: float) -> np.ndarray:
    """Put coherence i*c*sqrt(p_a p_b) between |1,0,1> and |0,1,0> (c clipped to [-1, 1]).

    A positive amplitude starts the excitation flow out of the cold subsystem.
    """
    if machine.topology != "fridge":
        raise ValueError("interaction coherence is defined for three-body fridges")
    c = float(np.clip(amplitude, -1.0, 1.0))
    a = machine.basis_index(1, 0, 1)
    b = machine.basis_index(0, 1, 0)
    out = rho.copy()
    val = 1j * c * np.sqrt(rho[a, a].real * rho[b, b].real)
    out[a, b] = val
    out[b, a] = np.conj(val)
    return out


def cold_temperature_series(machine: MachineModel, traj: Trajectory):
    """Populations and effective temperature of the cold subsystem along a trajectory."""
    omega = machine.frequencies["c"]
    idx = machine.labels.index("c")
    p0 = np.empty(len(traj.times))
    p1 = np.empty(len(traj.times))
    temps = []
    for k, rho in enumerate(traj.states):
        red = partial_trace(rho, machine.dims, idx)
        p0[k], p1[k] = red[0, 0].real, red[1, 1].real
        temps.append(qubit_temperature(red, omega))
    return p0, p1, temps
