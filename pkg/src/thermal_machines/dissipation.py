"""Thermal Lindblad dissipators in the local and global (eigenbasis) pictures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import dag, herm_eig
from .models import MachineModel

BOHR_RTOL = 1e-9


@dataclass(frozen=True)
class BathSpec:
    """A bosonic bath with rates gamma(omega) = kappa (omega/omega_ref)^D (n(omega) + 1)."""

    label: str
    temperature: float
    kappa: float
    dimension: int = 1
    omega_ref: float = 1.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"bath {self.label}: temperature must be positive")
        if not self.kappa > 0:
            raise ValueError(f"bath {self.label}: kappa must be positive")
        if not self.omega_ref > 0:
            raise ValueError(f"bath {self.label}: omega_ref must be positive")
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"bath {self.label}: dimensionality must be 1, 2 or 3")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature


@dataclass
class Dissipator:
    """Lindblad generator sum_k rate_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2)."""

    terms: list  # [(L, rate), ...]
    flavor: str  # "local" | "global" | "decay"
    bath: BathSpec | None = None

    def __post_init__(self):
        for _, rate in self.terms:
            if rate < 0:
                raise ValueError("dissipator rates must be non-negative")

    @property
    def dim(self) -> int:
        return self.terms[0][0].shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for op, rate in self.terms:
            if rate == 0:
                continue
            ld = dag(op)
            ldl = ld @ op
            out += rate * (op @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl))
        return out

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        """Heisenberg-picture action on an observable."""
        out = np.zeros_like(x, dtype=complex)
        for op, rate in self.terms:
            ld = dag(op)
            ldl = ld @ op
            out += rate * (ld @ x @ op - 0.5 * (ldl @ x + x @ ldl))
        return out


def bose_occupation(omega: float, temperature: float) -> float:
    if not omega > 0 or not temperature > 0:
        raise ValueError("bose_occupation needs omega > 0 and T > 0")
    x = omega / temperature
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def rate_pair(omega: float, bath: BathSpec) -> tuple[float, float]:
    """(gamma_down, gamma_up) at frequency omega; their ratio is exactly exp(-omega/T)."""
    if not omega > 0:
        raise ValueError("rate_pair needs a positive frequency")
    n = bose_occupation(omega, bath.temperature)
    down = bath.kappa * (omega / bath.omega_ref) ** bath.dimension * (n + 1.0)
    up = down * math.exp(-omega / bath.temperature)
    return down, up


def local_dissipator(machine: MachineModel, label: str, bath: BathSpec) -> Dissipator:
    """Thermalizes subsystem ``label`` alone at the bath temperature."""
    if label not in machine.local_jumps:
        raise ValueError(f"machine has no subsystem {label!r}")
    down, up = rate_pair(machine.frequencies[label], bath)
    terms = []
    for op in machine.local_jumps[label]:
        terms.append((op, down))
        terms.append((dag(op), up))
    return Dissipator(terms, "local", bath)


def _cluster(values, tol):
    """Map sorted values to cluster representatives (mean of each cluster)."""
    labels = np.zeros(len(values), dtype=int)
    members = [[values[0]]]
    for i in range(1, len(values)):
        if values[i] - members[-1][-1] <= tol:
            members[-1].append(values[i])
        else:
            members.append([values[i]])
        labels[i] = len(members) - 1
    return labels, np.array([np.mean(m) for m in members])


def bohr_decomposition(h: np.ndarray, x: np.ndarray, rtol: float = BOHR_RTOL):
    """Split ``x`` into lowering parts A(omega) = sum Pi_k x Pi_l with E_l - E_k = omega > 0.

    Returns a list of (omega, A(omega)) sorted by frequency; zero operators dropped.
    """
    spec = herm_eig(h)
    e = spec.eigenvalues
    v = spec.eigenvectors
    scale = max(1.0, float(np.ptp(e)), float(np.max(np.abs(e))))
    tol = rtol * scale
    lev, energies = _cluster(e, tol)
    projs = []
    for k in range(len(energies)):
        cols = v[:, lev == k]
        projs.append(cols @ dag(cols))

    gaps = []
    for k in range(len(energies)):
        for l in range(k + 1, len(energies)):
            gaps.append((energies[l] - energies[k], k, l))
    gaps.sort()
    out = []
    xnorm = max(np.max(np.abs(x)), 1e-300)
    for omega, k, l in gaps:
        a = projs[k] @ x @ projs[l]
        if np.max(np.abs(a)) <= 1e-13 * xnorm:
            continue
        if out and omega - out[-1][0] <= tol:
            out[-1][1] += a
        else:
            out.append([omega, a])
    return [(float(w), a) for w, a in out]


def global_dissipator(machine: MachineModel, bath: BathSpec, coupling=None) -> Dissipator:
    """Davies-type dissipator built on the eigenstates of the full machine Hamiltonian.

    ``coupling`` overrides the registered bath coupling operator.
    """
    x = machine.bath_coupling_ops.get(bath.label) if coupling is None else coupling
    if x is None or not np.any(np.abs(x) > 0):
        raise ValueError(f"no coupling operator for bath {bath.label!r}")
    terms = []
    for omega, a in bohr_decomposition(machine.hamiltonian, x):
        down, up = rate_pair(omega, bath)
        terms.append((a, down))
        terms.append((dag(a), up))
    if not terms:
        raise ValueError(f"bath {bath.label!r} couples to no positive Bohr frequency")
    return Dissipator(terms, "global", bath)


def build_dissipators(machine: MachineModel, baths, model: str = "local"):
    if model not in ("local", "global"):
        raise ValueError(f"unknown dissipation model {model!r}")
    if model == "local":
        return [local_dissipator(machine, b.label, b) for b in baths]
    return [global_dissipator(machine, b) for b in baths]


def decay_dissipator(clock) -> Dissipator:
    """Zero-temperature emission from the top ladder level of a clock."""
    return Dissipator([(clock.decay_op, clock.decay_rate)], "decay", None)
