"""Closed-form thermodynamics of absorption machines: virtual temperatures,
cooling windows, Carnot bounds, passive states and ergotropy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, dag, herm_eig, hermitianize


@dataclass(frozen=True)
class VirtualTemperature:
    """A temperature that may be negative or infinite.

    Stored through its inverse ``beta``, which stays finite across the
    population-inversion point; ``kind`` tags the infinite cases.
    """

    beta: float
    kind: str = "finite"  # "finite" | "+inf" | "-inf"

    @classmethod
    def from_ratio(cls, numerator: float, denominator: float) -> "VirtualTemperature":
        """T = numerator / denominator; a zero denominator gives +/-inf by the sign of the numerator."""
        if denominator == 0:
            return cls(0.0, "+inf" if numerator >= 0 else "-inf")
        return cls(denominator / numerator)

    @classmethod
    def from_beta(cls, beta: float) -> "VirtualTemperature":
        if beta == 0:
            return cls(0.0, "+inf")
        return cls(float(beta))

    @property
    def value(self) -> float:
        if self.kind == "+inf":
            return math.inf
        if self.kind == "-inf":
            return -math.inf
        if math.isinf(self.beta):
            return 0.0
        return 1.0 / self.beta

    @property
    def is_negative(self) -> bool:
        return self.kind == "-inf" or (self.kind == "finite" and self.beta < 0)

    def __float__(self):
        return self.value

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class ErgotropyReport:
    work: float
    passive_state: np.ndarray
    mean_energy: float


def virtual_temperature(omega_hot, omega_work, beta_hot, beta_work) -> VirtualTemperature:
    """Temperature of the virtual qubit spanned by a hot and a work transition.

    For the fridge pass (omega_h, omega_w, beta_h, beta_w); for the engine pass
    (omega_h, omega_c, beta_h, beta_c).
    """
    if not omega_hot > 0 or not omega_work > 0:
        raise ValueError("frequencies must be positive")
    return VirtualTemperature.from_ratio(
        omega_hot - omega_work, beta_hot * omega_hot - beta_work * omega_work
    )


def split_virtual_temperatures(omega_c, omega_w, omega_h, g, beta_h, beta_w):
    """(T_v+, T_v-) of the two cold transitions omega_c +/- g of a strongly coupled fridge."""
    plus = VirtualTemperature.from_ratio(omega_c + g, beta_h * omega_h - beta_w * (omega_w - g))
    minus = VirtualTemperature.from_ratio(omega_c - g, beta_h * omega_h - beta_w * (omega_w + g))
    return plus, minus


def _check_fridge_temps(t_c, t_h, t_w):
    if not 0 < t_c < t_h <= t_w:
        raise ValueError(f"need 0 < T_c < T_h <= T_w, got {t_c}, {t_h}, {t_w}")


def cooling_window(t_c, t_h, t_w) -> float:
    """Upper bound of omega_c / omega_w for which the fridge cools."""
    _check_fridge_temps(t_c, t_h, t_w)
    return t_c * (t_w - t_h) / (t_w * (t_h - t_c))


def carnot_cop(t_c, t_h, t_w) -> float:
    if not 0 < t_c <= t_h <= t_w:
        raise ValueError(f"need 0 < T_c <= T_h <= T_w, got {t_c}, {t_h}, {t_w}")
    if t_h == t_c:
        return math.inf
    return t_c * (t_w - t_h) / (t_w * (t_h - t_c))


def carnot_efficiency(t_c, t_h) -> float:
    if not 0 < t_c <= t_h:
        raise ValueError(f"need 0 < T_c <= T_h, got {t_c}, {t_h}")
    return 1.0 - t_c / t_h


def cop_at_max_power_bound(t_c, t_h, t_w, dimension) -> float:
    return dimension / (dimension + 1.0) * carnot_cop(t_c, t_h, t_w)


def passive_state(rho, h) -> np.ndarray:
    """Same spectrum as rho, largest populations on the lowest energies of h."""
    rho = as_matrix(rho)
    h = as_matrix(h)
    if rho.shape != h.shape:
        raise ValueError("state and Hamiltonian dimensions differ")
    p = np.sort(np.linalg.eigvalsh(hermitianize(rho)))[::-1]
    v = herm_eig(h).eigenvectors
    return (v * p) @ dag(v)


def ergotropy(rho, h) -> ErgotropyReport:
    rho = as_matrix(rho)
    h = as_matrix(h)
    pi = passive_state(rho, h)
    mean = float(np.real(np.trace(h @ rho)))
    p = np.sort(np.linalg.eigvalsh(hermitianize(rho)))[::-1]
    e = herm_eig(h).eigenvalues
    w = mean - float(np.dot(p, e))
    # rearrangement inequality makes w >= 0; only rounding can push it below
    return ErgotropyReport(max(w, 0.0), pi, mean)


def ergotropy_change(rho_before, rho_after, h) -> float:
    return ergotropy(rho_after, h).work - ergotropy(rho_before, h).work


def diagonal_ergotropy(p, energies) -> float:
    """Ergotropy of a state diagonal in the eigenbasis of h, from populations alone."""
    p = np.asarray(p, dtype=float)
    e = np.asarray(energies, dtype=float)
    return float(np.dot(p, e) - np.dot(np.sort(p)[::-1], np.sort(e)))


def ladder_ergotropy_asymptotic(mean_energy, energy_std) -> float:
    """Ergotropy of a wide Gaussian population on an equally spaced ladder."""
    if mean_energy < 0 or energy_std < 0:
        raise ValueError("energy and spread must be non-negative")
    return mean_energy - 4.0 * energy_std / math.sqrt(2.0 * math.pi)
