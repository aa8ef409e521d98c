"""Core domain types and the classical pair-force model.

Conventions used throughout the package: hbar = 1, frequencies in units of
the trap frequency, and wavenumbers/positions in any pair of units whose
product is a phase.  The default :class:`UnitSystem` uses k0 = 2*pi so that
positions can be given directly in units of the reference wavelength.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class UnitSystem:
    """Reference wavenumber ``k0``; ``lam0 = 2*pi/k0``."""

    k0: float = 2 * np.pi

    def __post_init__(self):
        if not self.k0 > 0:
            raise ValueError("k0 must be positive")

    @property
    def lam0(self) -> float:
        return 2 * np.pi / self.k0

    def wavelengths(self, x) -> np.ndarray:
        """Convert lengths given in units of ``lam0`` to internal length units."""
        return np.asarray(x, dtype=float) * self.lam0


@dataclass(frozen=True)
class ChainGeometry:
    """Trap centres along the fiber, strictly increasing."""

    positions: np.ndarray

    def __post_init__(self):
        x = np.array(self.positions, dtype=float).ravel()
        if x.size == 0:
            raise ValueError("geometry needs at least one trap")
        if np.any(np.diff(x) <= 0):
            raise ValueError("trap positions must be strictly increasing")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @classmethod
    def from_spacings(cls, spacings, start=0.0) -> "ChainGeometry":
        return cls(np.concatenate([[start], start + np.cumsum(spacings)]))

    @property
    def n_particles(self) -> int:
        return self.positions.size

    def distances(self) -> np.ndarray:
        """Symmetric matrix of pair distances d_ij with zero diagonal."""
        x = self.positions
        return np.abs(x[None, :] - x[:, None])

    def pair_distance(self, i: int, j: int) -> float:
        return abs(self.positions[j] - self.positions[i])

    def translated(self, shift: float) -> "ChainGeometry":
        return ChainGeometry(self.positions + shift)


@dataclass(frozen=True)
class PumpSpectrum:
    """Pump components as (wavenumber k, interaction strength Omega).

    The scattered intensity of a component is proportional to ``Omega/k``;
    :attr:`intensities` reports it in units where the proportionality
    constant ``sigma*delta0**2/(hbar*c)`` is one.
    """

    k: np.ndarray = field(default_factory=lambda: np.zeros(0))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        k = np.array(self.k, dtype=float).ravel()
        om = np.array(self.omega, dtype=float).ravel()
        if k.shape != om.shape:
            raise ValueError("k and omega must have the same length")
        if np.any(k <= 0):
            raise ValueError("wavenumbers must be positive")
        if np.any(om < 0):
            raise ValueError("negative interaction strength needs negative light intensity")
        k.setflags(write=False)
        om.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "omega", om)

    @classmethod
    def single(cls, k: float, omega: float) -> "PumpSpectrum":
        return cls([k], [omega])

    @classmethod
    def from_intensities(cls, k, intensities) -> "PumpSpectrum":
        k = np.asarray(k, dtype=float)
        return cls(k, np.asarray(intensities, dtype=float) * k)

    def __len__(self):
        return self.k.size

    @property
    def intensities(self) -> np.ndarray:
        return self.omega / self.k

    def epsilon(self, delta0: float) -> np.ndarray:
        """Displacement coupling ``epsilon_k = Omega_k / (delta0 * k)``."""
        return self.omega / (delta0 * self.k)

    def scaled(self, factor: float) -> "PumpSpectrum":
        return PumpSpectrum(self.k, self.omega * factor)

    def to_dict(self) -> list[dict]:
        return [{"k": float(k), "omega": float(o)} for k, o in zip(self.k, self.omega)]


@dataclass(frozen=True)
class OscillatorParams:
    omega_T: float = 1.0
    delta0: float = 0.0
    mass: float | None = None

    def __post_init__(self):
        if not self.omega_T > 0:
            raise ValueError("omega_T must be positive")
        if self.delta0 < 0:
            raise ValueError("delta0 must be nonnegative")


def _check_index(geometry: ChainGeometry, j: int):
    if not 0 <= j < geometry.n_particles:
        raise IndexError(f"particle index {j} out of range for N={geometry.n_particles}")


def pair_force(geometry: ChainGeometry, spectrum: PumpSpectrum, sigma_over_c: float, j: int) -> float:
    """Net light-induced force on particle ``j`` (0-based) from all others.

    Each pair contributes ``sigma*I_k/c * cos(k (x_j - x_i)) * sign(x_i - x_j)``.
    """
    _check_index(geometry, j)
    x = geometry.positions
    dx = x[j] - np.delete(x, j)
    phase = np.cos(np.outer(dx, spectrum.k)) @ spectrum.intensities
    return float(sigma_over_c * np.sum(phase * np.sign(-dx)))


def pair_forces(geometry: ChainGeometry, spectrum: PumpSpectrum, sigma_over_c: float) -> np.ndarray:
    return np.array([pair_force(geometry, spectrum, sigma_over_c, j) for j in range(geometry.n_particles)])


def total_potential(geometry: ChainGeometry, spectrum: PumpSpectrum, sigma_over_c: float) -> float:
    d = geometry.distances()
    iu = np.triu_indices(geometry.n_particles, 1)
    dij = d[iu]
    terms = np.sin(np.outer(dij, spectrum.k)) * (spectrum.intensities / spectrum.k)
    # (1/2) * double sum over ordered pairs == sum over unordered pairs
    return float(sigma_over_c * terms.sum())


def _total_potential_at(x, spectrum, sigma_over_c):
    # positions may be unordered here (finite-difference probes)
    dij = np.abs(x[:, None] - x[None, :])[np.triu_indices(x.size, 1)]
    return float(sigma_over_c * (np.sin(np.outer(dij, spectrum.k)) * (spectrum.intensities / spectrum.k)).sum())


def potential_gradient(geometry: ChainGeometry, spectrum: PumpSpectrum, sigma_over_c: float, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of :func:`total_potential`."""
    x = geometry.positions.copy()
    grad = np.empty_like(x)
    for j in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        grad[j] = (_total_potential_at(xp, spectrum, sigma_over_c) - _total_potential_at(xm, spectrum, sigma_over_c)) / (2 * step)
    return grad


@dataclass(frozen=True)
class ChainConfig:
    units: UnitSystem
    geometry: ChainGeometry
    spectrum: PumpSpectrum
    oscillator: OscillatorParams

    def to_dict(self) -> dict:
        return {
            "k0": self.units.k0,
            "positions": [float(v) for v in self.geometry.positions],
            "spectrum": self.spectrum.to_dict(),
            "delta0": self.oscillator.delta0,
            "omega_T": self.oscillator.omega_T,
        }


def config_from_dict(doc: dict) -> ChainConfig:
    """Build a :class:`ChainConfig` from the JSON chain document.

    Raises ``ValueError`` naming the offending field on schema violations.
    """
    def need(key):
        if key not in doc:
            raise ValueError(f"missing field '{key}'")
        return doc[key]

    try:
        units = UnitSystem(float(doc.get("k0", 2 * np.pi)))
        geometry = ChainGeometry(need("positions"))
        comps = need("spectrum")
        spectrum = PumpSpectrum([c["k"] for c in comps], [c["omega"] for c in comps])
        osc = OscillatorParams(float(doc.get("omega_T", 1.0)), float(doc.get("delta0", 0.0)))
    except (TypeError, KeyError) as exc:
        raise ValueError(f"malformed chain config: {exc!r}") from exc
    return ChainConfig(units, geometry, spectrum, osc)


def load_config(path) -> ChainConfig:
    return config_from_dict(json.loads(Path(path).read_text()))
