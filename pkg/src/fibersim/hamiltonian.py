"""Quantized chain Hamiltonians and their single-excitation reduction.

The interaction is written as ``sum_{i,j} g_ij a_j^dagger a_i`` over ordered
pairs, so an isolated pair evolves as a beamsplitter with angle
``theta = g_ij * t``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement

import numpy as np

from .fockspace import FockSpace, ladder_operator
from .model import ChainGeometry, OscillatorParams, PumpSpectrum


def coupling_matrix(geometry: ChainGeometry, spectrum: PumpSpectrum) -> np.ndarray:
    """g_ij = sum_k Omega_k sin(k d_ij); symmetric with zero diagonal."""
    d = geometry.distances()
    g = np.tensordot(np.sin(d[..., None] * spectrum.k), spectrum.omega, axes=1)
    np.fill_diagonal(g, 0.0)
    return g


def shifted_frequencies(geometry: ChainGeometry, spectrum: PumpSpectrum, omega_T: float = 1.0) -> np.ndarray:
    return omega_T - coupling_matrix(geometry, spectrum).sum(axis=1)


def mode_matrix_from_couplings(g: np.ndarray, omega_T: float = 1.0) -> np.ndarray:
    """diag(omega_T - row sums of g) + g."""
    g = np.asarray(g, dtype=float)
    return np.diag(omega_T - g.sum(axis=1)) + g


@dataclass(frozen=True)
class ModeSpaceHamiltonian:
    """Single-excitation matrix of a number-conserving quadratic Hamiltonian."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("mode matrix must be square")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-9:
            raise ValueError("mode matrix must be Hermitian")
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def eigh(self):
        return np.linalg.eigh(self.matrix)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigh[0]

    def propagator(self, t: float) -> np.ndarray:
        w, v = self.eigh
        return (v * np.exp(-1j * w * t)) @ v.conj().T


def mode_space_hamiltonian(geometry: ChainGeometry, spectrum: PumpSpectrum, omega_T: float = 1.0,
                           frequency_shifts: bool = True) -> ModeSpaceHamiltonian:
    """M = diag(w~) + g; without ``frequency_shifts`` the diagonal is plain omega_T."""
    g = coupling_matrix(geometry, spectrum)
    if not frequency_shifts:
        return ModeSpaceHamiltonian(omega_T * np.eye(g.shape[0]) + g)
    return ModeSpaceHamiltonian(mode_matrix_from_couplings(g, omega_T))


def sector_eigenenergies(M: ModeSpaceHamiltonian, n_excitations: int) -> np.ndarray:
    """Energies of the one- or two-excitation sector from the mode matrix."""
    lam = M.eigenvalues
    if n_excitations == 1:
        return np.sort(lam)
    if n_excitations == 2:
        pairs = combinations_with_replacement(range(lam.size), 2)
        return np.sort([lam[p] + lam[q] for p, q in pairs])
    raise ValueError("only sectors 1 and 2 are supported; diagonalize the Fock matrix instead")


def quadratic_fock_operator(M: np.ndarray, space: FockSpace) -> np.ndarray:
    """Fock representation of sum_{p,q} M_pq a_p^dagger a_q."""
    M = np.asarray(M)
    if M.shape != (space.n_modes,) * 2:
        raise ValueError(f"mode matrix of shape {M.shape} does not fit {space.n_modes} modes")
    a = [ladder_operator(space, m) for m in range(space.n_modes)]
    ad = [op.conj().T for op in a]
    H = np.zeros((space.dimension,) * 2, dtype=complex)
    for p in range(space.n_modes):
        for q in range(space.n_modes):
            if M[p, q] != 0:
                H += M[p, q] * (ad[p] @ a[q])
    return H


def build_rwa_hamiltonian(geometry: ChainGeometry, spectrum: PumpSpectrum, space: FockSpace,
                          omega_T: float = 1.0, frequency_shifts: bool = True) -> np.ndarray:
    """Number-conserving part: sum_i w~_i n_i + sum_{ij} g_ij a_j^dagger a_i."""
    if space.n_modes != geometry.n_particles:
        raise ValueError("Fock space and geometry disagree on the number of particles")
    M = mode_space_hamiltonian(geometry, spectrum, omega_T, frequency_shifts)
    return quadratic_fock_operator(M.matrix, space)


def build_rwa_terms(geometry: ChainGeometry, spectrum: PumpSpectrum, oscillator: OscillatorParams,
                    space: FockSpace) -> np.ndarray:
    """Counter-rotating part: linear displacement and pair-creation terms."""
    if space.n_modes != geometry.n_particles:
        raise ValueError("Fock space and geometry disagree on the number of particles")
    n = geometry.n_particles
    d = geometry.distances()
    a = [ladder_operator(space, m) for m in range(n)]
    ad = [op.conj().T for op in a]
    X = [a[m] + ad[m] for m in range(n)]
    H = np.zeros((space.dimension,) * 2, dtype=complex)

    if oscillator.delta0 > 0 and len(spectrum):
        eps = spectrum.epsilon(oscillator.delta0)
        for j in range(n):
            for i in range(j):
                c = float(np.sum(eps * np.cos(spectrum.k * d[i, j])))
                H += c * (X[j] - X[i])

    g = np.tensordot(np.sin(d[..., None] * spectrum.k), spectrum.omega, axes=1)
    for j in range(n):
        for i in range(n):
            if g[i, j] == 0:
                continue
            H -= 0.5 * g[i, j] * (a[j] @ a[j] + ad[j] @ ad[j] - a[j] @ a[i] - ad[j] @ ad[i])
    return H


def build_full_hamiltonian(geometry: ChainGeometry, spectrum: PumpSpectrum, oscillator: OscillatorParams,
                           space: FockSpace, include_rwa_terms: bool = True) -> np.ndarray:
    H = build_rwa_hamiltonian(geometry, spectrum, space, oscillator.omega_T)
    if include_rwa_terms:
        H = H + build_rwa_terms(geometry, spectrum, oscillator, space)
    return H


def fock_sector_block(H: np.ndarray, space: FockSpace, n_excitations: int) -> np.ndarray:
    idx = space.sector(n_excitations)
    return H[np.ix_(idx, idx)]


def single_excitation_block(H: np.ndarray, space: FockSpace) -> np.ndarray:
    """Block of H on |..1_m..> states, ordered by mode index."""
    modes = [tuple(int(i == m) for i in range(space.n_modes)) for m in range(space.n_modes)]
    idx = [space.index(occ) for occ in modes]
    return H[np.ix_(idx, idx)]


def matrix_to_json_rows(H: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(H, dtype=complex)]
