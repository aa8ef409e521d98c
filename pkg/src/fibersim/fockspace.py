"""Truncated multi-mode bosonic Fock space.

Basis ordering: occupation tuples (n_1, ..., n_N) in C order, i.e. mode 0
(the leftmost particle) is the slowest-varying index, matching
``np.kron(op_0, np.kron(op_1, ...))``.
"""
from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from functools import cached_property
from math import factorial

import numpy as np


@dataclass(frozen=True)
class FockSpace:
    n_modes: int
    cutoff: int = 1

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("need at least one mode")
        if self.cutoff < 0:
            raise ValueError("cutoff must be nonnegative")

    @property
    def local_dim(self) -> int:
        return self.cutoff + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.local_dim,) * self.n_modes

    @property
    def dimension(self) -> int:
        return self.local_dim ** self.n_modes

    def index(self, occupations) -> int:
        occ = tuple(int(n) for n in occupations)
        if len(occ) != self.n_modes or any(n < 0 or n > self.cutoff for n in occ):
            raise ValueError(f"occupation {occ} not in {self}")
        return int(np.ravel_multi_index(occ, self.shape))

    def occupations(self, index: int) -> tuple[int, ...]:
        return tuple(int(n) for n in np.unravel_index(index, self.shape))

    @cached_property
    def occupation_table(self) -> np.ndarray:
        """(dimension, n_modes) integer array of occupations per basis index."""
        grids = np.indices(self.shape).reshape(self.n_modes, -1)
        return grids.T.copy()

    @cached_property
    def total_number(self) -> np.ndarray:
        return self.occupation_table.sum(axis=1)

    def sector(self, n_excitations: int) -> np.ndarray:
        """Basis indices with the given total excitation number."""
        return np.flatnonzero(self.total_number == n_excitations)

    def basis_state(self, occupations) -> "FockStateVector":
        v = np.zeros(self.dimension, dtype=complex)
        v[self.index(occupations)] = 1.0
        return FockStateVector(self, v)

    def identity(self) -> np.ndarray:
        return np.eye(self.dimension, dtype=complex)


def _single_mode_lowering(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def embed(space: FockSpace, mode: int, op: np.ndarray) -> np.ndarray:
    if not 0 <= mode < space.n_modes:
        raise IndexError(f"mode {mode} out of range for {space.n_modes} modes")
    left = np.eye(space.local_dim ** mode)
    right = np.eye(space.local_dim ** (space.n_modes - mode - 1))
    return np.kron(np.kron(left, op), right)


def ladder_operator(space: FockSpace, mode: int, kind: str = "lowering") -> np.ndarray:
    a = embed(space, mode, _single_mode_lowering(space.cutoff))
    if kind == "lowering":
        return a
    if kind == "raising":
        return a.conj().T
    raise ValueError(f"unknown ladder operator kind {kind!r}")


def number_operator(space: FockSpace, mode: int | None = None) -> np.ndarray:
    if mode is None:
        return np.diag(space.total_number.astype(complex))
    if not 0 <= mode < space.n_modes:
        raise IndexError(f"mode {mode} out of range")
    return np.diag(space.occupation_table[:, mode].astype(complex))


def position_quadrature(space: FockSpace, mode: int) -> np.ndarray:
    """a + a^dagger for one mode (displacement in units of delta0)."""
    a = ladder_operator(space, mode)
    return a + a.conj().T


@dataclass(frozen=True)
class FockStateVector:
    space: FockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size != self.space.dimension:
            raise ValueError(f"expected {self.space.dimension} amplitudes, got {amps.size}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_dict(cls, space: FockSpace, coeffs: dict) -> "FockStateVector":
        """Build a normalized state from ``{occupation_tuple: amplitude}``."""
        v = np.zeros(space.dimension, dtype=complex)
        for occ, c in coeffs.items():
            v[space.index(occ)] += c
        return cls(space, v).normalized()

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockStateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return FockStateVector(self.space, self.amplitudes / n)

    def expectation(self, op: np.ndarray) -> complex:
        psi = self.amplitudes
        return complex(np.vdot(psi, op @ psi))

    def populations(self) -> np.ndarray:
        """Mean occupation <a_i^dagger a_i> of every mode."""
        p = np.abs(self.amplitudes) ** 2
        return p @ self.space.occupation_table

    def overlap(self, other: "FockStateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density_matrix(self) -> "DensityMatrix":
        psi = self.amplitudes
        return DensityMatrix(self.space, np.outer(psi, psi.conj()))

    def top_level_weight(self) -> float:
        """Probability that any mode sits at the cutoff occupation."""
        hit = np.any(self.space.occupation_table == self.space.cutoff, axis=1)
        return float(np.sum(np.abs(self.amplitudes[hit]) ** 2))

    def embedded(self, cutoff: int) -> "FockStateVector":
        """The same state written in a space with a larger cutoff."""
        if cutoff < self.space.cutoff:
            raise ValueError("can only embed into a larger cutoff")
        big = FockSpace(self.space.n_modes, cutoff)
        v = np.zeros(big.dimension, dtype=complex)
        idx = np.ravel_multi_index(self.space.occupation_table.T, big.shape)
        v[idx] = self.amplitudes
        return FockStateVector(big, v)

    def to_json(self) -> str:
        return json.dumps({
            "n_modes": self.space.n_modes,
            "cutoff": self.space.cutoff,
            "amplitudes": [[float(c.real), float(c.imag)] for c in self.amplitudes],
        })

    @classmethod
    def from_json(cls, text: str) -> "FockStateVector":
        doc = json.loads(text)
        space = FockSpace(int(doc["n_modes"]), int(doc["cutoff"]))
        amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
        return cls(space, amps)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix over ``n_modes`` modes of local dimension ``cutoff+1``."""

    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dimension,) * 2:
            raise ValueError("matrix shape does not match space")
        object.__setattr__(self, "matrix", m)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_valid(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > tol or abs(self.trace() - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh(m).min() >= -tol)


def _as_density(rho_or_state) -> DensityMatrix:
    if isinstance(rho_or_state, FockStateVector):
        return rho_or_state.density_matrix()
    return rho_or_state


def partial_trace(rho_or_state, keep) -> DensityMatrix:
    """Reduced density matrix on the modes in ``keep`` (0-based)."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must not be empty")
    if isinstance(rho_or_state, FockStateVector):
        space = rho_or_state.space
    else:
        space = rho_or_state.space
    if keep[0] < 0 or keep[-1] >= space.n_modes:
        raise IndexError(f"keep set {keep} out of range")
    n, d = space.n_modes, space.local_dim
    traced = [m for m in range(n) if m not in keep]
    sub = FockSpace(len(keep), space.cutoff)

    if isinstance(rho_or_state, FockStateVector):
        # contract the state directly: rho_K = psi_{K,T} psi*_{K',T}
        psi = rho_or_state.amplitudes.reshape(space.shape)
        psi = np.transpose(psi, keep + traced).reshape(d ** len(keep), -1)
        return DensityMatrix(sub, psi @ psi.conj().T)

    rho = rho_or_state.matrix.reshape(space.shape * 2)
    perm = keep + traced
    rho = np.transpose(rho, perm + [n + p for p in perm])
    dk, dt = d ** len(keep), d ** len(traced)
    rho = rho.reshape(dk, dt, dk, dt)
    return DensityMatrix(sub, np.einsum("itjt->ij", rho))


def von_neumann_entropy(rho, tol: float = 1e-12) -> float:
    """Entropy -tr(rho ln rho) in nats."""
    rho = _as_density(rho)
    evals = np.linalg.eigvalsh(rho.matrix)
    if evals.min() < -1e-10:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3g}")
    evals = evals[evals > tol]
    return float(max(0.0, -np.sum(evals * np.log(evals))))


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Untruncated-normalization coefficients e^{-|a|^2/2} a^n / sqrt(n!)."""
    n = np.arange(cutoff + 1)
    fact = np.array([np.sqrt(float(factorial(int(k)))) for k in n])
    return np.exp(-abs(alpha) ** 2 / 2) * np.power(complex(alpha), n) / fact


def coherent_state(space: FockSpace, mode_amplitudes, return_loss: bool = False):
    """Product of single-mode coherent states, renormalized after truncation.

    With ``return_loss`` also returns ``1 - captured_norm**2`` before
    renormalization.
    """
    alphas = np.asarray(mode_amplitudes, dtype=complex).ravel()
    if alphas.size != space.n_modes:
        raise ValueError("need one amplitude per mode")
    if np.any(3 * np.abs(alphas) ** 2 > space.cutoff):
        warnings.warn("coherent amplitude large for this cutoff; truncation error may be significant",
                      stacklevel=2)
    v = np.ones(1, dtype=complex)
    for a in alphas:
        v = np.kron(v, coherent_amplitudes(a, space.cutoff))
    captured = float(np.vdot(v, v).real)
    state = FockStateVector(space, v / np.sqrt(captured))
    if return_loss:
        return state, 1.0 - captured
    return state


def occupation_tuples(space: FockSpace, n_excitations: int):
    """Occupation tuples of a fixed total number, in basis order."""
    return [space.occupations(i) for i in space.sector(n_excitations)]


def all_bipartitions(n_modes: int):
    """Every keep-set containing mode 0 except the full set."""
    rest = range(1, n_modes)
    for r in range(0, n_modes - 1):
        for extra in itertools.combinations(rest, r):
            yield (0,) + extra
