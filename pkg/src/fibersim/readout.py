"""Fields leaving the fiber ends, classically and as linearized operators.

Intensities are reported in units of ``I_unit = sum_k I_k``, the output of
a single particle.  Different spectral components are added incoherently.
"""
from __future__ import annotations

import numpy as np

from .fockspace import DensityMatrix, FockSpace, FockStateVector, position_quadrature
from .model import ChainGeometry, OscillatorParams, PumpSpectrum


def _phases(geometry: ChainGeometry, k: float, direction: str) -> np.ndarray:
    x = geometry.positions
    if direction == "left":
        return np.exp(1j * k * (x - x[0]))
    if direction == "right":
        return np.exp(1j * k * (x[-1] - x))
    raise ValueError(f"direction must be 'left' or 'right', not {direction!r}")


def _reference(geometry: ChainGeometry, direction: str) -> int:
    return 0 if direction == "left" else geometry.n_particles - 1


def intensity_unit(spectrum: PumpSpectrum) -> float:
    return float(np.sum(spectrum.intensities))


def classical_output_amplitudes(geometry: ChainGeometry, spectrum: PumpSpectrum):
    """Per-component amplitudes (E_minus, E_plus) in units of sqrt(I_unit).

    Each particle contributes ``sqrt(I_k) exp(i k (x_i - x_1))`` to the left
    output and ``sqrt(I_k) exp(i k (x_N - x_i))`` to the right output.
    """
    unit = intensity_unit(spectrum)
    w = np.sqrt(spectrum.intensities / unit)
    e_minus = np.array([wk * _phases(geometry, k, "left").sum() for k, wk in zip(spectrum.k, w)])
    e_plus = np.array([wk * _phases(geometry, k, "right").sum() for k, wk in zip(spectrum.k, w)])
    return e_minus, e_plus


def classical_intensities(geometry: ChainGeometry, spectrum: PumpSpectrum, include_interference: bool = False):
    """(I_minus, I_plus) / I_unit for particles resting at the trap centres."""
    e_minus, e_plus = classical_output_amplitudes(geometry, spectrum)
    if include_interference:
        return float(abs(e_minus.sum()) ** 2), float(abs(e_plus.sum()) ** 2)
    return float(np.sum(np.abs(e_minus) ** 2)), float(np.sum(np.abs(e_plus) ** 2))


def output_field_operators(geometry: ChainGeometry, spectrum: PumpSpectrum, oscillator: OscillatorParams,
                           space: FockSpace, direction: str, order: int = 2) -> list[np.ndarray]:
    """One linearized field operator per spectral component, in sqrt(I_unit).

    The displacement of particle ``i`` relative to the end particle enters
    to first order as ``i k delta0 (X_i - X_ref)`` and to second order as
    ``-(k delta0)^2/2 (X_i - X_ref)^2`` with ``X = a + a^dagger``.
    """
    if space.n_modes != geometry.n_particles:
        raise ValueError("Fock space and geometry disagree on the number of particles")
    if order not in (0, 1, 2):
        raise ValueError("linearization order must be 0, 1 or 2")
    unit = intensity_unit(spectrum)
    ref = _reference(geometry, direction)
    X = [position_quadrature(space, m) for m in range(space.n_modes)]
    eye = space.identity()
    ops = []
    for k, Ik in zip(spectrum.k, spectrum.intensities):
        kd = k * oscillator.delta0
        E = np.zeros_like(eye)
        for i, ph in enumerate(_phases(geometry, k, direction)):
            # left output measures x_i - x_1, right output x_N - x_i
            rel = X[i] - X[ref] if direction == "left" else X[ref] - X[i]
            term = eye.copy()
            if order >= 1:
                term = term + 1j * kd * rel
            if order >= 2:
                term = term - 0.5 * kd ** 2 * (rel @ rel)
            E += ph * term
        ops.append(np.sqrt(Ik / unit) * E)
    return ops


def output_field_operator(geometry, spectrum, oscillator, space, direction, order: int = 2) -> np.ndarray:
    """Sum of the per-component field operators."""
    return sum(output_field_operators(geometry, spectrum, oscillator, space, direction, order))


def intensity_operator(geometry, spectrum, oscillator, space, direction, order: int = 2) -> np.ndarray:
    """sum_k E_k^dagger E_k: Hermitian and positive semidefinite."""
    ops = output_field_operators(geometry, spectrum, oscillator, space, direction, order)
    return sum(E.conj().T @ E for E in ops)


def _embed_density(rho: DensityMatrix, cutoff: int) -> DensityMatrix:
    space = rho.space
    big = FockSpace(space.n_modes, cutoff)
    idx = np.ravel_multi_index(space.occupation_table.T, big.shape)
    m = np.zeros((big.dimension,) * 2, dtype=complex)
    m[np.ix_(idx, idx)] = rho.matrix
    return DensityMatrix(big, m)


def _intensity_from_ops(ops, state, kind: str) -> float:
    if isinstance(state, FockStateVector):
        psi = state.amplitudes
        if kind == "coherent":
            return float(sum(abs(np.vdot(psi, E @ psi)) ** 2 for E in ops))
        return float(sum(np.linalg.norm(E @ psi) ** 2 for E in ops))
    rho = state.matrix
    if kind == "coherent":
        return float(sum(abs(np.trace(E @ rho)) ** 2 for E in ops))
    return float(sum(np.trace(E @ rho @ E.conj().T).real for E in ops))


def state_dependent_intensity(state, geometry: ChainGeometry, spectrum: PumpSpectrum,
                              oscillator: OscillatorParams, direction: str, order: int = 2,
                              kind: str = "coherent") -> float:
    """Outgoing intensity in units of I_unit for a pure state or density matrix.

    ``kind="coherent"`` (default) squares the field expectation per component,
    ``sum_k |<E_k>|^2``; ``kind="total"`` returns ``sum_k <E_k^dagger E_k>``,
    which also counts the incoherent motional fluctuations.  The state is
    embedded ``order`` levels above its cutoff so the quadratic field terms
    are not clipped by the truncation.
    """
    if kind not in ("coherent", "total"):
        raise ValueError(f"unknown intensity kind {kind!r}")
    if isinstance(state, FockStateVector):
        state = state.embedded(state.space.cutoff + order)
    elif isinstance(state, DensityMatrix):
        state = _embed_density(state, state.space.cutoff + order)
    else:
        raise TypeError("state must be a FockStateVector or DensityMatrix")
    ops = output_field_operators(geometry, spectrum, oscillator, state.space, direction, order)
    return _intensity_from_ops(ops, state, kind)


def intensity_trajectory(states, geometry, spectrum, oscillator, order: int = 2,
                         kind: str = "coherent") -> np.ndarray:
    """Array of (I_minus, I_plus) rows along a sequence of pure states."""
    if not states:
        return np.zeros((0, 2))
    big_space = FockSpace(states[0].space.n_modes, states[0].space.cutoff + order)
    ops = {d: output_field_operators(geometry, spectrum, oscillator, big_space, d, order)
           for d in ("left", "right")}
    rows = []
    for s in states:
        big = s.embedded(big_space.cutoff)
        rows.append([_intensity_from_ops(ops[d], big, kind) for d in ("left", "right")])
    return np.array(rows)


def mirrored(geometry: ChainGeometry) -> ChainGeometry:
    """Positions reflected about the chain midpoint (particle order reversed)."""
    x = geometry.positions
    return ChainGeometry(np.sort(x[0] + x[-1] - x))
