"""Time evolution, two-qubit gate extraction and entanglement tracking.

All Hamiltonians here are time independent, so propagators come from a
single Hermitian eigendecomposition rather than a step integrator.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fockspace import (FockSpace, FockStateVector, coherent_state, ladder_operator,
                        partial_trace, von_neumann_entropy)
from .hamiltonian import ModeSpaceHamiltonian, quadratic_fock_operator, single_excitation_block


class NumericalGuardError(RuntimeError):
    """A truncation-leakage or isolation guard was tripped."""


ISWAP = np.array([[1, 0, 0, 0],
                  [0, 0, -1j, 0],
                  [0, -1j, 0, 0],
                  [0, 0, 0, 1]], dtype=complex)

SQISW = np.array([[1, 0, 0, 0],
                  [0, 1 / np.sqrt(2), -1j / np.sqrt(2), 0],
                  [0, -1j / np.sqrt(2), 1 / np.sqrt(2), 0],
                  [0, 0, 0, 1]], dtype=complex)

IDEAL_GATES = {"iSWAP": (ISWAP, np.pi / 2), "SQiSW": (SQISW, np.pi / 4)}


def _check_hermitian(H, tol=1e-9):
    H = np.asarray(H)
    dev = np.max(np.abs(H - H.conj().T), initial=0.0)
    if dev > tol:
        raise ValueError(f"Hamiltonian is not Hermitian (max asymmetry {dev:.3g})")
    return H


class Propagator:
    """U(t) = exp(-i H t) through the eigendecomposition of H."""

    def __init__(self, H):
        self.H = _check_hermitian(H)

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.H)

    def __call__(self, t: float) -> np.ndarray:
        w, v = self._eig
        return (v * np.exp(-1j * w * t)) @ v.conj().T

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        w, v = self._eig
        return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))

    def trajectory(self, psi: np.ndarray, times) -> np.ndarray:
        """Rows are the evolved amplitude vectors at each time."""
        w, v = self._eig
        c = v.conj().T @ psi
        phases = np.exp(-1j * np.outer(times, w))
        return (phases * c) @ v.T


def evolve(state: FockStateVector, H, t: float) -> FockStateVector:
    H = np.asarray(H)
    if H.shape != (state.space.dimension,) * 2:
        raise ValueError("Hamiltonian does not act on the state's space")
    return FockStateVector(state.space, Propagator(H).apply(state.amplitudes, t))


def evolve_many(state: FockStateVector, H, times) -> list[FockStateVector]:
    rows = Propagator(H).trajectory(state.amplitudes, np.asarray(times, dtype=float))
    return [FockStateVector(state.space, r) for r in rows]


def single_excitation_evolve(M: ModeSpaceHamiltonian, amplitudes, t: float) -> np.ndarray:
    return M.propagator(t) @ np.asarray(amplitudes, dtype=complex)


def gate_time(g: float, theta: float, halve_angle: bool = False) -> float:
    """Smallest t >= 0 with g*t = theta (mod 2*pi).

    ``halve_angle`` halves theta first, which gives the gate times of the
    cos(2gt) reading of the exchange propagator.
    """
    if g == 0:
        raise ValueError("pair is uncoupled")
    if halve_angle:
        theta = theta / 2
    t = theta / g
    period = 2 * np.pi / abs(g)
    return float(t % period)


@dataclass
class GateReport:
    name: str
    pair: tuple[int, int]
    time: float
    max_deviation: float
    fidelity: float
    leakage: float


def _qubit_indices(space: FockSpace, pair, rest_occupation=0):
    i, j = pair
    idx = []
    for ni in (0, 1):
        for nj in (0, 1):
            occ = [rest_occupation] * space.n_modes
            occ[i], occ[j] = ni, nj
            idx.append(space.index(occ))
    return idx


def pair_isolation(H, space: FockSpace, pair) -> float:
    """Largest single-excitation coupling between the pair and any other mode."""
    block = single_excitation_block(np.asarray(H), space)
    others = [m for m in range(space.n_modes) if m not in pair]
    if not others:
        return 0.0
    return float(np.max(np.abs(block[np.ix_(list(pair), others)])))


def gate_fidelity(U: np.ndarray, V: np.ndarray) -> float:
    """Global-phase-insensitive overlap |tr(V^dagger U)/d|^2."""
    d = V.shape[0]
    return float(min(1.0, abs(np.trace(V.conj().T @ U) / d) ** 2))


def extract_two_qubit_gate(H, space: FockSpace, pair, t: float, ideal: str | np.ndarray | None = None,
                           frame: str = "interaction", isolation_tol: float = 1e-6,
                           leakage_tol: float = 1e-6):
    """Restrict U(t) to span{|00>,|01>,|10>,|11>} of ``pair``, others in vacuum.

    ``frame="interaction"`` removes the free evolution exp(-i w~_m n_m t) of
    the two modes, so an ideal resonant exchange maps onto the textbook gate
    matrices.  Returns the 4x4 block and a :class:`GateReport`.
    """
    H = _check_hermitian(H)
    pair = tuple(int(p) for p in pair)
    if len(set(pair)) != 2:
        raise ValueError("pair must name two distinct modes")
    iso = pair_isolation(H, space, pair)
    if iso > isolation_tol:
        raise NumericalGuardError(f"pair {pair} couples to other modes with strength {iso:.3g}")

    idx = _qubit_indices(space, pair)
    U = Propagator(H)(t)
    block = U[np.ix_(idx, idx)]
    leakage = float(max(0.0, 1 - np.min(np.sum(np.abs(block) ** 2, axis=0))))
    if leakage > leakage_tol:
        raise NumericalGuardError(f"qubit subspace leaks {leakage:.3g} (use cutoff 1 for hard-core qubits)")

    if frame == "interaction":
        w = np.real(np.diag(single_excitation_block(H, space)))[list(pair)]
        vac = np.real(H[idx[0], idx[0]])
        n = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
        free = vac + n @ (w - vac)
        block = np.exp(1j * free * t)[:, None] * block
    elif frame != "lab":
        raise ValueError(f"unknown frame {frame!r}")

    if ideal is None:
        name, V = "custom", None
    elif isinstance(ideal, str):
        name, V = ideal, IDEAL_GATES[ideal][0]
    else:
        name, V = "custom", np.asarray(ideal)
    if V is None:
        dev, fid = float("nan"), float("nan")
    else:
        dev = float(np.max(np.abs(block - V)))
        fid = gate_fidelity(block, V)
    return block, GateReport(name, pair, float(t), dev, fid, leakage)


def beamsplitter_hamiltonian(space: FockSpace, g: float, pair=(0, 1)) -> np.ndarray:
    """g (a_i^dagger a_j + a_j^dagger a_i) on ``space``."""
    M = np.zeros((space.n_modes,) * 2)
    i, j = pair
    M[i, j] = M[j, i] = g
    return quadratic_fock_operator(M, space)


def coherent_closed_form(alpha: complex, alpha_prime: complex, g: float, t: float):
    """Amplitudes (a cos gt + i a' sin gt, a' cos gt + i a sin gt)."""
    c, s = np.cos(g * t), np.sin(g * t)
    return complex(alpha * c + 1j * alpha_prime * s), complex(alpha_prime * c + 1j * alpha * s)


def coherent_evolution_crosscheck(alpha: complex, alpha_prime: complex, g: float, t: float,
                                  n_max: int = 12, guard: float = 1e-6):
    """Fidelity between the closed-form pair state and truncated numerics.

    The truncated state is propagated with exp(+i g t (a1^dag a2 + a1 a2^dag)),
    the operator whose action the closed form describes.  Returns
    ``(fidelity, truncation_loss)`` where the loss is the larger of the
    initial truncation loss and the weight left on the top Fock level.
    """
    if max(abs(alpha), abs(alpha_prime)) > 1.5 or n_max < 12:
        raise NumericalGuardError("coherent cross-check needs |alpha| <= 1.5 and n_max >= 12")
    space = FockSpace(2, n_max)
    psi0, loss0 = coherent_state(space, [alpha, alpha_prime], return_loss=True)
    H = beamsplitter_hamiltonian(space, g)
    psi_t = evolve(psi0, -H, t)
    b1, b2 = coherent_closed_form(alpha, alpha_prime, g, t)
    target, loss1 = coherent_state(space, [b1, b2], return_loss=True)
    loss = max(loss0, loss1, psi_t.top_level_weight())
    if loss > guard:
        raise NumericalGuardError(f"truncation loss {loss:.3g} exceeds guard {guard:g}")
    return float(abs(target.overlap(psi_t)) ** 2), float(loss)


def entanglement_trace(initial: FockStateVector, H, times, bipartitions, leakage_guard: float | None = None):
    """Entropies S(t) of the reduced state on each keep-set.

    Returns an array of shape (len(times), len(bipartitions)).
    """
    states = evolve_many(initial, H, times)
    out = np.empty((len(states), len(bipartitions)))
    for r, psi in enumerate(states):
        if leakage_guard is not None and psi.top_level_weight() > leakage_guard and initial.space.cutoff > 1:
            raise NumericalGuardError("state reaches the Fock cutoff")
        for c, keep in enumerate(bipartitions):
            out[r, c] = von_neumann_entropy(partial_trace(psi, keep))
    return out


def mode_populations(states) -> np.ndarray:
    return np.array([s.populations() for s in states])


def hub_population(M: ModeSpaceHamiltonian, hub: int, t):
    """Population left on ``hub`` after a single excitation starts there."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    w, v = M.eigh
    amp = np.exp(-1j * np.outer(t, w)) @ (np.abs(v[hub]) ** 2)
    return np.abs(amp) ** 2


def find_population_crossings(M: ModeSpaceHamiltonian, hub: int, level: float, t_max: float,
                              n_grid: int = 4000) -> np.ndarray:
    """Times in (0, t_max] where the hub population equals ``level``.

    Roots are bracketed on a grid and polished with Brent's method; grid
    points sitting on a tangential touch (e.g. level 0 or 1) are refined with
    a bounded minimization of the distance to the level.
    """
    from scipy.optimize import brentq, minimize_scalar

    ts = np.linspace(0, t_max, n_grid + 1)
    f = hub_population(M, hub, ts) - level
    roots = []
    for a, b, fa, fb in zip(ts[:-1], ts[1:], f[:-1], f[1:]):
        if fa == 0 and a > 0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(lambda x: hub_population(M, hub, x)[0] - level, a, b, xtol=1e-14))
    # tangential touches: local minima of |f| that do not change sign
    af = np.abs(f)
    for k in range(1, n_grid):
        if af[k] <= af[k - 1] and af[k] <= af[k + 1] and f[k - 1] * f[k + 1] > 0 and af[k] < 1e-2:
            res = minimize_scalar(lambda x: abs(hub_population(M, hub, x)[0] - level),
                                  bounds=(ts[k - 1], ts[k + 1]), method="bounded",
                                  options={"xatol": 1e-12})
            if res.fun < 1e-8:
                roots.append(res.x)
    roots = np.sort(np.array(roots))
    if roots.size:
        keep = np.concatenate([[True], np.diff(roots) > 1e-9 * max(1.0, t_max)])
        roots = roots[keep]
    return roots


def number_expectation(state: FockStateVector) -> float:
    return float(np.sum(state.populations()))


def lowering_expectation(state: FockStateVector, mode: int) -> complex:
    return state.expectation(ladder_operator(state.space, mode))
