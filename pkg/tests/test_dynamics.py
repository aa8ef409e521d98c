import numpy as np
import pytest
from hypothesis import given, strategies as st

from fibersim.dynamics import (IDEAL_GATES, ISWAP, SQISW, NumericalGuardError, Propagator, beamsplitter_hamiltonian,
                               coherent_closed_form, coherent_evolution_crosscheck, entanglement_trace, evolve,
                               evolve_many, extract_two_qubit_gate, find_population_crossings, gate_fidelity,
                               gate_time, hub_population, mode_populations, pair_isolation,
                               single_excitation_evolve)
from fibersim.fockspace import FockSpace, FockStateVector, number_operator
from fibersim.hamiltonian import ModeSpaceHamiltonian, quadratic_fock_operator

from conftest import random_hermitian


def test_zero_time_is_identity(rng):
    H = random_hermitian(rng, 6)
    assert np.allclose(Propagator(H)(0.0), np.eye(6))


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        Propagator(np.array([[0, 1], [0, 0]]))


def test_exchange_populations():
    space = FockSpace(2, 1)
    g = 0.3
    H = beamsplitter_hamiltonian(space, g)
    for theta in (0.2, 0.9, 2.0):
        psi = evolve(space.basis_state((0, 1)), H, theta / g)
        assert np.allclose(psi.populations(), [np.sin(theta) ** 2, np.cos(theta) ** 2])


@pytest.mark.parametrize("name", ["iSWAP", "SQiSW"])
def test_gates_at_design_angles(name):
    space = FockSpace(2, 1)
    g = -0.07
    H = quadratic_fock_operator(np.array([[1.0, g], [g, 1.0]]), space)
    V, theta = IDEAL_GATES[name]
    t = gate_time(g, theta)
    # negative g needs the angle taken modulo the exchange period
    U, rep = extract_two_qubit_gate(H, space, (0, 1), t, name)
    assert rep.max_deviation < 1e-9
    assert rep.fidelity == pytest.approx(1.0)


def test_positive_coupling_gate_matrices():
    space = FockSpace(2, 1)
    H = beamsplitter_hamiltonian(space, 0.25)
    U, _ = extract_two_qubit_gate(H, space, (0, 1), (np.pi / 2) / 0.25)
    assert np.max(np.abs(U - ISWAP)) < 1e-9
    U, _ = extract_two_qubit_gate(H, space, (0, 1), (np.pi / 4) / 0.25)
    assert np.max(np.abs(U - SQISW)) < 1e-9


def test_full_period_is_identity_up_to_sign():
    space = FockSpace(2, 1)
    H = beamsplitter_hamiltonian(space, 0.5)
    U, _ = extract_two_qubit_gate(H, space, (0, 1), np.pi / 0.5)
    assert np.allclose(np.abs(U[1:3, 1:3]), np.eye(2))


def test_leakage_guard_for_bosonic_modes():
    space = FockSpace(2, 2)
    H = beamsplitter_hamiltonian(space, 0.5)
    with pytest.raises(NumericalGuardError):
        extract_two_qubit_gate(H, space, (0, 1), (np.pi / 4) / 0.5)


def test_isolation_guard():
    space = FockSpace(3, 1)
    M = np.eye(3)
    M[0, 1] = M[1, 0] = 0.2
    M[1, 2] = M[2, 1] = 0.01
    H = quadratic_fock_operator(M, space)
    assert pair_isolation(H, space, (0, 1)) == pytest.approx(0.01)
    with pytest.raises(NumericalGuardError):
        extract_two_qubit_gate(H, space, (0, 1), 1.0)
    _, rep = extract_two_qubit_gate(H, space, (0, 1), 1.0, isolation_tol=0.02, leakage_tol=1e-3)
    assert 0 < rep.leakage < 1e-3


def test_gate_time_and_fidelity():
    assert gate_time(0.5, np.pi / 2) == pytest.approx(np.pi)
    assert gate_time(0.5, np.pi / 2, halve_angle=True) == pytest.approx(np.pi / 2)
    assert 0 <= gate_time(-0.5, np.pi / 2) < 2 * np.pi / 0.5
    with pytest.raises(ValueError):
        gate_time(0.0, 1.0)
    assert gate_fidelity(1j * ISWAP, ISWAP) == pytest.approx(1.0)


def test_closed_form_examples():
    a, b = 0.7, -0.2 + 0.1j
    assert coherent_closed_form(a, b, 0.3, 0.0) == (a, b)
    x, y = coherent_closed_form(a, b, 1.0, np.pi / 2)
    assert x == pytest.approx(1j * b) and y == pytest.approx(1j * a)
    g, t = 0.4, 1.3
    x, y = coherent_closed_form(a, -a, g, t)
    assert x == pytest.approx(a * np.exp(-1j * g * t))
    assert y == pytest.approx(-a * np.exp(-1j * g * t))


@pytest.mark.parametrize("alpha,beta,gt", [(0, 0, 0.5), (1, -1, 0.7), (1, 1, np.pi)])
def test_coherent_crosscheck(alpha, beta, gt):
    fid, loss = coherent_evolution_crosscheck(alpha, beta, 1.0, gt)
    assert fid > 1 - 1e-6 and loss < 1e-6


def test_coherent_crosscheck_guard():
    with pytest.raises(NumericalGuardError):
        coherent_evolution_crosscheck(1, 1, 1.0, 0.3, n_max=8)


def test_star_hub_population():
    g = 0.15
    M = np.zeros((3, 3))
    M[0, 2] = M[2, 0] = M[1, 2] = M[2, 1] = g
    t = np.linspace(0, 30, 50)
    assert np.allclose(hub_population(ModeSpaceHamiltonian(M), 2, t), np.cos(np.sqrt(2) * g * t) ** 2)
    roots = find_population_crossings(ModeSpaceHamiltonian(M), 2, 0.0, 20.0)
    assert roots[0] == pytest.approx(np.pi / (2 * np.sqrt(2) * g), abs=1e-7)


def test_diagonal_mode_matrix_gives_phases():
    M = ModeSpaceHamiltonian(np.diag([1.0, 2.0]))
    out = single_excitation_evolve(M, [1, 1], 0.5)
    assert np.allclose(out, np.exp(-1j * np.array([1.0, 2.0]) * 0.5))


def test_mode_space_and_fock_evolution_agree(rng):
    M = random_hermitian(rng, 3).real
    M = (M + M.T) / 2
    space = FockSpace(3, 1)
    H = quadratic_fock_operator(M, space)
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    c /= np.linalg.norm(c)
    occ = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    psi = FockStateVector.from_dict(space, dict(zip(occ, c)))
    out = evolve(psi, H, 2.7)
    ref = single_excitation_evolve(ModeSpaceHamiltonian(M), c, 2.7)
    assert np.allclose([out.amplitudes[space.index(o)] for o in occ], ref, atol=1e-10)


@given(st.integers(0, 2 ** 31 - 1), st.floats(0.0, 50.0))
def test_conservation_laws(seed, t):
    r = np.random.default_rng(seed)
    M = r.normal(size=(3, 3))
    M = (M + M.T) / 2
    space = FockSpace(3, 2)
    H = quadratic_fock_operator(M, space)
    U = Propagator(H)(t)
    assert np.max(np.abs(U.conj().T @ U - np.eye(space.dimension))) < 1e-9
    v = r.normal(size=space.dimension) + 1j * r.normal(size=space.dimension)
    psi = FockStateVector(space, v).normalized()
    out = evolve(psi, H, t)
    N = number_operator(space)
    assert abs(out.expectation(N) - psi.expectation(N)) < 1e-9
    assert abs(out.expectation(H) - psi.expectation(H)) < 1e-9 * max(1, np.abs(M).max())


def test_entanglement_trace_shape_and_guard():
    space = FockSpace(2, 1)
    H = beamsplitter_hamiltonian(space, 0.5)
    S = entanglement_trace(space.basis_state((1, 0)), H, [0, np.pi / 2], [(0,), (1,)])
    assert S.shape == (2, 2)
    assert np.allclose(S[1], np.log(2))
    big = FockSpace(2, 2)
    with pytest.raises(NumericalGuardError):
        entanglement_trace(big.basis_state((1, 1)), beamsplitter_hamiltonian(big, 0.5), [0.5], [(0,)],
                           leakage_guard=1e-6)
    pops = mode_populations(evolve_many(space.basis_state((1, 0)), H, [0, np.pi]))
    assert np.allclose(pops[1], [0, 1])
