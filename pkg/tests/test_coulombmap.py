import numpy as np
import pytest
from hypothesis import given, strategies as st

from fibersim import presets
from fibersim.coulombmap import (DesignError, TargetCoulombSystem, _target_couplings, build_design_problem,
                                 coulomb_hessian, design_line_spectrum, design_planar_spectrum,
                                 design_report_csv, emulate_and_compare, emulated_couplings,
                                 linearized_coulomb_hamiltonian, linearized_coulomb_mode_matrix, nnls,
                                 scan_frequency_spacing, solve_design)
from fibersim.fockspace import FockSpace
from fibersim.hamiltonian import sector_eigenenergies
from fibersim.model import ChainGeometry

K0 = 2 * np.pi


def test_two_ion_mode_matrix():
    t = TargetCoulombSystem([0.0, 1.7], charge_scale=0.03, delta0_prime=0.8)
    M = linearized_coulomb_mode_matrix(t).matrix
    c = t.coupling_constant / 1.7 ** 3
    assert t.coupling_constant == pytest.approx(2 * 0.03 * 0.8 ** 2)
    assert M[0, 1] == pytest.approx(-c)
    assert M[0, 0] == pytest.approx(1 + c)


def test_triangle_has_degenerate_pair():
    M = linearized_coulomb_mode_matrix(presets.triangle_target())
    w = np.sort(M.eigenvalues)
    assert np.min(np.diff(w)) < 1e-12


@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 4), st.integers(1, 3))
def test_hessian_symmetric_and_translation_invariant(seed, n, nd):
    r = np.random.default_rng(seed)
    pos = r.uniform(0, 3, (n, nd)) + np.arange(n)[:, None] * 0.5
    K = coulomb_hessian(TargetCoulombSystem(pos))
    assert np.allclose(K, K.T)
    for a in range(nd):
        shift = np.zeros(n * nd)
        shift[a * n:(a + 1) * n] = 1
        assert np.allclose(K @ shift, 0, atol=1e-9 * np.abs(K).max())


def test_fock_hamiltonian_matches_mode_matrix():
    t = TargetCoulombSystem([0.0, 1.0, 2.5])
    H, M = linearized_coulomb_hamiltonian(t, FockSpace(3, 2))
    space = FockSpace(3, 2)
    from fibersim.hamiltonian import fock_sector_block
    assert np.allclose(np.linalg.eigvalsh(fock_sector_block(H, space, 2)), sector_eigenenergies(M, 2))


def test_line_design_is_exact():
    res = design_line_spectrum(presets.line3_target(), presets.line3_fiber(), K0, presets.LINE_DK)
    assert res.problem.A.shape == (4, 4)
    assert res.method == "exact" and res.residual < 1e-10 and res.feasible
    cmp = emulate_and_compare(presets.line3_target(), res.problem.fiber, res.ratios, res.problem.wavenumbers)
    assert cmp.max_relative_deviation(1) < 1e-8 and cmp.max_relative_deviation(2) < 1e-8


def test_two_ion_design():
    t = TargetCoulombSystem([0.0, 1.0])
    res = design_line_spectrum(t, ChainGeometry([0, 0.375]))
    assert res.problem.A.shape == (2, 2) and res.residual < 1e-12
    cmp = emulate_and_compare(t, res.problem.fiber, res.ratios, res.problem.wavenumbers, [1.0, 2.0])
    assert cmp.max_absolute_deviation(1) < 1e-12


@pytest.mark.parametrize("mask,table", [((), presets.TRIANGLE_TABLE),
                                        (((0, 2),), presets.TRIANGLE_MASKED_TABLE)])
def test_triangle_design_against_reference(mask, table):
    t = presets.triangle_target(mask)
    res = design_planar_spectrum(t, presets.triangle_fiber(), K0, presets.TRIANGLE_DK, presets.TRIANGLE_NFREQ)
    assert res.feasible and res.residual < 1e-8
    assert np.max(np.abs(res.ratios / res.ratios.max() - table / table.max())) < 0.02
    cmp = emulate_and_compare(t, res.problem.fiber, res.ratios, res.problem.wavenumbers, sectors=(1,))
    assert cmp.max_relative_deviation(1) < 1e-2


def test_masked_pair_is_switched_off():
    t = presets.triangle_target(((0, 2),))
    res = design_planar_spectrum(t, presets.triangle_fiber())
    g = emulated_couplings(res)
    # x and y slots of ions 0 and 2
    for p, q in ((0, 2), (3, 5), (0, 5), (2, 3)):
        assert abs(g[p, q]) < 1e-8


def test_line_fed_as_planar_target_decouples():
    line = TargetCoulombSystem([0.0, 1.0, 2.0])
    flat = TargetCoulombSystem([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    T, T1 = _target_couplings(flat), _target_couplings(line)
    assert np.allclose(T[:3, 3:], 0)
    assert np.allclose(T[:3, :3], T1)
    assert np.allclose(T[3:, 3:], -T1 / 2)


def test_zero_charge_gives_bare_levels():
    t = TargetCoulombSystem([0.0, 1.0, 2.0], charge_scale=0.0)
    assert np.allclose(linearized_coulomb_mode_matrix(t).matrix, np.eye(3))


def test_inconsistent_fiber_is_rejected():
    equal = ChainGeometry.from_spacings([0.3] * 5)
    with pytest.raises(DesignError):
        build_design_problem(presets.triangle_target(), equal, K0, 0.33 * K0, 14)
    with pytest.raises(DesignError):
        design_line_spectrum(presets.triangle_target())
    with pytest.raises(DesignError):
        build_design_problem(presets.line3_target(), presets.triangle_fiber(), K0, 0.7 * K0, 4)


def test_negative_design_refuses_spectrum():
    res = design_line_spectrum(presets.line3_target(), presets.line3_fiber(), K0, presets.LINE_DK)
    res.negative = np.array([True, False, False, False])
    with pytest.raises(DesignError):
        res.spectrum()


def test_report_csv():
    res = design_line_spectrum(presets.line3_target(), presets.line3_fiber(), K0, presets.LINE_DK)
    lines = design_report_csv(res).splitlines()
    assert lines[0] == "l,k_over_k0,omega_over_omegatilde,intensity_positive"
    assert len(lines) == 5 and lines[2].startswith("1,1.7,")
    sp = res.spectrum()
    assert np.allclose(sp.k / K0, [1, 1.7, 2.4, 3.1])


@given(st.integers(0, 2 ** 31 - 1), st.integers(3, 12), st.integers(3, 12))
def test_nnls_kkt_conditions(seed, m, n):
    r = np.random.default_rng(seed)
    A = r.normal(size=(m, n))
    b = r.normal(size=m)
    x, res = nnls(A, b)
    w = A.T @ (b - A @ x)
    assert np.all(x >= 0)
    assert np.all(w <= 1e-8)
    assert np.allclose(w[x > 1e-10], 0, atol=1e-8)
    assert res == pytest.approx(np.linalg.norm(A @ x - b))


def test_solve_design_nonnegative_fallback():
    res = design_line_spectrum(presets.line3_target(), presets.line3_fiber(), K0, presets.LINE_DK)
    p = res.problem
    p.b = -p.b
    out = solve_design(p, nonnegative=True)
    assert out.method == "exact+nnls" and np.all(out.ratios >= 0)


def test_frequency_scan_finds_feasible_line_design():
    res = scan_frequency_spacing(presets.line3_target(), presets.line3_fiber())
    assert res.feasible and res.residual < 1e-8
