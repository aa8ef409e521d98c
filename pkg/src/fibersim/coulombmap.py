"""Emulating linearized Coulomb crystals with a fiber-coupled chain.

A target crystal of ``N`` ions in ``N_D`` dimensions is linearized around
its equilibrium sites.  Each Cartesian oscillator becomes one trap slot on
the fiber: slots ``0..N-1`` carry the x motion, ``N..2N-1`` the y motion,
and so on.  Matching the single-excitation coupling of every slot pair
gives one sinusoidal equation per pair in the unknown pump strengths
``Omega_l / Omega_ref`` at wavenumbers ``k_l = k0 + l * dk``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .fockspace import FockSpace
from .hamiltonian import (ModeSpaceHamiltonian, mode_matrix_from_couplings, quadratic_fock_operator,
                          sector_eigenenergies)
from .model import ChainGeometry, PumpSpectrum, UnitSystem


class DesignError(ValueError):
    """The design equations are singular, inconsistent or infeasible."""


@dataclass(frozen=True)
class TargetCoulombSystem:
    """Ions at fixed sites interacting through ``charge_scale / r``.

    ``charge_scale`` is q^2 / (4 pi eps0 hbar) in units of frequency times
    length cubed (length in the units of ``ion_positions``).  ``mask[i][j]``
    False switches the pair off; the diagonal is ignored.
    """

    ion_positions: np.ndarray
    charge_scale: float = 0.025
    omega_T_prime: float = 1.0
    delta0_prime: float = 1.0
    mask: np.ndarray | None = None

    def __post_init__(self):
        pos = np.array(self.ion_positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.ndim != 2 or pos.shape[1] not in (1, 2, 3):
            raise ValueError("ion positions must be an (N, N_D) array with N_D in 1..3")
        n = pos.shape[0]
        if n < 2:
            raise ValueError("need at least two ions")
        r = np.linalg.norm(pos[:, None] - pos[None], axis=-1)
        if np.any(r[np.triu_indices(n, 1)] <= 0):
            raise ValueError("ion positions must be distinct")
        mask = np.ones((n, n), bool) if self.mask is None else np.array(self.mask, dtype=bool)
        if mask.shape != (n, n) or np.any(mask != mask.T):
            raise ValueError("interaction mask must be a symmetric N x N matrix")
        object.__setattr__(self, "ion_positions", pos)
        object.__setattr__(self, "mask", mask)

    @property
    def n_ions(self) -> int:
        return self.ion_positions.shape[0]

    @property
    def n_dims(self) -> int:
        return self.ion_positions.shape[1]

    @property
    def n_slots(self) -> int:
        return self.n_ions * self.n_dims

    @property
    def reference_distance(self) -> float:
        return float(np.linalg.norm(self.ion_positions[1] - self.ion_positions[0]))

    @property
    def coupling_constant(self) -> float:
        """q^2 delta0'^2 / (2 pi eps0 hbar)."""
        return 2 * self.charge_scale * self.delta0_prime ** 2

    @property
    def reference_coupling(self) -> float:
        """Omega_ref / omega_T of the emulating chain (= C / (D^3 omega_T'))."""
        return self.coupling_constant / (self.reference_distance ** 3 * self.omega_T_prime)

    def scaled(self, factor: float) -> "TargetCoulombSystem":
        return TargetCoulombSystem(self.ion_positions * factor, self.charge_scale, self.omega_T_prime,
                                   self.delta0_prime, self.mask)

    def without_pairs(self, pairs) -> "TargetCoulombSystem":
        mask = self.mask.copy()
        for i, j in pairs:
            mask[i, j] = mask[j, i] = False
        return TargetCoulombSystem(self.ion_positions, self.charge_scale, self.omega_T_prime,
                                   self.delta0_prime, mask)


def _slot(ion: int, axis: int, n_ions: int) -> int:
    return axis * n_ions + ion


def coulomb_hessian(target: TargetCoulombSystem) -> np.ndarray:
    """Hessian of sum_{i<j} 1/|r_i - r_j| in slot ordering, masked pairs dropped."""
    n, nd = target.n_ions, target.n_dims
    K = np.zeros((n * nd, n * nd))
    for i, j in itertools.combinations(range(n), 2):
        if not target.mask[i, j]:
            continue
        u = target.ion_positions[j] - target.ion_positions[i]
        r = np.linalg.norm(u)
        block = (3 * np.outer(u, u) - r ** 2 * np.eye(nd)) / r ** 5
        for a in range(nd):
            for b in range(nd):
                si, sj = _slot(i, a, n), _slot(j, b, n)
                K[si, _slot(j, b, n)] -= block[a, b]
                K[sj, _slot(i, a, n)] -= block[a, b]
                K[si, _slot(i, b, n)] += block[a, b]
                K[sj, _slot(j, a, n)] += block[a, b]
    return K


def linearized_coulomb_mode_matrix(target: TargetCoulombSystem) -> ModeSpaceHamiltonian:
    """Number-conserving mode matrix omega_T' + (C/2) * Hessian, in slot order.

    For two ions on a line this gives off-diagonal ``-C / D^3`` and the
    matching diagonal shift ``+C / D^3``.
    """
    K = coulomb_hessian(target)
    M = target.omega_T_prime * np.eye(K.shape[0]) + 0.5 * target.coupling_constant * K
    return ModeSpaceHamiltonian(M)


def linearized_coulomb_hamiltonian(target: TargetCoulombSystem, space: FockSpace):
    """Fock operator and mode matrix of the linearized number-conserving part."""
    M = linearized_coulomb_mode_matrix(target)
    if space.n_modes != M.n_modes:
        raise ValueError(f"space has {space.n_modes} modes, target needs {M.n_modes}")
    return quadratic_fock_operator(M.matrix, space), M


def coulomb_displacement_terms(target: TargetCoulombSystem) -> np.ndarray:
    """Coefficients c_ij (i<j) of (X_j - X_i) in the 1D counter-rotating part.

    Returned in units of charge_scale * delta0', as ``-1 / D_ij^2``.
    """
    if target.n_dims != 1:
        raise ValueError("displacement terms are only tabulated for 1D targets")
    x = target.ion_positions[:, 0]
    n = x.size
    c = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        if target.mask[i, j]:
            c[i, j] = -1.0 / (x[j] - x[i]) ** 2
    return c


def frequency_grid(k0: float, dk: float, n_freq: int) -> np.ndarray:
    return k0 + dk * np.arange(n_freq)


@dataclass
class DesignProblem:
    """Linear design system ``A @ ratios = b`` with ``ratios = Omega_l / Omega_ref``."""

    fiber: ChainGeometry
    wavenumbers: np.ndarray
    A: np.ndarray
    b: np.ndarray
    row_labels: list = field(default_factory=list)
    reference_coupling: float = 1.0

    @property
    def shape(self):
        return self.A.shape


@dataclass
class DesignResult:
    problem: DesignProblem
    ratios: np.ndarray
    residual: float
    method: str
    negative: np.ndarray

    @property
    def feasible(self) -> bool:
        return not self.negative.any()

    def spectrum(self, reference_coupling: float | None = None) -> PumpSpectrum:
        """Pump spectrum with Omega_l = ratio_l * Omega_ref (omega_T units)."""
        if not self.feasible:
            raise DesignError(f"negative pump strengths at components {np.flatnonzero(self.negative).tolist()}")
        scale = self.problem.reference_coupling if reference_coupling is None else reference_coupling
        return PumpSpectrum(self.problem.wavenumbers, np.clip(self.ratios, 0, None) * scale)

    def report_rows(self):
        k0 = self.problem.wavenumbers[0]
        return [(l, float(k / k0), float(r), bool(r >= 0))
                for l, (k, r) in enumerate(zip(self.problem.wavenumbers, self.ratios))]


def _target_couplings(target: TargetCoulombSystem) -> np.ndarray:
    """Normalized slot couplings T_pq = M_pq / Omega_ref (off-diagonal)."""
    M = linearized_coulomb_mode_matrix(target).matrix
    T = (M - np.diag(np.diag(M))) / (target.reference_coupling * target.omega_T_prime)
    return T


def check_fiber_distances(fiber: ChainGeometry, T: np.ndarray, decimals: int = 9):
    """Slot pairs sharing a fiber distance must ask for the same coupling."""
    d = fiber.distances()
    seen: dict = {}
    for p, q in itertools.combinations(range(fiber.n_particles), 2):
        key = round(float(d[p, q]), decimals)
        val = T[p, q]
        if key in seen and not np.isclose(seen[key][1], val, rtol=1e-9, atol=1e-12):
            raise DesignError(f"slot pairs {seen[key][0]} and {(p, q)} share fiber distance {key} "
                              f"but need couplings {seen[key][1]:.6g} and {val:.6g}")
        seen.setdefault(key, ((p, q), val))


def _dedupe(A, b, labels, decimals=12):
    keep, seen = [], set()
    for r in range(A.shape[0]):
        key = tuple(np.round(np.append(A[r], b[r]), decimals))
        if key not in seen:
            seen.add(key)
            keep.append(r)
    return A[keep], b[keep], [labels[r] for r in keep]


def build_design_problem(target: TargetCoulombSystem, fiber: ChainGeometry, k0: float, dk: float,
                         n_freq: int, displacement_rows: bool | None = None,
                         displacement_scale: float = 1.0, dedupe: bool = True) -> DesignProblem:
    """Collect one coupling row per fiber slot pair (plus optional cos rows).

    Coupling rows read ``sum_l r_l sin(k_l d_pq) = T_pq``.  Displacement rows
    (1D targets only, on by default there) read
    ``-sum_l r_l (k0/k_l) cos(k_l d_ij) = (s/2) (D/D_ij)^2`` with
    ``s = displacement_scale = k0 * D * delta0 / delta0'``.
    """
    if fiber.n_particles != target.n_slots:
        raise DesignError(f"fiber has {fiber.n_particles} traps but target needs {target.n_slots} slots")
    if displacement_rows is None:
        displacement_rows = target.n_dims == 1
    if displacement_rows and target.n_dims != 1:
        raise DesignError("displacement rows are only defined for 1D targets")
    ks = frequency_grid(k0, dk, n_freq)
    if np.any(ks <= 0):
        raise DesignError("frequency grid reaches nonpositive wavenumbers")
    T = _target_couplings(target)
    check_fiber_distances(fiber, T)
    d = fiber.distances()
    rows, rhs, labels = [], [], []
    for p, q in itertools.combinations(range(fiber.n_particles), 2):
        rows.append(np.sin(ks * d[p, q]))
        rhs.append(T[p, q])
        labels.append(("coupling", p, q))
    if displacement_rows:
        x = target.ion_positions[:, 0]
        D = target.reference_distance
        for i, j in itertools.combinations(range(target.n_ions), 2):
            Dij = abs(x[j] - x[i])
            val = 0.5 * displacement_scale * (D / Dij) ** 2 if target.mask[i, j] else 0.0
            rows.append(-(k0 / ks) * np.cos(ks * d[i, j]))
            rhs.append(val)
            labels.append(("displacement", i, j))
    A, b = np.array(rows), np.array(rhs)
    if dedupe:
        A, b, labels = _dedupe(A, b, labels)
    return DesignProblem(fiber, ks, A, b, labels, target.reference_coupling)


def nnls(A: np.ndarray, b: np.ndarray):
    """Nonnegative least squares; returns ``(x, residual_norm)``."""
    try:
        x, _ = optimize.nnls(np.asarray(A, dtype=float), np.asarray(b, dtype=float))
    except RuntimeError as exc:
        raise DesignError("nonnegative least squares did not converge") from exc
    return x, float(np.linalg.norm(A @ x - b))


def solve_design(problem: DesignProblem, nonnegative: bool = True, rcond: float | None = None) -> DesignResult:
    """Exact solve for square systems, least squares otherwise.

    When the unconstrained answer has negative strengths and ``nonnegative``
    is set, the system is re-solved under x >= 0.
    """
    A, b = problem.A, problem.b
    if A.shape[0] == A.shape[1]:
        try:
            x = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise DesignError("design system is singular; change the frequency grid") from exc
        if np.linalg.cond(A) > 1e14:
            raise DesignError("design system is numerically singular; change the frequency grid")
        method = "exact"
    else:
        x = np.linalg.lstsq(A, b, rcond=rcond)[0]
        method = "lstsq"
    if nonnegative and np.any(x < 0):
        x, _ = nnls(A, b)
        method += "+nnls"
    res = float(np.max(np.abs(A @ x - b)))
    return DesignResult(problem, x, res, method, x < 0)


def design_line_spectrum(target: TargetCoulombSystem, fiber: ChainGeometry | None = None,
                         k0: float = 2 * np.pi, dk: float | None = None, n_freq: int | None = None,
                         displacement_scale: float = 1.0, nonnegative: bool = False) -> DesignResult:
    """Pump design for ions on a line.

    With ``n_freq`` defaulting to twice the number of distinct target
    distances the system is square and solved exactly.  The default fiber is
    equally spaced at 3/8 of the reference wavelength.
    """
    if target.n_dims != 1:
        raise DesignError("design_line_spectrum needs a 1D target")
    units = UnitSystem(k0)
    if fiber is None:
        fiber = ChainGeometry.from_spacings(units.wavelengths([3 / 8] * (target.n_ions - 1)))
    if dk is None:
        dk = 0.7 * k0
    if n_freq is None:
        x = target.ion_positions[:, 0]
        dists = {round(abs(x[j] - x[i]), 12) for i, j in itertools.combinations(range(target.n_ions), 2)}
        n_freq = 2 * len(dists)
    problem = build_design_problem(target, fiber, k0, dk, n_freq, displacement_rows=True,
                                   displacement_scale=displacement_scale)
    return solve_design(problem, nonnegative=nonnegative)


def default_planar_fiber(n_ions: int = 3, k0: float = 2 * np.pi) -> ChainGeometry:
    """Six-slot fiber used for the triangle: 1/3, 1/3, 1, 1/4, 1/4 wavelengths."""
    if n_ions != 3:
        raise ValueError("default planar fiber is only defined for three ions")
    return ChainGeometry.from_spacings(UnitSystem(k0).wavelengths([1 / 3, 1 / 3, 1, 1 / 4, 1 / 4]))


def design_planar_spectrum(target: TargetCoulombSystem, fiber: ChainGeometry | None = None,
                           k0: float = 2 * np.pi, dk: float = 0.33 * 2 * np.pi, n_freq: int = 14,
                           nonnegative: bool = True, residual_tol: float = 1e-8) -> DesignResult:
    """Least-squares pump design for 2D (or 3D) targets; counter-rotating rows omitted."""
    if target.n_dims < 2:
        raise DesignError("design_planar_spectrum needs a 2D or 3D target")
    if fiber is None:
        fiber = default_planar_fiber(target.n_ions, k0)
    problem = build_design_problem(target, fiber, k0, dk, n_freq, displacement_rows=False)
    result = solve_design(problem, nonnegative=nonnegative)
    if result.residual > residual_tol:
        rank = np.linalg.matrix_rank(problem.A)
        if rank < problem.A.shape[0] and rank < n_freq:
            raise DesignError(f"design matrix rank {rank} cannot reproduce the target "
                              f"(residual {result.residual:.3g})")
    return result


def scan_frequency_spacing(target: TargetCoulombSystem, fiber: ChainGeometry, k0: float = 2 * np.pi,
                           n_freq: int | None = None, grid=None, residual_tol: float = 1e-8, **kw) -> DesignResult:
    """Try a grid of spacings ``dk`` and keep the feasible design with least residual."""
    if grid is None:
        grid = np.arange(0.1, 1.0 + 1e-9, 0.05) * k0
    best = None
    for dk in grid:
        try:
            if target.n_dims == 1:
                res = design_line_spectrum(target, fiber, k0, dk, n_freq, nonnegative=True, **kw)
            else:
                res = design_planar_spectrum(target, fiber, k0, dk, n_freq or 14, nonnegative=True,
                                             residual_tol=np.inf)
        except DesignError:
            continue
        if res.feasible and res.residual <= residual_tol and (best is None or res.residual < best.residual):
            best = res
    if best is None:
        raise DesignError("no frequency spacing on the grid gives a feasible design")
    return best


def emulated_mode_matrix(fiber: ChainGeometry, ratios, wavenumbers, reference_coupling: float) -> ModeSpaceHamiltonian:
    """Fiber mode matrix (omega_T = 1) for signed strengths ratio * Omega_ref."""
    ratios = np.asarray(ratios, dtype=float)
    d = fiber.distances()
    g = reference_coupling * np.tensordot(np.sin(d[..., None] * np.asarray(wavenumbers)), ratios, axes=1)
    np.fill_diagonal(g, 0.0)
    return ModeSpaceHamiltonian(mode_matrix_from_couplings(g))


@dataclass
class SpectrumComparison:
    distances: np.ndarray
    target: dict
    emulated: dict

    def max_relative_deviation(self, sector: int) -> float:
        t, e = self.target[sector], self.emulated[sector]
        return float(np.max(np.abs(e - t) / np.abs(t)))

    def max_absolute_deviation(self, sector: int) -> float:
        return float(np.max(np.abs(self.emulated[sector] - self.target[sector])))


def emulate_and_compare(target: TargetCoulombSystem, fiber: ChainGeometry, ratios, wavenumbers,
                        scale_factors=None, sectors=(1, 2)) -> SpectrumComparison:
    """Sector energies of target and emulating chain over a sweep of D.

    Energies are in units of the respective trap frequencies.  The pump
    strengths follow Omega_l = ratio_l * Omega_ref(D) with Omega_ref
    proportional to 1/D^3.
    """
    if scale_factors is None:
        scale_factors = np.linspace(1.0, 3.0, 20)
    Ds, tgt, emu = [], {s: [] for s in sectors}, {s: [] for s in sectors}
    for f in scale_factors:
        t = target.scaled(f)
        Ds.append(t.reference_distance)
        Mt = ModeSpaceHamiltonian(linearized_coulomb_mode_matrix(t).matrix / t.omega_T_prime)
        Me = emulated_mode_matrix(fiber, ratios, wavenumbers, t.reference_coupling)
        for s in sectors:
            tgt[s].append(sector_eigenenergies(Mt, s))
            emu[s].append(sector_eigenenergies(Me, s))
    return SpectrumComparison(np.array(Ds), {s: np.array(v) for s, v in tgt.items()},
                              {s: np.array(v) for s, v in emu.items()})


def emulated_couplings(result: DesignResult) -> np.ndarray:
    """Coupling matrix g / Omega_ref produced by a design."""
    d = result.problem.fiber.distances()
    g = np.tensordot(np.sin(d[..., None] * result.problem.wavenumbers), result.ratios, axes=1)
    np.fill_diagonal(g, 0.0)
    return g


def design_report_csv(result: DesignResult) -> str:
    lines = ["l,k_over_k0,omega_over_omegatilde,intensity_positive"]
    for l, kk, r, pos in result.report_rows():
        lines.append(f"{l},{kk:.12g},{r:.12g},{str(pos).lower()}")
    return "\n".join(lines) + "\n"

