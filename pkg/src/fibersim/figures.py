"""Data behind each reproduced figure, as plain column tables.

Every builder returns a :class:`Table` (header, rows, metadata).  Column
schemas:

fig2  D, target_s1_*, emulated_s1_*, target_s2_*, emulated_s2_*
fig4  variant, D, target_s1_*, emulated_s1_*   (variant 0 full, 1 masked)
fig5  theta, theta_half, t, pop_1..pop_3
fig6  t, theta, theta_half, pop_1..pop_3, S_1|23, S_12|3
fig7  x3, I_minus_100, I_minus_011, I_plus_100, I_plus_011
fig8  t, I_minus, I_plus

Populations are mode occupations, entropies in nats, intensities in units
of the single-particle output.  Time is in inverse trap frequencies and
``theta`` is the pump angle Omega_1 t.

The dynamics figures evolve under the exchange Hamiltonian alone (uniform
trap frequency, no pump-induced frequency shifts).  With the shifts kept,
the fig5 spectator becomes resonant with the symmetric pair mode and picks
up population of order 4e-3 by theta = 20.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import presets
from .coulombmap import (design_line_spectrum, design_planar_spectrum, emulate_and_compare)
from .dynamics import evolve_many, find_population_crossings, mode_populations
from .fockspace import FockSpace, partial_trace, von_neumann_entropy
from .hamiltonian import build_rwa_hamiltonian, coupling_matrix, mode_space_hamiltonian
from .readout import intensity_trajectory, state_dependent_intensity

FIGURES = ("fig2", "fig4", "fig5", "fig6", "fig7", "fig8")
FIG6_BIPARTITIONS = ((0,), (0, 1))


@dataclass
class Table:
    header: list
    rows: np.ndarray
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.header.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([format_number(v) for v in row])
        return buf.getvalue()


def format_number(v) -> str:
    v = float(v)
    if v == 0:
        v = 0.0  # drop the sign of negative zero
    return f"{v:.12g}"


def read_csv(text: str) -> Table:
    r = list(csv.reader(io.StringIO(text)))
    return Table(r[0], np.array([[float(x) for x in row] for row in r[1:]]))


def _sector_columns(prefix, arrays):
    names, cols = [], []
    for s, arr in arrays:
        for j in range(arr.shape[1]):
            names.append(f"{prefix}_s{s}_{j}")
            cols.append(arr[:, j])
    return names, cols


def fig2(n_points: int = 20) -> Table:
    target = presets.line3_target()
    res = design_line_spectrum(target, presets.line3_fiber(), presets.K0, presets.LINE_DK)
    cmp = emulate_and_compare(target, res.problem.fiber, res.ratios, res.problem.wavenumbers,
                              np.linspace(1.0, 3.0, n_points))
    header, cols = ["D"], [cmp.distances]
    for s in (1, 2):
        for who, src in (("target", cmp.target), ("emulated", cmp.emulated)):
            h, c = _sector_columns(who, [(s, src[s])])
            header += h
            cols += c
    meta = {"residual": res.residual, "ratios": res.ratios.tolist(),
            "max_rel_dev_s1": cmp.max_relative_deviation(1), "max_rel_dev_s2": cmp.max_relative_deviation(2)}
    return Table(header, np.column_stack(cols), meta)


def fig4(n_points: int = 20) -> Table:
    blocks, meta = [], {}
    header = None
    for variant, mask in enumerate(((), ((0, 2),))):
        target = presets.triangle_target(mask)
        res = design_planar_spectrum(target, presets.triangle_fiber(), presets.K0, presets.TRIANGLE_DK,
                                     presets.TRIANGLE_NFREQ)
        cmp = emulate_and_compare(target, res.problem.fiber, res.ratios, res.problem.wavenumbers,
                                  np.linspace(1.0, 3.0, n_points), sectors=(1,))
        h1, c1 = _sector_columns("target", [(1, cmp.target[1])])
        h2, c2 = _sector_columns("emulated", [(1, cmp.emulated[1])])
        header = ["variant", "D"] + h1 + h2
        blocks.append(np.column_stack([np.full(n_points, variant), cmp.distances] + c1 + c2))
        meta[f"variant_{variant}"] = {"masked_pairs": [list(p) for p in mask], "residual": res.residual,
                                      "ratios": res.ratios.tolist(),
                                      "max_rel_dev_s1": cmp.max_relative_deviation(1)}
    return Table(header, np.vstack(blocks), meta)


def fig5(theta_max: float = 20.0, n_points: int = 401, omega1: float = 0.01) -> Table:
    geometry, spectrum = presets.fig5_chain(omega1)
    space = FockSpace(3, 1)
    H = build_rwa_hamiltonian(geometry, spectrum, space, frequency_shifts=False)
    theta = np.linspace(0, theta_max, n_points)
    t = theta / omega1
    pops = mode_populations(evolve_many(space.basis_state((1, 0, 0)), H, t))
    g = coupling_matrix(geometry, spectrum) / omega1
    meta = {"g_over_omega1": g.tolist(), "max_pop_3": float(pops[:, 2].max())}
    return Table(["theta", "theta_half", "t", "pop_1", "pop_2", "pop_3"],
                 np.column_stack([theta, theta / 2, t, pops]), meta)


def fig6_markers(omega: float = 0.05) -> dict:
    """Times where |001> reaches the W point, the Bell point and returns."""
    geometry, spectrum = presets.fig6_chain(omega)
    M = mode_space_hamiltonian(geometry, spectrum, frequency_shifts=False)
    w = M.eigenvalues
    gaps = np.abs(w[:, None] - w[None])
    period = 2 * np.pi / gaps[gaps > 1e-12].min()
    t_max = 2.05 * period
    w_pt = find_population_crossings(M, 2, 1 / 3, t_max)
    bell = find_population_crossings(M, 2, 0.0, t_max)
    back = find_population_crossings(M, 2, 1.0, t_max)
    back = back[back > 1e-6 * period]
    return {"W": float(w_pt[0]), "Bell": float(bell[0]), "return": float(back[0])}


def fig6_entropies(states) -> np.ndarray:
    return np.array([[von_neumann_entropy(partial_trace(s, keep)) for keep in FIG6_BIPARTITIONS]
                     for s in states])


def fig6(n_points: int = 301, omega: float = 0.05) -> Table:
    geometry, spectrum = presets.fig6_chain(omega)
    space = FockSpace(3, 1)
    H = build_rwa_hamiltonian(geometry, spectrum, space, frequency_shifts=False)
    markers = fig6_markers(omega)
    t = np.linspace(0, markers["return"], n_points)
    states = evolve_many(space.basis_state((0, 0, 1)), H, t)
    S = fig6_entropies(states)
    m_states = evolve_many(space.basis_state((0, 0, 1)), H, list(markers.values()))
    m_S = fig6_entropies(m_states)
    meta = {"markers": {name: {"t": tm, "theta": tm * omega, "S_1|23": float(s[0]), "S_12|3": float(s[1])}
                        for (name, tm), s in zip(markers.items(), m_S)}}
    return Table(["t", "theta", "theta_half", "pop_1", "pop_2", "pop_3", "S_1|23", "S_12|3"],
                 np.column_stack([t, t * omega, t * omega / 2, mode_populations(states), S]), meta)


def fig7(n_points: int = 40, k_delta0: float = 0.1) -> Table:
    x3, geometries, spectrum, osc = presets.fig7_sweep(n_points, k_delta0)
    space = FockSpace(3, 1)
    a, b = space.basis_state((1, 0, 0)), space.basis_state((0, 1, 1))
    rows = []
    for x, geo in zip(x3, geometries):
        rows.append([x] + [state_dependent_intensity(s, geo, spectrum, osc, d)
                           for d in ("left", "right") for s in (a, b)])
    rows = np.array(rows)
    meta = {"k_delta0": k_delta0,
            "max_abs_diff_minus": float(np.max(np.abs(rows[:, 1] - rows[:, 2]))),
            "max_abs_diff_plus": float(np.max(np.abs(rows[:, 3] - rows[:, 4])))}
    return Table(["x3", "I_minus_100", "I_minus_011", "I_plus_100", "I_plus_011"], rows, meta)


def fig8(n_points: int = 301, t_max: float = 100.0, omega: float = 0.1, k_delta0: float = 0.1) -> Table:
    geometry, spectrum, osc = presets.fig8_chain(omega, k_delta0)
    space = FockSpace(3, 1)
    H = build_rwa_hamiltonian(geometry, spectrum, space, frequency_shifts=False)
    t = np.linspace(0, t_max, n_points)
    I = intensity_trajectory(evolve_many(space.basis_state((0, 0, 1)), H, t), geometry, spectrum, osc)
    ip = I[:, 1]
    meta = {"I_plus_rel_spread": float((ip.max() - ip.min()) / ip.mean()),
            "I_minus_range": [float(I[:, 0].min()), float(I[:, 0].max())]}
    return Table(["t", "I_minus", "I_plus"], np.column_stack([t, I]), meta)


BUILDERS = {"fig2": fig2, "fig4": fig4, "fig5": fig5, "fig6": fig6, "fig7": fig7, "fig8": fig8}


def build_figure(name: str, **options) -> Table:
    if name not in BUILDERS:
        raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    return BUILDERS[name](**options)
