"""Command-line front end: designs, figure data and thin module wrappers.

Every command writes its data files plus ``manifest.json`` into ``--out``.
The manifest carries the fully resolved parameters (input files are
embedded), so ``fibersim rerun manifest.json --out DIR`` regenerates
byte-identical outputs.  Particle indices on the command line and in JSON
inputs count from 1.

Exit codes: 0 success, 2 configuration error, 3 infeasible design,
4 numerical guard tripped.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, presets
from .coulombmap import (DesignError, TargetCoulombSystem, design_line_spectrum, design_planar_spectrum,
                         design_report_csv, emulate_and_compare)
from .dynamics import NumericalGuardError, Propagator
from .figures import FIGURES, Table, build_figure
from .fockspace import FockSpace, FockStateVector, partial_trace, von_neumann_entropy
from .hamiltonian import (build_full_hamiltonian, build_rwa_hamiltonian, mode_space_hamiltonian,
                          sector_eigenenergies)
from .model import ChainGeometry, config_from_dict
from .readout import state_dependent_intensity
from .regime import cesium_d2, regime_report, saturation_for_excited_fraction

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_GUARD = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- helpers

def _read_json(path: str, what: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} '{path}': {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} '{path}' line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(out: Path, name: str, text: str, written: dict):
    data = text.encode("utf-8")
    (out / name).write_bytes(data)
    written[name] = hashlib.sha256(data).hexdigest()


def _parse_pairs(specs) -> list:
    """'1,3' -> [(0, 2)] (1-based on input)."""
    pairs = []
    for item in specs or []:
        try:
            i, j = (int(v) for v in item.split(","))
        except ValueError as exc:
            raise ConfigError(f"--mask expects 'i,j', got {item!r}") from exc
        if i < 1 or j < 1 or i == j:
            raise ConfigError(f"--mask pair {item!r} must name two distinct particles (1-based)")
        pairs.append((i - 1, j - 1))
    return pairs


def _parse_ints(text: str, name: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name} expects comma-separated integers, got {text!r}") from exc


def _parse_times(text: str) -> list:
    """'t' or 'start:stop:count'."""
    try:
        parts = [float(v) for v in text.split(":")]
    except ValueError as exc:
        raise ConfigError(f"--times expects 't' or 'start:stop:count', got {text!r}") from exc
    if len(parts) == 1:
        return parts
    if len(parts) == 3 and parts[2] >= 1 and parts[2] == int(parts[2]):
        return np.linspace(parts[0], parts[1], int(parts[2])).tolist()
    raise ConfigError(f"--times expects 't' or 'start:stop:count', got {text!r}")


def _chain(doc: dict):
    try:
        return config_from_dict(doc)
    except ValueError as exc:
        raise ConfigError(f"chain config: {exc}") from exc


def _state(doc: dict, n_modes: int | None = None) -> FockStateVector:
    try:
        state = FockStateVector.from_json(json.dumps(doc))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"state file: malformed field ({exc!r})") from exc
    if n_modes is not None and state.space.n_modes != n_modes:
        raise ConfigError(f"state has {state.space.n_modes} modes but the chain has {n_modes} particles")
    if abs(state.norm() - 1) > 1e-9:
        raise ConfigError(f"state is not normalized (norm {state.norm():.12g})")
    return state


def _csv(header, rows) -> str:
    return Table(list(header), np.asarray(rows, dtype=float).reshape(len(rows), len(header))).to_csv()


# ---------------------------------------------------------------- commands

def _design_target(params: dict):
    """Target system, fiber and grid options from a preset or target document."""
    mask = [tuple(p) for p in params.get("mask", [])]
    preset = params.get("preset")
    if preset == "line3":
        return presets.line3_target().without_pairs(mask), presets.line3_fiber(), \
            {"dk": presets.LINE_DK}, None
    if preset == "triangle":
        table = presets.TRIANGLE_MASKED_TABLE if mask == [(0, 2)] else presets.TRIANGLE_TABLE if not mask else None
        return presets.triangle_target(mask), presets.triangle_fiber(), \
            {"dk": presets.TRIANGLE_DK, "n_freq": presets.TRIANGLE_NFREQ}, table
    doc = params.get("target")
    if doc is None:
        raise ConfigError("design needs --preset or --target")
    try:
        off = [(int(i) - 1, int(j) - 1) for i, j in doc.get("mask_off", [])]
        target = TargetCoulombSystem(doc["ions"], float(doc.get("charge_scale", 0.025)),
                                     float(doc.get("omega_T_prime", 1.0)), float(doc.get("delta0_prime", 1.0)))
        target = target.without_pairs(off + mask) if off or mask else target
        fiber = ChainGeometry(doc["fiber"]) if "fiber" in doc else None
    except KeyError as exc:
        raise ConfigError(f"target file: missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"target file: {exc}") from exc
    opts = {k: doc[k] for k in ("k0", "dk", "n_freq", "displacement_scale") if k in doc}
    return target, fiber, opts, None


def cmd_design(params: dict, out: Path, written: dict) -> dict:
    target, fiber, opts, table = _design_target(params)
    k0 = float(opts.pop("k0", presets.K0))
    if target.n_dims == 1:
        result = design_line_spectrum(target, fiber, k0, opts.get("dk"), opts.get("n_freq"),
                                      float(opts.get("displacement_scale", 1.0)), nonnegative=True)
    else:
        result = design_planar_spectrum(target, fiber, k0, opts.get("dk", 0.33 * k0),
                                        int(opts.get("n_freq", 14)))
    _write(out, "spectrum.csv", design_report_csv(result), written)
    report = {"method": result.method, "residual": result.residual, "feasible": result.feasible,
              "shape": list(result.problem.shape), "ratios": result.ratios.tolist(),
              "masked_pairs": [[int(i) + 1, int(j) + 1] for i, j in zip(*np.nonzero(np.triu(~target.mask, 1)))]}
    cmp = emulate_and_compare(target, result.problem.fiber, result.ratios, result.problem.wavenumbers,
                              sectors=(1,) if target.n_dims > 1 else (1, 2))
    report["max_relative_deviation"] = {str(s): cmp.max_relative_deviation(s) for s in cmp.target}
    if table is not None:
        ref = table / table.max()
        got = result.ratios / result.ratios.max()
        report["reference_table_max_abs_diff_normalized"] = float(np.max(np.abs(got - ref)))
        report["reference_table_scale"] = float(table.max() / result.ratios.max())
    if params.get("physical"):
        report["regime"] = regime_report(cesium_d2())
    _write(out, "design.json", _dump_json(report), written)
    if not result.feasible:
        raise DesignError(f"design needs negative pump strengths (residual {result.residual:.3g})")
    if result.residual > 1e-8:
        raise DesignError(f"design residual {result.residual:.3g} exceeds 1e-8")
    return report


def cmd_figure(params: dict, out: Path, written: dict) -> dict:
    name = params["name"]
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    table = build_figure(name)
    _write(out, f"{name}.csv", table.to_csv(), written)
    _write(out, f"{name}.json", _dump_json(table.meta), written)
    return table.meta


def cmd_evolve(params: dict, out: Path, written: dict) -> dict:
    cfg = _chain(params["config"])
    n = cfg.geometry.n_particles
    if "state" in params:
        state = _state(params["state"], n)
    else:
        occ = params.get("occupation") or [0] * n
        if len(occ) != n:
            raise ConfigError(f"--occupation needs {n} entries")
        cutoff = int(params.get("cutoff") or max(1, max(occ)))
        state = FockSpace(n, cutoff).basis_state(occ)
    space = state.space
    if params.get("full"):
        H = build_full_hamiltonian(cfg.geometry, cfg.spectrum, cfg.oscillator, space)
    else:
        H = build_rwa_hamiltonian(cfg.geometry, cfg.spectrum, space, cfg.oscillator.omega_T,
                                  frequency_shifts=not params.get("no_shifts", False))
    times = params["times"]
    U = Propagator(H)
    rows = U.trajectory(state.amplitudes, np.asarray(times))
    guard = params.get("leakage_guard", 1e-6)
    header = ["t"] + [f"pop_{i + 1}" for i in range(n)] + [f"S_{i + 1}|rest" for i in range(n)]
    table, last = [], state
    for t, amps in zip(times, rows):
        psi = FockStateVector(space, amps)
        if space.cutoff > 1 and psi.top_level_weight() > guard:
            raise NumericalGuardError(f"weight {psi.top_level_weight():.3g} on the Fock cutoff at t={t:g}")
        ent = [von_neumann_entropy(partial_trace(psi, (i,))) for i in range(n)] if n > 1 else [0.0]
        table.append([t, *psi.populations(), *ent])
        last = psi
    _write(out, "trajectory.csv", _csv(header, table), written)
    _write(out, "final_state.json", last.to_json() + "\n", written)
    return {"steps": len(times)}


def cmd_eigs(params: dict, out: Path, written: dict) -> dict:
    cfg = _chain(params["config"])
    M = mode_space_hamiltonian(cfg.geometry, cfg.spectrum, cfg.oscillator.omega_T,
                               frequency_shifts=not params.get("no_shifts", False))
    rows = []
    for s in params.get("sectors", [1, 2]):
        if s not in (1, 2):
            raise ConfigError("--sectors accepts 1 and 2")
        rows += [[s, i, e] for i, e in enumerate(sector_eigenenergies(M, s))]
    _write(out, "eigs.csv", _csv(["sector", "index", "energy"], rows), written)
    return {"n_energies": len(rows)}


def cmd_entropy(params: dict, out: Path, written: dict) -> dict:
    state = _state(params["state"])
    keep = [i - 1 for i in params["keep"]]
    if not keep or any(i < 0 or i >= state.space.n_modes for i in keep):
        raise ConfigError(f"--keep must list particles 1..{state.space.n_modes}")
    S = von_neumann_entropy(partial_trace(state, keep))
    report = {"keep": params["keep"], "entropy_nats": S}
    _write(out, "entropy.json", _dump_json(report), written)
    return report


def cmd_readout(params: dict, out: Path, written: dict) -> dict:
    cfg = _chain(params["config"])
    state = _state(params["state"], cfg.geometry.n_particles)
    kind = params.get("kind", "coherent")
    report = {"kind": kind, "order": params.get("order", 2)}
    for name, d in (("I_minus", "left"), ("I_plus", "right")):
        report[name] = state_dependent_intensity(state, cfg.geometry, cfg.spectrum, cfg.oscillator, d,
                                                 report["order"], kind)
    _write(out, "readout.json", _dump_json(report), written)
    return report


def cmd_regime(params: dict, out: Path, written: dict) -> dict:
    try:
        overrides = dict(params.get("overrides", {}))
        if "excited_fraction" in overrides:
            rho = overrides.pop("excited_fraction")
            overrides["saturation"] = saturation_for_excited_fraction(rho, overrides.get("detuning", 100.0))
        p = cesium_d2(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"regime parameters: {exc}") from exc
    report = regime_report(p, float(params.get("omega_k", 0.0)))
    _write(out, "regime.json", _dump_json(report), written)
    return report


COMMANDS = {"design": cmd_design, "figure": cmd_figure, "evolve": cmd_evolve, "eigs": cmd_eigs,
            "entropy": cmd_entropy, "readout": cmd_readout, "regime": cmd_regime}


# ---------------------------------------------------------------- argparse

def _resolve(args) -> tuple[str, dict]:
    """Turn parsed arguments into (command, fully resolved parameter dict)."""
    c = args.command
    if c == "rerun":
        doc = _read_json(args.manifest, "manifest")
        if doc.get("command") not in COMMANDS or "params" not in doc:
            raise ConfigError("manifest lacks a known 'command' and 'params'")
        return doc["command"], doc["params"]
    p: dict = {}
    if c == "design":
        if args.preset:
            p["preset"] = args.preset
        if args.target:
            p["target"] = _read_json(args.target, "target file")
        p["mask"] = [list(x) for x in _parse_pairs(args.mask)]
        p["physical"] = args.physical
    elif c == "figure":
        p["name"] = args.name
    elif c in ("evolve", "eigs", "readout"):
        p["config"] = _read_json(args.config, "chain config")
        p["no_shifts"] = getattr(args, "no_shifts", False)
    if c == "evolve":
        if args.state:
            p["state"] = _read_json(args.state, "state file")
        if args.occupation:
            p["occupation"] = _parse_ints(args.occupation, "--occupation")
        if args.cutoff is not None:
            p["cutoff"] = args.cutoff
        p["times"] = _parse_times(args.times)
        p["full"] = args.full
    elif c == "eigs":
        p["sectors"] = _parse_ints(args.sectors, "--sectors")
    elif c == "entropy":
        p["state"] = _read_json(args.state, "state file")
        p["keep"] = _parse_ints(args.keep, "--keep")
    elif c == "readout":
        p["state"] = _read_json(args.state, "state file")
        p["kind"] = args.kind
        p["order"] = args.order
    elif c == "regime":
        p["preset"] = args.preset
        p["omega_k"] = args.omega_k
        p["overrides"] = {k: v for k, v in (("omega_T", args.omega_T), ("detuning", args.detuning),
                                            ("saturation", args.saturation),
                                            ("excited_fraction", args.excited_fraction)) if v is not None}
    return c, p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fibersim", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"fibersim {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        return sp

    sp = add("design", "solve the pump design equations for a Coulomb target")
    sp.add_argument("--preset", choices=("line3", "triangle"))
    sp.add_argument("--target", help="target JSON: ions, optional fiber, k0, dk, n_freq, mask_off")
    sp.add_argument("--mask", action="append", metavar="I,J", help="switch off pair I,J (1-based); repeatable")
    sp.add_argument("--physical", action="store_true", help="attach the Cesium regime report")

    sp = add("figure", "write the data behind a figure")
    sp.add_argument("name", help="one of " + ", ".join(FIGURES))

    sp = add("evolve", "evolve a Fock state and record populations and entropies")
    sp.add_argument("--config", required=True, help="chain JSON (k0, positions, spectrum, omega_T, delta0)")
    sp.add_argument("--state", help="state JSON {n_modes, cutoff, amplitudes}")
    sp.add_argument("--occupation", help="basis state as comma-separated occupations")
    sp.add_argument("--cutoff", type=int, help="Fock cutoff for --occupation")
    sp.add_argument("--times", default="0", help="'t' or 'start:stop:count'")
    sp.add_argument("--full", action="store_true", help="keep the counter-rotating terms")
    sp.add_argument("--no-shifts", action="store_true", help="drop the pump-induced frequency shifts")

    sp = add("eigs", "sector eigenenergies of a chain")
    sp.add_argument("--config", required=True)
    sp.add_argument("--sectors", default="1,2")
    sp.add_argument("--no-shifts", action="store_true")

    sp = add("entropy", "entanglement entropy of a subset of particles")
    sp.add_argument("--state", required=True)
    sp.add_argument("--keep", required=True, help="particles to keep, 1-based, e.g. 1,2")

    sp = add("readout", "outgoing intensities at both fiber ends")
    sp.add_argument("--config", required=True)
    sp.add_argument("--state", required=True)
    sp.add_argument("--kind", choices=("coherent", "total"), default="coherent")
    sp.add_argument("--order", type=int, choices=(0, 1, 2), default=2)

    sp = add("regime", "laboratory feasibility report")
    sp.add_argument("--preset", choices=("cesium",), default="cesium")
    sp.add_argument("--omega-k", type=float, default=0.0, help="requested pump coupling, 1/s")
    sp.add_argument("--omega-T", type=float, help="trap frequency, rad/s")
    sp.add_argument("--detuning", type=float, help="detuning in units of the linewidth")
    sp.add_argument("--saturation", type=float, help="I0/Isat")
    sp.add_argument("--excited-fraction", type=float, help="set I0/Isat from the excited-state fraction")

    sp = add("rerun", "repeat a run from its manifest")
    sp.add_argument("manifest")
    return ap


def run(command: str, params: dict, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    written: dict = {}
    try:
        summary = COMMANDS[command](params, out, written)
    finally:
        manifest = {"tool": "fibersim", "version": __version__, "preset_version": presets.PRESET_VERSION,
                    "command": command, "params": params, "outputs": dict(sorted(written.items()))}
        (out / "manifest.json").write_text(_dump_json(manifest), encoding="utf-8")
    return summary


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        command, params = _resolve(args)
        run(command, params, Path(args.out))
    except DesignError as exc:
        print(f"infeasible design: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
