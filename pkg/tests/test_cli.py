import json

import numpy as np
import pytest

from fibersim.cli import main
from fibersim.figures import read_csv
from fibersim.fockspace import FockStateVector

K0 = 2 * np.pi


def _run(tmp_path, name, *args):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out


@pytest.fixture
def chain_file(tmp_path):
    p = tmp_path / "chain.json"
    p.write_text(json.dumps({"k0": K0, "positions": [0, 0.5, 1.1],
                             "spectrum": [{"k": K0, "omega": 0.05}], "delta0": 0.016, "omega_T": 1.0}))
    return p


def test_design_line3(tmp_path):
    code, out = _run(tmp_path, "d", "design", "--preset", "line3")
    assert code == 0
    rep = json.loads((out / "design.json").read_text())
    assert rep["residual"] < 1e-10 and rep["shape"] == [4, 4]
    assert len((out / "spectrum.csv").read_text().splitlines()) == 5
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "design" and "spectrum.csv" in manifest["outputs"]


@pytest.mark.parametrize("extra,key", [((), "0"), (("--mask", "1,3"), "1")])
def test_design_triangle(tmp_path, extra, key):
    code, out = _run(tmp_path, "t" + key, "design", "--preset", "triangle", *extra)
    assert code == 0
    rep = json.loads((out / "design.json").read_text())
    assert len(rep["ratios"]) == 14
    assert rep["reference_table_max_abs_diff_normalized"] < 0.02
    assert rep["masked_pairs"] == ([[1, 3]] if extra else [])


def test_design_from_target_file(tmp_path):
    p = tmp_path / "target.json"
    p.write_text(json.dumps({"ions": [0.0, 1.0, 2.0], "fiber": [0.0, 0.375, 0.75], "dk": 0.7 * K0}))
    code, out = _run(tmp_path, "tf", "design", "--target", str(p))
    assert code == 0


def test_infeasible_design_exit_code(tmp_path):
    p = tmp_path / "target.json"
    # a fiber whose equal spacings cannot host the triangle
    p.write_text(json.dumps({"ions": [[0, 0], [0.5, 0.866], [1, 0]], "fiber": [0, 0.3, 0.6, 0.9, 1.2, 1.5]}))
    code, _ = _run(tmp_path, "bad", "design", "--target", str(p))
    assert code == 3


@pytest.mark.parametrize("name", ["fig2", "fig4", "fig5", "fig6", "fig7", "fig8"])
def test_figures_are_deterministic(tmp_path, name):
    code, a = _run(tmp_path, "a", "figure", name)
    assert code == 0
    code, b = _run(tmp_path, "b", "rerun", str(a / "manifest.json"))
    assert code == 0
    for f in (f"{name}.csv", f"{name}.json", "manifest.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
    text = (a / f"{name}.csv").read_text()
    assert "\r" not in text
    assert read_csv(text).to_csv() == text


def test_figure_contents(tmp_path):
    _, out = _run(tmp_path, "f5", "figure", "fig5")
    t = read_csv((out / "fig5.csv").read_text())
    assert t.column("pop_3").max() < 1e-4
    _, out = _run(tmp_path, "f6", "figure", "fig6")
    t = read_csv((out / "fig6.csv").read_text())
    assert {"S_1|23", "S_12|3"} <= set(t.header)
    markers = json.loads((out / "fig6.json").read_text())["markers"]
    assert set(markers) == {"W", "Bell", "return"}
    _, out = _run(tmp_path, "f8", "figure", "fig8")
    ip = read_csv((out / "fig8.csv").read_text()).column("I_plus")
    assert (ip.max() - ip.min()) / ip.mean() < 1e-9


def test_unknown_figure(tmp_path):
    assert _run(tmp_path, "x", "figure", "fig3")[0] == 2


def test_eigs_zero_spectrum(tmp_path):
    p = tmp_path / "z.json"
    p.write_text(json.dumps({"positions": [0, 0.4, 1.0], "spectrum": [], "omega_T": 1.5}))
    code, out = _run(tmp_path, "e", "eigs", "--config", str(p))
    assert code == 0
    t = read_csv((out / "eigs.csv").read_text())
    e, s = t.column("energy"), t.column("sector")
    assert np.allclose(e[s == 1], 1.5) and np.allclose(e[s == 2], 3.0)


def test_evolve_zero_time_returns_input(tmp_path, chain_file):
    state = tmp_path / "psi.json"
    from fibersim.fockspace import FockSpace
    psi = FockStateVector.from_dict(FockSpace(3, 1), {(0, 0, 1): 1, (1, 0, 0): 1j})
    state.write_text(psi.to_json())
    code, out = _run(tmp_path, "v", "evolve", "--config", str(chain_file), "--state", str(state))
    assert code == 0
    again = FockStateVector.from_json((out / "final_state.json").read_text())
    assert np.allclose(again.amplitudes, psi.amplitudes)


def test_evolve_outputs_feed_entropy_and_readout(tmp_path, chain_file):
    code, out = _run(tmp_path, "v", "evolve", "--config", str(chain_file), "--occupation", "0,0,1",
                     "--times", "0:40:5")
    assert code == 0
    traj = read_csv((out / "trajectory.csv").read_text())
    assert traj.rows.shape == (5, 7)
    final = out / "final_state.json"
    code, ent = _run(tmp_path, "s", "entropy", "--state", str(final), "--keep", "1")
    assert code == 0
    S = json.loads((ent / "entropy.json").read_text())["entropy_nats"]
    assert S == pytest.approx(traj.column("S_1|rest")[-1], abs=1e-10)
    code, ro = _run(tmp_path, "r", "readout", "--config", str(chain_file), "--state", str(final))
    assert code == 0
    rep = json.loads((ro / "readout.json").read_text())
    assert rep["I_plus"] == pytest.approx(1.0, abs=1e-9)


def test_truncation_guard_exit_code(tmp_path, chain_file):
    code, _ = _run(tmp_path, "g", "evolve", "--config", str(chain_file), "--occupation", "0,0,1",
                   "--cutoff", "2", "--full", "--times", "0:500:3")
    assert code == 4


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"positions": [0, 1],\n')
    assert _run(tmp_path, "c", "eigs", "--config", str(bad))[0] == 2
    assert "line 2" in capsys.readouterr().err
    missing = tmp_path / "m.json"
    missing.write_text(json.dumps({"spectrum": []}))
    assert _run(tmp_path, "c2", "eigs", "--config", str(missing))[0] == 2
    assert "positions" in capsys.readouterr().err
    assert _run(tmp_path, "c3", "design", "--preset", "triangle", "--mask", "1")[0] == 2
    assert _run(tmp_path, "c4", "eigs", "--config", str(tmp_path / "nope.json"))[0] == 2


def test_regime_report(tmp_path):
    code, out = _run(tmp_path, "rg", "regime", "--preset", "cesium")
    assert code == 0
    rep = json.loads((out / "regime.json").read_text())
    assert rep["scattered_intensity_w_m2"] == pytest.approx(6.2e-4, rel=0.05)
    code, out = _run(tmp_path, "rg2", "regime", "--excited-fraction", "0.01")
    rep = json.loads((out / "regime.json").read_text())
    assert rep["interaction_strength"]["detail"]["trap_to_pump_lower_bound"] > 3


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    text = capsys.readouterr().out
    for c in ("design", "figure", "evolve", "eigs", "entropy", "readout", "regime", "rerun"):
        assert c in text
