import csv
import json

import numpy as np
import pytest

from hosesim import cli, geometry
from hosesim.geometry import CoilSpec, Domain


def run(tmp_path, *argv):
    code = cli.main([*argv[:1], "--out", str(tmp_path), *argv[1:]])
    return code


def read_json(path):
    return json.loads(path.read_text())


@pytest.fixture
def small_scene_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("scene") / "scene.json"
    coil = CoilSpec(10, 1.3e-3, 4e-3, 0.0, 10e-3)
    geometry.vacuum_scene(coil, Domain(6e-3, -8e-3, 8e-3)).save_json(path)
    return path


def test_rf_defaults_and_manifest(tmp_path):
    assert run(tmp_path, "rf", "--seed", "7") == 0
    doc = read_json(tmp_path / "rf.json")
    assert doc["waveguides"][0]["f_c_hz"] == pytest.approx(124.91e9, rel=1e-4)
    man = read_json(tmp_path / "manifest.json")
    assert man["seed"] == 7
    assert man["rng"] == "numpy.random.PCG64"
    assert len(man["config_sha256"]) == 64
    assert man["outputs"] == ["rf.json"]
    assert {"python", "numpy", "scipy", "hosesim"} <= set(man["versions"])
    assert man["wall_time_s"] >= 0


def test_rf_empty_list(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"waveguides": [], "stub_lengths": []}))
    assert run(tmp_path, "rf", "--config", str(cfg)) == 0
    assert read_json(tmp_path / "rf.json") == {"waveguides": [], "quarter_wave": []}


def test_config_digest_depends_on_params(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"stub_lengths": [5e-3]}))
    run(a, "rf")
    run(b, "rf", "--config", str(cfg))
    assert read_json(a / "manifest.json")["config_sha256"] != read_json(b / "manifest.json")["config_sha256"]


def test_missing_scene_exits_2(tmp_path):
    assert run(tmp_path, "field", "--scene", str(tmp_path / "nope.json")) == 2
    err = read_json(tmp_path / "error.json")
    assert err["exit_code"] == 2
    assert not (tmp_path / "manifest.json").exists()


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": 1}))
    assert run(tmp_path, "rf", "--config", str(cfg)) == 2


def test_noise_without_seed_exits_2(tmp_path):
    assert run(tmp_path, "fluxmap", "--noise-hz", "1e5", "--points", "51") == 2
    assert "seed" in read_json(tmp_path / "error.json")["message"]


def test_numerical_failure_exits_1(tmp_path):
    code = run(tmp_path, "pulse", "--shape", "predistorted", "--max-settle", "1e-9", "--duration", "2e-6")
    assert code == 1
    assert read_json(tmp_path / "error.json")["error"] == "InfeasibleError"


def test_field_zero_current(tmp_path, small_scene_file):
    assert run(tmp_path, "field", "--scene", str(small_scene_file), "--current", "0", "--spacing", "200e-6") == 0
    with open(tmp_path / "field.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "z", "b_r", "b_z"]
    vals = np.array(rows[1:], dtype=float)
    assert np.all(vals[:, 2:] == 0.0)
    assert read_json(tmp_path / "summary.json")["inductance_h"] is None


def test_field_small_scene(tmp_path, small_scene_file):
    assert run(tmp_path, "field", "--scene", str(small_scene_file), "--spacing", "100e-6") == 0
    s = read_json(tmp_path / "summary.json")
    assert s["coil_current"] == 10e-3
    assert s["inductance_h"] > 0
    assert s["saturation"] == []


def test_scene_preset_round_trip(tmp_path):
    assert run(tmp_path, "scene", "--preset", "device") == 0
    assert geometry.Scene.load_json(tmp_path / "scene.json") == geometry.build_paper_scene()
    assert run(tmp_path, "scene", "--preset", "no_such") == 2


def test_fluxmap_gap_and_fit(tmp_path):
    assert run(tmp_path, "fluxmap", "--points", "301", "--fit") == 0
    info = read_json(tmp_path / "fluxmap.json")
    assert info["min_gap_hz"] == pytest.approx(10e6, rel=1e-3)
    fit = read_json(tmp_path / "fit.json")
    assert fit["rms_residual_hz"] <= 1e3


def test_fluxmap_refit_from_csv(tmp_path):
    gen, refit = tmp_path / "gen", tmp_path / "refit"
    assert run(gen, "fluxmap", "--points", "201", "--noise-hz", "1e5", "--seed", "3") == 0
    assert run(refit, "fluxmap", "--input", str(gen / "fluxmap.csv"), "--fit") == 0
    assert read_json(refit / "manifest.json")["outputs"] == ["fit.json"]


def test_pulse_square(tmp_path):
    assert run(tmp_path, "pulse") == 0
    rep = read_json(tmp_path / "report.json")
    assert rep["rise_10_90_s"] == pytest.approx(np.log(9) * 2e-6, rel=0.02)
    assert rep["steady_detuning_hz"] == pytest.approx(700e6, rel=1e-6)


def test_pulse_predistorted(tmp_path):
    assert run(tmp_path, "pulse", "--shape", "predistorted", "--duration", "4e-6") == 0
    rep = read_json(tmp_path / "report.json")
    assert rep["settle_s"]["0.01"] <= 300e-9
    with open(tmp_path / "input.csv") as fh:
        u = np.array([row[1] for row in list(csv.reader(fh))[1:]], dtype=float)
    assert np.max(np.abs(u)) <= 40 * rep["amplitude"] * (1 + 1e-12)


def test_pulse_zero_amplitude_is_flat(tmp_path):
    assert run(tmp_path, "pulse", "--amplitude", "0", "--duration", "4e-6") == 0
    with open(tmp_path / "trace.csv") as fh:
        f = np.array([row[1] for row in list(csv.reader(fh))[1:]], dtype=float)
    assert np.ptp(f) == 0.0
    assert f[0] == pytest.approx(6.6e9)


def test_pulse_unknown_shape_rejected(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["pulse", "--shape", "triangle"])


def test_sweep_single_variant(tmp_path):
    coil = CoilSpec(10, 1.3e-3, 4e-3, 0.0, 10e-3)
    scene = geometry.vacuum_scene(coil, Domain(6e-3, -8e-3, 8e-3)).to_dict()
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"variants": [{"name": "bare", "scene": scene}], "spacing": 200e-6,
                               "line_points": 11}))
    assert run(tmp_path, "sweep", "--config", str(cfg)) == 0
    (v,) = read_json(tmp_path / "sweep.json")["variants"]
    assert v["name"] == "bare" and v["ratio_to_first"] == 1.0
    assert v["z"] == pytest.approx(3e-3)
    with open(tmp_path / "sweep.csv") as fh:
        assert len(list(csv.reader(fh))) == 12


def test_reruns_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ("fluxmap", "--points", "101", "--noise-hz", "1e5", "--seed", "11", "--fit")
    assert run(a, *args) == 0
    assert run(b, *args) == 0
    for name in ("fluxmap.csv", "fluxmap.json", "fit.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma, mb = read_json(a / "manifest.json"), read_json(b / "manifest.json")
    ma.pop("wall_time_s"), mb.pop("wall_time_s")
    assert ma == mb
