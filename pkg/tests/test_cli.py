import csv
import json
import subprocess
import sys

import pytest

from eigengap_doa.cli import main
from eigengap_doa.evaluation import DEFAULT_METHODS, write_manifest
from eigengap_doa.signal_model import NoiseSpec, SourceSpec, ToneSet, save_record, synth_plane_wave


@pytest.fixture
def recording(tmp_path):
    rec = synth_plane_wave(SourceSpec(30.0, ToneSet(((120.0, 1.0), (210.0, 0.6)))),
                           NoiseSpec(), 2.0, 8192.0, 0)
    return save_record(tmp_path / "rec.wav", rec, {"azimuth_deg": 30.0})


@pytest.fixture
def scenario_json(tmp_path):
    cfg = {"source": {"kind": "band", "f_lo": 75.0, "f_hi": 300.0, "power": 225.0},
           "duration": 1.0, "n_observations": 2, "azimuth_deg": [10.0, 170.0], "snr_db": 20.0}
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(cfg))
    return path


def test_estimate(recording, capsys):
    assert main(["estimate", str(recording)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["azimuth_deg"] == pytest.approx(30.0, abs=1e-4)
    assert set(out) == {"method", "azimuth_deg", "eigengap", "norm_kind", "scheme",
                        "weights", "degenerate"}


@pytest.mark.parametrize("flags", [["--method", "covariance"],
                                   ["--norm", "l1", "--scheme", "trace"],
                                   ["--method", "uniform", "--band", "100:250"]])
def test_estimate_variants(recording, capsys, flags):
    assert main(["estimate", str(recording), *flags]) == 0
    assert json.loads(capsys.readouterr().out)["azimuth_deg"] == pytest.approx(30.0, abs=1e-4)


def test_synth_then_evaluate(scenario_json, tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["synth", "--config", str(scenario_json), "--out", str(data)]) == 0
    manifest = data / "manifest.csv"
    assert manifest.exists()
    with manifest.open() as fh:
        assert len(list(csv.DictReader(fh))) == 2
    out = tmp_path / "report"
    assert main(["evaluate", str(manifest), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["methods"]) == len(DEFAULT_METHODS)
    assert (out / "report.csv").exists()


def test_evaluate_empty_manifest_exits_2(tmp_path, capsys):
    path = write_manifest(tmp_path / "m.csv", [])
    assert main(["evaluate", str(path), "--out", str(tmp_path)]) == 2
    assert "EmptyInputError" in capsys.readouterr().err


def test_missing_recording_exits_2(tmp_path):
    assert main(["estimate", str(tmp_path / "nope.wav")]) == 2


def test_sweep_snr(scenario_json, tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(scenario_json), "--out", str(out),
                 "--kind", "snr", "--values", "0,10,20", "--seeds", "2"]) == 0
    with (out / "sweep.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 * 2 * len(DEFAULT_METHODS)
    assert {r["value"] for r in rows} == {"0.0", "10.0", "20.0"}


def test_sweep_single_method(scenario_json, tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(scenario_json), "--out", str(out),
                 "--values", "5", "--seeds", "3", "--method", "covariance"]) == 0
    with (out / "sweep.csv").open() as fh:
        assert [r["method"] for r in csv.DictReader(fh)] == ["covariance"] * 3


@pytest.mark.parametrize("argv", [
    ["estimate", "x.wav", "--bogus"],
    ["estimate", "x.wav", "--norm", "l3"],
    ["estimate", "x.wav", "--band", "75-300"],
    [],
])
def test_usage_errors_exit_1(argv):
    assert main(argv) == 1


def test_sweep_without_values_is_usage_error(scenario_json, tmp_path):
    assert main(["sweep", "--config", str(scenario_json), "--out", str(tmp_path)]) == 1


def test_module_entry_point(recording):
    proc = subprocess.run([sys.executable, "-m", "eigengap_doa", "estimate", str(recording)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["azimuth_deg"] == pytest.approx(30.0, abs=1e-4)
