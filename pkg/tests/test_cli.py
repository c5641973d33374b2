"""End-to-end CLI checks: every subcommand, plus rerun determinism."""

import json
import subprocess
import sys

import pytest

import beamforge as bf
from beamforge.cli import main

SMALL_ARRAY = '{"n_y": 4, "n_z": 4, "n_rf": 2}'
FAST_SYNTH = '{"learning_rate": 0.02, "epochs": 3}'


def _run(argv):
    rc = main(argv)
    assert rc == 0, f"command failed: {argv}"


def _identical_reruns(tmp_path, argv_for):
    """Run a command twice into sibling dirs and compare output bytes."""
    outs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        d.mkdir()
        _run(argv_for(d))
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())
                     if p.is_file()})
    assert outs[0] == outs[1]
    return outs[0]


def test_cli_gen_channels_round_trip(tmp_path):
    files = _identical_reruns(tmp_path, lambda d: [
        "gen-channels", "--seed", "5", "--count", "3",
        "--array", SMALL_ARRAY,
        "--out", str(d / "ch.csv"), "--sidecar", str(d / "ch.json"),
    ])
    assert set(files) == {"ch.csv", "ch.json"}
    cfg = bf.ArrayConfig.half_wavelength(4, 4, n_rf=2)
    loaded = bf.load_channels(tmp_path / "a" / "ch.csv", cfg,
                              sidecar_path=tmp_path / "a" / "ch.json")
    assert len(loaded) == 3
    assert all(c.h.shape == (16,) for c in loaded)


def test_cli_gen_target_round_trip(tmp_path):
    files = _identical_reruns(tmp_path, lambda d: [
        "gen-target", "--shape", "pencil",
        "--params", '{"center_zenith_deg": 90, "center_azimuth_deg": 0, "sidelobe_db": -30}',
        "--out", str(d / "t.csv"), "--sidecar", str(d / "t.json"),
        "--pgm", str(d / "t.pgm"),
    ])
    assert set(files) == {"t.csv", "t.json", "t.pgm"}
    assert files["t.pgm"].startswith(b"P")
    target, spec = bf.load_target(tmp_path / "a" / "t.csv", bf.default_grid(),
                                  sidecar_path=tmp_path / "a" / "t.json")
    assert spec.kind == "pencil"
    assert target.values.max() == 0.0


def test_cli_synth_direct(tmp_path):
    target = tmp_path / "t.csv"
    _run(["gen-target", "--shape", "pencil",
          "--params", '{"center_zenith_deg": 80, "center_azimuth_deg": 10}',
          "--out", str(target)])
    files = _identical_reruns(tmp_path, lambda d: [
        "synth", "--target", str(target), "--arch", "digital",
        "--array", SMALL_ARRAY, "--config", FAST_SYNTH, "--seed", "2",
        "--out", str(d / "f.json"), "--report", str(d / "rep.json"),
    ])
    assert set(files) == {"f.json", "rep.json"}
    report = json.loads(files["rep.json"])
    assert report["mode"] == "direct"
    assert report["seconds"] is None
    assert len(report["trajectory"]) == 3
    loaded = bf.load_beamformer(tmp_path / "a" / "f.json")
    assert loaded.architecture == "digital"


def test_cli_synth_decoder_mode(tmp_path):
    target = tmp_path / "t.csv"
    _run(["gen-target", "--shape", "flattop",
          "--params",
          '{"center_zenith_deg": 90, "center_azimuth_deg": 0, "base_deg": 24,'
          ' "height_deg": 16, "sidelobe_db": -30}',
          "--out", str(target)])
    files = _identical_reruns(tmp_path, lambda d: [
        "synth", "--target", str(target), "--arch", "hybrid",
        "--mode", "decoder", "--array", SMALL_ARRAY,
        "--config", FAST_SYNTH, "--seed", "4",
        "--out", str(d / "f.json"), "--report", str(d / "rep.json"),
    ])
    report = json.loads(files["rep.json"])
    assert report["mode"] == "decoder"
    assert report["decoder"] == "trained in place"
    loaded = bf.load_beamformer(tmp_path / "a" / "f.json")
    assert loaded.architecture == "hybrid"


def test_cli_train_decoder_then_decode(tmp_path):
    tdir = tmp_path / "targets"
    tdir.mkdir()
    for k, az in enumerate((-20, 30)):
        _run(["gen-target", "--shape", "pencil",
              "--params", f'{{"center_zenith_deg": 90, "center_azimuth_deg": {az}}}',
              "--out", str(tdir / f"t{k}.csv")])
    files = _identical_reruns(tmp_path, lambda d: [
        "train-decoder", "--targets", str(tdir), "--arch", "digital",
        "--array", SMALL_ARRAY, "--config", FAST_SYNTH, "--seed", "6",
        "--out", str(d / "dec.json"),
    ])
    assert set(files) == {"dec.json"}
    dec = bf.load_decoder(tmp_path / "a" / "dec.json")

    # a stored decoder drives synth without retraining
    out = tmp_path / "f.json"
    _run(["synth", "--target", str(tdir / "t0.csv"), "--arch", "digital",
          "--mode", "decoder", "--decoder", str(tmp_path / "a" / "dec.json"),
          "--array", SMALL_ARRAY, "--out", str(out)])
    cfg = bf.ArrayConfig.half_wavelength(4, 4, n_rf=2)
    target, _ = bf.load_target(tdir / "t0.csv", bf.default_grid())
    direct = bf.decode(dec, target, cfg)
    stored = bf.load_beamformer(out)
    assert stored.architecture == direct.architecture


def test_cli_eval_sweep(tmp_path):
    ch = tmp_path / "ch.csv"
    side = tmp_path / "ch.json"
    _run(["gen-channels", "--seed", "9", "--count", "3",
          "--array", SMALL_ARRAY, "--out", str(ch), "--sidecar", str(side)])
    files = _identical_reruns(tmp_path, lambda d: [
        "eval", "--channels", str(ch), "--sidecar", str(side),
        "--array", SMALL_ARRAY, "--methods", "mrt,dft-codebook",
        "--snr", "0,10", "--report", str(d / "rep.json"),
        "--plots", str(d),
    ])
    assert set(files) == {"rep.json", "mean_spectral_efficiency.csv",
                          "percent_of_optimal.csv"}
    report = json.loads(files["rep.json"])
    assert report["snr_db"] == [0.0, 10.0]
    assert report["channel_count"] == 3
    assert report["percent_of_optimal"]["mrt"] == [1.0, 1.0]
    assert all(v is None for v in report["seconds"].values())
    header = files["mean_spectral_efficiency.csv"].decode().splitlines()[0]
    assert header == "snr_db,mrt,dft-codebook"


def test_cli_eval_snr_range_syntax(tmp_path):
    ch = tmp_path / "ch.csv"
    _run(["gen-channels", "--seed", "9", "--count", "2",
          "--array", SMALL_ARRAY, "--out", str(ch),
          "--sidecar", str(tmp_path / "ch.json")])
    rep = tmp_path / "rep.json"
    _run(["eval", "--channels", str(ch),
          "--sidecar", str(tmp_path / "ch.json"),
          "--array", SMALL_ARRAY, "--methods", "mrt",
          "--snr=-10:5:10", "--report", str(rep)])
    assert json.loads(rep.read_text())["snr_db"] == [-10.0, -5.0, 0.0, 5.0, 10.0]


def test_cli_pattern_export(tmp_path):
    target = tmp_path / "t.csv"
    _run(["gen-target", "--shape", "pencil",
          "--params", '{"center_zenith_deg": 100, "center_azimuth_deg": -15}',
          "--out", str(target)])
    fjson = tmp_path / "f.json"
    _run(["synth", "--target", str(target), "--arch", "analog",
          "--array", SMALL_ARRAY, "--config", FAST_SYNTH, "--seed", "3",
          "--out", str(fjson)])
    files = _identical_reruns(tmp_path, lambda d: [
        "pattern", "--beamformer", str(fjson), "--array", SMALL_ARRAY,
        "--out", str(d / "p.csv"), "--pgm", str(d / "p.pgm"),
    ])
    assert set(files) == {"p.csv", "p.pgm"}
    pattern = bf.load_pattern_csv(tmp_path / "a" / "p.csv", bf.default_grid())
    assert pattern.values.max() == 0.0


def test_cli_errors_are_one_line_json(tmp_path, capsys):
    rc = main(["gen-channels", "--seed", "1", "--count", "2",
               "--config", '{"path_count_range": [0, 0]}',
               "--out", str(tmp_path / "ch.csv")])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.count("\n") == 1
    payload = json.loads(err)
    assert set(payload) == {"error", "message"}


def test_cli_bad_json_config_fails_cleanly(tmp_path, capsys):
    rc = main(["gen-channels", "--seed", "1", "--count", "2",
               "--config", '{"broken', "--out", str(tmp_path / "ch.csv")])
    assert rc == 1
    assert json.loads(capsys.readouterr().err)["error"] == "JSONDecodeError"


def test_cli_missing_target_file_fails_cleanly(tmp_path, capsys):
    rc = main(["synth", "--target", str(tmp_path / "nope.csv"),
               "--arch", "digital", "--out", str(tmp_path / "f.json")])
    assert rc == 1
    assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"


def test_cli_unknown_method_fails_cleanly(tmp_path, capsys):
    ch = tmp_path / "ch.csv"
    _run(["gen-channels", "--seed", "9", "--count", "1",
          "--array", SMALL_ARRAY, "--out", str(ch),
          "--sidecar", str(tmp_path / "ch.json")])
    rc = main(["eval", "--channels", str(ch),
               "--sidecar", str(tmp_path / "ch.json"),
               "--array", SMALL_ARRAY,
               "--methods", "mrt,psychic", "--report",
               str(tmp_path / "rep.json")])
    assert rc == 1
    assert "psychic" in json.loads(capsys.readouterr().err)["message"]


def test_cli_usage_errors_exit_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--target", "t.csv", "--arch", "quantum",
              "--out", "f.json"])
    assert exc.value.code == 2


def test_cli_entry_point_installed():
    proc = subprocess.run([sys.executable, "-c",
                           "from beamforge.cli import main; main(['--help'])"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "gen-channels" in proc.stdout
