import json
import subprocess
import sys
from collections import Counter

import numpy as np
import pytest

from imdeg.benchgen import load_manifest
from imdeg.calibration import load_calibration
from imdeg.cli import main
from imdeg.degradations import DegradationSpec, active_schedules, apply_degradation
from imdeg.image import load_image, save_image


@pytest.fixture
def imgdir(tmp_path, natural10):
    d = tmp_path / "imgs"
    d.mkdir()
    for i, x in enumerate(natural10[:3]):
        save_image(x, d / f"p{i}.png")
    return d


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "imdeg.cli", "validate"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("ok: 59 operators")


def test_calibrate_single_operator(tmp_path, imgdir, capsys):
    out = tmp_path / "cal.json"
    rc = main(["calibrate", str(imgdir), "--backend", "arniqa", "--term", "gaublur",
               "--metric", "1-ssim", "--out", str(out)])
    assert rc == 0
    cal = load_calibration(out)
    assert cal.table.term == "gaussian_blur" and cal.table.n_images == 3
    assert len(cal.native_strengths) == 5
    assert "arniqa/gaussian_blur 1-ssim N=3" in capsys.readouterr().out


def test_calibrate_one_image_with_extrapolation(tmp_path, imgdir):
    out = tmp_path / "c.json"
    assert main(["calibrate", str(imgdir / "p0.png"), "--backend", "hendrycks", "--term", "gaussian_noise",
                 "--m-max", "2", "--out", str(out)]) == 0
    cal = load_calibration(out)
    assert cal.table.n_images == 1 and len(cal.canonical_strengths) == 7


def test_calibrate_many_into_directory(tmp_path, imgdir):
    out = tmp_path / "cals"
    assert main(["calibrate", str(imgdir), "--backend", "liu", "--term", "fog", "--term", "gamma_damage",
                 "--metric", "psnr", "--metric", "1-ssim", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "liu_fog_1-ssim.json", "liu_fog_psnr.json", "liu_gamma_damage_1-ssim.json", "liu_gamma_damage_psnr.json"]


def test_calibrate_usage_errors(tmp_path, imgdir, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["calibrate", str(empty), "--backend", "liu"]) == 2
    assert main(["calibrate", str(imgdir), "--backend", "liu", "--term", "warp_drive"]) == 2
    assert "warp_drive" in capsys.readouterr().err
    assert main(["calibrate", str(imgdir), "--term", "fog"]) == 2


def test_calibrate_external_metric(tmp_path, imgdir):
    scores = tmp_path / "lpips.csv"
    rows = [f"p{i}_liu_fog_s{l},{0.1 * l}" for i in range(3) for l in range(1, 6)]
    scores.write_text("image_id,lpips\n" + "\n".join(rows) + "\n")
    out = tmp_path / "c.json"
    assert main(["calibrate", str(imgdir), "--backend", "liu", "--term", "fog",
                 "--metric", "external:lpips", "--scores", str(scores), "--out", str(out)]) == 0
    assert load_calibration(out).native_strengths == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5])
    assert main(["calibrate", str(imgdir), "--backend", "liu", "--term", "fog",
                 "--metric", "external:dists", "--scores", str(scores), "--out", str(out)]) == 2


def test_calibrate_degenerate_axis_is_usage_error(tmp_path, imgdir, capsys):
    # the last step weakens, so there is no direction to extrapolate in
    scores = tmp_path / "lpips.csv"
    vals = (0.1, 0.2, 0.3, 0.4, 0.35)
    rows = [f"p{i}_liu_fog_s{l},{vals[l - 1]}" for i in range(3) for l in range(1, 6)]
    scores.write_text("image_id,lpips\n" + "\n".join(rows) + "\n")
    rc = main(["calibrate", str(imgdir), "--backend", "liu", "--term", "fog", "--metric", "external:lpips",
               "--scores", str(scores), "--m-max", "1", "--out", str(tmp_path / "g.json")])
    assert rc == 2 and "cannot extrapolate" in capsys.readouterr().err


def test_apply_native_deterministic(tmp_path, imgdir):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    for out in (a, b):
        assert main(["apply", str(imgdir / "p0.png"), "--backend", "hendrycks", "--term", "gaussian_blur",
                     "--severity", "3", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    x = load_image(imgdir / "p0.png")
    expect = apply_degradation(x, DegradationSpec("hendrycks", "gaussian_blur", 3))
    assert np.array_equal(load_image(a), np.round(expect * 255) / 255)


def test_apply_default_output_name(imgdir):
    assert main(["apply", str(imgdir / "p1.png"), "--backend", "liu", "--term", "fog", "--severity", "2"]) == 0
    assert (imgdir / "p1_liu_fog_s2.png").exists()


def test_apply_canonical_matches_native_and_saturates(tmp_path, imgdir, capsys):
    cal = tmp_path / "cal.json"
    assert main(["calibrate", str(imgdir), "--backend", "hendrycks", "--term", "gaussian_noise",
                 "--m-max", "2", "--out", str(cal)]) == 0
    src = str(imgdir / "p0.png")
    native, canon, sat = tmp_path / "n.png", tmp_path / "c.png", tmp_path / "s.png"
    main(["apply", src, "--backend", "hendrycks", "--term", "gaussian_noise", "--severity", "3", "--out", str(native)])
    capsys.readouterr()
    assert main(["apply", src, "--backend", "hendrycks", "--term", "gaussian_noise", "--severity", "3",
                 "--mode", "canonical", "--calibration", str(cal), "--out", str(canon)]) == 0
    assert "canonical level 3 -> native level 3" in capsys.readouterr().out
    assert canon.read_bytes() == native.read_bytes()

    assert main(["apply", src, "--backend", "hendrycks", "--term", "gaussian_noise", "--severity", "7",
                 "--mode", "canonical", "--calibration", str(cal), "--out", str(sat)]) == 0
    io = capsys.readouterr()
    assert "native level 5" in io.out and "warning:" in io.err


def test_apply_usage_errors(tmp_path, imgdir):
    src = str(imgdir / "p0.png")
    assert main(["apply", src, "--backend", "liu", "--term", "fog", "--severity", "3", "--mode", "canonical"]) == 2
    assert main(["apply", src, "--backend", "liu", "--term", "fog", "--severity", "9"]) == 2
    assert main(["apply", src, "--backend", "liu", "--term", "fog"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert main(["apply", src, "--backend", "liu", "--term", "fog", "--severity", "2",
                 "--mode", "canonical", "--calibration", str(bad)]) == 2


def test_generate_cartesian(tmp_path, imgdir):
    out = tmp_path / "ds"
    assert main(["generate", str(imgdir), "--protocol", "cartesian", "--term", "hendrycks/fog",
                 "--term", "liu/fog", "--jobs", "1", "--out", str(out)]) == 0
    m = load_manifest(out / "manifest.jsonl")
    assert m.header["count"] == 30 and len(list(out.glob("*.png"))) == 30
    assert m.header["measured"] == [] and "strengths" not in m.records[0]
    assert m.header["schedule_sha256"] == active_schedules().sha256


def test_generate_round_robin_balance(tmp_path, natural10):
    src = tmp_path / "src"
    src.mkdir()
    for i, x in enumerate(natural10):
        save_image(x, src / f"q{i}.png")
    out = tmp_path / "ds"
    assert main(["generate", str(src), "--protocol", "round_robin", "--backend", "liu",
                 "--term", "fog", "--term", "gamma_damage", "--jobs", "1", "--out", str(out)]) == 0
    m = load_manifest(out / "manifest.jsonl")
    assert len(m.records) == 10
    c = Counter((r["chain"][0]["term"], r["chain"][0]["severity"]) for r in m.records)
    assert max(c.values()) - min(c.values()) <= 1 and len(c) == 10


def test_generate_random_chains_repeatable(tmp_path, imgdir):
    runs = []
    for i in range(2):
        out = tmp_path / f"ds{i}"
        assert main(["generate", str(imgdir), "--protocol", "random_chains", "--k", "2", "--tier", "1",
                     "--seed", "5", "--jobs", "1", "--out", str(out)]) == 0
        runs.append((out / "manifest.jsonl").read_bytes())
    assert runs[0] == runs[1]


def test_generate_failure_exits_one(tmp_path, imgdir, monkeypatch, capsys):
    monkeypatch.delenv("IMDEG_ASSETS", raising=False)
    broken = imgdir / "p9.png"
    broken.write_bytes(b"not a png")
    out = tmp_path / "ds"
    rc = main(["generate", str(imgdir), "--term", "liu/fog", "--levels", "1", "--jobs", "1", "--out", str(out)])
    assert rc == 1
    m = load_manifest(out / "manifest.jsonl")
    assert m.header["count"] == 4 and m.header["failed"] == 1
    assert "failed: p9_liu_fog_s1.png" in capsys.readouterr().err


def test_generate_usage_errors(tmp_path, imgdir, monkeypatch):
    monkeypatch.delenv("IMDEG_ASSETS", raising=False)
    assert main(["generate", str(imgdir), "--term", "fog"]) == 2  # --out missing
    assert main(["generate", str(imgdir), "--term", "fog", "--out", str(tmp_path / "o")]) == 2
    assert main(["generate", str(imgdir), "--term", "hendrycks/frost", "--out", str(tmp_path / "o")]) == 2
    assert main(["generate", str(imgdir), "--term", "liu/fog", "--levels", "x", "--out", str(tmp_path / "o")]) == 2
    assert main(["generate", str(imgdir), "--protocol", "random_chains", "--k", "40",
                 "--out", str(tmp_path / "o")]) == 2


def test_config_file_and_flag_precedence(tmp_path, imgdir):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"protocol": "cartesian", "term": "liu/fog", "levels": "1,2", "seed": 3,
                               "jobs": 1, "out": str(tmp_path / "from_cfg")}))
    assert main(["generate", str(imgdir), "--config", str(cfg)]) == 0
    m = load_manifest(tmp_path / "from_cfg" / "manifest.jsonl")
    assert m.header["seed"] == 3 and m.header["count"] == 6
    assert main(["generate", str(imgdir), "--config", str(cfg), "--seed", "8",
                 "--out", str(tmp_path / "flag")]) == 0
    assert load_manifest(tmp_path / "flag" / "manifest.jsonl").header["seed"] == 8


def test_config_errors(tmp_path, imgdir):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["validate", "--config", str(cfg)]) == 2
    cfg.write_text("[1, 2]")
    assert main(["validate", "--config", str(cfg)]) == 2
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 2


def test_report_from_manifest_with_external(tmp_path, imgdir, capsys):
    ds = tmp_path / "ds"
    assert main(["generate", str(imgdir), "--term", "hendrycks/gaussian_noise", "--metric", "psnr",
                 "--jobs", "1", "--out", str(ds)]) == 0
    scores = tmp_path / "lpips.csv"
    m = load_manifest(ds / "manifest.jsonl")
    lines = [f"{r['output'][:-4]},0.329" for r in m.records if r["chain"][0]["severity"] == 1]
    scores.write_text("image_id,LPIPS\n" + "\n".join(lines) + "\n")
    capsys.readouterr()
    rep = tmp_path / "rep"
    assert main(["report", str(ds / "manifest.jsonl"), "--scores", str(scores), "--out", str(rep)]) == 0
    io = capsys.readouterr()
    csv_lines = (rep / "severity.csv").read_text().splitlines()
    assert csv_lines[0].startswith("backend,term,psnr_1") and "external:lpips_1" in csv_lines[0]
    assert ",0.329," in csv_lines[1]
    assert "missing level(s) 2,3,4,5" in io.err
    assert (rep / "severity.txt").read_text() == io.out


def test_report_psnr_only_from_calibrations(tmp_path, imgdir, capsys):
    cals = tmp_path / "cals"
    main(["calibrate", str(imgdir), "--backend", "liu", "--term", "fog", "--term", "gamma_damage",
          "--metric", "psnr", "--metric", "1-ssim", "--out", str(cals)])
    capsys.readouterr()
    assert main(["report", str(cals), "--metric", "psnr", "--out", str(tmp_path / "r")]) == 0
    header = (tmp_path / "r" / "severity.csv").read_text().splitlines()[0].split(",")
    assert header == ["backend", "term"] + [f"psnr_{l}" for l in range(1, 6)] + ["non_monotone"]


def test_report_usage_errors(tmp_path):
    assert main(["report"]) == 2
    bad = tmp_path / "x.json"
    bad.write_text("nope")
    assert main(["report", str(bad)]) == 2


def test_validate_ok(capsys):
    assert main(["validate"]) == 0
    assert capsys.readouterr().out.strip() == "ok: 59 operators, registry and schedules consistent"


def test_validate_duplicate_registry_key(tmp_path, capsys):
    from importlib import resources

    text = resources.files("imdeg").joinpath("data/taxonomy.csv").read_text()
    reg = tmp_path / "reg.csv"
    reg.write_text(text + "liu,fog,Camera,G8,E,WX\n")
    assert main(["validate", "--registry", str(reg)]) == 1
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1 and "duplicate entry for liu/fog" in out[0]


def test_validate_schedule_missing_level(tmp_path, capsys):
    doc = json.loads(json.dumps(active_schedules().doc))
    doc["backends"]["hendrycks"]["fog"].pop()
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    assert main(["validate", "--schedules", str(p)]) == 1
    assert "hendrycks/fog has 4 levels" in capsys.readouterr().out


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as e:
        main(["generate", "--protocol", "nope"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 2
