import json
import subprocess
import sys

import numpy as np
import pytest

from isounit import quantize
from isounit.cli import main

from test_quantize import three_blobs


@pytest.fixture
def blobs_file(tmp_path):
    x, _ = three_blobs()
    path = tmp_path / "feats.bin"
    quantize.write_features(path, x)
    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_quantize(tmp_path, blobs_file, capsys):
    cb, units = tmp_path / "cb.bin", tmp_path / "units.txt"
    assert run("quantize", "--features", blobs_file, "--k", 3, "--codebook", cb, "--units", units) == 0
    ids = units.read_text().split()
    assert len(ids) == 300 and set(ids) == {"0", "1", "2"}
    assert capsys.readouterr().out.startswith("wcss ")
    assert quantize.read_codebook(cb).k == 3


def test_quantize_errors(tmp_path, blobs_file, capsys):
    out = tmp_path / "cb.bin", tmp_path / "u.txt"
    assert run("quantize", "--features", blobs_file, "--k", 400, "--codebook", out[0], "--units", out[1]) == 3
    assert "TooFewPoints" in capsys.readouterr().err
    assert not out[0].exists() and not out[1].exists()
    assert run("quantize", "--features", tmp_path / "missing.bin", "--k", 3,
               "--codebook", out[0], "--units", out[1]) == 2


def test_quantize_is_byte_stable_across_threads(tmp_path, blobs_file):
    outs = []
    for threads in (1, 8):
        u = tmp_path / f"u{threads}.txt"
        cb = tmp_path / f"cb{threads}.bin"
        assert run("--quiet", "quantize", "--features", blobs_file, "--k", 3, "--threads", threads,
                   "--codebook", cb, "--units", u) == 0
        outs.append((u.read_bytes(), cb.read_bytes()))
    assert outs[0] == outs[1]


def test_dedup_expand_fit_roundtrip(tmp_path):
    z = tmp_path / "z.txt"
    z.write_text("7 7 3 3 3 9\n5\n")
    assert run("dedup", "--units", z, "--out-units", tmp_path / "u.txt", "--out-durations", tmp_path / "d.txt") == 0
    assert (tmp_path / "u.txt").read_text() == "7 3 9\n5\n"
    assert (tmp_path / "d.txt").read_text() == "2 3 1\n1\n"
    assert run("expand", "--units", tmp_path / "u.txt", "--durations", tmp_path / "d.txt",
               "--out", tmp_path / "z2.txt") == 0
    assert (tmp_path / "z2.txt").read_text() == z.read_text()
    assert run("fit-durations", "--units", tmp_path / "u.txt", "--durations", tmp_path / "d.txt",
               "--out", tmp_path / "t.json") == 0
    table = json.loads((tmp_path / "t.json").read_text())
    assert table["mean_duration"] == {"3": 3.0, "5": 1.0, "7": 2.0, "9": 1.0}


def test_dedup_vocab_check(tmp_path):
    z = tmp_path / "z.txt"
    z.write_text("1 2 30\n")
    assert run("dedup", "--units", z, "--vocab-size", 10, "--out-units", tmp_path / "u",
               "--out-durations", tmp_path / "d") == 3


def test_regulate_worked_example(tmp_path):
    (tmp_path / "u.txt").write_text("1 2 3 4\n")
    (tmp_path / "d.txt").write_text("2.2 1.8 2.3 2.7\n")
    (tmp_path / "t.txt").write_text("10\n")
    out = tmp_path / "o.txt"
    assert run("regulate", "--units", tmp_path / "u.txt", "--durations", tmp_path / "d.txt",
               "--targets", tmp_path / "t.txt", "--mode", "bounded", "--out", out) == 0
    assert out.read_text() == "2 2 3 3\n"


def test_regulate_other_modes(tmp_path):
    (tmp_path / "u.txt").write_text("1 2 3\n4 5\n")
    (tmp_path / "d.txt").write_text("2.0 3.0 4.0\n0.4 2.5\n")
    (tmp_path / "t.txt").write_text("7\n10\n")
    out = tmp_path / "o.txt"
    assert run("regulate", "--units", tmp_path / "u.txt", "--durations", tmp_path / "d.txt",
               "--mode", "unbounded", "--out", out) == 0
    assert out.read_text() == "2 3 4\n1 3\n"
    assert run("regulate", "--units", tmp_path / "u.txt", "--durations", tmp_path / "d.txt",
               "--targets", tmp_path / "t.txt", "--mode", "early_stop", "--out", out) == 0
    assert out.read_text() == "2 3 2\n1 3\n"


def test_regulate_with_table(tmp_path):
    (tmp_path / "u.txt").write_text("1 2 9\n")
    (tmp_path / "t.txt").write_text("19\n")
    (tmp_path / "tab.json").write_text(json.dumps({"mean_duration": {"1": 2.5, "2": 4.0}, "fallback": 3.0}))
    out = tmp_path / "o.txt"
    assert run("regulate", "--units", tmp_path / "u.txt", "--table", tmp_path / "tab.json",
               "--targets", tmp_path / "t.txt", "--out", out) == 0
    assert sum(map(int, out.read_text().split())) == 19


def test_regulate_errors(tmp_path, capsys):
    (tmp_path / "u.txt").write_text("1 2\n\n")
    (tmp_path / "d.txt").write_text("1.0 1.0\n\n")
    (tmp_path / "t.txt").write_text("4\n4\n")
    out = tmp_path / "o.txt"
    args = ["regulate", "--units", tmp_path / "u.txt", "--durations", tmp_path / "d.txt",
            "--targets", tmp_path / "t.txt", "--out", out]
    assert run(*args) == 3
    assert "line 2" in capsys.readouterr().err
    (tmp_path / "u.txt").write_text("1 2\n")
    (tmp_path / "d.txt").write_text("1.0 1.0\n")
    assert run(*args) == 3
    (tmp_path / "t.txt").write_text("4\n0\n")
    (tmp_path / "u.txt").write_text("1 2\n3\n")
    (tmp_path / "d.txt").write_text("1.0 1.0\n2.0\n")
    assert run(*args) == 3
    assert "line 2" in capsys.readouterr().err
    assert not out.exists()


def test_timeline(tmp_path):
    (tmp_path / "z.txt").write_text("1 2 2 3 3\n4\n")
    out = tmp_path / "tl.jsonl"
    assert run("timeline", "--units", tmp_path / "z.txt", "--out", out) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert rows[0] == {"audio_units": [1, 2, 2, 3, 3], "video_units": [1, 2, 3], "ref_indices": [0, 1, 2]}
    assert rows[1]["ref_indices"] == [0]
    assert run("timeline", "--units", tmp_path / "z.txt", "--n-ref", 2, "--out", out) == 3
    assert run("timeline", "--units", tmp_path / "z.txt", "--n-ref", 2, "--policy", "pingpong", "--out", out) == 0


def test_report(tmp_path, capsys):
    (tmp_path / "p.txt").write_text("1 1 2 2 3\n4 4 4 5\n")
    out = tmp_path / "r.json"
    assert run("report", "--pred", tmp_path / "p.txt", "--ref", tmp_path / "p.txt", "--out", out) == 0
    text = out.read_text()
    assert text.startswith('{"lr": 1.000, "lc": {"5": 100.00, "10": 100.00, "20": 100.00}, "bleu": 100.00')
    rep = json.loads(text)
    assert rep["repeats"] == 0
    (tmp_path / "len.txt").write_text("5\n5\n")
    assert run("report", "--pred", tmp_path / "p.txt", "--ref-lengths", tmp_path / "len.txt",
               "--lc", "5,25", "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["lr"] == 0.9 and rep["lc"] == {"5": 50.0, "25": 100.0} and rep["bleu"] is None
    (tmp_path / "len.txt").write_text("5\n")
    assert run("report", "--pred", tmp_path / "p.txt", "--ref-lengths", tmp_path / "len.txt", "--out", out) == 3


def test_report_on_bounded_output(tmp_path):
    # regulate a corpus with the bounded mode, expand, and score against the targets
    (tmp_path / "u.txt").write_text("1 2 3\n4 5 6 7\n")
    (tmp_path / "d.txt").write_text("1.5 2.0 0.3\n4.0 1.0 1.0 9.0\n")
    (tmp_path / "t.txt").write_text("11\n6\n")
    assert run("regulate", "--units", tmp_path / "u.txt", "--durations", tmp_path / "d.txt",
               "--targets", tmp_path / "t.txt", "--out", tmp_path / "r.txt") == 0
    assert run("expand", "--units", tmp_path / "u.txt", "--durations", tmp_path / "r.txt",
               "--out", tmp_path / "z.txt") == 0
    assert run("--quiet", "report", "--pred", tmp_path / "z.txt", "--ref-lengths", tmp_path / "t.txt",
               "--out", tmp_path / "rep.json") == 0
    rep = json.loads((tmp_path / "rep.json").read_text())
    assert rep["lr"] == 1.0 and set(rep["lc"].values()) == {100.0}


def test_simulate(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"n_sequences": 200, "vocab_size": 50, "jitter_percent": 20}))
    out = tmp_path / "rep.json"
    assert run("--quiet", "simulate", "--spec", spec, "--modes", "bounded,early_stop", "--out", out) == 0
    first = out.read_bytes()
    rep = json.loads(first)
    assert set(rep) == {"bounded", "early_stop"}
    assert rep["bounded"]["lr"] == 1.0
    assert b'"bounded": {"lr": 1.000, "lc": {"5": 100.00, "10": 100.00, "20": 100.00}' in first
    assert run("--quiet", "simulate", "--spec", spec, "--modes", "bounded,early_stop", "--out", out) == 0
    assert out.read_bytes() == first
    spec.write_text(json.dumps({"n_sequences": 10, "bogus": 1}))
    assert run("--quiet", "simulate", "--spec", spec, "--out", out) == 3
    assert out.read_bytes() == first


def test_config_file_rejects_unknown_keys(tmp_path, blobs_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"k": 3, "colour": "red"}))
    assert run("quantize", "--config", cfg, "--features", blobs_file,
               "--codebook", tmp_path / "c", "--units", tmp_path / "u") == 3
    cfg.write_text(json.dumps({"k": 3, "max_iters": 20}))
    assert run("--quiet", "quantize", "--config", cfg, "--features", blobs_file,
               "--codebook", tmp_path / "c", "--units", tmp_path / "u") == 0


def test_console_entry_point(tmp_path):
    (tmp_path / "z.txt").write_text("1 1 2\n")
    proc = subprocess.run([sys.executable, "-m", "isounit", "dedup", "--units", str(tmp_path / "z.txt"),
                           "--out-units", str(tmp_path / "u"), "--out-durations", str(tmp_path / "d")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "d").read_text() == "2 1\n"


def test_usage_errors_are_validation_errors(tmp_path, capsys):
    assert run("regulate", "--units", "u", "--durations", "d", "--mode", "bogus", "--out", "o") == 3
    assert "invalid choice" in capsys.readouterr().err
    assert run("report", "--pred", "p") == 3
    assert run("--help") == 0
