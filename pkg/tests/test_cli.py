"""CLI contract: flags, exit codes, byte-reproducible output."""

import json

import numpy as np
import pytest

from locsketch.cli import main
from locsketch.model import write_bits_file
from locsketch.sketch import LocationalSketch, SketchParams, serialize


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def seq_file(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("01101001\n")
    return str(path)


def _write_sketch(path, entries, n=256, v=8, seed=0):
    entries = np.asarray(entries, dtype=np.uint32)
    params = SketchParams(n=n, u=len(entries), v=v, seed=seed)
    path.write_bytes(serialize(LocationalSketch(params=params, entries=entries)))


def test_sketch_output_size_and_stderr(tmp_path, capsys, seq_file):
    out = tmp_path / "a.lsk"
    code, _, err = run_cli(capsys, "sketch", "--in", seq_file, "--out", str(out),
                           "--u", "8", "--v", "8", "--seed", "7")
    assert code == 0
    assert out.stat().st_size == 33
    assert "n=8 u=8 v=8 B=64" in err


def test_sketch_deterministic_across_invocations(tmp_path, capsys, seq_file):
    out1, out2 = tmp_path / "a.lsk", tmp_path / "b.lsk"
    for out in (out1, out2):
        code, _, _ = run_cli(capsys, "sketch", "--in", seq_file, "--out", str(out),
                             "--u", "4", "--v", "6", "--seed", "3")
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_sketch_rejects_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0101x10\n")
    out = tmp_path / "a.lsk"
    code, _, err = run_cli(capsys, "sketch", "--in", str(bad), "--out", str(out),
                           "--u", "2", "--v", "4", "--seed", "0")
    assert code == 2
    assert "offset 4" in err
    assert not out.exists()  # no partial output


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as err:
        main(["sketch", "--in", "x"])  # missing required flags
    assert err.value.code == 1


def test_estimate_identical_sequences(tmp_path, capsys, seq_file):
    a, b = tmp_path / "a.lsk", tmp_path / "b.lsk"
    for out in (a, b):
        run_cli(capsys, "sketch", "--in", seq_file, "--out", str(out),
                "--u", "8", "--v", "8", "--seed", "7")
    code, out, _ = run_cli(capsys, "estimate", str(a), str(b), "--theta0", "0.5")
    assert code == 0
    assert out == "1\n"


def test_estimate_known_mode_value(tmp_path, capsys):
    a, b = tmp_path / "a.lsk", tmp_path / "b.lsk"
    _write_sketch(a, [200] * 8)
    _write_sketch(b, [53] * 8)
    code, out, _ = run_cli(capsys, "estimate", str(a), str(b), "--theta0", "0.5")
    assert code == 0
    assert out == "0.42578125\n"
    code, out, _ = run_cli(capsys, "estimate", str(a), str(b), "--theta0", "0.5", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload == {"theta_hat": 0.42578125, "mode": 147, "count": 8, "abstained": False}


def test_estimate_incompatible_sketches(tmp_path, capsys):
    a, b = tmp_path / "a.lsk", tmp_path / "b.lsk"
    _write_sketch(a, [1, 2], seed=1)
    _write_sketch(b, [1, 2], seed=2)
    code, _, err = run_cli(capsys, "estimate", str(a), str(b), "--theta0", "0.5")
    assert code == 2
    assert "seed" in err


def test_estimate_malformed_file(tmp_path, capsys):
    a = tmp_path / "a.lsk"
    a.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNKJUNKJUNK")
    b = tmp_path / "b.lsk"
    _write_sketch(b, [1])
    code, _, err = run_cli(capsys, "estimate", str(a), str(b), "--theta0", "0.5")
    assert code == 2
    assert "magic" in err


def test_allpairs(tmp_path, capsys):
    d = tmp_path / "sketches"
    d.mkdir()
    _write_sketch(d / "a.lsk", [10] * 8)
    _write_sketch(d / "b.lsk", [10] * 8)
    _write_sketch(d / "c.lsk", [200] * 8)
    code, out, _ = run_cli(capsys, "allpairs", "--dir", str(d), "--theta0", "0.5")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "file_a,file_b,theta_hat"
    assert len(lines) == 4  # 3 pairs
    assert lines[1] == "a.lsk,b.lsk,1"
    # a vs c: differences -190 one way, +190 the other; max is reported
    assert lines[2] == "a.lsk,c.lsk,0.2578125"


def test_allpairs_fifty_sketches_fast(tmp_path, capsys):
    # decode cost is O(m^2 * u), independent of n
    import time

    d = tmp_path / "many"
    d.mkdir()
    gen = np.random.default_rng(8)
    for i in range(50):
        _write_sketch(d / f"s{i:02d}.lsk", gen.integers(0, 4096, 64), n=2**14, v=12)
    start = time.time()
    code, out, _ = run_cli(capsys, "allpairs", "--dir", str(d), "--theta0", "0.5")
    elapsed = time.time() - start
    assert code == 0
    assert len(out.strip().split("\n")) == 1 + 50 * 49 // 2
    assert elapsed < 5.0


def test_allpairs_incompatible_listed(tmp_path, capsys):
    d = tmp_path / "sketches"
    d.mkdir()
    _write_sketch(d / "a.lsk", [10] * 8, seed=1)
    _write_sketch(d / "b.lsk", [10] * 8, seed=1)
    _write_sketch(d / "zz.lsk", [10] * 8, seed=2)
    code, _, err = run_cli(capsys, "allpairs", "--dir", str(d), "--theta0", "0.5")
    assert code == 2
    assert "zz.lsk" in err


def test_baseline_roundtrip(tmp_path, capsys):
    seq = tmp_path / "seq.txt"
    write_bits_file(seq, np.resize([0, 1, 1, 0, 1], 4096).astype(np.uint8))
    a, b = tmp_path / "a.mhs", tmp_path / "b.mhs"
    for out in (a, b):
        code, _, err = run_cli(capsys, "baseline", "sketch", "--in", str(seq), "--out", str(out),
                               "--hashes", "16", "--bits", "16", "--seed", "5")
        assert code == 0
    assert "B=256" in err
    code, out, _ = run_cli(capsys, "baseline", "estimate", str(a), str(b))
    assert code == 0
    assert out == "1\n"


def test_simulate_zero_error_at_full_overlap(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "--n", "512", "--theta0", "0.5", "--theta-grid", "1.0",
        "--trials", "5", "--seed", "9", "--u", "8", "--v", "8",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0].startswith("scheme,B,n,u,v,H,b,theta,")
    fields = lines[1].split(",")
    assert fields[0] == "locational"
    assert fields[10] == "0"  # mse column


def test_simulate_reproducible_and_records(tmp_path, capsys):
    args = ["simulate", "--n", "512", "--theta0", "0.5", "--theta-grid", "0.0,1.0",
            "--trials", "6", "--seed", "4", "--u", "8", "--v", "8",
            "--records", str(tmp_path / "records.csv")]
    code, out1, _ = run_cli(capsys, *args)
    assert code == 0
    rec1 = (tmp_path / "records.csv").read_text()
    code, out2, _ = run_cli(capsys, *args)
    rec2 = (tmp_path / "records.csv").read_text()
    assert out1 == out2
    assert rec1 == rec2
    assert len(rec1.strip().split("\n")) == 13  # header + 2 thetas * 6 trials


def test_simulate_sweep(capsys):
    code, out, _ = run_cli(
        capsys, "--quiet", "simulate", "--n", "512", "--theta0", "0.5",
        "--theta-grid", "0.0,1.0", "--trials", "4", "--seed", "2",
        "--sweep", "--B-grid", "64,128",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0].endswith("worst_case_mse")
    assert len(lines) == 1 + 2 * 2 * 2  # B values x schemes x thetas


def test_verify_repeat_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "repeat", "--n", "256", "--trials", "400",
                           "--seed", "1")
    assert code == 0
    assert out.startswith("PASS repeat:")


def test_verify_lemma_pmf_runs(capsys):
    code, out, _ = run_cli(capsys, "verify", "lemma-pmf", "--n", "1024", "--theta", "0.5",
                           "--v", "6", "--trials", "300", "--seed", "2", "--json")
    assert code == 0
    lines = out.strip().split("\n")
    report = json.loads("\n".join(lines[:-1]))
    assert report["window"] == [30, 31, 32, 33, 34]
    assert lines[-1].startswith("PASS lemma-pmf:")


def test_verify_bins_valid_config(capsys):
    code, out, _ = run_cli(capsys, "verify", "bins", "--n", "4096", "--u", "48", "--v", "16",
                           "--theta0", "0.5", "--trials", "60", "--seed", "3")
    assert code == 0
    assert out.startswith("PASS bins:")


def test_bounds_table(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--theta0", "0.5", "--B", "1")
    assert code == 0
    lines = out.strip().split("\n")
    header = lines[0].split(",")
    row = lines[1].split(",")
    assert row[header.index("lower_converse")] == "0.001953125"
    code, out2, _ = run_cli(capsys, "bounds", "--theta0", "0.5", "--B", "1")
    assert out == out2
