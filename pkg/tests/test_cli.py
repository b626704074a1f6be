import json
import shutil
import struct
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from neurnkit import __version__
from neurnkit.cli import main
from neurnkit.imageio import read_pgm, write_idx_images, write_pgm
from neurnkit.simmat import default_perf_table, import_csv

SPECS = str(resources.files("neurnkit") / "data" / "specs")


def _run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    code, out, _ = _run(capsys, "--version")
    assert code == 0
    assert __version__ in out and "fixtures" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "neurnkit.cli", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("neurn", "align", "patterns", "funcsim", "bench"):
        assert sub in res.stdout


def test_neurn_constant_pgm(tmp_path, capsys):
    src, dst = tmp_path / "in.pgm", tmp_path / "out.pgm"
    src.write_bytes(write_pgm(np.full((5, 6), 0.4)))
    code, _, err = _run(capsys, "neurn", "apply", "--input", str(src), "--output", str(dst))
    assert code == 0, err
    out = read_pgm(dst.read_bytes())
    assert out.shape == (5, 6, 1) and not out.any()


def test_neurn_ascii_pgm_stays_ascii(tmp_path, capsys):
    src, dst = tmp_path / "in.pgm", tmp_path / "out.pgm"
    src.write_bytes(write_pgm(np.random.default_rng(0).random((5, 5)), binary=False))
    assert _run(capsys, "neurn", "apply", "--input", str(src), "--output", str(dst))[0] == 0
    assert dst.read_bytes().startswith(b"P2")


def test_neurn_even_k(tmp_path, capsys):
    code, _, err = _run(capsys, "neurn", "apply", "--input", "x", "--output", "y", "--k", "4")
    assert code == 2
    assert "k must be odd ≥ 3" in err


def test_neurn_idx(tmp_path, capsys):
    src, dst = tmp_path / "in.idx", tmp_path / "out.idx"
    src.write_bytes(write_idx_images(np.random.default_rng(1).random((3, 7, 9))))
    code, _, err = _run(capsys, "neurn", "apply", "--input", str(src), "--output", str(dst),
                        "--k", "5", "--padding", "reflect")
    assert code == 0, err
    data = dst.read_bytes()
    assert struct.unpack(">IIII", data[:16]) == (0x803, 3, 7, 9)
    assert len(data) == 16 + 3 * 7 * 9


def test_neurn_bad_input(tmp_path, capsys):
    src = tmp_path / "in.bin"
    src.write_bytes(b"hello")
    code, _, err = _run(capsys, "neurn", "apply", "--input", str(src),
                        "--output", str(tmp_path / "o"))
    assert code == 1 and "not a PGM" in err
    assert not (tmp_path / "o").exists()
    code, _, err = _run(capsys, "neurn", "apply", "--input", str(tmp_path / "missing"),
                        "--output", str(tmp_path / "o"))
    assert code == 1


def _two_specs(tmp_path):
    d = tmp_path / "specs"
    d.mkdir()
    for name in ("a", "b"):
        (d / f"{name}.json").write_text(json.dumps(
            {"name": name, "layers": ["Conv2D", "ReLU", "MaxPool", "Conv2D"]}))
    return d


def test_align_identical(tmp_path, capsys):
    out = tmp_path / "m.csv"
    code, _, err = _run(capsys, "align", "matrix", "--specs", str(_two_specs(tmp_path)),
                        "--out", str(out))
    assert code == 0, err
    assert out.read_text() == ",a,b\na,1.000000,1.000000\nb,1.000000,1.000000\n"


def test_align_raw(tmp_path, capsys):
    out = tmp_path / "m.csv"
    _run(capsys, "align", "matrix", "--specs", str(_two_specs(tmp_path)), "--raw", "--out", str(out))
    assert out.read_text() == ",a,b\na,16,16\nb,16,16\n"


def test_align_fixture(tmp_path, capsys):
    out = tmp_path / "m.csv"
    code, _, err = _run(capsys, "align", "matrix", "--specs", SPECS, "--cluster-order",
                        "--out", str(out))
    assert code == 0, err
    m = import_csv(out)
    assert len(m) == 12


def test_align_single_spec(tmp_path, capsys):
    d = tmp_path / "one"
    d.mkdir()
    (d / "a.json").write_text('{"name":"a","layers":["Conv2D","ReLU"]}')
    code, _, err = _run(capsys, "align", "matrix", "--specs", str(d), "--out", str(tmp_path / "m"))
    assert code == 2 and "at least 2" in err
    assert not (tmp_path / "m").exists()


def test_align_bad_spec_names_file(tmp_path, capsys):
    d = _two_specs(tmp_path)
    (d / "zz.json").write_text('{"name":"zz","layers":["Wormhole"]}')
    code, _, err = _run(capsys, "align", "matrix", "--specs", str(d), "--out", str(tmp_path / "m"))
    assert code == 1 and "zz.json" in err


def test_patterns_top(tmp_path, capsys):
    out = tmp_path / "top.csv"
    code, _, err = _run(capsys, "patterns", "top", "--specs", SPECS, "--k", "100", "--out", str(out))
    assert code == 0, err
    lines = out.read_text().splitlines()
    assert lines[0] == "pattern,model_count,models"
    assert 1 <= len(lines) - 1 <= 100
    from neurnkit.archspec import default_alphabet, fixture_specs
    alpha = default_alphabet()
    layers = {s.name: s.layers for s in fixture_specs()}
    for line in lines[1:]:
        pattern, count, models = line.split(",")
        code_str = "".join(alpha.code(n) for n in pattern.split("+"))
        names = models.split(";")
        assert int(count) == len(names)
        assert all(code_str in layers[n] for n in names)


def test_patterns_top_k0(tmp_path, capsys):
    code, _, err = _run(capsys, "patterns", "top", "--specs", SPECS, "--k", "0",
                        "--out", str(tmp_path / "x"))
    assert code == 2


def test_patterns_matrix(tmp_path, capsys):
    out = tmp_path / "p.csv"
    code, _, err = _run(capsys, "patterns", "matrix", "--specs", str(_two_specs(tmp_path)),
                        "--uniform", "--out", str(out))
    assert code == 0, err
    assert import_csv(out).values.tolist() == [[1.0, 1.0], [1.0, 1.0]]


def test_funcsim_baseline(tmp_path, capsys):
    out = tmp_path / "f.csv"
    code, stdout, err = _run(capsys, "funcsim", "--variant", "baseline", "--out", str(out))
    assert code == 0, err
    assert "baseline mean off-diagonal cosine" in stdout
    assert len(import_csv(out)) == 14


def test_funcsim_diff(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, stdout, _ = _run(capsys, "funcsim", "--diff", "--exclude-nas", "--out", str(out))
    assert code == 0
    assert "delta" in stdout
    m = import_csv(out, kind="difference")
    assert len(m) == 12


def test_funcsim_missing_variant(tmp_path, capsys):
    t = default_perf_table()
    header = "model,variant," + ",".join(t.tasks)
    rows = [header, "A,baseline," + ",".join(["50"] * 12), "B,baseline," + ",".join(["40"] * 12),
            "B,neurn," + ",".join(["60"] * 12)]
    path = tmp_path / "t.csv"
    path.write_text("\n".join(rows) + "\n")
    code, _, err = _run(capsys, "funcsim", "--table", str(path), "--variant", "neurn",
                        "--out", str(tmp_path / "o"))
    assert code == 1 and "A" in err


def test_funcsim_bad_cell(tmp_path, capsys):
    t = default_perf_table()
    path = tmp_path / "t.csv"
    path.write_text("model,variant," + ",".join(t.tasks) + "\nA,baseline,x" + ",1" * 11 + "\n")
    code, _, err = _run(capsys, "funcsim", "--table", str(path), "--out", str(tmp_path / "o"))
    assert code == 1 and "line 2, column 3" in err


def test_bench_reproducible(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_train": 200, "n_test": 200, "epochs": 20}))
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(capsys, "bench", "run", "--config", str(cfg), "--out", str(a))[0] == 0
    assert _run(capsys, "bench", "run", "--config", str(cfg), "--out", str(b))[0] == 0
    for name in ("report.json", "summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    lines = (a / "summary.csv").read_text().splitlines()
    assert lines[0] == "arm,source_acc,target_acc"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["baseline", "neurn"]


@pytest.mark.parametrize("doc,path", [
    ('{"shift": {"a": "high"}}', "shift.a"),
    ('{"n_train": -5}', "n_train"),
    ("{not json", "$"),
])
def test_bench_bad_config(tmp_path, capsys, doc, path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(doc)
    code, _, err = _run(capsys, "bench", "run", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code != 0
    assert path in err
    assert not (tmp_path / "o" / "report.json").exists()


def test_failed_write_leaves_nothing(tmp_path, capsys, monkeypatch):
    import neurnkit.cli as cli
    real = cli.os.replace
    calls = []

    def flaky(src, dst):
        calls.append(dst)
        if len(calls) == 2:
            raise OSError("disk full")
        return real(src, dst)

    monkeypatch.setattr(cli.os, "replace", flaky)
    files = {tmp_path / "one.txt": b"1", tmp_path / "two.txt": b"2"}
    with pytest.raises(OSError):
        cli._write_outputs(files)
    assert sorted(p.name for p in tmp_path.iterdir()) == []


def test_console_script_installed():
    exe = shutil.which("neurnkit")
    if exe is None:
        pytest.skip("console script not on PATH")
    res = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
