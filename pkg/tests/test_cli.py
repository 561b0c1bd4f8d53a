import json
from pathlib import Path

import pytest

from tracecalc.cli import main
from tracecalc.config import coerce, parse_config_text, read_config, validate_values
from tracecalc.errors import ConfigError
from tracecalc.experiments import REGISTRY, list_experiments

CONFIGS = sorted((Path(__file__).resolve().parent.parent / "configs").glob("*.cfg"))


def write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "krein-check" in out and "lt-sweep" in out
    assert len(out.strip().splitlines()) - 1 >= 10
    assert list_experiments().count("\n") == len(REGISTRY)


def test_validate_empty(tmp_path, capsys):
    assert main(["validate", write(tmp_path, "# nothing\n")]) == 2
    assert "empty" in capsys.readouterr().out


def test_validate_ok(tmp_path, capsys):
    assert main(["validate", write(tmp_path, "experiment.name = trace-identity\nsweep.pairs = 3\n")]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_unknown_key(tmp_path, capsys):
    assert main(["validate", write(tmp_path, "experiment.name = trace-identity\nsweep.bogus = 3\n")]) == 2
    out = capsys.readouterr().out
    assert "sweep.bogus" in out and "line 2" in out


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    assert main(["validate", str(path)]) == 0


def test_parse_diagnostics():
    text = "experiment.name = a\nnot a line\nfoo.bar = 1\nexperiment.name = b\nsweep.x =\n"
    _, _, diags = parse_config_text(text)
    msgs = [str(d) for d in diags]
    assert msgs[0].startswith("line 2") and "unknown section" in msgs[1]
    assert "duplicate" in msgs[2] and "empty value" in msgs[3]


def test_validate_values_messages():
    assert "missing" in str(validate_values({}, {}, REGISTRY)[0])
    d = validate_values({"experiment.name": "nope"}, {"experiment.name": 1}, REGISTRY)
    assert "krein-check" in str(d[0])
    d = validate_values({"experiment.name": "trace-identity", "sweep.mode": "odd"}, {}, REGISTRY)
    assert "sweep.mode" in str(d[0])


def test_coerce_kinds():
    assert coerce("floats", "1, 2 3") == (1.0, 2.0, 3.0)
    assert coerce("choice:a|b", "b") == "b"
    with pytest.raises(ValueError):
        coerce("choice:a|b", "c")
    assert coerce("potential", "sech2 depth=3 width=1").depth == 3


def test_read_config_error_line(tmp_path):
    with pytest.raises(ConfigError) as exc:
        read_config(write(tmp_path, "experiment.name = lt-sweep\nlattice.h = abc\n"), REGISTRY)
    assert exc.value.line == 2


def test_run_equal_pairs(tmp_path, capsys):
    cfg = write(tmp_path, "experiment.name = trace-identity\nsweep.mode = equal\nsweep.pairs = 5\nsweep.size = 10\n")
    assert main(["run", cfg, "--out", str(tmp_path / "out")]) == 0
    rec = json.loads((tmp_path / "out" / "trace-identity.json").read_text())
    assert rec["passed"] is True
    rows = (tmp_path / "out" / "trace-identity.csv").read_text().splitlines()
    eq = [r for r in rows if r.startswith("random_")]
    assert len(eq) == 5 and all(r.endswith(",0.0") for r in eq)
    assert "[PASS]" in capsys.readouterr().out


def test_run_bare_name(tmp_path):
    assert main(["run", "aizenman-lieb", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "aizenman-lieb.csv").exists()


def test_csv_bit_identical_across_runs_and_threads(tmp_path):
    text = ("experiment.name = hs-apply-accuracy\nsweep.pairs = 2\nsweep.sizes = 6, 8\n"
            "quadrature.y_min = 0.05\nrun.seed = 3\n")
    cfg = write(tmp_path, text)
    outs = []
    for i, threads in enumerate(("1", "1", "3")):
        d = tmp_path / f"o{i}"
        assert main(["run", cfg, "--out", str(d), "--threads", threads]) in (0, 1)
        outs.append((d / "hs-apply-accuracy.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_exit_codes(tmp_path):
    assert main([]) == 2
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2
    assert main(["run", write(tmp_path, "experiment.name = lt-sweep\nlattice.h = 0.35\n"), "--out", str(tmp_path)]) == 2
    # a tolerance scale of 1e-12 makes the residual check unattainable
    small = write(tmp_path, "experiment.name = trace-identity\nsweep.pairs = 2\nsweep.size = 8\n", "s.cfg")
    assert main(["run", small, "--out", str(tmp_path), "--tolerance-scale", "1e-12"]) == 1
    # 3D box beyond the site cap is a numerical-resource failure
    big = write(tmp_path, "experiment.name = lt-sweep\nlattice.d = 3\nlattice.L = 4\nlattice.h = 0.2\n", "b.cfg")
    assert main(["run", big, "--out", str(tmp_path)]) == 3
    assert main(["run", small, "--threads", "0"]) == 2
