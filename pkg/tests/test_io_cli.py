import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eiscale import cli
from eiscale.experiment import EiCurve, ScaleRecord
from eiscale.io import CSV_HEADER, curve_to_csv, emit_csv, parse_csv, read_csv
from eiscale.plotting import emit_svg

from _tables import ISING_T22, as_curve

finite = st.floats(allow_nan=False, allow_infinity=False)


def test_csv_header_and_rows(tmp_path):
    path = emit_csv(as_curve(ISING_T22, seed=42), tmp_path / "c.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "system,block_size,ei_mean_bits,ei_sem_bits,replicates,seed"
    assert len(lines) == 7
    assert lines[5].startswith("ising,16,1.4579,0.0159,10,42")


def test_empty_curve_rejected():
    with pytest.raises(ValueError):
        curve_to_csv(EiCurve("ising", 0, ()))


@given(st.lists(st.tuples(st.integers(1, 4096), finite, finite, st.integers(1, 100)),
                min_size=1, max_size=8), st.integers(0, 2 ** 63 - 1))
def test_csv_round_trip(rows, seed):
    curve = EiCurve("abm", seed, tuple(ScaleRecord(*r) for r in rows))
    assert parse_csv(curve_to_csv(curve)) == curve


def test_parse_rejects_bad_header():
    with pytest.raises(ValueError):
        parse_csv("a,b\n1,2\n")


def test_read_missing_file(tmp_path):
    with pytest.raises(OSError, match="missing.csv"):
        read_csv(tmp_path / "missing.csv")


def test_svg_written(tmp_path):
    path = emit_svg(as_curve(ISING_T22), None, tmp_path / "f.svg")
    text = path.read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text
    assert "xlink:href=\"http" not in text


def test_svg_rejects_other_formats(tmp_path):
    with pytest.raises(ValueError):
        emit_svg(as_curve(ISING_T22), None, tmp_path / "f.png")


def test_svg_is_byte_stable(tmp_path):
    a = emit_svg(as_curve(ISING_T22), None, tmp_path / "a.svg").read_bytes()
    b = emit_svg(as_curve(ISING_T22), None, tmp_path / "b.svg").read_bytes()
    assert a == b


SMALL_ISING = {"system": "ising", "L": 16, "scales": [1, 2, 4, 8], "trials_per_scale": 3,
               "replicates": 2, "master_seed": 3}


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def test_cli_simulate_ising(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", SMALL_ISING)
    out = tmp_path / "run"
    assert cli.main(["simulate", "ising", "--config", cfg, "--out-dir", str(out),
                     "--bootstrap", "20"]) == 0
    assert (out / "curve.csv").read_text() == capsys.readouterr().out
    assert (out / "curve.svg").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seeds"] == [3] and manifest["wall_time_s"] > 0
    assert {"numpy", "numba", "python"} <= set(manifest["versions"])
    assert manifest["configs"][0]["L"] == 16


def test_cli_seed_override(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", SMALL_ISING)
    cli.main(["simulate", "ising", "--config", cfg, "--out-dir", str(tmp_path / "a"),
              "--seed", "11", "--no-plot"])
    assert read_csv(tmp_path / "a" / "curve.csv").seed == 11


def test_cli_simulate_abm(tmp_path):
    cfg = write(tmp_path, "c.json", {"system": "abm", "L": 16, "scales": [1, 4, 16],
                                     "trials_per_scale": 2, "replicates": 2,
                                     "abm": {"n_agents": 20}})
    assert cli.main(["simulate", "abm", "--config", cfg, "--out-dir", str(tmp_path),
                     "--no-plot"]) == 0
    assert read_csv(tmp_path / "curve.csv").system == "abm"


@pytest.mark.parametrize("content", ["{not json", json.dumps({"system": "ising", "L": 10,
                                                               "scales": [3]}),
                                     json.dumps({"system": "abm"}), json.dumps([1, 2])])
def test_cli_config_errors(tmp_path, content):
    cfg = write(tmp_path, "c.json", content)
    assert cli.main(["simulate", "ising", "--config", cfg, "--out-dir", str(tmp_path)]) == 1


def test_cli_missing_config(tmp_path):
    assert cli.main(["simulate", "ising", "--config", str(tmp_path / "nope.json")]) == 1


def test_cli_usage_error():
    assert cli.main(["simulate", "potts", "--config", "x"]) == 1


def test_cli_sweep(tmp_path):
    plan = {"base": {**SMALL_ISING, "scales": [2, 4]},
            "variants": [{"T": 2.0}, {"T": 2.5}], "master_seed": 1}
    cfg = write(tmp_path, "s.json", plan)
    assert cli.main(["sweep", "--config", cfg, "--out-dir", str(tmp_path / "sw")]) == 0
    assert (tmp_path / "sw" / "curve_00.csv").exists()
    assert (tmp_path / "sw" / "curve_01.csv").exists()
    assert (tmp_path / "sw" / "sweep.svg").exists()
    m = json.loads((tmp_path / "sw" / "manifest.json").read_text())
    assert len(m["configs"]) == 2 and m["labels"] == ["T=2.0", "T=2.5"]


def test_cli_analyze(tmp_path, capsys):
    path = emit_csv(as_curve(ISING_T22), tmp_path / "t1.csv")
    assert cli.main(["analyze", str(path), "--bootstrap", "50"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["argmax_scale"] == 16 and not out["boundary_peak"]
    assert out["best_model"] == "Unimodal" and out["peak_scale"] == 16


def test_cli_analyze_runtime_error(tmp_path):
    assert cli.main(["analyze", str(tmp_path / "missing.csv")]) == 2


def test_cli_plot(tmp_path):
    path = emit_csv(as_curve(ISING_T22), tmp_path / "t1.csv")
    out = tmp_path / "t1.svg"
    assert cli.main(["plot", str(path), "-o", str(out), "--bootstrap", "10"]) == 0
    assert "<svg" in out.read_text()
    assert cli.main(["plot", str(path), "-o", str(tmp_path / "t1.png")]) == 1


def test_cli_theory(capsys, tmp_path):
    assert cli.main(["theory", "--model", "exp", "--lambda", "8", "--d", "2",
                     "-o", str(tmp_path / "th.svg")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ell_star"] == pytest.approx(8.0) and out["is_unimodal"]
    assert out["closed_form_ell_star"] == 8.0
    assert (tmp_path / "th.svg").exists()


def test_cli_theory_no_peak(capsys):
    assert cli.main(["theory", "--model", "power", "--alpha", "1", "--d", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ell_star"] is None and not out["is_unimodal"]


def test_cli_theory_missing_param():
    assert cli.main(["theory", "--model", "exp"]) == 1
