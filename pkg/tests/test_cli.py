import json
from fractions import Fraction as F
from pathlib import Path

import pytest

from sweepout import __version__
from sweepout.cli import main


def write_config(directory: Path, n_measures=12, params=None):
    def frac(x):
        return f"{x.numerator}/{x.denominator}"

    measures = []
    for n in range(1, n_measures + 1):
        s = F(1, 4**n)
        measures.append({
            "atoms": [{"coeffs": ["0", frac(s), "0"]},
                      {"coeffs": ["0", "0", frac(s)]}],
            "masses": ["1/2", "1/2"],
        })
    cfg = {
        "basis": {"generators": ["sqrt:2", "sqrt:3"]},
        "measures": measures,
        "params": {
            "measure_index": 0,
            "interval_lo": "0", "interval_hi": "2/5",
            "m_values": [20, 50],
            "epsilon": "1/6", "delta": "1/10",
            "Delta": "1/12",
            "deltas": ["1/10", "1/100"],
            "schedule": [["1/12", "1/2"]],
            "trim_points": 4,
            "floor_scale": 200,
            "chebyshev": {"measure_index": 0, "interval_lo": "1/10",
                          "interval_hi": "1/5", "epsilon": "1/4"},
            **(params or {}),
        },
    }
    (directory / "config.json").write_text(json.dumps(cfg, indent=1))
    return cfg


@pytest.fixture()
def config(tmp_path):
    write_config(tmp_path)
    return tmp_path


def run(config_dir, command, out="out", extra=()):
    return main([command, "--config", str(config_dir / "config.json"),
                 "--out", str(config_dir / out), *extra])


def report(config_dir, command, out="out"):
    with open(config_dir / out / f"report-{command}.json") as fh:
        return json.load(fh)


def test_decompose_command(config):
    assert run(config, "decompose") == 0
    rep = report(config, "decompose")
    assert rep["artifact"]["version"] == __version__
    assert rep["status"] == "ok"
    assert rep["results"]["nu"] == 2 and rep["results"]["p"] == 1
    assert "config_echo" in rep
    assert (config / "out" / "lattice_spec.json").exists()


def test_lattice_count_command(config):
    assert run(config, "lattice-count") == 0
    rows = (config / "out" / "lattice_count.csv").read_text().splitlines()
    assert rows[0] == "m,count,predicted,ratio"
    assert len(rows) == 3
    rep = report(config, "lattice-count")
    for row in rep["results"]["rows"]:
        assert abs(row["ratio"] - 1) < 0.3


def test_find_lambda_command(config):
    assert run(config, "find-lambda") == 0
    rep = report(config, "find-lambda")
    assert "lambda" in rep["results"]
    assert (config / "out" / "lambda_profile.csv").exists()


def test_build_eg_command(config):
    assert run(config, "build-eg") == 0
    rep = report(config, "build-eg")
    assert rep["results"]["certificate"]["ok"]
    assert (config / "out" / "eg_pair.json").exists()


def test_build_verify_trace_pipeline(config):
    assert run(config, "build-witness") == 0
    assert (config / "out" / "witness.json").exists()
    assert (config / "out" / "witness_trimmed.json").exists()
    assert run(config, "verify",
               extra=("--witness", str(config / "out" / "witness.json"))) == 0
    rep = report(config, "verify")
    assert rep["results"]["passed"]
    assert run(config, "trace") == 0
    lines = (config / "out" / "trace.csv").read_text().splitlines()
    assert lines[0] == "entry,n,point_id,value,running_max,running_min"
    assert len(lines) > 10


def test_check_conditions_command(config):
    assert run(config, "check-conditions") == 0
    rep = report(config, "check-conditions")
    rows = rep["results"]["condition_1"]["rows"]
    assert rows[0]["tail_index"] == 3   # sqrt3/4^n < 1/10 from n = 3
    assert rows[1]["tail_index"] == 4   # sqrt3/4^n < 1/100 from n = 4
    assert all(rep["results"]["condition_1"]["condition_a_ok"])
    assert rep["results"]["chebyshev"]["identity_ok"]


def test_check_conditions_sup_ratio_sweep(tmp_path):
    write_config(tmp_path, n_measures=24,
                 params={"sup_ratio_targets": ["1/12", "1/4"],
                         "delta": "1/2"})
    assert run(tmp_path, "check-conditions") == 0
    rep = report(tmp_path, "check-conditions")
    rows = rep["results"]["sup_ratio_witnesses"]
    assert [r["m"] for r in rows] == [3, 7]
    for r, target in zip(rows, (F(1, 12), F(1, 4))):
        assert float(r["ratio"]) > target


def test_config_validation_exit_3(tmp_path, capsys):
    write_config(tmp_path, params={"delta": "3/2", "Delta": "1/12"})
    assert run(tmp_path, "build-witness") == 3
    err = capsys.readouterr().err
    assert "(0, 1)" in err

    (tmp_path / "config.json").write_text("{ not json")
    assert run(tmp_path, "decompose") == 3

    missing = tmp_path / "nope.json"
    assert main(["decompose", "--config", str(missing), "--out",
                 str(tmp_path / "o")]) == 3


def test_corrupted_witness_exit_1(config):
    assert run(config, "build-witness") == 0
    blob = json.loads((config / "out" / "witness.json").read_text())
    blob["factors"][0]["G"][0] = {"coeffs": ["9/10", "0", "0"]}
    bad = config / "out" / "bad_witness.json"
    bad.write_text(json.dumps(blob))
    code = run(config, "verify", extra=("--witness", str(bad)))
    assert code == 1
    rep = report(config, "verify")
    assert rep["status"] == "verification-failed"
    assert "factor[0]" in json.dumps(rep["results"])


def test_precision_bits_flag(tmp_path):
    # the flag threads through to the comparison escalation cap; well
    # separated values are still decided by the certified float filter
    from sweepout.cli import _basis_from_config

    cfg = write_config(tmp_path)
    basis = _basis_from_config(cfg, None)
    assert basis.precision_cap == 1024
    basis = _basis_from_config(cfg, 256)
    assert basis.precision_cap == 256
    assert run(tmp_path, "build-eg", extra=("--precision-bits", "256")) == 0


def test_byte_identical_reports(config):
    for out in ("outA", "outB"):
        assert run(config, "build-witness", out=out, extra=("--seed", "0")) == 0
        assert run(config, "check-conditions", out=out, extra=("--seed", "0")) == 0
    for name in ("report-build-witness.json", "witness.json",
                 "report-check-conditions.json", "condition1.csv"):
        a = (config / "outA" / name).read_bytes()
        b = (config / "outB" / name).read_bytes()
        assert a == b, name
