import csv
import json
import math
import shutil
import subprocess
import sys

import pytest

from toricstab.cli import JobSpec, UsageError, load_corpus, main, run, self_test
from toricstab.cli import _bundled


def call(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def call_json(argv, capsys):
    code, out, _ = call(argv, capsys)
    return code, json.loads(out)


def test_stabilize_example(capsys):
    code, rep = call_json(["stabilize", "--monomial", "-1 3 3 2", "--fan", "p2"], capsys)
    assert code == 0
    assert rep["iterate_used"] == 2
    assert set(map(tuple, rep["fan_before"])) <= set(map(tuple, rep["fan_after"]))
    assert set(rep["determinants"]) == {1}
    assert rep["final_report"]["verdict"] == "StableAlongEta"


def test_rotation_example(capsys):
    code, rep = call_json(["rotation", "--map", "usnich.json", "--max-period", "10"], capsys)
    assert code == 0
    assert rep["rho"] == {"m": 4, "n": 5}
    assert rep["orbit"][0] == [1, 0] and len(rep["orbit"]) == 5


def test_degrees_example(capsys):
    code, rep = call_json(["degrees", "--monomial", "-1 -1 3 -1"], capsys)
    assert code == 0
    assert (rep["delta"], rep["lambda2"], rep["lambda1"]) == (4, 4, "2")


def test_verdict_exit_codes(capsys):
    code, rep = call_json(["verdict", "--monomial", "-1 3 3 2"], capsys)
    assert code == 0 and rep["verdict"] == "f² corrigible (along η)"
    code, rep = call_json(["verdict", "--monomial", "1 -2 1 1"], capsys)
    assert code == 2 and rep["verdict"] == "no iterate stabilizable"
    code, rep = call_json(["verdict", "--monomial", "1 -1 1 1", "--max-period", "4"], capsys)
    assert code == 3 and rep["verdict"] == "unknown up to period 4"
    code, rep = call_json(["stabilize", "--monomial", "1 -2 1 1"], capsys)
    assert code == 2 and rep["type"] == "NotStabilizable"
    code, rep = call_json(["rotation", "--monomial", "1 -2 1 1"], capsys)
    assert code == 3


def test_domain_error_is_json(capsys):
    code, rep = call_json(["tropicalize", "--monomial", "1 2 2 4"], capsys)
    assert code == 1 and rep["type"] == "SingularMatrixError"


def test_stability_command(capsys):
    code, rep = call_json(["stability", "--map", "reversing_unstable"], capsys)
    assert code == 0 and rep["verdict"] == "Destabilized"
    from_x = [o for o in rep["orbits"] if o["ray"] == [1, 0]]
    assert len(from_x) == 1 and from_x[0]["k"] == 1
    code, rep = call_json(
        ["stability", "--map", "usnich", "--fan", "1 0 0 1 -1 0 -1 -1 0 -1"], capsys
    )
    assert rep["verdict"] == "StableAlongEta"
    code, rep = call_json(["stability", "--map", "reversing_unstable", "--iterate", "2"], capsys)
    assert rep["iterate"] == 2


def test_compose_keeps_order(capsys):
    # T o S with S applied first: quarter turn then shear
    code, rep = call_json(["compose", "--monomial", "1 1 0 1", "--monomial", "0 -1 1 0"], capsys)
    assert code == 0
    code2, direct = call_json(["tropicalize", "--monomial", "1 -1 1 0"], capsys)
    assert rep["pieces"] == direct["pieces"]


@pytest.mark.parametrize(
    "argv, field",
    [
        (["stabilize", "--monomial", "1 2 3"], "--monomial"),
        (["stabilize", "--monomial", "a b c d"], "--monomial"),
        (["rotation", "--monomial", "0 -1 1 0", "--max-period", "x"], "--max-period"),
        (["frobnicate"], "frobnicate"),
        (["rotation", "--monomial", "0 -1 1 0", "--max-period", "5000"], "max_period"),
        (["rotation", "--monomial", "0 -1 1 0", "--bound", "0"], "bound"),
        (["rotation"], "map"),
        (["rotation", "--monomial", "0 -1 1 0", "--monomial", "1 0 0 1"], "map"),
        (["rotation", "--monomial", "0 -1 1 0", "--seed", "0 0"], "seed"),
        (["degrees", "--map", "usnich"], "map"),
    ],
)
def test_parse_errors_exit_64(argv, field, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 64
    err = capsys.readouterr()
    assert field in err.err
    assert err.out == ""


def test_bad_fan_is_reported(capsys):
    code, rep = call_json(["stability", "--monomial", "1 0 0 1", "--fan", "1 0 0 1 1 1"], capsys)
    assert code == 1 and rep["type"] == "FanError"


def test_output_is_deterministic():
    argv = [sys.executable, "-m", "toricstab", "stabilize", "--monomial", "-1 3 3 2"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.endswith(b"\n")
    json.loads(a)


def test_timing_goes_to_stderr(capsys):
    code, out, err = call(["--timing", "degrees", "--monomial", "1 0 0 1"], capsys)
    assert "elapsed" in err and "elapsed" not in out


def test_write_fan_and_reload(tmp_path, capsys):
    fan_file = tmp_path / "fan.json"
    call_json(["stabilize", "--map", "reversing_unstable", "--write-fan", str(fan_file)], capsys)
    rays = json.loads(fan_file.read_text())
    code, rep = call_json(["stability", "--map", "reversing_unstable", "--iterate", "2", "--fan", str(fan_file)], capsys)
    assert rep["verdict"] == "StableAlongEta" and rep["fan"] == rays


def test_emit_rays_csv(tmp_path, capsys):
    path = tmp_path / "angles.csv"
    call_json(["rotation", "--monomial", "1 -2 1 1", "--iterations", "50", "--emit-rays-csv", str(path)], capsys)
    rows = list(csv.reader(path.open()))
    # header, the seed, then one row per iteration
    assert rows[0] == ["step", "angle"] and len(rows) == 52
    assert all(0 <= float(a) < 2 * math.pi for _, a in rows[1:])


def test_bit_limit_env(monkeypatch, capsys):
    monkeypatch.setenv("TORICSTAB_MAX_BIGINT_BITS", "8")
    code, rep = call_json(["tropicalize", "--monomial", "1000 1 1 1"], capsys)
    assert code == 1 and rep["type"] == "CoefficientGrowthError"
    monkeypatch.setenv("TORICSTAB_MAX_BIGINT_BITS", "lots")
    assert main(["degrees", "--monomial", "1 0 0 1"]) == 64
    from toricstab.lattice import set_max_bits

    set_max_bits(None)


def test_batch(tmp_path, capsys):
    jobs = [
        {"command": "degrees", "monomial": [-1, 3, 3, 2]},
        {"command": "rotation", "map": "usnich", "max_period": 10},
        {"command": "verdict", "monomial": [1, -2, 1, 1]},
    ]
    path = tmp_path / "jobs.json"
    path.write_text(json.dumps(jobs))
    code1, serial = call_json(["batch", str(path)], capsys)
    code2, parallel = call_json(["batch", str(path), "--jobs", "2"], capsys)
    assert serial == parallel and code1 == code2 == 2
    assert serial[0]["report"]["delta"] == -11
    assert serial[1]["report"]["rho"] == {"m": 4, "n": 5}


def test_jobspec_validation():
    with pytest.raises(UsageError, match="unknown field"):
        JobSpec.from_dict({"command": "degrees", "monomial": [1, 0, 0, 1], "colour": 1})
    with pytest.raises(UsageError, match="command"):
        JobSpec.from_dict({"monomial": [1, 0, 0, 1]})
    report, code = run(JobSpec.from_dict({"command": "degrees", "monomial": [[2, 1], [1, 1]]}))
    assert code == 0 and report["delta"] == 1


def test_self_test_bundled_corpus(capsys):
    code, rep = call_json(["self-test"], capsys)
    assert code == 0 and rep["failed"] == []
    assert rep["passed"] == len(load_corpus()) >= 15


def test_self_test_corrupted_entry(tmp_path):
    corpus = tmp_path / "corpus"
    shutil.copytree(_bundled("corpus"), corpus)
    entry = json.loads((corpus / "reversing_unstable_degrees.json").read_text())
    entry["expected"]["delta"] = 11
    (corpus / "reversing_unstable_degrees.json").write_text(json.dumps(entry))
    rep, code = self_test(corpus)
    assert code != 0
    assert rep["failed"] == ["reversing_unstable_degrees"]
    bad = [e for e in rep["entries"] if e["name"] == "reversing_unstable_degrees"][0]
    assert "delta" in bad["mismatch"]


def test_self_test_empty_corpus(tmp_path, capsys):
    code, rep = call_json(["self-test", "--corpus", str(tmp_path)], capsys)
    assert code == 0 and rep["passed"] == 0
    assert "empty" in rep["warning"]
