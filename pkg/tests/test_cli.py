import json
import subprocess
import sys

import pytest

from qdivisor.cli import main
from qdivisor.report import load_schema, validate_records


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_single_identity(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "kluyver", "--order", "20")
    assert code == 0
    assert out.count("PASS") == 1


def test_verify_all_json(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, _, _ = run(capsys, "verify", "--suite", "all", "--order", "30", "--json", str(path), "--quiet")
    assert code == 0
    records = json.loads(path.read_text())
    validate_records(records, load_schema())
    assert all(r["nq"] == 30 and r["nt"] == 30 for r in records)
    ids = [r["id"] for r in records]
    runs = [i for k, i in enumerate(ids) if k == 0 or ids[k - 1] != i]
    assert len(runs) == len(set(ids))                     # one contiguous block per identity
    assert len({r["id"] for r in records}) >= 30
    informational = [r for r in records if r.get("expected_fail")]
    assert {r["id"] for r in informational} == {"dilcher-original-discrepancy"}


def test_verify_parallel_matches_serial(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "verify", "--suite", "kluyver,lemma7,prelim-qgauss", "--json", str(a), "--quiet")
    run(capsys, "verify", "--suite", "kluyver,lemma7,prelim-qgauss", "--json", str(b), "--quiet", "--jobs", "3")
    strip = lambda rs: [{k: v for k, v in r.items() if k != "millis"} for r in rs]
    assert strip(json.loads(a.read_text())) == strip(json.loads(b.read_text()))


def test_verify_unknown_id_is_usage_error(capsys):
    code, out, err = run(capsys, "verify", "--suite", "no-such-id")
    assert code == 2
    assert "no-such-id" in err and "PASS" not in out


def test_verify_bad_params_is_usage_error(capsys):
    code, _, _ = run(capsys, "verify", "--suite", "ramanujan-entry4", "--params", "c=0.5")
    assert code == 2


def test_usage_errors_from_argparse(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--order", "-3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_io_failure_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--suite", "kluyver", "--order", "10",
                       "--json", str(tmp_path / "missing" / "x.json"))
    assert code == 3 and "I/O" in err


def test_params_and_suite_file(tmp_path, capsys):
    suite = tmp_path / "suite.txt"
    suite.write_text("# comment\nramanujan-entry4 c=-2/7\ndilcher-1 k=3\n")
    code, out, _ = run(capsys, "verify", "--suite-file", str(suite), "--order", "15")
    assert code == 0 and out.count("PASS") == 2
    code, out, _ = run(capsys, "verify", "--suite", "ramanujan-entry4", "--params", "c=3/11", "--order", "15")
    assert code == 0 and "c=3/11" in out


def test_expected_fail_entry_does_not_change_status(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "dilcher-original-discrepancy", "--order", "20")
    assert code == 0
    assert "informational" in out


def test_series_output_matches_builder(capsys):
    code, out, _ = run(capsys, "series", "kluyver/divisor", "--order", "6")
    assert code == 0
    assert out.strip() == "q + 2*q^2 + 2*q^3 + 3*q^4 + 2*q^5 + 4*q^6"


def test_series_json(tmp_path, capsys):
    path = tmp_path / "s.json"
    code, _, _ = run(capsys, "series", "uchimura-3way/uchimura", "--order", "3", "--json", str(path))
    assert code == 0
    records = json.loads(path.read_text())
    validate_records(records, load_schema())


def test_series_bad_target(capsys):
    assert run(capsys, "series", "kluyver")[0] == 2
    assert run(capsys, "series", "kluyver/nope")[0] == 2


def test_simulate_is_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a.json", "b.json"):
        code, text, _ = run(capsys, "simulate", "heap", "--q", "0.5", "--trials", "100000", "--seed", "1",
                            "--json", str(tmp_path / name))
        assert code == 0
        outs.append(text)
    assert outs[0] == outs[1]
    strip = lambda rs: [{k: v for k, v in r.items() if k != "millis"} for r in rs]
    a, b = (json.loads((tmp_path / n).read_text()) for n in ("a.json", "b.json"))
    assert strip(a) == strip(b)
    validate_records(a, load_schema())


def test_simulate_dag_table(tmp_path, capsys):
    path = tmp_path / "d.json"
    code, out, _ = run(capsys, "simulate", "dag", "--n", "10", "--p", "0.5", "--trials", "50000",
                       "--seed", "7", "--json", str(path))
    assert code == 0
    assert "E(n - gamma)" in out and "Var(gamma)" in out
    records = json.loads(path.read_text())
    validate_records(records, load_schema())
    assert sum(records[0]["histogram"].values()) == 50000


def test_simulate_range_checks(capsys):
    with pytest.raises(SystemExit):
        main(["simulate", "heap", "--q", "1.5"])
    assert run(capsys, "simulate", "heap")[0] == 2


def test_partitions_command(tmp_path, capsys):
    path = tmp_path / "p.json"
    code, out, _ = run(capsys, "partitions", "--max-n", "12", "--json", str(path))
    assert code == 0
    validate_records(json.loads(path.read_text()), load_schema())


def test_limit_command(capsys):
    code, out, _ = run(capsys, "limit", "geometric-b", "--b", "-1", "--order", "15", "--show")
    assert code == 0
    assert "- q + q^4 - q^9" in out


def test_report_merges_and_validates(tmp_path, capsys):
    a, b, merged = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "m.json"
    run(capsys, "verify", "--suite", "kluyver", "--order", "10", "--json", str(a))
    run(capsys, "limit", "acs-poly", "--f", "1", "--order", "10", "--json", str(b))
    code, _, _ = run(capsys, "report", str(a), str(b), "--json", str(merged))
    assert code == 0
    records = json.loads(merged.read_text())
    assert sorted(r["command"] for r in records) == ["limit", "verify"]


def test_report_rejects_invalid_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"command": "verify"}]))
    assert run(capsys, "report", str(bad))[0] == 2
    assert run(capsys, "report", str(tmp_path / "absent.json"))[0] == 3


def test_report_flags_failures(tmp_path, capsys):
    rec = {"command": "verify", "id": "kluyver", "params": {}, "nq": 5, "nt": 5, "outcome": "fail",
           "millis": 1.0}
    path = tmp_path / "f.json"
    path.write_text(json.dumps([rec]))
    assert run(capsys, "report", str(path))[0] == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qdivisor.cli", "verify", "--suite", "kluyver", "--order", "8"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "1/1" in proc.stdout
