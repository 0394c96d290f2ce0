import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from tracefix.cli import main

from conftest import CORPUS

SCHEMAS = Path(__file__).resolve().parent.parent / "src" / "tracefix" / "schemas"


def _schema(name):
    return json.loads((SCHEMAS / name).read_text())


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_trace_largestgap(capsys):
    code, out, err = run_cli(capsys, "trace", str(CORPUS / "largestgap.mj"),
                             "--input", '{"x": [9, 5, 4]}')
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, _schema("trace.schema.json"))
    assert [s["loc"] for s in doc["steps"]] == [2, 3, 4, 5, 6, 7, 8, 5, 10,
                                                11, "exit"]
    assert doc["steps"][-1]["vars"]["res"] == 1


def test_trace_fuel_truncation(capsys):
    code, out, err = run_cli(capsys, "trace", str(CORPUS / "largestgap.mj"),
                             "--input", '{"x": [9, 5, 4]}', "--fuel", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["terminated"] is False
    assert len(doc["steps"]) == 5


def test_trace_missing_input_variable(capsys):
    code, out, err = run_cli(capsys, "trace", str(CORPUS / "largestgap.mj"),
                             "--input", "{}")
    assert code == 2
    assert "x" in err


def test_trace_runtime_fault(capsys):
    code, out, err = run_cli(capsys, "trace", str(CORPUS / "largestgap.mj"),
                             "--input", '{"x": []}')
    assert code == 2
    doc = json.loads(out)
    assert "fault" in doc
    jsonschema.validate(doc, _schema("trace.schema.json"))


def test_repair_fig1(capsys):
    code, out, err = run_cli(capsys, "repair", str(CORPUS / "largestgap.mj"),
                             str(CORPUS / "largestgap.repair.json"))
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, _schema("repair_result.schema.json"))
    assert doc["status"] == "repaired"
    assert doc["syntactic"] == 1
    assert doc["semantic"] == 3
    assert doc["cost"] == 4
    assert doc["patch"] == [{
        "line": 5,
        "before": "for(int i = 1; i < N-1; i++) {",
        "after": "for(int i = 0; i < N-1; i++) {"}]
    assert "-    for(int i = 1;" in err and "+    for(int i = 0;" in err
    # the patched source preserves the original layout
    patched_lines = doc["patched_source"].splitlines()
    original_lines = (CORPUS / "largestgap.mj").read_text().splitlines()
    assert len(patched_lines) == len(original_lines)
    assert patched_lines[4].strip() == "for(int i = 0; i < N-1; i++) {"


def test_repair_output_byte_stable(capsys):
    def one():
        code, out, _ = run_cli(capsys, "repair",
                               str(CORPUS / "largestgap.mj"),
                               str(CORPUS / "largestgap.repair.json"))
        doc = json.loads(out)
        doc["stats"].pop("wall_time")
        return json.dumps(doc, sort_keys=True)
    assert one() == one()


def test_repair_occurrence_addressing(capsys):
    code, out, err = run_cli(capsys, "repair",
                             str(CORPUS / "sublargestgap.mj"),
                             str(CORPUS / "sublargestgap.repair.json"),
                             "--mode", "single-line")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "repaired"
    assert doc["patch"][0]["line"] == 11


def test_repair_allow_lines(capsys, tmp_path):
    req = {"input": {"x": [9, 5, 4]},
           "values": {},
           "tests": [{"input": {"x": [9, 5, 4]}, "output": 5}]}
    del req["values"]
    req_file = tmp_path / "req.json"
    req_file.write_text(json.dumps(req))
    code, out, err = run_cli(capsys, "repair", str(CORPUS / "largestgap.mj"),
                             str(req_file), "--allow-lines", "11")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "repaired"
    assert all(e["line"] == 11 for e in doc["patch"])


def test_repair_no_repair_exit_code(capsys, tmp_path):
    req = {"input": {"x": [9, 5, 4]}, "index": 6, "values": {"max": 9}}
    req_file = tmp_path / "req.json"
    req_file.write_text(json.dumps(req))
    code, out, err = run_cli(capsys, "repair", str(CORPUS / "largestgap.mj"),
                             str(req_file), "--allow-lines", "2",
                             "--max-candidates", "5000")
    assert code == 3
    doc = json.loads(out)
    assert doc["status"] == "no_repair"
    jsonschema.validate(doc, _schema("repair_result.schema.json"))


def test_repair_bad_index(capsys, tmp_path):
    req = {"input": {"x": [9, 5, 4]}, "index": 99, "values": {"max": 9}}
    req_file = tmp_path / "req.json"
    req_file.write_text(json.dumps(req))
    code, out, err = run_cli(capsys, "repair", str(CORPUS / "largestgap.mj"),
                             str(req_file))
    assert code == 2


def test_repair_explain_cegis(capsys):
    code, out, err = run_cli(capsys, "repair", str(CORPUS / "sumpow.mj"),
                             str(CORPUS / "sumpow.repair.json"),
                             "--explain-cegis")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "repaired"
    assert "cegis" in doc
    assert doc["cegis"][-1]["mismatches"] == []


def test_repair_explain_slice(capsys):
    code, out, err = run_cli(capsys, "repair",
                             str(CORPUS / "sublargestgap.mj"),
                             str(CORPUS / "sublargestgap.repair.json"),
                             "--mode", "single-line", "--explain-slice")
    assert code == 0
    assert "relevant=" in err
    assert "largestgap = 5" in err


def test_seed_corpus(capsys):
    code, out, err = run_cli(capsys, "repair", "--seed-corpus")
    assert code == 0
    lines = [l for l in out.splitlines() if l.strip()]
    assert len(lines) >= 5
    assert all("repaired" in l for l in lines)


def test_console_script_entrypoint():
    proc = subprocess.run(
        [sys.executable, "-m", "tracefix.cli", "trace",
         str(CORPUS / "id.mj"), "--input", '{"x": 7}'],
        capture_output=True, text=True)
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["steps"][-1]["vars"]["res"] == 7


def test_parse_error_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.mj"
    bad.write_text("int f( {")
    code, out, err = run_cli(capsys, "trace", str(bad), "--input", "{}")
    assert code == 2


def test_repair_extra_tests_file(capsys, tmp_path):
    tests_file = tmp_path / "tests.json"
    tests_file.write_text(json.dumps([{"input": {"x": [9, 5, 4]},
                                       "output": 5}]))
    code, out, err = run_cli(capsys, "repair", str(CORPUS / "largestgap.mj"),
                             str(CORPUS / "largestgap.repair.json"),
                             "--tests", str(tests_file))
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "repaired"
    assert doc["patch"][0]["line"] == 5
