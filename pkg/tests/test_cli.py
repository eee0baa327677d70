from __future__ import annotations

import json
import subprocess
import sys

import pytest

import scenarios as sc
from udts.cli import main
from udts.interp import program_to_json
from udts.structures import family_to_json


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_family_builtin_pairs(capsys):
    code, doc = run_cli(capsys, "family", "--builtin", "bool-pairs", "--radix", "4")
    assert code == 0
    assert doc["count"] == 2 and doc["ok"]


@pytest.mark.parametrize("name", ["gcc-bool", "bool01", "plain-closure", "address", "protected", "uint"])
def test_family_builtins_wellformed(capsys, name):
    assert run_cli(capsys, "family", "--builtin", name)[0] == 0


def test_family_file_size_zero(tmp_path, capsys):
    doc = {"type": "T", "radix": 4, "size": 0, "values": ["a"], "members": [{"id": "z", "encode": {"a": []}}]}
    path = tmp_path / "fam.json"
    path.write_text(json.dumps(doc))
    code, report = run_cli(capsys, "family", str(path))
    assert code == 1
    assert report["members"][0]["violations"][0]["kind"] == "size"


def test_family_file_round_trip(tmp_path, capsys):
    path = tmp_path / "fam.json"
    path.write_text(json.dumps(family_to_json(sc.protected_family())))
    code, report = run_cli(capsys, "family", str(path), "--tables")
    assert code == 0 and report["count"] == 4
    assert report["family"]["type"] == "bool"


def test_family_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["family", str(path)]) == 2
    assert main(["family", str(tmp_path / "missing.json")]) == 2
    path.write_text(json.dumps({"type": "T"}))
    assert main(["family", str(path)]) == 2


def test_sensitivity_lemma2_pairs(capsys):
    code, doc = run_cli(capsys, "sensitivity", "--lemma", "2", "--family", "bool-pairs", "--radix", "4")
    assert code == 0 and doc["lemmas"][0]["holds"]


def test_sensitivity_class5_plain_closure(capsys):
    code, doc = run_cli(capsys, "sensitivity", "--class", "5", "--family", "plain-closure")
    assert code == 1
    c = doc["classes"][0]
    assert c["result"] == "NotSensitive"
    payload = c["witness"]["modification"]["payload"]
    assert payload["source_addr"] == c["read_address"] == 0
    assert len(payload["positions"]) == 2
    assert all(r["outcome"] == "Terminated" for r in c["replay"])
    # the report carries the structure tables
    assert c["witness"]["structures"][0]["decode"]


def test_sensitivity_lemma1_gcc(capsys):
    code, doc = run_cli(capsys, "sensitivity", "--lemma", "1", "--family", "gcc-bool")
    assert code == 1
    assert doc["lemmas"][0]["counterexample"] == {"address": 0}


def test_sensitivity_address_family_sources(capsys):
    code, _ = run_cli(capsys, "sensitivity", "--class", "5", "--family", "address", "--source", "1")
    assert code == 0
    code, _ = run_cli(capsys, "sensitivity", "--class", "5", "--family", "address", "--source", "0")
    assert code == 1


def test_sensitivity_protected_all(capsys):
    argv = ["sensitivity", "--family", "protected", "--lemma", "4"]
    for c in "12345":
        argv += ["--class", c]
    code, doc = run_cli(capsys, *argv)
    assert code == 0
    assert [c["result"] for c in doc["classes"]] == ["Sensitive"] * 5


def test_sensitivity_cap(capsys):
    assert main(["sensitivity", "--class", "5", "--family", "plain-closure", "--cap", "1"]) == 3


def test_sensitivity_input_errors(capsys):
    assert main(["sensitivity", "--family", "bool-pairs"]) == 2
    assert main(["sensitivity", "--family", "nope", "--lemma", "1"]) == 2
    assert main(["sensitivity", "--family", "bool-pairs", "--class", "1", "--addr", "99"]) == 2


def test_verify_program_file(tmp_path, capsys):
    prog = {
        "decls": [{"var": "b", "type": "bool", "addr": 0}],
        "stmts": [{"op": "write", "var": "b", "value": "true"}, {"op": "read", "var": "b"}],
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(prog))
    code, doc = run_cli(capsys, "verify", str(path), "--family", "bool=bool-pairs")
    assert code == 0 and doc["verdict"] == "Verified"


def test_verify_embedded_families_and_memory(tmp_path, capsys):
    small, large, _ = sc.alignment_families()
    doc = program_to_json(sc.alignment_program())
    doc["families"] = [family_to_json(large)]
    doc["memory"] = {"radix": 4, "cells": ["U", "U"]}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    code, report = run_cli(capsys, "verify", str(path))
    assert code == 1 and report["reason"] == "AssertFailed"
    doc["families"] = [family_to_json(small)]
    path.write_text(json.dumps(doc))
    assert run_cli(capsys, "verify", str(path))[0] == 0


def test_verify_case_study(capsys, tmp_path):
    code, doc = run_cli(capsys, "verify", "--case-study", "--buggy", "--json", str(tmp_path / "r.json"))
    assert code == 1
    assert doc["culprit_op"] == "bytecopy"
    assert run_cli(capsys, "verify", "--case-study")[0] == 0
    code, rep = run_cli(capsys, "verify", "--replay", str(tmp_path / "r.json"))
    assert code == 1 and rep["reproduced"]


def test_verify_plain_tcb_same_address(capsys):
    assert run_cli(capsys, "verify", "--case-study", "--buggy", "--same-address", "--plain-tcb")[0] == 0


def test_verify_errors(tmp_path, capsys):
    assert main(["verify"]) == 2
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"decls": [{"var": "b", "type": "bool", "addr": 0}], "stmts": []}))
    assert main(["verify", str(path)]) == 2  # no family for bool
    assert main(["verify", str(path), "--family", "bool"]) == 2
    assert main(["verify", str(path), "--family", "bool=bool-pairs", "--cap", "1"]) == 3


def test_reports_are_byte_identical(tmp_path, capsys):
    for i in range(2):
        main(["sensitivity", "--family", "address", "--class", "5", "--seed", "3", "--json", str(tmp_path / f"{i}.json")])
    capsys.readouterr()
    assert (tmp_path / "0.json").read_bytes() == (tmp_path / "1.json").read_bytes()


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "udts.cli", "family", "--builtin", "bool01"], capture_output=True, text=True
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["count"] == 1
