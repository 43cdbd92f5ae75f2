"""CLI contract: exit codes, JSON payloads, determinism."""

import json

import pytest

from chcalc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


def test_decompose_partition_1_1(capsys):
    code, doc, _ = run_json(capsys, "decompose", "--partition", "1,1", "--N", "2")
    assert code == 0
    assert doc["version"] == "cc-cert-v1"
    assert doc["partition"] == [1, 1]
    assert len(doc["terms"]) == 6
    assert doc["verified_ranks"] == [1, 2, 3, 4]


def test_decompose_single_part(capsys):
    code, doc, _ = run_json(capsys, "decompose", "--partition", "1", "--N", "4")
    assert code == 0
    assert doc["terms"] == [
        {"lambda": "1", "functor": {"op": "id", "slot": 0}}
    ]


def test_decompose_overweight_partition_is_usage_error(capsys):
    code, out, err = run(capsys, "decompose", "--partition", "3,2", "--N", "4")
    assert code == 2
    assert out == ""
    assert "usage error" in err


def test_decompose_bad_partition_text(capsys):
    code, _, err = run(capsys, "decompose", "--partition", "a,b", "--N", "2")
    assert code == 2


def test_verify_fresh_certificate(tmp_path, capsys):
    code, out, _ = run(capsys, "decompose", "--partition", "2", "--N", "2")
    assert code == 0
    cert_file = tmp_path / "cert.json"
    cert_file.write_text(out)
    code, doc, _ = run_json(capsys, "verify", "--certificate", str(cert_file))
    assert code == 0
    assert doc["ok"] is True
    assert doc["ranks"] == [1, 2, 3, 4]
    assert all(res == "0" for res in doc["residuals"].values())


def test_verify_tampered_lambda(tmp_path, capsys):
    code, out, _ = run(capsys, "decompose", "--partition", "1,1", "--N", "2")
    doc = json.loads(out)
    doc["terms"][0]["lambda"] = "17"
    cert_file = tmp_path / "tampered.json"
    cert_file.write_text(json.dumps(doc))
    code, payload, err = run_json(
        capsys, "verify", "--certificate", str(cert_file), "--ranks", "1,2,3,4"
    )
    assert code == 1
    assert payload["ok"] is False
    assert any(res != "0" for res in payload["residuals"].values())
    assert "residual" in err


def test_verify_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{this is not json")
    code, out, err = run(capsys, "verify", "--certificate", str(bad))
    assert code == 2
    assert out == ""


def test_verify_missing_file(capsys):
    code, _, err = run(capsys, "verify", "--certificate", "/nonexistent/cert.json")
    assert code == 2


def write_pipeline_inputs(tmp_path):
    bundle = tmp_path / "bundle.json"
    bundle.write_text(json.dumps({"roots": [{"x1": 1}]}))
    pairing = tmp_path / "pairing.json"
    pairing.write_text(
        json.dumps({"n": 1, "ahat": {"1": "1"}, "pairing": {"x1": "1"}})
    )
    return bundle, pairing


def test_pipeline_line_bundle(tmp_path, capsys):
    bundle, pairing = write_pipeline_inputs(tmp_path)
    code, doc, _ = run_json(
        capsys,
        "pipeline",
        "--bundle", str(bundle),
        "--pairing", str(pairing),
        "--witness", "1",
        "--m0", "1",
    )
    assert code == 0
    assert doc["c"] == "1/2"
    assert doc["A_N"] == "1"
    assert doc["C_k0"] == "1"
    assert doc["k0"] == 1
    assert doc["bound"] == "2"
    assert doc["functor"] == {"op": "id", "slot": 0}


def test_pipeline_zero_pairing_exits_3(tmp_path, capsys):
    bundle = tmp_path / "bundle.json"
    bundle.write_text(json.dumps({"roots": [{"x1": 1}]}))
    pairing = tmp_path / "pairing.json"
    pairing.write_text(json.dumps({"n": 1, "ahat": {"1": "1"}, "pairing": {}}))
    code, out, err = run(
        capsys,
        "pipeline",
        "--bundle", str(bundle),
        "--pairing", str(pairing),
        "--witness", "1",
    )
    assert code == 3
    assert out == ""
    assert "hypothesis" in err


def test_pipeline_byte_identical_reruns(tmp_path, capsys):
    bundle, pairing = write_pipeline_inputs(tmp_path)
    argv = [
        "pipeline",
        "--bundle", str(bundle),
        "--pairing", str(pairing),
        "--witness", "1",
        "--m0", "2",
    ]
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2


def test_decompose_byte_identical_reruns(capsys):
    code1, out1, _ = run(capsys, "decompose", "--partition", "2,1", "--N", "3")
    code2, out2, _ = run(capsys, "decompose", "--partition", "2,1", "--N", "3")
    assert code1 == code2 == 0
    assert out1 == out2


def test_adams_k2(capsys):
    code, doc, _ = run_json(capsys, "adams", "--k", "2")
    assert code == 0
    assert doc["version"] == "cc-functor-v1"
    terms = {
        json.dumps(term["functor"], sort_keys=True): term["c"] for term in doc["terms"]
    }
    wedge2 = json.dumps(
        {"op": "wedge", "k": 2, "arg": {"op": "id", "slot": 0}}, sort_keys=True
    )
    square = json.dumps(
        {
            "op": "tensor",
            "left": {"op": "id", "slot": 0},
            "right": {"op": "id", "slot": 0},
        },
        sort_keys=True,
    )
    assert terms == {square: "1", wedge2: "-2"}


def test_adams_invalid_k(capsys):
    code, _, err = run(capsys, "adams", "--k", "0")
    assert code == 2


def test_bounds_inline_functor(capsys):
    functor = {
        "op": "tensor",
        "left": {
            "op": "tensor",
            "left": {"op": "id", "slot": 0},
            "right": {"op": "id", "slot": 0},
        },
        "right": {"op": "wedge", "k": 2, "arg": {"op": "id", "slot": 0}},
    }
    code, doc, _ = run_json(capsys, "bounds", "--functor", json.dumps(functor))
    assert code == 0
    assert doc == {"C": "4"}


def test_bounds_from_file(tmp_path, capsys):
    path = tmp_path / "functor.json"
    path.write_text(json.dumps({"op": "wedge", "k": 3, "arg": {"op": "id", "slot": 0}}))
    code, doc, _ = run_json(capsys, "bounds", "--functor-file", str(path))
    assert code == 0
    assert doc == {"C": "3"}


def test_bounds_malformed_json(capsys):
    code, _, err = run(capsys, "bounds", "--functor", "{oops")
    assert code == 2


def test_hopf_radius_two(capsys):
    code, doc, _ = run_json(capsys, "hopf", "--radius", "2")
    assert code == 0
    assert doc["curvature_norm"] == "1/8"
    assert doc["acw_lower_bound"] == "8"
    assert doc["chern_number"] == "-1"


def test_hopf_rational_radius(capsys):
    code, doc, _ = run_json(capsys, "hopf", "--radius", "7/2")
    assert code == 0
    assert doc["curvature_norm"] == "2/49"
    assert doc["acw_lower_bound"] == "49/2"


def test_hopf_zero_ahat_number_exits_3(capsys):
    code, _, err = run(capsys, "hopf", "--radius", "1", "--ahat-number", "0")
    assert code == 3


def test_hopf_invalid_radius(capsys):
    code, _, err = run(capsys, "hopf", "--radius", "zero")
    assert code == 2
    code, _, err = run(capsys, "hopf", "--radius", "-1")
    assert code == 2


def test_unknown_command_is_argparse_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2


def test_payload_on_stdout_diagnostics_on_stderr(tmp_path, capsys):
    code, out, err = run(capsys, "decompose", "--partition", "1", "--N", "2")
    assert code == 0
    json.loads(out)  # stdout is pure JSON
    assert err == ""
