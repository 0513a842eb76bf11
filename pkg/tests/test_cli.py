"""Command line behavior: exit codes, JSON payload shapes, determinism."""

import json
from fractions import Fraction

import pytest

from iqtheta import FieldId, KMatrix, RelationSpec
from iqtheta.cli import main

THETA_D1_AT_I = 1.1803405990160964  # (pi^(1/4)/Gamma(3/4))^2


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def _spec_json(t_value: Fraction) -> str:
    field = FieldId(1)
    spec = RelationSpec(
        field=field,
        g=1,
        T=KMatrix([[field.element(t_value)]]),
        P=KMatrix.identity(1, field),
        A0=KMatrix.zeros(1, 1, field),
        B0=KMatrix.zeros(1, 1, field),
        name="cli-test",
    )
    return json.dumps(spec.to_json())


def test_eval_frozen_value(capsys):
    code, out = _run(capsys, ["eval", "--d", "1", "--W", "[[[0, 1]]]"])
    assert code == 0
    blob = json.loads(out)
    assert blob["value"][0] == pytest.approx(THETA_D1_AT_I, abs=1e-13)
    assert blob["value"][1] == pytest.approx(0.0, abs=1e-13)
    assert blob["lattice_points_used"] == 49
    assert blob["tail_bound"] < 1e-12


def test_eval_rejects_lower_halfplane(capsys):
    code, _ = _run(capsys, ["eval", "--d", "1", "--W", "[[[0, -1]]]"])
    assert code == 2


def test_eval_truncation_exit(capsys):
    code, _ = _run(
        capsys,
        ["eval", "--d", "1", "--W", "[[[0, 1]]]",
         "--eps", "1e-30", "--max-radius", "4"],
    )
    assert code == 3


def test_eval_bad_json(capsys):
    code, _ = _run(capsys, ["eval", "--d", "1", "--W", "[[junk"])
    assert code == 1


def test_unknown_command(capsys):
    assert main(["frobnicate"]) == 1


def test_source_flags_are_exclusive(capsys):
    code, _ = _run(
        capsys, ["groups", "--preset", "matsumoto", "--spec", _spec_json(Fraction(1))]
    )
    assert code == 1
    code, _ = _run(capsys, ["groups"])
    assert code == 1


def test_groups_spec_payload(capsys):
    code, out = _run(capsys, ["groups", "--spec", _spec_json(Fraction(1, 2))])
    assert code == 0
    blob = json.loads(out)
    assert blob["name"] == "cli-test"
    # T^-1 = 2 is integral, so the character side collapses
    assert blob["G1"]["order"] == 4
    assert blob["G1"]["invariant_factors"] == [2, 2]
    assert blob["G2"]["order"] == 1


def test_groups_cap_exit(capsys):
    code, _ = _run(
        capsys,
        ["groups", "--spec", _spec_json(Fraction(1, 5)), "--max-order", "10"],
    )
    assert code == 4


def test_groups_preset_without_relation(capsys):
    code, _ = _run(capsys, ["groups", "--preset", "jacobi_identity"])
    assert code == 2


def test_build_singular_T(capsys):
    field = FieldId(1)
    spec = RelationSpec(
        field=field,
        g=1,
        T=KMatrix.zeros(2, 2, field),
        P=KMatrix.identity(2, field),
        A0=KMatrix.zeros(1, 2, field),
        B0=KMatrix.zeros(1, 2, field),
    )
    code, _ = _run(capsys, ["build", "--spec", json.dumps(spec.to_json())])
    assert code == 2


def test_build_preset_payload(capsys):
    code, out = _run(capsys, ["build", "--preset", "matsumoto"])
    assert code == 0
    blob = json.loads(out)
    assert blob["groups"]["G1_order"] == 2
    assert blob["groups"]["G2_order"] == 2
    assert blob["spec"]["d"] == 1
    assert blob["expected"]["parametrization_matches"] is True
    # exact scale 1/#G2 as a [num, den] pair
    assert blob["scale"] == [1, 2]


def test_verify_preset_roundtrip(capsys):
    code, out = _run(capsys, ["verify", "--preset", "matsumoto"])
    assert code == 0
    blob = json.loads(out)
    assert blob["all_passed"] is True
    checks = {r["check"] for r in blob["reports"]}
    assert checks == {"relation", "matsumoto_statement_g1"}
    for rep in blob["reports"]:
        assert rep["passed"] is True
        assert rep["residual_rel"] <= rep["tolerance"]
        assert len(rep["lhs"]) == 2 and len(rep["rhs"]) == 2


def test_verify_corruption_is_detected(capsys):
    code, out = _run(capsys, ["verify", "--preset", "matsumoto", "--corrupt-phase"])
    assert code == 5
    blob = json.loads(out)
    assert blob["all_passed"] is False
    relation_rows = [r for r in blob["reports"] if r["check"] == "relation"]
    assert relation_rows and all(not r["passed"] for r in relation_rows)


def test_verify_spec_single_W(capsys):
    code, out = _run(
        capsys,
        ["verify", "--spec", _spec_json(Fraction(1, 2)), "--W", "[[[0, 1]]]"],
    )
    assert code == 0
    blob = json.loads(out)
    assert len(blob["reports"]) == 1
    assert blob["reports"][0]["W_index"] == 0


def test_verify_output_deterministic(capsys):
    argv = ["verify", "--preset", "matsumoto", "--seed", "7"]
    _, first = _run(capsys, argv)
    _, second = _run(capsys, argv)
    assert first == second


def test_decompose_payload_and_crosscheck(capsys):
    spec = json.dumps({"d": 3, "g": 1, "P": [[2, -1], [-1, 2]]})
    code, out = _run(
        capsys, ["decompose", "--spec", spec, "--W", "[[[0, 1]]]"]
    )
    assert code == 0
    blob = json.loads(out)
    assert blob["lambdas"] == [[3, 2], [2, 1]]
    assert blob["lambda_product"] == [3, 1]
    assert blob["monomial_count"] == 16
    assert blob["passed"] is True
    assert blob["residual_rel"] < 1e-10


def test_decompose_repeated_pivots(capsys):
    spec = json.dumps({"d": 2, "g": 1, "P": [[[5, 2], 0], [0, [5, 2]]]})
    code, out = _run(capsys, ["decompose", "--spec", spec])
    assert code == 0
    blob = json.loads(out)
    assert blob["lambdas"] == [[5, 2], [5, 2]]
    assert blob["lambda_product"] == [25, 4]


def test_decompose_rejects_indefinite(capsys):
    spec = json.dumps({"d": 1, "g": 1, "P": [[1, 3], [3, 1]]})
    code, _ = _run(capsys, ["decompose", "--spec", spec])
    assert code == 2


def test_decompose_missing_key(capsys):
    code, _ = _run(capsys, ["decompose", "--spec", json.dumps({"d": 1, "g": 1})])
    assert code == 1


def test_spec_file_input(tmp_path, capsys):
    path = tmp_path / "spec.json"
    path.write_text(_spec_json(Fraction(1, 2)))
    code, out = _run(capsys, ["groups", "--spec", f"@{path}"])
    assert code == 0
    assert json.loads(out)["G1"]["order"] == 4
