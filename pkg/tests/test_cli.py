import json

import pytest

from centrep.cli import main
from centrep.instances import targeted_instance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_generate_targeted_and_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "generate", "--dim-i", "6", "--seed", "42", "--case", "terminal-2-3", "--out", str(a))[0] == 0
    assert run(capsys, "generate", "--dim-i", "6", "--seed", "42", "--case", "terminal-2-3", "--out", str(b))[0] == 0
    assert a.read_text() == b.read_text()
    assert json.loads(a.read_text())["dim"] == 6


def test_generate_rejects_small_dimension(capsys):
    code, _, err = run(capsys, "generate", "--dim-i", "1")
    assert code == 2 and "dim-i" in err


def test_bad_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["generate"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["verify", "--input", "x", "--nope"])
    assert info.value.code == 2


def test_verify_e1(tmp_path, capsys):
    path = tmp_path / "e1.json"
    path.write_text(targeted_instance("even-M").dumps())
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--input", str(path), "--report", str(report))
    assert code == 0 and "even-M" in out
    data = json.loads(report.read_text())
    assert data["case_tag"] == "even-M"
    assert data["checks"] == {"A": True, "B": True, "C": True, "D": True}
    assert data["spec_version"] == "1" and data["outcome"] == "pass"
    assert "timing_seconds" not in data


def test_verify_reports_are_reproducible(tmp_path, capsys):
    path = tmp_path / "e2.json"
    path.write_text(targeted_instance("terminal-2-3").dumps())
    outs = [run(capsys, "verify", "--input", str(path), "--json")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    timed = json.loads(run(capsys, "verify", "--input", str(path), "--json", "--timing")[1])
    assert timed["timing_seconds"] >= 0


def test_verify_e2_with_oracle(tmp_path, capsys):
    path = tmp_path / "e2.json"
    path.write_text(targeted_instance("terminal-2-3").dumps())
    code, out, _ = run(capsys, "verify", "--input", str(path), "--oracle", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["nontrivial"] is True
    assert data["oracle"]["witness_degree"] == 3
    assert data["oracle"]["central_degree"] >= 1
    assert run(capsys, "oracle", "--input", str(path))[0] == 0


def test_omega_in_image_exits_3(tmp_path, capsys):
    # theta e3 = e2; Omega = e1 ^ e2 = theta(e1 ^ e3)
    data = {
        "dim": 3,
        "theta": [["0", "0", "0"], ["0", "0", "1"], ["0", "0", "0"]],
        "omega": [{"i": 1, "j": 2, "c": "1"}],
        "epsilon": ["1", "0", "0"],
    }
    code, _, err = run(capsys, "verify", "--input", write(tmp_path, "bad.json", data))
    assert code == 3 and "omega-not-in-im-theta" in err


def test_malformed_input_exits_2(tmp_path, capsys):
    p = tmp_path / "junk.json"
    p.write_text("not json")
    assert run(capsys, "verify", "--input", str(p))[0] == 2
    assert run(capsys, "verify", "--input", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "verify", "--input", write(tmp_path, "x.json", {"dim": 2}))[0] == 2


def test_non_nilpotent_theta_exits_3(tmp_path, capsys):
    data = {"dim": 2, "theta": [["1", "0"], ["0", "0"]], "omega": [{"i": 1, "j": 2, "c": "1"}], "epsilon": ["0", "0"]}
    assert run(capsys, "verify", "--input", write(tmp_path, "nn.json", data))[0] == 3


def test_dimension_cap(tmp_path, capsys, monkeypatch):
    path = tmp_path / "e2.json"
    path.write_text(targeted_instance("terminal-2-3").dumps())
    monkeypatch.setenv("CENTREP_MAX_DIM", "7")
    assert run(capsys, "verify", "--input", str(path))[0] == 0
    assert run(capsys, "verify", "--input", str(path), "--oracle")[0] == 2
    monkeypatch.setenv("CENTREP_MAX_DIM", "4")
    assert run(capsys, "verify", "--input", str(path))[0] == 2


ALGEBRAS = {
    "h3": ({"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": "1"}}]}, "1 2 2 1"),
    "abelian": ({"dim": 3, "brackets": []}, "1 3 3 1"),
    "filiform": (
        {"dim": 4, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": "1"}}, {"i": 1, "j": 3, "coeffs": {"4": "1"}}]},
        "1 2 2 2 1",
    ),
}


@pytest.mark.parametrize("name", sorted(ALGEBRAS))
def test_cohomology_command(tmp_path, capsys, name):
    data, betti = ALGEBRAS[name]
    code, out, _ = run(capsys, "cohomology", "--algebra", write(tmp_path, "a.json", data))
    assert code == 0
    assert f"betti: {betti}" in out
    assert "nontrivial" in out


def test_cohomology_h3_witness_degree(tmp_path, capsys):
    code, out, _ = run(capsys, "cohomology", "--algebra", write(tmp_path, "a.json", ALGEBRAS["h3"][0]), "--json")
    assert json.loads(out)["central_action"]["degree"] == 2


def test_cohomology_jacobi_failure_exits_3(tmp_path, capsys):
    data = {"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": "1"}}, {"i": 1, "j": 3, "coeffs": {"1": "1"}}]}
    assert run(capsys, "cohomology", "--algebra", write(tmp_path, "a.json", data))[0] == 3


def test_lefschetz_two_planes(tmp_path, capsys):
    data = {"dim": 4, "theta": [["0"] * 4 for _ in range(4)], "omega": [{"i": 1, "j": 2, "c": "1"}, {"i": 3, "j": 4, "c": "1"}]}
    code, out, _ = run(capsys, "lefschetz", "--input", write(tmp_path, "p.json", data), "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["decomposition"]["p"] == 2
    assert all(m["bijective"] for m in rep["lefschetz"])


def test_canonical_z_block(tmp_path, capsys):
    data = {"dim": 2, "theta": [["0", "1"], ["0", "0"]], "omega": [{"i": 1, "j": 2, "c": "-1"}]}
    code, out, _ = run(capsys, "canonical", "--input", write(tmp_path, "z.json", data), "--json")
    rep = json.loads(out)
    assert code == 0 and rep["decomposition"]["q"] == 1 and rep["problems"] == []


def test_canonical_rejects_non_invariant_omega(tmp_path, capsys):
    data = {"dim": 3, "theta": [["0", "1", "0"], ["0", "0", "0"], ["0", "0", "0"]], "omega": [{"i": 2, "j": 3, "c": "1"}]}
    assert run(capsys, "canonical", "--input", write(tmp_path, "t.json", data))[0] == 3
