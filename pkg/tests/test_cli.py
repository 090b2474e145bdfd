from __future__ import annotations

import io
import json

import pytest

from polygen import cli
from polygen import io as pio
from polygen.errors import InputError

from conftest import GROUPS
from finite_corpus import s3


def run(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv: str) -> tuple[int, dict]:
    code, out, _ = run(*argv, "--json")
    return code, json.loads(out)


def group(name: str) -> str:
    return str(GROUPS / f"{name}.yaml")


# dp / dhat -------------------------------------------------------------------


def test_dp_c2xz():
    code, doc = run_json("dp", group("c2xz"), "--prime", "2")
    assert code == 0 and doc["result"]["d_p"] == 2
    code, doc = run_json("dp", group("c2xz"), "--prime", "3")
    assert code == 0 and doc["result"]["d_p"] == 1
    assert doc["schema"] == "polygen-report/1" and doc["command"] == "dp"


def test_dp_bad_cocycle(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("rank: 1\nfinite_part: {cyclic: 2}\naction: [[[-1]]]\ncocycle: [{f: 1, g: 1, value: [1]}]\n")
    code, _, err = run("dp", str(bad), "--prime", "2")
    assert code == 1
    assert "cocycle condition fails" in err


def test_dp_unknown_exit_code():
    code, doc = run_json("dp", group("dinf"), "--prime", "5", "--budget", "1")
    assert code == 2 and doc["outcome"] == "UNKNOWN"


def test_dhat():
    code, doc = run_json("dhat", group("c2xz"))
    assert code == 0 and doc["result"]["dhat"] == 2 and doc["result"]["status"] == "HEURISTIC"
    code, doc = run_json("dhat", group("c2xz"), "--primes", "3,5")
    assert doc["result"]["dhat"] == 1


# generate / verify -------------------------------------------------------------


def test_generate_dinf_and_verify(tmp_path):
    code, out, _ = run("generate", group("dinf"), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["k"] == 3 and len(doc["result"]["generators"]) == 3
    assert doc["certificates"]["certify"] == "PASS"
    report = tmp_path / "report.json"
    report.write_text(out)
    code, vdoc = run_json("verify", group("dinf"), "--from-report", str(report))
    assert code == 0 and vdoc["result"]["index"] == 1 and vdoc["outcome"] == "GENERATES"
    elements = json.dumps(doc["result"]["generators"][:1])
    code, vdoc = run_json("verify", group("dinf"), "--elements", elements)
    assert code == 0 and vdoc["outcome"] == "PROPER" and vdoc["result"]["index"] != 1


def test_generate_coprime_report():
    code, doc = run_json("generate", group("dinf"), "--coprime", "15")
    assert code == 0
    cert = doc["certificates"]["coprime"]
    assert cert["N"] == 15 and cert["gcd"] == 1


def test_generate_avoid():
    code, doc = run_json("generate", group("dinf"), "--avoid", "2,3")
    assert code == 0
    idx = doc["certificates"]["avoid"]["index_first_k_minus_1"]
    assert idx % 2 and idx % 3


def test_reports_are_deterministic():
    first = run("generate", group("p4m"), "--json", "--seed", "11")[1]
    second = run("generate", group("p4m"), "--json", "--seed", "11")[1]
    assert first == second
    assert "timings" not in json.loads(first)
    assert "timings" in json.loads(run("generate", group("z"), "--json", "--timings")[1])


def test_report_replay_reproduces_outcome():
    code, doc = run_json("generate", group("klein_bottle"))
    flags = doc["inputs"]["flags"]
    code2, doc2 = run_json("generate", group("klein_bottle"), "--seed", str(doc["seed"]),
                           *sum(([f"--{k.replace('_', '-')}", str(v)] for k, v in flags.items()), []))
    assert doc2 == doc


def test_human_output():
    code, out, _ = run("generate", group("c2xz"))
    assert code == 0 and "size k = 2" in out and "certify: PASS" in out


# other commands ----------------------------------------------------------------


def test_fox_command():
    code, out, _ = run("fox", "--word", "[x2,x1]", "--arity", "2", "--index", "2")
    assert code == 0 and "1 - x2 x1 x2^-1" in out
    code, doc = run_json("fox", "--word", "[x2,x1]", "--arity", "2", "--assign", "[[[-1]], [[1]]]")
    assert doc["result"]["derivatives"]["2"]["operator"] == [[2]]
    assert doc["result"]["derivatives"]["2"]["image_index"] == 2


def test_fox_syntax_error():
    code, _, err = run("fox", "--word", "[x2,x1", "--arity", "2")
    assert code == 1 and "position 6" in err
    code, _, err = run("fox", "--word", "x3", "--arity", "2")
    assert code == 1


def test_nakayama_command():
    code, doc = run_json("nakayama", "--matrices", "[[0,-1],[1,0]]", "--depth", "2")
    assert code == 0 and doc["result"]["M"] == 2
    assert doc["certificates"]["word_operator_is_M_power"] is True
    code, doc = run_json("nakayama", "--matrices", "[[1,1],[0,1]]")
    assert code == 1 and doc["result"]["reason"] == "not-perfect"


def test_quotient_command():
    code, doc = run_json("quotient", group("dinf"), "--mod", "3")
    assert code == 0 and doc["result"]["order"] == 6 and doc["result"]["d"] == 2
    code, _, err = run("quotient", group("z3_s3"), "--mod", "50")
    assert code == 1 and "cap" in err


def test_gaschutz_command(tmp_path):
    q = s3()
    table = tmp_path / "s3.yaml"
    table.write_text("table: " + json.dumps(q.mult_table.tolist()) + "\n")
    a3 = [g for g in range(6) if q.element_orders()[g] == 3]
    t = q.perm_generators[0]
    code, doc = run_json("gaschutz", str(table), "--normal", str(a3[0]), "--tuple", f"{t},0")
    assert code == 0 and doc["certificates"]["generates"] is True
    code, _, err = run("gaschutz", str(table), "--normal", str(t), "--tuple", f"{t}")
    assert code == 1 and "normal" in err


def test_input_errors():
    assert run("dp", "/nonexistent.yaml", "--prime", "2")[0] == 1
    assert run("dp", group("z"), "--prime", "4")[0] == 1
    assert run("bogus")[0] == 1
    assert run("verify", group("z"))[0] == 1


# file loading ---------------------------------------------------------------------


def test_action_must_extend(tmp_path):
    doc = {"rank": 1, "finite_part": {"cyclic": 3}, "action": [[[-1]]]}
    with pytest.raises(InputError, match="does not extend"):
        pio.spec_from_document(doc)


def test_cocycle_keys_as_words():
    doc = {"rank": 2, "finite_part": {"cyclic": 2}, "action": [[[1, 0], [0, -1]]],
           "cocycle": [{"f": "x1", "g": "x1", "value": [1, 0]}]}
    spec = pio.spec_from_document(doc).spec
    s = spec.element((0, 0), 1)
    assert spec.mul(s, s) == spec.element((1, 0), 0)


def test_loader_rejects_malformed():
    with pytest.raises(InputError):
        pio.spec_from_document({"rank": 1, "finite_part": {"cyclic": 2}, "action": [[[1]]], "extra": 1})
    with pytest.raises(InputError):
        pio.spec_from_document({"rank": 1, "finite_part": {"cyclic": 2}, "action": []})
    with pytest.raises(InputError):
        pio.spec_from_document({"rank": "one", "finite_part": {"cyclic": 2}, "action": [[[1]]]})
    with pytest.raises(InputError):
        pio.parse_document("rank: [", "x")


def test_permutation_generators_match_action():
    desc = pio.load_group(GROUPS / "p4m.yaml")
    spec = desc.spec
    r, s = desc.f_generators
    assert spec.action[r] == ((0, -1), (1, 0))
    assert spec.action[s] == ((1, 0), (0, -1))


def test_json_group_file(tmp_path):
    path = tmp_path / "dinf.json"
    path.write_text(json.dumps({"rank": 1, "finite_part": {"table": [[0, 1], [1, 0]]}, "action": [[[-1]]]}))
    code, doc = run_json("dp", str(path), "--prime", "3")
    assert code == 0 and doc["result"]["d_p"] == 2
