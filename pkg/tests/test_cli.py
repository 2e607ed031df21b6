import json
from fractions import Fraction

import pytest

import robustmaps as rm
from robustmaps.cli import main

FIG1B = [0, 2, 5, 7, 8, 10, 13, 15]


@pytest.fixture()
def files(tmp_path):
    space4 = rm.make_state_space([2, 2, 2, 2, 2])
    space2 = rm.make_state_space([2, 2, 2])
    paths = {}

    def put(name, text):
        path = tmp_path / name
        path.write_text(text)
        paths[name] = str(path)
        return paths[name]

    put("r3.json", rm.spec_to_json(rm.make_rk_spec(space4, 3)))
    put("r2.json", rm.spec_to_json(rm.make_rk_spec(space4, 2)))
    put("r1.json", rm.spec_to_json(rm.make_rk_spec(space2, 1)))
    put("S.json", json.dumps(FIG1B))
    put("empty.json", json.dumps([]))
    xor = rm.from_function(rm.DeterministicMap(space2, (0, 1, 1, 0)))
    put("xor.json", rm.kernel_to_json(xor))
    const = rm.constant_map(space2, (1, 2), (Fraction(1, 3), Fraction(2, 3)))
    put("const.json", rm.kernel_to_json(const))
    paths["dir"] = str(tmp_path)
    return paths


def test_components_figure_data(files, capsys, tmp_path):
    dot = tmp_path / "out.dot"
    code = main(
        ["components", "--spec", files["r3.json"], "--set", files["S.json"], "--dot", str(dot)]
    )
    assert code == 0
    assert "components: 2" in capsys.readouterr().out
    assert dot.read_text().count("subgraph cluster_") == 2

    code = main(["components", "--spec", files["r2.json"], "--set", files["S.json"]])
    assert code == 0
    assert "components: 1" in capsys.readouterr().out


def test_check_robust_failure_prints_witness(files, capsys):
    code = main(["check-robust", "--kernel", files["xor.json"], "--spec", files["r1.json"]])
    assert code == 2
    assert "witness states" in capsys.readouterr().out


def test_check_robust_success(files, capsys):
    code = main(["check-robust", "--kernel", files["const.json"], "--spec", files["r1.json"]])
    assert code == 0
    assert "robust" in capsys.readouterr().out


def test_graph_empty_set(files, capsys, tmp_path):
    dot = tmp_path / "empty.dot"
    code = main(["graph", "--spec", files["r3.json"], "--set", files["empty.json"], "--dot", str(dot)])
    assert code == 0
    assert dot.read_text() == "graph G {\n}\n"


def test_identical_invocations_bytewise_identical(files, tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    for out in (out1, out2):
        assert (
            main(
                ["sample", "--spec", files["r1.json"], "--seed", "9", "--out", str(out)]
            )
            == 0
        )
    assert out1.read_bytes() == out2.read_bytes()


def test_sample_then_verify_ci_round_trip(files, capsys, tmp_path):
    dist = tmp_path / "dist.json"
    assert main(["sample-joint", "--spec", files["r1.json"], "--seed", "3", "--out", str(dist)]) == 0
    assert main(["verify-ci", "--dist", str(dist), "--spec", files["r1.json"]]) == 0
    assert main(["decompose-support", "--dist", str(dist), "--spec", files["r1.json"]]) == 0


def test_ci_failure_exit_two(files, capsys, tmp_path):
    space2 = rm.make_state_space([2, 2, 2])
    xor = rm.from_function(rm.DeterministicMap(space2, (0, 1, 1, 0)))
    p = rm.joint_from(xor, [Fraction(1, 4)] * 4)
    dist = tmp_path / "xordist.json"
    dist.write_text(rm.joint_to_json(p))
    code = main(["ci", "--dist", str(dist), "--spec", files["r1.json"]])
    assert code == 2
    assert "witness pair" in capsys.readouterr().out


def test_maximal_count(files, capsys, tmp_path):
    space2 = rm.make_state_space([2, 2, 2, 2])
    spec_path = tmp_path / "r2n3.json"
    spec_path.write_text(rm.spec_to_json(rm.make_rk_spec(space2, 2)))
    out = tmp_path / "max.json"
    code = main(["maximal", "--spec", str(spec_path), "--out", str(out)])
    assert code == 0
    assert "maximal structures: 17" in capsys.readouterr().out
    assert len(json.loads(out.read_text())) == 17


def test_gibbs_and_project_round_trip(files, capsys, tmp_path):
    fam_path = tmp_path / "fam.json"
    assert (
        main(
            [
                "neuron",
                "--weights",
                "1.0,0.5",
                "--eta",
                "0.2",
                "--beta",
                "1.5",
                "--renormalized",
                "--out",
                str(fam_path),
            ]
        )
        == 0
    )
    pots_path = tmp_path / "pots.json"
    assert main(["gibbs", "--modalities", str(fam_path), "--out", str(pots_path)]) == 0
    back_path = tmp_path / "back.json"
    assert main(["gibbs", "--potentials", str(pots_path), "--out", str(back_path)]) == 0
    fam = rm.modalities_from_json(fam_path.read_text())
    back = rm.modalities_from_json(back_path.read_text())
    for a in fam.subsets():
        for r1, r2 in zip(fam.members[a].rows, back.members[a].rows):
            assert max(abs(x - y) for x, y in zip(r1, r2)) < 1e-9

    proj_path = tmp_path / "proj.json"
    assert (
        main(["project", "--modalities", str(fam_path), "--k", "1", "--out", str(proj_path)])
        == 0
    )
    assert "degenerate rows: 0" in capsys.readouterr().out


def test_bound_and_code_size(files, capsys):
    assert main(["bound", "--spec", files["r1.json"], "--nodes", "1"]) == 0
    assert capsys.readouterr().out.strip() == "2"
    assert main(["code-size", "--n", "3", "--k", "1", "--d", "2"]) == 0
    assert capsys.readouterr().out.strip() == "2"


def test_usage_error_exit_one(capsys):
    assert main(["no-such-command"]) == 1
    assert main([]) == 1
    assert main(["components"]) == 1  # missing --spec


def test_bad_input_exit_one(files, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["components", "--spec", str(bad)]) == 1
    missing = str(tmp_path / "missing.json")
    assert main(["components", "--spec", missing]) == 1
