import json
import math

import numpy as np
import pytest

from polarmono import sskf, von_neumann
from polarmono.cli import main
from polarmono.io import write_matrix_json, write_samples_csv


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


@pytest.fixture
def ref_matrix(tmp_path):
    path = tmp_path / "ref.json"
    write_matrix_json(np.diag([0.5, 0.4, 0.1]), path)
    return path


class TestAnalyze:
    def test_reference_state(self, run, ref_matrix):
        code, out, _ = run("analyze", ref_matrix)
        assert code == 0
        rep = json.loads(out)
        m = rep["monotones"]
        assert m["sskf"] == pytest.approx(0.36055513, abs=1e-8)
        assert m["vn"] == pytest.approx(0.14132729, abs=1e-8)
        assert m["lin"] == pytest.approx(0.4, abs=1e-12)
        assert m["edpw"] == pytest.approx(0.1, abs=1e-12)
        assert rep["spectrum"] == [0.5, 0.4, 0.1]
        assert max(rep["geometric_residuals"].values()) < 1e-6

    def test_matches_library(self, run, ref_matrix):
        rep = json.loads(run("analyze", ref_matrix)[1])
        s = (0.5, 0.4, 0.1)
        assert rep["monotones"]["sskf"] == float(f"{sskf(s):.12g}")
        assert rep["monotones"]["vn"] == float(f"{von_neumann(s):.12g}")

    def test_samples_file(self, run, tmp_path):
        path = tmp_path / "s.csv"
        write_samples_csv([(1, 0), (0, 1)], path)
        rep = json.loads(run("analyze", path)[1])
        assert rep["spectrum"] == [0.5, 0.5]
        assert rep["monotones"] == {"p2d": 0}
        assert rep["unpolarized"] == {"2d": True}

    def test_fully_polarized(self, run, tmp_path):
        path = tmp_path / "p.json"
        write_matrix_json(np.diag([1.0, 0, 0]), path)
        rep = json.loads(run("analyze", path)[1])
        m = rep["monotones"]
        assert m.pop("re") == pytest.approx(math.log(2), abs=1e-11)
        assert all(v == pytest.approx(1, abs=1e-11) for v in m.values())

    def test_spectrum_literal(self, run):
        rep = json.loads(run("analyze", "0.1,0.4,0.5")[1])
        assert rep["spectrum"] == [0.5, 0.4, 0.1]

    def test_parse_failure(self, run, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{")
        code, out, err = run("analyze", path)
        assert code == 2 and out == "" and "invalid JSON" in err

    def test_missing_file(self, run, tmp_path):
        assert run("analyze", tmp_path / "nope.json")[0] == 2

    def test_invalid_matrix(self, run, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"dim": 2, "entries": [[[1, 0], [2, 0]], [[2, 0], [1, 0]]]}))
        code, _, err = run("analyze", path)
        assert code == 3 and "positive semidefinite" in err


class TestCompare:
    def test_incomparable(self, run, tmp_path, ref_matrix):
        other = tmp_path / "o.json"
        write_matrix_json(np.diag([0.6, 0.2, 0.2]), other)
        code, out, _ = run("compare", other, ref_matrix, "--theory", "3d-majorization")
        assert code == 0
        assert json.loads(out)["relation"] == "Incomparable"

    @pytest.mark.parametrize("theory", ["3d-majorization", "3d-convex"])
    def test_below_fully_polarized(self, run, theory):
        out = json.loads(run("compare", "0.5,0.3,0.2", "1,0,0", "--theory", theory)[1])
        assert out["relation"] == "Less"

    def test_identical(self, run, ref_matrix):
        out = json.loads(run("compare", ref_matrix, ref_matrix, "--theory", "3d-convex")[1])
        assert out["relation"] == "Equivalent"

    def test_witness(self, run):
        out = json.loads(run("compare", "0.45,0.4,0.15", "0.5,0.4,0.1", "--theory", "3d-convex")[1])
        assert out["relation"] == "Less"
        assert out["witness"]["p"] == pytest.approx(0.5)

    def test_dimension_mismatch(self, run):
        code, _, err = run("compare", "0.6,0.4", "0.5,0.4,0.1", "--theory", "3d-majorization")
        assert code == 4 and "d=3" in err

    def test_out_file(self, run, tmp_path):
        out = tmp_path / "v.json"
        code, stdout, _ = run("compare", "0.7,0.3", "0.6,0.4", "--theory", "2d", "--out", out)
        assert code == 0 and stdout == ""
        assert json.loads(out.read_text())["relation"] == "Greater"


class TestRegions:
    def test_three_labels(self, run, tmp_path, ref_matrix):
        out = tmp_path / "r.csv"
        assert run("regions", ref_matrix, "--theory", "3d-majorization", "--resolution", 40, "--out", out)[0] == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,y,rho1,rho2,rho3,label"
        labels = {line.rsplit(",", 1)[1] for line in lines[1:]}
        assert {"Less", "Greater", "Incomparable"} <= labels

    def test_convex_u_segment_below_reference(self, run, ref_matrix):
        doc = json.loads(run("regions", ref_matrix, "--theory", "3d-convex", "--resolution", 40, "--format", "json")[1])
        seg = [p for p in doc["points"] if p["rho1"] == p["rho2"]]
        assert seg and all(p["label"] == "Less" for p in seg)

    def test_unpolarized_reference(self, run):
        doc = json.loads(run("regions", "0.333333333333,0.333333333333,0.333333333334",
                             "--theory", "3d-majorization", "--resolution", 30, "--format", "json")[1])
        assert "Incomparable" not in doc["counts"] or doc["counts"]["Incomparable"] == 0

    def test_unwritable_output(self, run, tmp_path, ref_matrix):
        code, _, err = run("regions", ref_matrix, "--theory", "3d-convex", "--resolution", 5,
                           "--out", tmp_path / "missing" / "r.csv")
        assert code == 5 and "cannot write" in err

    def test_2d_theory_rejected(self, run, ref_matrix):
        assert run("regions", ref_matrix, "--theory", "2d")[0] == 4


class TestContours:
    def test_sskf_default_resolution(self, run, tmp_path):
        out = tmp_path / "c.csv"
        assert run("contours", "--monotone", "sskf", "--out", out)[0] == 0
        rows = out.read_text().splitlines()[1:]
        assert len(rows) == 20301
        values = np.array([float(r.rsplit(",", 1)[1]) for r in rows])
        # 200 is not a multiple of 3: the minimum sits on the nodes nearest the centroid
        nearest = [r for r in rows if sorted(r.split(",")[2:5]) == ["0.33", "0.335", "0.335"]]
        assert len(nearest) == 3
        assert values.min() == float(nearest[0].rsplit(",", 1)[1]) == pytest.approx(sskf((0.335, 0.335, 0.33)))

    def test_sskf_zero_at_centroid_node(self, run):
        doc = json.loads(run("contours", "--monotone", "sskf", "--resolution", 21, "--format", "json")[1])
        zero = [p for p in doc["points"] if p["value"] == 0]
        assert len(zero) == 1
        assert zero[0]["rho1"] == zero[0]["rho2"] == zero[0]["rho3"] == 0.333333333333
        assert abs(zero[0]["x"]) < 1e-15 and abs(zero[0]["y"]) < 1e-15

    def test_edpw_zero_set(self, run):
        doc = json.loads(run("contours", "--monotone", "edpw", "--resolution", 30,
                             "--domain", "sorted", "--format", "json")[1])
        zero = [p for p in doc["points"] if p["value"] == 0]
        assert zero and all(p["rho1"] == p["rho2"] for p in zero)

    def test_vn_range(self, run):
        doc = json.loads(run("contours", "--monotone", "vn", "--resolution", 20, "--format", "json")[1])
        assert all(0 <= p["value"] <= 1 for p in doc["points"])

    @pytest.mark.parametrize("name", ["purity", "p2d"])
    def test_bad_monotone(self, run, name):
        assert run("contours", "--monotone", name, "--resolution", 5)[0] == 4


class TestChannel:
    def test_synth_and_apply(self, run, tmp_path):
        ch = tmp_path / "ch.json"
        assert run("channel", "synth", "--source", "0.6,0.3,0.1", "--target", "0.5,0.3,0.2", "--out", ch)[0] == 0
        doc = json.loads(ch.read_text())
        assert doc["kind"] == "random_unitary"
        assert sorted(t["w"] for t in doc["terms"]) == [0.2, 0.8]
        src = tmp_path / "src.json"
        write_matrix_json(np.diag([0.6, 0.3, 0.1]), src)
        out = json.loads(run("channel", "apply", "--channel", ch, "--state", src)[1])
        assert out["output_spectrum"] == [0.5, 0.3, 0.2]
        assert all(v <= 0 for v in out["deltas"].values())

    def test_incomparable_synth(self, run):
        code, out, err = run("channel", "synth", "--source", "0.5,0.4,0.1", "--target", "0.6,0.2,0.2")
        assert code == 6 and out == "" and "partial sum 1" in err

    def test_mixing_apply(self, run, tmp_path):
        ch = tmp_path / "mix.json"
        ch.write_text(json.dumps({"kind": "mixing", "p": 0.5, "omega": [0.4, 0.4, 0.2]}))
        out = json.loads(run("channel", "apply", "--channel", ch, "--state", "0.5,0.4,0.1")[1])
        assert out["output_spectrum"] == [0.45, 0.4, 0.15]
        assert out["deltas"]["edpw"] == pytest.approx(-0.05)
        assert out["deltas"]["re"] <= 0

    def test_random_then_apply(self, run, tmp_path):
        ch = tmp_path / "r.json"
        assert run("channel", "random", "--seed", 7, "--out", ch)[0] == 0
        out = json.loads(run("channel", "apply", "--channel", ch, "--state", "0.7,0.2,0.1")[1])
        assert all(v <= 1e-9 for v in out["deltas"].values())
        assert "output_matrix" in out

    def test_bad_channel_file(self, run, tmp_path):
        ch = tmp_path / "bad.json"
        ch.write_text(json.dumps({"kind": "random_unitary", "terms": [{"w": 1, "U": [[[2, 0], [0, 0]], [[0, 0], [1, 0]]]}]}))
        assert run("channel", "apply", "--channel", ch, "--state", "0.6,0.4")[0] == 3
        assert run("channel", "apply", "--channel", tmp_path / "absent.json", "--state", "0.6,0.4")[0] == 2

    def test_channel_state_mismatch(self, run, tmp_path):
        ch = tmp_path / "r.json"
        run("channel", "random", "--dim", 2, "--seed", 1, "--out", ch)
        assert run("channel", "apply", "--channel", ch, "--state", "0.5,0.4,0.1")[0] == 4


class TestDeterminism:
    def test_byte_identical(self, run, tmp_path, ref_matrix):
        cmds = [
            ("analyze", ref_matrix),
            ("regions", ref_matrix, "--theory", "3d-convex", "--resolution", 25),
            ("contours", "--monotone", "hphi:tsallis2", "--resolution", 25),
            ("channel", "random", "--seed", 3),
        ]
        for argv in cmds:
            assert run(*argv)[1] == run(*argv)[1]


@pytest.mark.parametrize(
    "argv",
    [["--tol", "-1", "analyze", "0.5,0.5"], ["contours", "--monotone", "vn", "--resolution", "1"],
     ["channel", "random", "--seed", "1", "--terms", "0"], ["compare", "a", "b", "--theory", "4d"]],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
