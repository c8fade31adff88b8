import json

import numpy as np
import pytest

from opmono import means as mn
from opmono.cli import main
from opmono.hermitian import random_pd
from opmono.io import matrix_from_json, matrix_to_json, read_matrix, write_matrix


@pytest.fixture
def mats(tmp_path):
    def put(name, M):
        path = tmp_path / name
        write_matrix(path, np.asarray(M))
        return str(path)

    return put


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestMatrixJson:
    def test_roundtrip_is_lossless(self, tmp_path):
        M = random_pd(4, seed=0) + 0j
        M = M + 1e-3j * (np.triu(np.ones((4, 4)), 1) - np.tril(np.ones((4, 4)), -1))
        write_matrix(tmp_path / "m.json", M)
        np.testing.assert_array_equal(read_matrix(tmp_path / "m.json"), M)

    def test_real_omits_im(self):
        assert "im" not in matrix_to_json(np.eye(2))

    @pytest.mark.parametrize(
        "obj", [{"dim": 2, "re": [[1.0]]}, {"re": [[1.0]]}, {"dim": 2, "re": [[1, 2], [0, 1]]}]
    )
    def test_malformed(self, obj):
        with pytest.raises(ValueError):
            matrix_from_json(obj)


class TestMean:
    def test_geom_scalar(self, capsys, mats):
        code, out, _ = run(capsys, "mean", "geom:t=0.5", mats("a.json", [[1.0]]), mats("b.json", [[4.0]]))
        assert code == 0
        assert matrix_from_json(json.loads(out))[0, 0] == pytest.approx(2.0)

    def test_output_reparses_exactly(self, capsys, mats, tmp_path):
        A, B = random_pd(3, seed=1), random_pd(3, seed=2)
        out_path = tmp_path / "x.json"
        code, out, _ = run(capsys, "mean", "qapm:p=0.5,a=0.3", mats("a.json", A), mats("b.json", B), "--out", str(out_path))
        assert code == 0 and out == ""
        np.testing.assert_array_equal(read_matrix(out_path), mn.evaluate(mn.QuasiArithmetic(0.5, 0.3), A, B))

    def test_default_t(self, capsys, mats):
        code, out, _ = run(capsys, "mean", "geom", mats("a.json", [[1.0]]), mats("b.json", [[16.0]]), "--t", "0.25")
        assert code == 0 and json.loads(out)["re"][0][0] == pytest.approx(2.0)

    def test_non_pd_without_psd(self, capsys, mats):
        code, out, err = run(capsys, "mean", "geom:t=0.5", mats("a.json", np.diag([1.0, 0.0])), mats("b.json", np.eye(2)))
        assert code == 2 and out == "" and err

    def test_psd_matches_ladder(self, capsys, mats):
        A, B = np.diag([1.0, 0.0, 2.0]), np.diag([3.0, 0.0, 0.0])
        code, out, _ = run(capsys, "mean", "harm:t=0.5", mats("a.json", A), mats("b.json", B), "--psd")
        assert code == 0
        np.testing.assert_array_equal(matrix_from_json(json.loads(out)), mn.evaluate_psd(mn.Harm(0.5), A, B))

    def test_ladder_exhausted(self, capsys, mats):
        args = "mean", "geom:t=0.5", mats("a.json", np.diag([1.0, 0.0])), mats("b.json", np.diag([0.0, 1.0])), "--psd"
        assert run(capsys, *args)[0] == 2

    @pytest.mark.parametrize("spec", ["geom:t=7", "nope", "adjoint(geom:t=0.5"])
    def test_parse_error(self, capsys, mats, spec):
        assert run(capsys, "mean", spec, mats("a.json", [[1.0]]), mats("b.json", [[4.0]]))[0] == 1

    def test_missing_file(self, capsys, mats, tmp_path):
        assert run(capsys, "mean", "geom:t=0.5", mats("a.json", [[1.0]]), str(tmp_path / "none.json"))[0] == 1

    def test_dim_mismatch(self, capsys, mats):
        assert run(capsys, "mean", "geom:t=0.5", mats("a.json", [[1.0]]), mats("b.json", np.eye(2)))[0] == 1


class TestClassify:
    def test_sqrt(self, capsys):
        code, out, _ = run(capsys, "classify", "power:a=0.5", "--trials", "300")
        assert code == 0 and json.loads(out)["label"] == "OMI-consistent"

    def test_square(self, capsys):
        code, out, _ = run(capsys, "classify", "power:a=2", "--dim", "2")
        verdict = json.loads(out)
        assert code == 3 and verdict["label"] == "NEITHER" and verdict["certificates"]

    def test_inconclusive(self, capsys):
        assert run(capsys, "classify", "power:a=0", "--trials", "100")[0] == 4

    def test_malformed(self, capsys):
        code, out, err = run(capsys, "classify", "power:a=")
        assert code == 1 and out == "" and err


class TestVerifyAndDiff:
    def test_empty_dims(self, capsys):
        assert run(capsys, "verify", "--dims", "")[0] == 1

    def test_bad_flag_is_input_error(self, capsys):
        assert run(capsys, "verify", "--trials", "many")[0] == 1

    def test_same_seed_equivalent(self, capsys, tmp_path):
        paths = [str(tmp_path / f"r{k}.json") for k in range(3)]
        for path, seed in zip(paths, ("3", "3", "4")):
            assert run(capsys, "verify", "--dims", "2", "--trials", "3", "--seed", seed, "--out", path)[0] == 0
        code, out, _ = run(capsys, "report-diff", paths[0], paths[1])
        assert code == 0 and json.loads(out)["equivalent"]
        code, out, _ = run(capsys, "report-diff", paths[0], paths[2])
        diff = json.loads(out)
        assert code != 0 and not diff["equivalent"]
        assert any("worst_margin" in d for d in diff["differences"])

    def test_missing_report(self, capsys, tmp_path):
        assert run(capsys, "report-diff", str(tmp_path / "a"), str(tmp_path / "b"))[0] == 1
