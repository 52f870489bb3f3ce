import json

import numpy as np
import pytest

from jacobi_bc import JacobiCoefficients, response_vector
from jacobi_bc.cli import main


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def free_file(tmp_path):
    return write_json(tmp_path / "free.json",
                      {"a": [], "b": [], "generator": {"kind": "free", "params": {}}})


@pytest.fixture
def geo_file(tmp_path):
    return write_json(
        tmp_path / "geo.json",
        {"a": [], "b": [], "generator": {"kind": "geometric",
                                         "params": {"ratio": 2}}})


class TestRecover:
    def test_free_response(self, tmp_path, free_file, capsys):
        resp = write_json(tmp_path / "r.json", {"response": [1, 0, 0, 0, 0]})
        out = tmp_path / "out.json"
        code = main(["recover", "--input", resp, "--T", "3",
                     "--output", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["schema"] == "jacobi-bc/1"
        assert doc["a"] == [1.0, 1.0] and doc["b"] == [0.0, 0.0]
        assert doc["path"] == "BoundaryControl"

    def test_non_response_exits_2(self, tmp_path, capsys):
        resp = write_json(tmp_path / "bad.json", {"response": [1, 2, 0]})
        code = main(["recover", "--input", resp, "--T", "2"])
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "NotAResponseVectorError"
        assert "not a response vector" in err["error"]["message"]

    def test_moments_input(self, tmp_path):
        resp = write_json(tmp_path / "m.json", {"moments": [1, 1, 2]})
        out = tmp_path / "out.json"
        assert main(["recover", "--input", resp, "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["path"] == "Hankel"
        assert np.allclose(doc["a"], [1.0]) and np.allclose(doc["b"], [1.0])


class TestDiagnose:
    def test_geometric_indeterminate(self, tmp_path, geo_file):
        out = tmp_path / "d.json"
        code = main(["diagnose", "--input", geo_file, "--N-max", "10",
                     "--output", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["verdict"] == "LikelyIndeterminate"

    def test_csv_table(self, tmp_path, free_file):
        out = tmp_path / "d.csv"
        code = main(["diagnose", "--input", free_file, "--N-max", "5",
                     "--format", "csv", "--output", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "N,lambda_N,beta_N,gamma_N"
        assert len(lines) == 6


class TestValidationFailures:
    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "x.json"
        bad.write_text("{not json")
        assert main(["response", "--input", str(bad), "--T", "3"]) == 2
        assert "malformed JSON" in json.loads(
            capsys.readouterr().err)["error"]["message"]

    def test_missing_required_flag(self, free_file, capsys):
        assert main(["response", "--input", free_file]) == 2

    def test_missing_input(self, capsys):
        assert main(["response", "--T", "3"]) == 2

    def test_wrong_payload_key(self, tmp_path, capsys):
        path = write_json(tmp_path / "w.json", {"something": [1]})
        assert main(["recover", "--input", path]) == 2


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path, geo_file):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        for out in (out1, out2):
            assert main(["diagnose", "--input", geo_file, "--N-max", "6",
                         "--output", str(out)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestThinLayer:
    def test_response_equals_library_call(self, tmp_path, free_file):
        out = tmp_path / "r.json"
        assert main(["response", "--input", free_file, "--T", "6",
                     "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        direct = response_vector(JacobiCoefficients.free(), 6).as_array()
        assert doc["response"] == [float(v) for v in direct]

    def test_simulate_finite_vs_generator(self, tmp_path):
        fin = write_json(tmp_path / "fin.json",
                         {"a": [1.0], "b": [0.0], "generator": None})
        out = tmp_path / "s.json"
        assert main(["simulate", "--input", fin, "--T", "4",
                     "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["system"] == "finite"
        # depth-1 wall: u_{1,t} alternates 1, 0, -1, 0
        assert [doc["rows"][1][t + 1] for t in range(1, 5)] == [1, 0, -1, 0]

    def test_simulate_with_control_file(self, tmp_path, free_file):
        ctrl = write_json(tmp_path / "c.json", {"control": [0.0, 1.0]})
        out = tmp_path / "s.json"
        assert main(["simulate", "--input", free_file, "--input", ctrl,
                     "--T", "2", "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["rows"][1][3] == 1.0  # impulse delayed by one step

    def test_connect_moments_route(self, tmp_path):
        path = write_json(tmp_path / "m.json", {"moments": [1, 0, 1]})
        out = tmp_path / "c.json"
        assert main(["connect", "--input", path, "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["orientation"] == "corner-top"
        assert doc["matrix"] == [[1.0, 0.0], [0.0, 1.0]]

    def test_moments_conversion_round_trip(self, tmp_path):
        path = write_json(tmp_path / "r.json", {"response": [1, 1, 1]})
        out = tmp_path / "m.json"
        assert main(["moments", "--input", path, "--output", str(out)]) == 0
        assert json.loads(out.read_text())["moments"] == [1.0, 1.0, 2.0]

    def test_kernel_csv_grid(self, tmp_path, free_file):
        out = tmp_path / "k.csv"
        assert main(["kernel", "--input", free_file, "--T", "2",
                     "--format", "csv", "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "re_z,im_z,re_lambda,im_lambda,re_value,im_value"
        assert len(lines) > 1

    def test_hb_points_file(self, tmp_path, free_file):
        pts = write_json(tmp_path / "p.json", {"points": [{"z": [0.0, 1.0]}]})
        out = tmp_path / "h.json"
        assert main(["hb", "--input", free_file, "--input", pts, "--T", "1",
                     "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        val = complex(doc["values"][0]["re_value"], doc["values"][0]["im_value"])
        assert abs(val - np.sqrt(np.pi) * 2) < 1e-12  # sqrt(pi)(1 - i*i)


class TestPrecisionSelection:
    def test_env_override(self, tmp_path, monkeypatch):
        path = write_json(tmp_path / "r.json", {"response": [1, 0, 0]})
        out = tmp_path / "o.json"
        monkeypatch.setenv("JACOBI_BC_PRECISION", "rational")
        assert main(["recover", "--input", path, "--output", str(out)]) == 0
        assert json.loads(out.read_text())["precision"] == "rational"

    def test_flag_beats_env(self, tmp_path, monkeypatch):
        path = write_json(tmp_path / "r.json", {"response": [1, 0, 0]})
        out = tmp_path / "o.json"
        monkeypatch.setenv("JACOBI_BC_PRECISION", "rational")
        assert main(["recover", "--input", path, "--precision", "double",
                     "--output", str(out)]) == 0
        assert json.loads(out.read_text())["precision"] == "double"

    def test_bad_threads(self, free_file):
        assert main(["response", "--input", free_file, "--T", "2",
                     "--threads", "0"]) == 2
