import csv
import io
import json
import subprocess
import sys

import pytest

from glcinterference.cli import fmt, main
from glcinterference.predict import mean_interference
from glcinterference.scenarios import load_preset


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


class TestPredict:
    def test_brownian(self, capsys, tmp_path):
        out = tmp_path / "p.csv"
        code, _, _ = run(capsys, "predict", "--scenario", "brownian2d", "--out", str(out))
        assert code == 0
        raw = out.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        table = rows(raw.decode())
        assert table[0] == ["t", "mean", "variance", "std", "mgf@0.5"]
        sc = load_preset("brownian2d").scenario
        assert [r[0] for r in table[1:]] == ["10", "50", "100", "500"]
        assert table[1][1] == fmt(mean_interference(sc, 10.0).mean)
        assert abs(float(table[1][1]) - 0.2201) < 5e-4

    def test_overrides(self, capsys):
        code, out, _ = run(capsys, "predict", "--scenario", "brownian2d", "--t", "1:3:1", "--beta", "0.1,0.2")
        table = rows(out)
        assert code == 0 and len(table) == 4
        assert table[0][-2:] == ["mgf@0.10000000000000001", "mgf@0.20000000000000001"]

    def test_empty_grid(self, capsys):
        code, out, _ = run(capsys, "predict", "--scenario", "brownian2d", "--t", "")
        assert code == 0 and out == "t,mean,variance,std,mgf@0.5\n"

    def test_divergence_exit(self, capsys):
        code, _, err = run(capsys, "predict", "--scenario", "ucm2d")
        assert code == 3 and "pole" in err

    def test_mgf_domain_exit(self, capsys):
        code, _, err = run(capsys, "predict", "--scenario", "brownian2d", "--t", "10", "--beta", "5")
        assert code == 3 and "beta" in err

    def test_bad_beta(self, capsys):
        assert run(capsys, "predict", "--scenario", "brownian2d", "--beta", "x")[0] == 2

    def test_bad_range(self, capsys):
        assert run(capsys, "predict", "--scenario", "brownian2d", "--t", "1:2")[0] == 2


class TestSimulate:
    ARGS = ("simulate", "--scenario", "brownian2d", "--t", "10", "--realizations", "200", "--seed", "5")

    def test_byte_identical(self, capsys):
        first = run(capsys, *self.ARGS)[1]
        assert first == run(capsys, *self.ARGS)[1]
        table = rows(first)
        assert table[0] == ["t", "mean_hat", "std_error", "var_hat", "mgf_hat@0.5", "mgf_std_error@0.5"]
        assert first != run(capsys, *self.ARGS[:-1], "6")[1]

    def test_trace(self, capsys, tmp_path):
        trace = tmp_path / "trace.csv"
        code, _, _ = run(capsys, *self.ARGS[:5], "--t", "1,2", "--realizations", "3", "--trace", str(trace))
        table = rows(trace.read_text())
        assert code == 0 and table[0] == ["realization", "t", "interference"]
        assert len(table) == 1 + 3 * 2

    @pytest.mark.parametrize("extra", [("--realizations", "1"), ("--seed", "-1"), ("--seed", str(2**64))])
    def test_validation(self, capsys, extra):
        assert run(capsys, "simulate", "--scenario", "brownian2d", "--t", "10", *extra)[0] == 2


class TestBppCheck:
    def test_stdout_json(self, capsys):
        code, out, err = run(capsys, "bpp-check", "--scenario", "brownian2d")
        assert code == 0
        report = json.loads(out)
        assert report["satisfied"] and report["zero_limit_satisfied"]
        assert "satisfied" in err

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "v.json"
        code, out, _ = run(capsys, "bpp-check", "--scenario", "inertia2d", "--out", str(path), "--gap-tol", "0.1")
        assert code == 0 and "violated" in out
        report = json.loads(path.read_text())
        assert not report["satisfied"] and report["gap_tol"] == 0.1

    def test_bad_horizon(self, capsys):
        assert run(capsys, "bpp-check", "--scenario", "brownian2d", "--horizon", "0")[0] == 2


class TestErrors:
    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "validate", "--scenario", str(tmp_path / "missing.scn"))[0] == 4

    def test_unwritable_output(self, capsys, tmp_path):
        out = tmp_path / "no" / "dir" / "x.csv"
        assert run(capsys, "predict", "--scenario", "brownian2d", "--t", "10", "--out", str(out))[0] == 4

    def test_invalid_scenario(self, capsys, tmp_path):
        bad = tmp_path / "bad.scn"
        bad.write_text("schema_version: 1\ndimension: 2\n")
        code, _, err = run(capsys, "validate", "--scenario", str(bad))
        assert code == 2 and "channel" in err

    def test_validate_ok(self, capsys):
        code, out, _ = run(capsys, "validate", "--scenario", "ucm3d")
        assert code == 0 and out.startswith("ok: d=3, 2 interferer(s)")

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "glcinterference", "validate", "--scenario", "brownian2d"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and "6 interferer(s)" in proc.stdout
