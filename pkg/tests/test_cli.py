import json
import subprocess
import sys

import pytest
from scipy import stats

from nptransfer.cli import main

FIG1 = {
    "problem": {
        "mu0": {"kind": "gaussian", "mean": 0.0, "variance": 1.0},
        "mu1": {"kind": "gaussian", "mean": 2.0, "variance": 1.0},
        "alpha": 0.05,
    }
}


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestDispatch:
    def test_solve_gaussian(self, tmp_path, capsys):
        code, out, _ = run(["solve", "--config", write(tmp_path, "c.json", FIG1)], capsys)
        assert code == 0
        rep = json.loads(out)
        lo, hi = rep["region"]["intervals"][0]
        assert lo == pytest.approx(stats.norm.isf(0.05), abs=1e-10) and hi == "inf"
        assert rep["type2"] == pytest.approx(stats.norm.cdf(lo - 2), abs=1e-10)

    def test_solve_preset_source(self, tmp_path, capsys):
        cfg = {"scenario": {"preset": "gaussian_shift", "params": {"alpha": 0.1}}, "which": "source"}
        code, out, _ = run(["solve", "--config", write(tmp_path, "c.json", cfg)], capsys)
        assert code == 0 and json.loads(out)["type1"] == pytest.approx(0.1)

    def test_missing_config(self, tmp_path, capsys):
        code, _, err = run(["solve", "--config", str(tmp_path / "none.json")], capsys)
        assert code == 2 and "config" in err

    def test_invalid_json(self, tmp_path, capsys):
        code, _, _ = run(["equiv", "--config", write(tmp_path, "c.json", "{nope")], capsys)
        assert code == 2

    def test_unknown_subcommand_and_flag(self, capsys):
        assert run(["fly"], capsys)[0] == 2
        assert run(["solve", "--bogus"], capsys)[0] == 2

    def test_unknown_preset(self, tmp_path, capsys):
        cfg = {"scenario": {"preset": "nope"}}
        assert run(["exponent", "--config", write(tmp_path, "c.json", cfg)], capsys)[0] == 2

    def test_bad_law_parameters(self, tmp_path, capsys):
        cfg = {"problem": {"mu0": {"kind": "gaussian", "variance": -1}, "mu1": {"kind": "uniform", "lo": 0, "hi": 1}, "alpha": 0.1}}
        assert run(["solve", "--config", write(tmp_path, "c.json", cfg)], capsys)[0] == 2

    def test_not_achievable_is_domain_error(self, tmp_path, capsys):
        cfg = {
            "problem": {
                "mu0": {"kind": "uniform", "lo": 0, "hi": 1},
                "mu1": {"kind": "uniform", "lo": 0, "hi": 1},
                "alpha": 0.5,
            }
        }
        code, _, err = run(["solve", "--config", write(tmp_path, "c.json", cfg)], capsys)
        assert code == 1 and "NotAchievableError" in err

    def test_equiv(self, tmp_path, capsys):
        cfg = {"scenario": {"preset": "gaussian_narrow"}}
        code, out, _ = run(["equiv", "--config", write(tmp_path, "c.json", cfg)], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["verdict"] == "not-equivalent" and rep["witness"]["kind"] == "intervals"

    def test_exponent(self, tmp_path, capsys):
        cfg = {"scenario": {"preset": "power_source", "params": {"rho": 2.0}}}
        code, out, _ = run(["exponent", "--config", write(tmp_path, "c.json", cfg)], capsys)
        rep = json.loads(out)
        assert code == 0
        assert rep["rho_hat"] == pytest.approx(2.0, abs=0.01) and rep["Delta"] == 0.0

    def test_lowerbound_defaults(self, tmp_path, capsys):
        out_path = tmp_path / "lb.json"
        code, _, _ = run(["lowerbound", "--out", str(out_path), "--quiet"], capsys)
        rep = json.loads(out_path.read_text())
        assert code == 0 and rep["all_pass"]
        assert all(c["pass"] for c in rep["checks"].values())
        table = (tmp_path / "lb.pairs.csv").read_text().splitlines()
        assert table[0] == "i,j,hamming,separation,kl_source,kl_target,kl_total"
        assert len(table) == 1 + rep["M"] * (rep["M"] - 1)

    def test_rates_insufficient(self, tmp_path, capsys):
        cfg = {"n_t": [64, 128], "replicates": 2}
        code, _, err = run(["rates", "--config", write(tmp_path, "c.json", cfg)], capsys)
        assert code == 1 and "InsufficientDataError" in err


class TestReproducibility:
    CFG = {
        "scenario": {"preset": "power_source", "params": {"rho": 2.0}},
        "n0": [256],
        "n_s": [64, 256],
        "n_t": [64],
        "replicates": 4,
    }

    def test_simulate_byte_identical(self, tmp_path, capsys):
        path = write(tmp_path, "c.json", self.CFG)
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["simulate", "--config", path, "--seed", "3", "--out", str(a)]) == 0
        assert main(["simulate", "--config", path, "--seed", "3", "--out", str(b), "--jobs", "2"]) == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert len(lines) == 1 + 2 * 4 and lines[0].startswith("scenario,n0,n_s")

    def test_seed_override_changes_output(self, tmp_path):
        path = write(tmp_path, "c.json", self.CFG)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", "--config", path, "--seed", "1", "--out", str(a)])
        main(["simulate", "--config", path, "--seed", "2", "--out", str(b)])
        assert a.read_bytes() != b.read_bytes()

    def test_rates_report(self, tmp_path, capsys):
        cfg = {
            "scenario": {"preset": "power_source", "params": {"rho": 1.0}},
            "n_t": [128, 256, 512, 1024],
            "replicates": 20,
            "learner": "target",
            "erm_slack": 0.0,
            "tie_n0": "n_t",
        }
        code, out, _ = run(["rates", "--config", write(tmp_path, "c.json", cfg)], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["fit"]["slope"] < 0 and rep["config"]["replicates"] == 20

    def test_module_entry_point(self, tmp_path):
        path = write(tmp_path, "c.json", FIG1)
        proc = subprocess.run(
            [sys.executable, "-m", "nptransfer", "solve", "--config", path], capture_output=True, text=True
        )
        assert proc.returncode == 0 and json.loads(proc.stdout)["type1"] == pytest.approx(0.05)
