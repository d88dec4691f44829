import json
import subprocess
import sys

import pytest

from csmaline.cli import main
from csmaline.output import read_csv


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestSubcommands:
    def test_throughput(self, capsys):
        code, out, err = run(["throughput", "--n", "5", "--beta", "1", "--sigma", "6"], capsys)
        assert code == 0 and "throughput for 5 nodes" in err
        lines = out.strip().splitlines()
        assert lines[0] == "node,theta"
        vals = [float(l.split(",")[1]) for l in lines[1:]]
        assert vals == pytest.approx([0.71274, 0.16847, 0.63499, 0.16847, 0.71274], abs=5e-6)

    def test_fair_rates(self, capsys):
        code, out, _ = run(["fair-rates", "--n", "3", "--beta", "1", "--alpha", "1"], capsys)
        rows = [l.split(",") for l in out.strip().splitlines()[1:]]
        assert [r[2] for r in rows] == ["1", "2", "1"]
        assert all(float(r[3]) == pytest.approx(1 / 3) for r in rows)

    def test_roots(self, capsys):
        code, out, _ = run(["roots", "--sigma", "2", "--beta", "1"], capsys)
        rows = [l.split(",") for l in out.strip().splitlines()[1:]]
        assert sorted(float(r[3]) for r in rows) == pytest.approx([-1, 2])

    def test_exact_fractions(self, capsys):
        code, out, _ = run(["exact", "--n", "3", "--beta", "1", "--sigma", "1"], capsys)
        assert [l.split(",")[2] for l in out.strip().splitlines()[1:]] == ["2/5", "1/5", "2/5"]
        code, out, _ = run(["exact", "--n", "3", "--beta", "1", "--sigma", "1", "--states"], capsys)
        assert out.splitlines()[1].startswith("000,")

    def test_avg_and_counts(self, capsys):
        code, out, _ = run(["avg", "--sigma", "6,19", "--beta", "2", "--n", "10"], capsys)
        assert code == 0 and out.strip().splitlines()[2].split(",")[5] == "inf"
        code, out, _ = run(["counts", "--n", "5", "--beta", "1"], capsys)
        assert "3,3,1" in out.splitlines()

    def test_simulate_files(self, tmp_path, capsys):
        code, _, err = run(
            ["simulate", "--n", "3", "--beta", "1", "--alpha", "2", "--r", "0.2", "--horizon", "500",
             "--trace", "--out", str(tmp_path)],
            capsys,
        )
        assert code == 0 and "end-to-end" in err
        header, rows = read_csv(tmp_path / "simulate.csv")
        assert header[0] == "node" and len(rows) == 3
        assert read_csv(tmp_path / "simulate_trace.csv")[0] == ["t", "node", "event", "queue_len"]

    def test_json_format(self, tmp_path, capsys):
        code, _, _ = run(["simulate", "--n", "3", "--beta", "1", "--sigma", "1", "--horizon", "200",
                          "--format", "json", "--out", str(tmp_path)], capsys)
        doc = json.loads((tmp_path / "simulate.json").read_text())
        assert doc["n"] == 3 and len(doc["theta_hat"]) == 3

    def test_svg_format(self, tmp_path, capsys):
        code, _, _ = run(["throughput", "--n", "4", "--beta", "1", "--sigma", "2", "--format", "svg",
                          "--out", str(tmp_path)], capsys)
        assert code == 0 and (tmp_path / "throughput.svg").exists() and (tmp_path / "throughput.csv").exists()

    def test_env_out_dir(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("CSMA_LINE_OUT", str(tmp_path))
        code, out, _ = run(["counts", "--n", "4", "--beta", "1"], capsys)
        assert code == 0 and out == "" and (tmp_path / "counts.csv").exists()

    def test_sweep(self, tmp_path, capsys):
        code, _, err = run(["sweep", "fig1", "--n", "6", "--out", str(tmp_path)], capsys)
        assert code == 0 and (tmp_path / "fig1_index.json").exists()
        code, out, _ = run(["sweep", "fig2"], capsys)
        assert "# fig2_n9_beta3" in out


class TestConfigFile:
    def test_flags_override_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n": 5, "beta": 1, "rates": {"mode": "equal", "sigma": 6}}))
        code, out, _ = run(["throughput", "--config", str(cfg)], capsys)
        assert len(out.strip().splitlines()) == 6
        code, out, _ = run(["throughput", "--config", str(cfg), "--n", "3"], capsys)
        assert len(out.strip().splitlines()) == 4

    def test_unknown_keys(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"nodes": 5}))
        code, _, err = run(["throughput", "--config", str(cfg)], capsys)
        assert code == 2 and "valid:" in err


class TestExitCodes:
    def test_usage(self, capsys):
        assert run(["bogus"], capsys)[0] == 2
        assert run(["throughput", "--n", "5"], capsys)[0] == 2
        assert run(["throughput", "--n", "5", "--beta", "1", "--sigma", "1", "--alpha", "1"], capsys)[0] == 2
        code, _, err = run(["throughput", "--n", "x"], capsys)
        assert code == 2 and "usage:" in err

    def test_computation(self, capsys):
        code, _, err = run(["exact", "--n", "40", "--beta", "1", "--sigma", "1"], capsys)
        assert code == 1 and err.startswith("error:")
        assert run(["throughput", "--n", "3", "--beta", "1", "--sigma", "-1"], capsys)[0] == 1

    def test_console_entry(self):
        proc = subprocess.run([sys.executable, "-m", "csmaline", "roots", "--sigma", "1", "--beta", "0"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.splitlines()[1].startswith("1,0,0,2")
