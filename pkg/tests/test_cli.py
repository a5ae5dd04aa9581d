import csv
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner
from hypothesis import given, settings, strategies as st

from corrhub import sim
from corrhub.cli import main
from corrhub.config import ConfigError, RunConfig, parse_config, serialize_config


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def hub_csv(tmp_path_factory):
    """40 vectors of a strongly correlated 8-variable stream with a header."""
    sigma = np.eye(8)
    sigma[2, 5] = sigma[5, 2] = 0.97
    x = np.vstack([sim.GaussianStream(sigma, 10, seed=1).next_batch() for _ in range(4)])
    path = tmp_path_factory.mktemp("data") / "stream.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(8)])
        w.writerows(x.tolist())
    return path, x


class TestConfig:
    def test_defaults_round_trip(self):
        cfg = RunConfig()
        assert parse_config(serialize_config(cfg)) == cfg

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(0.1, 1e3), eps=st.floats(0.01, 5.0), q=st.integers(2, 20),
        window=st.one_of(st.none(), st.integers(1, 100)), gamma=st.sampled_from([1, 7, math.inf]),
        thr=st.lists(st.floats(0.1, 100.0), min_size=1, max_size=4),
        side=st.sampled_from(["one-sided", "two-sided"]), seed=st.integers(0, 2**31),
    )
    def test_round_trip(self, a, eps, q, window, gamma, thr, side, seed):
        cfg = RunConfig(a_u=a, a_v=a * 2, eps_u=eps, eps_v=eps, q=q, window=window, gamma=gamma,
                        thresholds=tuple(thr), sidedness=side, seed=seed, output="out dir/x.json")
        assert parse_config(serialize_config(cfg)) == cfg

    def test_comments_and_blanks(self):
        cfg = parse_config("# header\n\nn = 12  # batch size\nq=3\n")
        assert cfg.n == 12 and cfg.q == 3

    @pytest.mark.parametrize("text", ["bogus = 1\n", "n = 10\nn = 11\n", "q\n", "n = ten\n", "q = 1\n"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)


class TestDetect:
    def test_alarm(self, runner, hub_csv, tmp_path):
        path, _ = hub_csv
        out = tmp_path / "r.json"
        res = runner.invoke(main, ["detect", "--input", str(path), "--output", str(out),
                                   "--a-u", "2", "--a-v", "2", "--q", "2"])
        assert res.exit_code == 0, res.output
        rep = json.loads(out.read_text())
        assert rep["status"] == "alarm"
        assert rep["selected"] == [3, 6]
        assert rep["tau_hb"] == max(rep["tau_v"], rep["tau_u"])
        assert rep["tau_hb_samples"] == 10 * rep["tau_hb"]

    def test_no_alarm(self, runner, hub_csv):
        path, _ = hub_csv
        res = runner.invoke(main, ["detect", "--input", str(path), "--a-u", "1e9", "--a-v", "1e9", "--q", "2"])
        assert res.exit_code == 1
        rep = json.loads(res.output)
        assert rep["status"] == "no-alarm" and rep["batches"] == 4 and rep["selected"] == []

    def test_chunking_irrelevant(self, runner, hub_csv, tmp_path):
        # a file without header and with an incomplete trailing batch
        _, x = hub_csv
        path = tmp_path / "s.csv"
        np.savetxt(path, np.vstack([x, x[:7]]), delimiter=",", fmt="%.17g")
        args = ["--a-u", "1e9", "--a-v", "1e9", "--q", "2"]
        a = json.loads(runner.invoke(main, ["detect", "--input", str(path), *args]).output)
        b = json.loads(runner.invoke(main, ["detect", "--input", "-", *args],
                                        input=path.read_text()).output)
        assert a["batches"] == b["batches"] == 4
        assert a["g_at_stop"] == b["g_at_stop"]

    def test_ragged(self, runner, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3\n")
        res = runner.invoke(main, ["detect", "--input", str(path)])
        assert res.exit_code == 3
        assert "line 2" in res.output

    def test_degenerate_column(self, runner, tmp_path):
        path = tmp_path / "const.csv"
        path.write_text("".join(f"{i},{i * i % 7},5\n" for i in range(10)))
        res = runner.invoke(main, ["detect", "--input", str(path), "--q", "2"])
        assert res.exit_code == 3

    def test_empty(self, runner, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        res = runner.invoke(main, ["detect", "--input", str(path)])
        assert res.exit_code == 1
        assert json.loads(res.output)["status"] == "no-alarm"

    def test_usage_errors(self, runner, hub_csv, tmp_path):
        path, _ = hub_csv
        assert runner.invoke(main, ["detect", "--input", str(path), "--q", "1"]).exit_code == 2
        assert runner.invoke(main, ["detect"]).exit_code == 2
        bad = tmp_path / "c.cfg"
        bad.write_text("nonsense = 3\n")
        assert runner.invoke(main, ["detect", "--config", str(bad)]).exit_code == 2

    def test_config_file_and_override(self, runner, hub_csv, tmp_path):
        path, _ = hub_csv
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"input = {path}\na_u = 1e9\na_v = 1e9\nq = 2\n")
        assert runner.invoke(main, ["detect", "--config", str(cfg)]).exit_code == 1
        res = runner.invoke(main, ["detect", "--config", str(cfg), "--a-u", "2", "--a-v", "2"])
        assert res.exit_code == 0


class TestGenCov:
    def test_round_trip(self, runner, tmp_path):
        out = tmp_path / "cov.csv"
        args = ["gen-cov", "--p", "20", "--j", "3", "--dof", "3", "--seed", "5",
                "--calib-batches", "50", "--output", str(out)]
        assert runner.invoke(main, args).exit_code == 0
        first = out.read_text()
        meta = json.loads((tmp_path / "cov.csv.meta.json").read_text())
        expected = sim.gen_rowsparse_cov(sim.CovarianceSpec(20, 3, 5, dof=3))
        assert np.array_equal(np.loadtxt(out, delimiter=","), expected)
        assert meta["hubs"] == sim.population_hubs(expected)
        assert runner.invoke(main, args).exit_code == 0
        assert out.read_text() == first

    def test_from_file(self, runner, tmp_path):
        src = tmp_path / "m.csv"
        sigma = np.eye(5)
        sigma[0, 4] = sigma[4, 0] = 0.5
        np.savetxt(src, sigma, delimiter=",")
        out = tmp_path / "m2.csv"
        res = runner.invoke(main, ["gen-cov", "--input", str(src), "--output", str(out),
                                   "--calib-batches", "20"])
        assert res.exit_code == 0
        assert json.loads((tmp_path / "m2.csv.meta.json").read_text())["hubs"] == [1, 5]

    def test_non_square(self, runner, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("1,0\n0,1\n0,0\n")
        assert runner.invoke(main, ["gen-cov", "--input", str(src)]).exit_code == 3


class TestCurves:
    def test_single_threshold(self, runner, tmp_path):
        prefix = tmp_path / "c"
        res = runner.invoke(main, ["curves", "--p", "10", "--j", "3", "--dof", "2", "--q", "4",
                                   "--thresholds", "3", "--paths", "4", "--delay-paths", "2",
                                   "--mfa-paths", "2", "--cap", "50", "--output", str(prefix)])
        assert res.exit_code == 0, res.output
        with open(f"{prefix}_isolation.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["threshold", "false_isolation_count", "rate", "paths"]
        assert len(rows) == 2 and rows[1][3] == "4"
        with open(f"{prefix}_delay.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["threshold", "ln_mfa", "mean_delay", "censored_count"]
        assert len(rows) == 2

    def test_bad_thresholds(self, runner, tmp_path):
        res = runner.invoke(main, ["curves", "--p", "10", "--j", "3", "--thresholds", "3,1",
                                   "--output", str(tmp_path / "c")])
        assert res.exit_code == 2


class TestValidate:
    def test_runs(self, runner, tmp_path):
        out = tmp_path / "v.json"
        res = runner.invoke(main, ["validate", "--p", "50", "--batches", "3000", "--seed", "1",
                                   "--output", str(out)])
        payload = json.loads(out.read_text())
        assert res.exit_code == (0 if payload["passed"] else 1)
        assert {c["name"] for c in payload["checks"]} >= {"ks_v1", "poisson_chisquare_pvalue"}
