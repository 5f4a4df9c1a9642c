import json

import numpy as np
import pytest

from lagchange import cli


def run(*argv):
    return cli.main([str(a) for a in argv])


def write_csv(path, arr):
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    if arr.shape[0] == 1:
        arr = arr.T
    lines = [",".join(repr(float(v)) for v in row) for row in arr]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture()
def shifted_csv(tmp_path):
    rng = np.random.default_rng(11)
    x = rng.standard_normal(200)
    x[100:] += 3.0
    path = tmp_path / "series.csv"
    write_csv(path, x)
    return path


class TestSimulate:
    def test_writes_data_and_truth(self, tmp_path):
        out = tmp_path / "c1.csv"
        assert run("simulate", "--scenario", "C1", "--seed", 7, "--out", out) == 0
        rows = out.read_text().strip().split("\n")
        assert len(rows) == 1000
        assert all("," not in r for r in rows)  # univariate
        truth = json.loads((tmp_path / "c1.truth.json").read_text())
        assert truth == {"scenario": "C1", "seed": 7, "n": 1000, "changes": [333, 667]}

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("simulate", "--scenario", "B4", "--seed", 3, "--out", a)
        run("simulate", "--scenario", "B4", "--seed", 3, "--out", b)
        assert a.read_bytes() == b.read_bytes()
        ta = json.loads((tmp_path / "a.truth.json").read_text())
        tb = json.loads((tmp_path / "b.truth.json").read_text())
        assert ta == tb

    def test_unknown_scenario(self, tmp_path):
        assert run("simulate", "--scenario", "ZZ", "--out", tmp_path / "z.csv") == 3

    def test_n_too_short_for_changes(self, tmp_path):
        assert run("simulate", "--scenario", "A1", "--n", 3, "--out", tmp_path / "a.csv") == 3


class TestDetect:
    def test_report_schema_and_location(self, shifted_csv, tmp_path):
        out = tmp_path / "report.json"
        code = run("detect", shifted_csv, "--lags", "0", "--reps", 49,
                   "--seed", 1, "--out", out)
        assert code == 0
        report = json.loads(out.read_text())
        assert set(report) == {"config", "lags", "merged"}
        cfg = report["config"]
        assert cfg["n"] == 200 and cfg["p"] == 1
        assert cfg["lags"] == [0] and cfg["bandwidth"] == 33
        assert cfg["kernel"] == "quadexp" and cfg["scale"] == "auto"
        assert "threads" not in cfg
        (entry,) = report["lags"]
        assert entry["lag"] == 0 and entry["threshold"] > 0 and entry["scale"] > 0
        assert all(set(c) == {"location", "stat", "score"} for c in entry["changes"])
        locs = [m["location"] for m in report["merged"]]
        assert len(locs) == 1 and abs(locs[0] - 100) <= 20
        assert all(set(m) == {"location", "lag", "stat", "score"} for m in report["merged"])

    def test_thread_count_does_not_change_bytes(self, shifted_csv, tmp_path):
        outs = []
        for t in (1, 4):
            out = tmp_path / f"r{t}.json"
            assert run("detect", shifted_csv, "--lags", "0,1", "--reps", 29,
                       "--seed", 5, "--threads", t, "--out", out) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_dump_profile(self, shifted_csv, tmp_path):
        prof = tmp_path / "prof.csv"
        run("detect", shifted_csv, "--lags", "0,1", "--reps", 9,
            "--out", tmp_path / "r.json", "--dump-profile", prof)
        lines = prof.read_text().strip().split("\n")
        assert lines[0] == "bandwidth,lag,position,value"
        # scan positions G..n-G for every lag: 200-66+1 points each
        assert len(lines) == 1 + 135 + 135
        first = lines[1].split(",")
        assert first[0] == "33" and first[1] == "0" and first[2] == "33"

    def test_header_flag(self, tmp_path):
        path = tmp_path / "h.csv"
        rng = np.random.default_rng(0)
        body = "\n".join(repr(float(v)) for v in rng.standard_normal(120))
        path.write_text("value\n" + body + "\n")
        assert run("detect", path, "--header", "--lags", "0", "--reps", 9,
                   "--out", tmp_path / "r.json") == 0

    def test_missing_file(self, tmp_path):
        assert run("detect", tmp_path / "nope.csv", "--reps", 9) == 2

    def test_nan_rejected_then_imputed(self, tmp_path):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(150)
        path = tmp_path / "gap.csv"
        rows = [repr(float(v)) for v in x]
        rows[40] = "nan"
        path.write_text("\n".join(rows) + "\n")
        assert run("detect", path, "--lags", "0", "--reps", 9,
                   "--out", tmp_path / "r.json") == 2
        assert run("detect", path, "--lags", "0", "--reps", 9, "--impute", "locf",
                   "--out", tmp_path / "r2.json") == 0

    def test_all_nan_column(self, tmp_path):
        path = tmp_path / "dead.csv"
        path.write_text("\n".join("1.0," for _ in range(100)) + "\n")
        assert run("detect", path, "--impute", "locf", "--reps", 9) == 2

    def test_constant_series_degenerate_scale(self, tmp_path, capsys):
        path = tmp_path / "flat.csv"
        path.write_text("\n".join(["2.5"] * 120) + "\n")
        assert run("detect", path, "--lags", "0", "--reps", 9) == 4
        err = capsys.readouterr().err
        assert "lag 0" in err

    def test_constant_series_fixed_scale_runs(self, tmp_path):
        path = tmp_path / "flat.csv"
        path.write_text("\n".join(["2.5"] * 120) + "\n")
        out = tmp_path / "r.json"
        assert run("detect", path, "--lags", "0", "--reps", 9,
                   "--scale", 1.0, "--out", out) == 0
        assert json.loads(out.read_text())["merged"] == []

    @pytest.mark.parametrize(
        "extra",
        [
            ("--lags", "0,x"),
            ("--lags=-1",),
            ("--reps", "0"),
            ("--alpha", "1.5"),
            ("--alpha", "0"),
            ("--bandwidth", "0"),
            ("--bandwidth", "abc"),
            ("--bandwidth", "20,40"),
            ("--scale", "-1"),
            ("--bn", "0"),
            ("--threads", "0"),
            ("--multiscale", "--adaptive"),
        ],
    )
    def test_config_errors(self, shifted_csv, extra):
        assert run("detect", shifted_csv, *extra) == 3

    def test_bandwidth_too_large_for_series(self, shifted_csv):
        assert run("detect", shifted_csv, "--bandwidth", "150", "--reps", 9) == 3

    def test_multiscale_mode(self, tmp_path):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(400)
        x[200:] += 3.0
        path = tmp_path / "ms.csv"
        write_csv(path, x)
        out = tmp_path / "ms.json"
        assert run("detect", path, "--multiscale", "--lags", "0", "--reps", 29,
                   "--out", out) == 0
        report = json.loads(out.read_text())
        assert report["config"]["mode"] == "multiscale"
        assert report["config"]["bandwidth"] == [60, 120, 180]
        assert all("bandwidth" in e for e in report["lags"])
        assert all("bandwidth" in m for m in report["merged"])
        locs = [m["location"] for m in report["merged"]]
        assert any(abs(l - 200) <= 30 for l in locs)

    def test_adaptive_mode(self, shifted_csv, tmp_path):
        out = tmp_path / "ad.json"
        assert run("detect", shifted_csv, "--adaptive", "--lags", "0", "--reps", 29,
                   "--out", out) == 0
        report = json.loads(out.read_text())
        assert report["config"]["mode"] == "adaptive"
        # the mean shift shows at every lag, so no extension lag adds news
        assert report["config"]["lags"] == [0]
        locs = [m["location"] for m in report["merged"]]
        assert len(locs) == 1 and abs(locs[0] - 100) <= 20


class TestEvaluate:
    def make_pair(self, tmp_path, est_changes, truth_changes, n=100, n_truth=None):
        est = tmp_path / "est.json"
        tru = tmp_path / "tru.json"
        est.write_text(json.dumps({
            "config": {"n": n},
            "merged": [{"location": c, "lag": 0, "stat": 1.0, "score": 1.0}
                       for c in est_changes],
        }))
        tru.write_text(json.dumps({"n": n_truth or n, "changes": list(truth_changes)}))
        return est, tru

    def test_perfect_pair(self, tmp_path, capsys):
        est, tru = self.make_pair(tmp_path, [40, 70], [40, 70])
        assert run("evaluate", est, tru) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep == {"cm": 1.0, "vm": 1.0, "q_hat": 2, "q_true": 2}

    def test_empty_vs_midpoint(self, tmp_path, capsys):
        est, tru = self.make_pair(tmp_path, [], [50])
        run("evaluate", est, tru)
        rep = json.loads(capsys.readouterr().out)
        assert rep["cm"] == 0.5 and rep["q_hat"] == 0 and rep["q_true"] == 1

    def test_mismatched_n(self, tmp_path):
        est, tru = self.make_pair(tmp_path, [40], [40], n=100, n_truth=120)
        assert run("evaluate", est, tru) == 3

    def test_directory_batch(self, tmp_path, capsys):
        est_dir = tmp_path / "est"
        tru_dir = tmp_path / "tru"
        est_dir.mkdir()
        tru_dir.mkdir()
        cases = [([50], [50]), ([], [50]), ([30, 50, 70], [50])]
        for i, (est_c, tru_c) in enumerate(cases):
            (est_dir / f"run{i}.json").write_text(json.dumps({
                "config": {"n": 100},
                "merged": [{"location": c, "lag": 0, "stat": 1.0, "score": 1.0}
                           for c in est_c],
            }))
            payload = json.dumps({"n": 100, "changes": tru_c})
            if i == 1:  # same-name pairing
                (tru_dir / "run1.json").write_text(payload)
            else:  # sidecar-style pairing
                (tru_dir / f"run{i}.truth.json").write_text(payload)
        assert run("evaluate", est_dir, tru_dir) == 0
        rep = json.loads(capsys.readouterr().out)
        assert [r["name"] for r in rep["runs"]] == ["run0.json", "run1.json", "run2.json"]
        hist = rep["summary"]["q_diff_hist"]
        assert hist == {"le_-2": 0.0, "-1": 1 / 3, "0": 1 / 3, "+1": 0.0, "ge_+2": 1 / 3}
        assert rep["summary"]["count"] == 3
        assert 0.0 < rep["summary"]["mean_cm"] <= 1.0

    def test_directory_missing_truth(self, tmp_path):
        est_dir = tmp_path / "est"
        tru_dir = tmp_path / "tru"
        est_dir.mkdir()
        tru_dir.mkdir()
        (est_dir / "x.json").write_text(json.dumps({"n": 10, "changes": []}))
        assert run("evaluate", est_dir, tru_dir) == 2

    def test_mixed_file_and_dir(self, tmp_path):
        est, _ = self.make_pair(tmp_path, [40], [40])
        d = tmp_path / "d"
        d.mkdir()
        assert run("evaluate", est, d) == 2

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        good = tmp_path / "good.json"
        good.write_text(json.dumps({"n": 10, "changes": []}))
        assert run("evaluate", bad, good) == 2


class TestBench:
    def test_reps_zero(self):
        assert run("bench", "--sizes", "400", "--reps", 0) == 3

    def test_single_size_one_row(self, capsys):
        assert run("bench", "--sizes", "400") == 0
        out = capsys.readouterr().out
        assert out.count("kernel_evals") == 1
        assert "slope" not in out  # needs two sizes for a fit

    def test_two_sizes_reports_slope(self, capsys):
        assert run("bench", "--sizes", "400,800") == 0
        out = capsys.readouterr().out
        assert "slope" in out


class TestRoundTrip:
    def test_simulate_detect_evaluate(self, tmp_path, capsys):
        csv = tmp_path / "a1.csv"
        assert run("simulate", "--scenario", "A1", "--n", 420, "--seed", 12,
                   "--out", csv) == 0
        report = tmp_path / "a1.json"
        assert run("detect", csv, "--lags", "0", "--reps", 49, "--seed", 12,
                   "--out", report) == 0
        capsys.readouterr()
        assert run("evaluate", report, tmp_path / "a1.truth.json") == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["q_true"] == 3
        assert rep["cm"] > 0.5
