"""End-to-end command-line behavior: file outputs, validation errors,
determinism."""

import json

import numpy as np

from ccmcausal.cli import main


def run(argv):
    return main([str(a) for a in argv])


def synth_file(tmp_path, n=400, seed=3, name="s.csv"):
    out = tmp_path / name
    code = run(["synth", "--n", n, "--seed", seed, "--out", out])
    assert code == 0
    return out


class TestSynth:
    def test_writes_files(self, tmp_path):
        out = tmp_path / "synth.csv"
        truth = tmp_path / "truth.json"
        assert run(["synth", "--n", 200, "--seed", 42, "--out", out,
                    "--truth", truth]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 201  # header + rows
        doc = json.loads(truth.read_text())
        assert len(doc["feedback_pairs"]) == 6
        assert (tmp_path / "synth.csv.manifest.json").exists()

    def test_rerun_byte_identical(self, tmp_path):
        a = synth_file(tmp_path, n=150, seed=9, name="a.csv")
        b = synth_file(tmp_path, n=150, seed=9, name="b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_full_scale_line_count(self, tmp_path):
        out = tmp_path / "big.csv"
        assert run(["synth", "--n", 100_000, "--seed", 1, "--out", out]) == 0
        with out.open() as fh:
            lines = sum(1 for _ in fh)
        assert lines == 100_001

    def test_negative_noise_rejected(self, tmp_path, capsys):
        code = run(["synth", "--n", 100, "--noise-sd", -1,
                    "--out", tmp_path / "x.csv"])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "bad-noise-sd"


class TestPreprocess:
    def test_standardize_contract(self, tmp_path):
        src = synth_file(tmp_path)
        out = tmp_path / "std.csv"
        assert run(["preprocess", "--in", src, "--standardize",
                    "--out", out]) == 0
        from ccmcausal.dataset import load_csv
        ds = load_csv(out, "time")
        for s in ds.series:
            assert abs(s.values.mean()) < 1e-9
        report = json.loads((tmp_path / "std.stationarity.json").read_text())
        assert set(report["columns"]) == {f"S{i}" for i in range(1, 9)}

    def test_period_too_long_errors(self, tmp_path, capsys):
        src = tmp_path / "tiny.csv"
        src.write_text("time,v\n" + "\n".join(f"{i},{i * 0.1}"
                                              for i in range(1, 19)) + "\n")
        code = run(["preprocess", "--in", src, "--deseasonalize", 12,
                    "--out", tmp_path / "o.csv"])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "column-too-short"

    def test_pipeline_matches_library(self, tmp_path):
        src = synth_file(tmp_path)
        out = tmp_path / "p.csv"
        assert run(["preprocess", "--in", src, "--deseasonalize", 12,
                    "--smooth", 0.2, "--standardize", "--out", out]) == 0
        from ccmcausal.dataset import load_csv
        from ccmcausal.preprocess import apply_pipeline
        raw = load_csv(src, "time")
        processed = load_csv(out, "time")
        for name in raw.names:
            direct = apply_pipeline(raw.column(name), period=12, alpha=0.2,
                                    zscore=True)
            assert np.allclose(processed.column(name).values, direct.values,
                               atol=1e-9)


class TestCcmCommand:
    def test_hub_scan_outputs(self, tmp_path):
        src = synth_file(tmp_path, n=300)
        out = tmp_path / "ccm.json"
        svg_dir = tmp_path / "plots"
        code = run(["ccm", "--in", src, "--target", "S8", "--e", 2,
                    "--lib-sizes", "10,40,120,297", "--replicates", 20,
                    "--seed", 7, "--out", out, "--svg", svg_dir])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "ccm"
        assert len(doc["results"]) == 14  # 7 pairs x 2 directions
        pairs = {tuple(sorted((r["source"], r["target"])))
                 for r in doc["results"]}
        assert len(pairs) == 7
        for r in doc["results"]:
            assert 0.0 <= r["p_value"] <= 1.0
        curves = sorted((tmp_path / "ccm.curves").glob("*.csv"))
        assert len(curves) == 14
        svgs = sorted(svg_dir.glob("*.svg"))
        assert len(svgs) == 7

    def test_unknown_target(self, tmp_path, capsys):
        src = synth_file(tmp_path)
        code = run(["ccm", "--in", src, "--target", "S99", "--e", 2,
                    "--out", tmp_path / "c.json"])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "unknown-column"

    def test_infeasible_lib_sizes(self, tmp_path, capsys):
        src = synth_file(tmp_path)
        code = run(["ccm", "--in", src, "--target", "S8", "--e", 4,
                    "--lib-sizes", "5,50", "--out", tmp_path / "c.json"])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "infeasible-embedding"

    def test_auto_embedding_logged(self, tmp_path):
        # Coupled-logistic fixture: auto selection should land on E in {2,3}.
        from ccmcausal.dataset import MultivariateDataset, TimeSeries, write_csv
        from conftest import make_coupled_logistic
        x, y = make_coupled_logistic(500, seed=0)
        t = range(1, 501)
        write_csv(MultivariateDataset(series=(TimeSeries("x", x, t),
                                              TimeSeries("y", y, t))),
                  tmp_path / "cl.csv")
        out = tmp_path / "auto.json"
        code = run(["ccm", "--in", tmp_path / "cl.csv", "--target", "y",
                    "--e", "auto", "--lib-sizes", "10,50,200,499",
                    "--replicates", 10, "--seed", 1, "--out", out])
        assert code == 0
        manifest = json.loads(out.read_text())["manifest"]
        sel = manifest["args"]["embedding_selection"]
        assert sel["series"] == "y"
        assert sel["best_E"] in (2, 3)
        assert len(sel["curve"]) == 10


class TestGrangerCommand:
    def test_table_dimensions(self, tmp_path):
        src = synth_file(tmp_path, n=300)
        out = tmp_path / "granger.json"
        assert run(["granger", "--in", src, "--max-lag", 3,
                    "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "granger"
        assert len(doc["results"]) == 56  # 8*7 ordered pairs
        assert all(len(r["per_lag"]) == 3 for r in doc["results"])
        csv_lines = (tmp_path / "granger.csv").read_text().splitlines()
        assert len(csv_lines) == 4  # header + one row per lag
        assert len(csv_lines[0].split(",")) == 57

    def test_twelve_lags_full_table(self, tmp_path):
        src = synth_file(tmp_path, n=10_000, name="big.csv")
        out = tmp_path / "g12.json"
        assert run(["granger", "--in", src, "--max-lag", 12,
                    "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert len(doc["results"]) == 56
        assert all(len(r["per_lag"]) == 12 for r in doc["results"])
        csv_lines = (tmp_path / "g12.csv").read_text().splitlines()
        assert len(csv_lines) == 13

    def test_max_lag_zero_rejected(self, tmp_path, capsys):
        src = synth_file(tmp_path)
        code = run(["granger", "--in", src, "--max-lag", 0,
                    "--out", tmp_path / "g.json"])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "bad-max-lag"


class TestEvaluateCommand:
    def test_self_scoring(self, tmp_path, capsys):
        src = synth_file(tmp_path, n=300)
        truth = tmp_path / "s.truth.json"
        ccm_out = tmp_path / "ccm.json"
        assert run(["ccm", "--in", src, "--pairs", "all", "--e", 2,
                    "--lib-sizes", "10,60,297", "--replicates", 10,
                    "--seed", 3, "--out", ccm_out]) == 0
        report = tmp_path / "eval.json"
        assert run(["evaluate", "--truth", truth, "--results", ccm_out,
                    "--out", report]) == 0
        doc = json.loads(report.read_text())
        d = doc["directed"]
        assert 0.0 <= d["precision"] <= 1.0
        assert 0.0 <= d["recall"] <= 1.0
        table = capsys.readouterr().out
        assert "directed edges" in table

    def test_node_mismatch(self, tmp_path, capsys):
        truth = tmp_path / "t.json"
        truth.write_text(json.dumps({"nodes": ["a"], "edges": [],
                                     "feedback_pairs": []}))
        results = tmp_path / "r.json"
        results.write_text(json.dumps({"nodes": ["b"], "results": [],
                                       "feedback_pairs": []}))
        code = run(["evaluate", "--truth", truth, "--results", results,
                    "--out", tmp_path / "e.json"])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "node-set-mismatch"


class TestPlotCommand:
    def make_curve_csv(self, path):
        path.write_text("lib_size,rho_mean,rho_sd\n"
                        "10,0.1,0.05\n50,0.4,0.03\n200,0.7,0.01\n")
        return path

    def test_renders(self, tmp_path):
        c = self.make_curve_csv(tmp_path / "c.csv")
        out = tmp_path / "p.svg"
        assert run(["plot", c, "--out", out]) == 0
        svg = out.read_text()
        assert svg.count("<polyline") == 2

    def test_byte_identical_reruns(self, tmp_path):
        # Identical invocation repeated: output bytes must not change.
        c = self.make_curve_csv(tmp_path / "c.csv")
        out = tmp_path / "p.svg"
        run(["plot", c, "--out", out])
        first = out.read_bytes()
        run(["plot", c, "--out", out])
        assert out.read_bytes() == first

    def test_malformed_curve(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("wrong,header\n1,2\n")
        code = run(["plot", bad, "--out", tmp_path / "p.svg"])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "bad-curve-file"


class TestDeterminism:
    def test_pipeline_byte_identical(self, tmp_path):
        # synth -> preprocess -> ccm -> evaluate run twice with identical
        # invocations: every result file byte-identical across runs.
        root = tmp_path
        synth = root / "synth.csv"
        truth = root / "truth.json"
        pre = root / "pre.csv"
        ccm_out = root / "ccm.json"
        svg_dir = root / "svg"
        report = root / "eval.json"

        def pipeline():
            run(["synth", "--n", 250, "--seed", 5, "--out", synth,
                 "--truth", truth])
            run(["preprocess", "--in", synth, "--standardize", "--out", pre])
            run(["ccm", "--in", pre, "--target", "S8", "--e", 2,
                 "--lib-sizes", "10,40,120,247", "--replicates", 15,
                 "--seed", 11, "--out", ccm_out, "--svg", svg_dir])
            run(["evaluate", "--truth", truth, "--results", ccm_out,
                 "--out", report])
            files = [synth, truth, pre, ccm_out, report]
            files += sorted(svg_dir.glob("*.svg"))
            return {f: f.read_bytes() for f in files}

        first = pipeline()
        second = pipeline()
        assert first.keys() == second.keys()
        for f in first:
            assert first[f] == second[f], f.name
