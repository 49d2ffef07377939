import json

import numpy as np
import pytest

import tiltdiff as td
from tiltdiff.cli import (
    BOUNDS_REPORT_SCHEMA,
    ExperimentConfig,
    main,
    run_bounded_target,
    run_bounds_report,
    run_convergence,
    run_eval,
    run_sample,
    run_scoregap,
    run_train,
)
from tiltdiff.errors import ConfigError

import jsonschema


def tiny_convergence_cfg(out_dir, **extra):
    obj = {
        "name": "tiny",
        "seed": 1,
        "out_dir": str(out_dir),
        "data": {"kind": "beta_mix", "d": 2, "gen_seed": 3, "normalization": "row"},
        "theta_fill": 1.0,
        "n_grid": [50, 200],
        "resample_size": 200,
        "oracle_size": 200,
        "seeds": [0, 1],
        "metric": {"p": 2.0, "n_proj": 8, "bins": 10},
        "bound": {"p": 0.9, "q": 12.0, "constant": 1.0, "calibration_n": 2000},
    }
    obj.update(extra)
    return ExperimentConfig.from_dict(obj)


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    return header, rows


class TestConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            ExperimentConfig.from_dict({"nope": 1})

    def test_n_grid_must_ascend(self):
        with pytest.raises(ConfigError, match="ascending"):
            ExperimentConfig.from_dict({"n_grid": [100, 50]})

    def test_seeds_nonempty(self):
        with pytest.raises(ConfigError, match="seeds"):
            ExperimentConfig.from_dict({"seeds": []})

    def test_bound_regime_checked(self):
        with pytest.raises(ConfigError, match="q > p"):
            ExperimentConfig.from_dict({"bound": {"p": 3.0, "q": 2.0}})

    def test_hash_stable(self):
        a = ExperimentConfig.from_dict({"seed": 5})
        b = ExperimentConfig.from_dict({"seed": 5})
        assert a.hash() == b.hash()
        c = ExperimentConfig.from_dict({"seed": 6})
        assert a.hash() != c.hash()


class TestConvergence:
    def test_rows_schema_and_manifest(self, tmp_path):
        cfg = tiny_convergence_cfg(tmp_path)
        outputs = run_convergence(cfg)
        header, rows = read_csv(outputs[0])
        assert header == ["n", "seed", "sw_p", "bound_unbounded", "bound_bounded",
                          "bound_iid", "ess", "acceptance_rate"]
        assert len(rows) == 4  # 2 n values x 2 seeds
        manifest = json.loads(outputs[1].read_text())
        assert "convergence.csv" in manifest["outputs"]
        assert manifest["config_hash"] == cfg.hash()

    def test_rerun_byte_identical(self, tmp_path):
        cfg = tiny_convergence_cfg(tmp_path / "a")
        first = run_convergence(cfg)[0].read_bytes()
        cfg2 = tiny_convergence_cfg(tmp_path / "b")
        second = run_convergence(cfg2)[0].read_bytes()
        assert first == second

    def test_regime_violation_exit_2(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "out_dir": str(tmp_path), "data": {"kind": "beta_mix", "d": 2, "gen_seed": 1},
            "n_grid": [50], "seeds": [0], "resample_size": 50, "oracle_size": 50,
            "bound": {"p": 1.9, "q": 2.0},  # d = 2 <= qp/(q-p) = 38
        }))
        code = main(["--config", str(cfg_path), "convergence"])
        assert code == 2

    def test_zero_tilt_matches_plain_empirical(self, tmp_path):
        # paired check: pipeline-vs-fresh and fresh-vs-fresh sliced distances
        # to a common reference are statistically indistinguishable
        spec = td.gen_beta_mix_spec(3, np.random.default_rng(5))
        tilt = td.TiltSpec(theta=np.zeros(3))
        diffs = []
        for seed in range(10):
            rng = np.random.default_rng([seed, 17])
            base = td.sample_beta_mix(spec, 100000, rng)
            cloud = td.resample(td.plugin_measure(base, tilt), 2000, rng)
            ref = td.sample_beta_mix(spec, 2000, rng)
            fresh = td.sample_beta_mix(spec, 2000, rng)
            a = td.sliced_wp(cloud, ref, 2.0, 32, np.random.default_rng([seed, 1]))
            b = td.sliced_wp(fresh, ref, 2.0, 32, np.random.default_rng([seed, 1]))
            diffs.append(a - b)
        diffs = np.array(diffs)
        assert abs(diffs.mean()) <= 3 * diffs.std(ddof=1) / np.sqrt(len(diffs))


class TestBoundedTarget:
    def test_rows_and_methods(self, tmp_path):
        cfg = ExperimentConfig.from_dict({
            "seed": 2,
            "out_dir": str(tmp_path),
            "data": {"kind": "beta_mix", "d": 1, "gen_seed": 7, "n": 400},
            "theta_grid": [0.0, 1.0],
            "seeds": [0],
            "resample_size": 300,
            "metric": {"p": 2.0, "n_proj": 4, "bins": 10},
            "schedule": {"eta": 1.0, "sigma": 0.2, "horizon": 2.0, "steps": 30},
            "train": {"steps": 40, "batch_size": 32, "hidden": [8], "n_freq": 4},
        })
        outputs = run_bounded_target(cfg)
        header, rows = read_csv(outputs[0])
        assert header == ["theta", "seed", "method", "sw_p", "tv", "note"]
        methods = {r["method"] for r in rows}
        assert methods == {"reweigh", "reweigh+diffusion", "oracle"}
        assert len(rows) == 6
        for r in rows:
            assert float(r["sw_p"]) >= 0.0
            assert 0.0 <= float(r["tv"]) <= 1.0


class TestBoundsReport:
    def coin_cfg(self, out_dir):
        return ExperimentConfig.from_dict({
            "out_dir": str(out_dir),
            "data": {"kind": "finite", "atoms": [[0.0], [1.0]], "masses": [0.5, 0.5]},
            "tilt": {"family": "exponential", "theta": [float(np.log(2.0))],
                     "g": {"kind": "identity", "params": {}}, "g_max": 1.0},
            "n_grid": [100, 1000],
            "seeds": [0],
            "bound": {"p": 0.4, "q": 12.0, "constant": 1.0},
            "boxes": [{"lo": [0.5], "hi": [1.5]}],
        })

    def test_coin_report_values(self, tmp_path):
        outputs = run_bounds_report(self.coin_cfg(tmp_path))
        report = json.loads(outputs[0].read_text())
        q = report["quantities"]
        assert q["weight_spread"] == pytest.approx(1.5625)
        assert q["weight_l2_ratio"] == pytest.approx(1.05409, abs=1e-5)
        assert q["bounded_tilt_factor"] == pytest.approx(10 / 3)
        box = report["boxes"][0]
        assert box["clt_variance"] == pytest.approx(16 / 81)
        assert box["mass_theta"] == pytest.approx(2 / 3)
        assert box["discrepancy_bounds"][0]["value"] == pytest.approx(0.19514, abs=1e-4)
        jsonschema.validate(report, BOUNDS_REPORT_SCHEMA)

    def test_zero_tilt_unit_quantities(self, tmp_path):
        cfg = self.coin_cfg(tmp_path)
        cfg.tilt["theta"] = [0.0]
        report = json.loads(run_bounds_report(cfg)[0].read_text())
        q = report["quantities"]
        assert q["weight_spread"] == pytest.approx(1.0)
        assert q["weight_l2_ratio"] == pytest.approx(1.0)
        assert q["bounded_tilt_factor"] == pytest.approx(1.0)

    def test_schema_catches_tampering(self, tmp_path):
        report = json.loads(run_bounds_report(self.coin_cfg(tmp_path))[0].read_text())
        del report["quantities"]["mass_theta"]
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(report, BOUNDS_REPORT_SCHEMA)


class TestScoregapCommand:
    def test_small_battery_all_hold(self, tmp_path):
        cfg = ExperimentConfig.from_dict({
            "out_dir": str(tmp_path),
            "seed": 3,
            "schedule": {"eta": 1.0, "sigma": 1.0, "horizon": 1.0, "steps": 10},
            "scoregap": {"instances": 8, "n_mc": 200},
        })
        outputs = run_scoregap(cfg)
        header, rows = read_csv(outputs[0])
        assert header[:4] == ["instance", "label", "dim", "variant"]
        assert len(rows) == 24
        assert all(r["holds"] == "true" for r in rows)

    def test_violation_exit_code_5(self, tmp_path, monkeypatch):
        import tiltdiff.cli as cli_mod
        from tiltdiff.scoregap import BatteryRow

        def fake_battery(n, schedule, rng, n_mc=400):
            return [BatteryRow(instance=0, label="forced", dim=1, variant="w2",
                               gap=1.0, gap_stderr=0.0, eps_sq=0.0, wasserstein=0.0,
                               bound=0.5, margin=0.0, holds=False)]

        monkeypatch.setattr(cli_mod, "inequality_battery", fake_battery)
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"out_dir": str(tmp_path)}))
        code = main(["--config", str(cfg_path), "scoregap"])
        assert code == 5
        assert (tmp_path / "scoregap.csv").exists()  # CSV flushed before the exit


class TestTrainSampleEval:
    def test_full_cycle(self, tmp_path):
        train_cfg = ExperimentConfig.from_dict({
            "seed": 4,
            "out_dir": str(tmp_path / "train"),
            "data": {"kind": "beta_mix", "d": 1, "gen_seed": 5, "n": 256},
            "theta_fill": 0.0,
            "schedule": {"eta": 1.0, "sigma": 0.3, "horizon": 2.0, "steps": 40},
            "train": {"steps": 60, "batch_size": 32, "hidden": [8], "n_freq": 3},
        })
        ckpt, trace, _ = run_train(train_cfg)
        assert json.loads(ckpt.read_text())["layer_dims"][-1] == 1
        assert trace.read_text().startswith("step,loss")

        sample_cfg = ExperimentConfig.from_dict({
            "seed": 5,
            "out_dir": str(tmp_path / "sample"),
            "checkpoint": str(ckpt),
            "sample_size": 64,
        })
        samples, _ = run_sample(sample_cfg)
        ds = td.load_csv(samples)
        assert ds.n == 64 and ds.d == 1

        other = tmp_path / "other.csv"
        td.save_csv(td.Dataset(np.random.default_rng(0).random((64, 1))), other)
        eval_cfg = ExperimentConfig.from_dict({
            "seed": 6,
            "out_dir": str(tmp_path / "eval"),
            "inputs": [str(samples), str(other)],
            "metric": {"p": 2.0, "n_proj": 8, "bins": 10},
        })
        metrics_path, _ = run_eval(eval_cfg)
        metrics = json.loads(metrics_path.read_text())
        assert metrics["sliced_wp"] >= 0.0
        assert "tv_histogram" in metrics

    def test_eval_same_file_zero(self, tmp_path):
        path = tmp_path / "x.csv"
        td.save_csv(td.Dataset(np.random.default_rng(1).random((32, 2))), path)
        cfg = ExperimentConfig.from_dict({
            "out_dir": str(tmp_path), "inputs": [str(path), str(path)],
            "metric": {"p": 2.0, "n_proj": 4, "bins": 5},
        })
        metrics = json.loads(run_eval(cfg)[0].read_text())
        assert metrics["sliced_wp"] == 0.0
        assert metrics["tv_histogram"] == 0.0

    def test_malformed_checkpoint_exit_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"layer_dims\": [1]}")
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"out_dir": str(tmp_path),
                                        "checkpoint": str(bad)}))
        assert main(["--config", str(cfg_path), "sample"]) == 2

    def test_sample_requires_checkpoint(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"out_dir": str(tmp_path)}))
        assert main(["--config", str(cfg_path), "sample"]) == 2


class TestCliEntry:
    def test_unwritable_out_dir_exit_4(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "out_dir": str(blocker / "sub"),
            "schedule": {"eta": 1.0, "sigma": 1.0, "horizon": 1.0, "steps": 10},
            "scoregap": {"instances": 1, "n_mc": 10},
        }))
        code = main(["--config", str(cfg_path), "scoregap"])
        assert code == 4

    def test_bad_json_config_exit_2(self, tmp_path):
        cfg_path = tmp_path / "broken.json"
        cfg_path.write_text("{not json")
        assert main(["--config", str(cfg_path), "bounds"]) == 2

    def test_flags_after_subcommand(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "schedule": {"eta": 1.0, "sigma": 1.0, "horizon": 1.0, "steps": 10},
            "scoregap": {"instances": 2, "n_mc": 20},
        }))
        code = main(["scoregap", "--config", str(cfg_path),
                     "--out-dir", str(tmp_path / "out"), "--seed", "9"])
        assert code == 0
        assert (tmp_path / "out" / "scoregap.csv").exists()
