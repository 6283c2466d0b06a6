import json

import numpy as np
import pytest

from rfflab.config import ExperimentConfig, ProcessParams, apply_overrides, config_from_dict, load_config
from rfflab.errors import ParameterError
from rfflab.harness import (
    CALIBRATION_HEADER,
    CONVERGENCE_HEADER,
    SWEEP_HEADER,
    evaluation_pairs,
    load_scenarios,
    preset_scenarios,
    run_calibration,
    run_convergence,
    run_sweep,
    sweep_cells,
)
from rfflab.rff import ScaleMode


def smoke_config(**overrides):
    base = dict(
        P_grid=(50, 100),
        T_grid=(6,),
        gamma_grid=(2.0,),
        K_grid=(4,),
        trials=3,
        root_seed=7,
        output_path="unused",
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestEvaluationPairs:
    def test_layout(self):
        pairs = evaluation_pairs(6)
        assert pairs[:3] == ((0, 1), (2, 3), (4, 5))
        assert pairs[3:] == ((0, 0), (1, 1), (2, 2), (3, 3), (4, 4), (5, 5))

    def test_odd_count_rejected(self):
        with pytest.raises(ParameterError):
            evaluation_pairs(5)


class TestConfig:
    def test_unknown_key_rejected_by_name(self):
        with pytest.raises(ParameterError, match="trails"):
            config_from_dict({"trails": 100})

    def test_unknown_process_key_rejected(self):
        with pytest.raises(ParameterError, match="phi_mid"):
            config_from_dict({"process": {"phi_mid": 0.5}})

    def test_mode_parsing(self):
        cfg = config_from_dict({"mode": "samplestd"})
        assert cfg.mode is ScaleMode.SAMPLE_STD

    def test_bad_mode_named(self):
        with pytest.raises(ParameterError, match="mode"):
            config_from_dict({"mode": "zscore"})

    def test_round_trip(self):
        cfg = smoke_config(mode=ScaleMode.SAMPLE_STD)
        again = config_from_dict(cfg.to_dict())
        assert again == cfg

    def test_defaults_mirror_full_grids(self):
        cfg = ExperimentConfig()
        assert cfg.P_grid == (100, 500, 1000, 2500, 5000, 10000, 15000, 20000)
        assert cfg.T_grid == (6, 12, 24, 60)
        assert cfg.gamma_grid == (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
        assert cfg.K_grid == (5, 10, 15, 20, 30)
        assert cfg.trials == 1000

    def test_overrides_beat_config(self):
        cfg = apply_overrides(smoke_config(), ["trials=9", "mode=samplestd"])
        assert cfg.trials == 9
        assert cfg.mode is ScaleMode.SAMPLE_STD

    def test_override_unknown_key_rejected(self):
        with pytest.raises(ParameterError, match="cycles"):
            apply_overrides(smoke_config(), ["cycles=2"])

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ParameterError, match="missing.json"):
            load_config(tmp_path / "missing.json")

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"P_grid": [64], "T_grid": [6], "gamma_grid": [1.0],
                                    "K_grid": [3], "trials": 2, "root_seed": 3}))
        cfg = load_config(path)
        assert cfg.P_grid == (64,)
        assert cfg.trials == 2


class TestSweepCells:
    def test_base_point_scheme_dedupes(self):
        cfg = smoke_config(
            P_grid=(100, 1000), T_grid=(6, 12), gamma_grid=(0.5, 2.0), K_grid=(5, 15),
            sweep_scheme="base_point",
        )
        cells = sweep_cells(cfg)
        assert len(cells) == len(set(cells))
        # base point occurs once even though every marginal includes it
        base = [c for c in cells if (c.P, c.T, c.gamma, c.K) == (1000, 12, 2.0, 15)]
        assert len(base) == 1
        # cross sections present
        assert any((c.P, c.T) == (100, 6) for c in cells)
        assert any((c.P, c.gamma) == (100, 0.5) for c in cells)

    def test_full_grid_scheme_is_cartesian(self):
        cfg = smoke_config(P_grid=(10, 20), T_grid=(6, 12), gamma_grid=(1.0,), K_grid=(3,),
                           sweep_scheme="full_grid")
        assert len(sweep_cells(cfg)) == 4


class TestRunConvergence:
    def test_rows_and_determinism(self, tmp_path):
        cfg = smoke_config(output_path=str(tmp_path / "a"))
        rows1 = run_convergence(cfg, write=False)
        rows2 = run_convergence(cfg, write=False)
        assert rows1 == rows2
        assert len(rows1) == 2 * 2  # two cells, two metrics without the oracle
        assert [r["metric"] for r in rows1[:2]] == ["mae_standard_vs_gauss", "mae_std_vs_gauss"]
        assert all(r["n"] == 3 * len(evaluation_pairs(10)) for r in rows1)

    def test_oracle_metric_present_when_enabled(self):
        cfg = smoke_config(P_grid=(50,), trials=2, oracle_samples=2000)
        rows = run_convergence(cfg, write=False)
        assert [r["metric"] for r in rows] == [
            "mae_standard_vs_gauss", "mae_std_vs_gauss", "mae_std_vs_oracle",
        ]
        assert rows[-1]["mean"] > 0

    def test_csv_and_manifest_written(self, tmp_path):
        out = tmp_path / "results"
        cfg = smoke_config(P_grid=(50,), output_path=str(out))
        run_convergence(cfg)
        csv_text = (out / "convergence.csv").read_text()
        assert csv_text.splitlines()[0] == ",".join(CONVERGENCE_HEADER)
        manifest = json.loads((out / "convergence_manifest.json").read_text())
        assert manifest["experiment"] == "convergence"
        assert manifest["config"]["root_seed"] == 7
        assert "philox" in manifest["rng"]

    def test_byte_identical_across_runs_and_workers(self, tmp_path):
        outs = []
        for name, workers in [("w1", 1), ("w1b", 1), ("w2", 2)]:
            out = tmp_path / name
            cfg = smoke_config(output_path=str(out))
            run_convergence(cfg, workers=workers)
            outs.append((out / "convergence.csv").read_bytes())
        assert outs[0] == outs[1] == outs[2]


class TestRunSweep:
    def test_rows_match_header_and_degrade(self, tmp_path):
        cfg = smoke_config(
            P_grid=(200,), T_grid=(6,), gamma_grid=(2.0,), K_grid=(4,),
            trials=10, mode=ScaleMode.SAMPLE_STD, sweep_scheme="full_grid",
            output_path=str(tmp_path / "s"),
        )
        rows = run_sweep(cfg)
        assert len(rows) == 1
        row = rows[0]
        assert list(row) == SWEEP_HEADER
        assert row["degradation"] > 1.0
        assert 0.0 <= row["ks_stat"] <= 1.0
        assert 0.0 <= row["ks_pvalue"] <= 1.0
        csv_text = (tmp_path / "s" / "sweep.csv").read_text()
        assert csv_text.splitlines()[0] == ",".join(SWEEP_HEADER)

    def test_sweep_deterministic_across_workers(self, tmp_path):
        payload = []
        for name, workers in [("a", 1), ("b", 2)]:
            out = tmp_path / name
            cfg = smoke_config(
                P_grid=(100, 200), T_grid=(6,), trials=4, sweep_scheme="full_grid",
                output_path=str(out),
            )
            run_sweep(cfg, workers=workers)
            payload.append((out / "sweep.csv").read_bytes())
        assert payload[0] == payload[1]


class TestRunCalibration:
    def test_baseline_preset_reproduces_printed_months(self):
        rows = run_calibration(preset_scenarios("baseline"))
        by_P = {r["P"]: r for r in rows}
        assert by_P[12000]["t_crit_months"] == pytest.approx(375.0, abs=1.5)
        assert by_P[1000]["t_crit_months"] == pytest.approx(276.0, abs=1.5)
        assert by_P[15]["t_crit_months"] == pytest.approx(108.0, abs=1.5)
        assert all(r["regime"] == "signal_limited" for r in rows)
        assert all(r["binding_term"] == "signal" for r in rows)
        assert by_P[12000]["poly_bound"] == 5e-5 / 128.0

    def test_signal_preset_extremes(self):
        rows = run_calibration(preset_scenarios("signal"))
        strong = [r for r in rows if r["scenario"] == "signal_R2_5.0pct" and r["P"] == 12000][0]
        weak = [r for r in rows if r["scenario"] == "signal_R2_0.45pct" and r["P"] == 12000][0]
        assert strong["t_crit_months"] == pytest.approx(188.0, abs=2.0)
        assert weak["t_crit_months"] == pytest.approx(1875.0, abs=10.0)

    def test_noise_preset_extremes(self):
        rows = run_calibration(preset_scenarios("noise"))
        low = [r for r in rows if r["scenario"] == "noise_sigma2_1.5e-3" and r["P"] == 12000][0]
        high = [r for r in rows if r["scenario"] == "noise_sigma2_3.0e-3" and r["P"] == 12000][0]
        assert low["t_crit_months"] == pytest.approx(282.0, abs=2.0)
        assert high["t_crit_months"] == pytest.approx(564.0, abs=2.0)

    def test_csv_written_with_pinned_header(self, tmp_path):
        run_calibration(preset_scenarios("baseline"), output_path=tmp_path)
        text = (tmp_path / "calibration.csv").read_text()
        assert text.splitlines()[0] == ",".join(CALIBRATION_HEADER)

    def test_scenario_file_round_trip(self, tmp_path):
        path = tmp_path / "scenarios.json"
        path.write_text(json.dumps([
            {"name": "custom", "B2": 5e-5, "sigma2": 2.2e-3, "cz": 1.0, "Cz": 1.1,
             "P": 12000, "T_operational": 12},
        ]))
        rows = run_calibration(load_scenarios(path))
        assert rows[0]["scenario"] == "custom"
        assert rows[0]["t_crit_months"] == pytest.approx(375.0, abs=1.5)

    def test_scenario_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps([{"name": "x", "B2": 1e-5, "sigma2": 1e-3,
                                     "P": 100, "T_operational": 12, "flavor": "salty"}]))
        with pytest.raises(ParameterError, match="flavor"):
            load_scenarios(path)

    def test_empty_scenarios_rejected(self):
        with pytest.raises(ParameterError):
            run_calibration([])


class TestPairedDesign:
    def test_standard_and_standardized_share_bank_and_panel(self):
        # identical seeds must give identical standard errors whatever the mode,
        # because the panel and bank are drawn before scales enter
        cfg_rms = smoke_config(P_grid=(100,), trials=2, mode=ScaleMode.RMS)
        cfg_ss = smoke_config(P_grid=(100,), trials=2, mode=ScaleMode.SAMPLE_STD)
        rows_rms = run_convergence(cfg_rms, write=False)
        rows_ss = run_convergence(cfg_ss, write=False)
        std_rms = [r for r in rows_rms if r["metric"] == "mae_standard_vs_gauss"][0]
        std_ss = [r for r in rows_ss if r["metric"] == "mae_standard_vs_gauss"][0]
        assert std_rms["mean"] == std_ss["mean"]
