"""
Tests for experiment configuration, the sweep runner and the CLI
"""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import cli
from src.errors import ConfigError, StateSpaceTooLargeError
from src.fba.trellis import StateSpace
from src.runner.config import ExperimentConfig, RunnerSettings, config_from_dict, load_config
from src.runner.pipeline import ResultWriter, SweepRunner, run_sweep
from src.sic.rates import REPORT_COLUMNS

REPO = Path(__file__).parent


def _tiny_config(**overrides) -> ExperimentConfig:
    data = {
        "channel": {"name": "tiny", "options": {"noise_sigma2": 1.0}},
        "modulation": {"family": "ask", "M": 2},
        "S": 1,
        "equalizer": "fba",
        "snr_db": [0.0, 10.0],
        "n": 120,
        "n_blk": 2,
        "seed": 3,
    }
    data.update(overrides)
    return config_from_dict(data)


@pytest.fixture
def runner(tmp_path):
    return SweepRunner(RunnerSettings(output_dir=str(tmp_path / "results"),
                                      checkpoint_dir=str(tmp_path / "checkpoints")))


# configuration

def test_config_validation():
    assert _tiny_config().modulation.family == "ASK"
    with pytest.raises(ConfigError):
        config_from_dict({"S": 3, "n": 10})
    with pytest.raises(ConfigError):
        config_from_dict({"snr_db": [5.0, 0.0]})
    with pytest.raises(ConfigError):
        config_from_dict({"equalizer": "viterbi"})
    with pytest.raises(ConfigError):
        config_from_dict({"n_blk": 0})


def test_load_default_yaml():
    cfg = load_config(REPO / "config" / "default.yaml")
    assert cfg.S == 2 and cfg.equalizer == "nn"
    assert cfg.nn.hidden == [64] and cfg.nn.L_IC == 16
    assert cfg.fba.N_tilde == 8


def test_default_yaml_fba_settings_fit_the_state_cap():
    cfg = load_config(REPO / "config" / "default.yaml")
    for s in range(1, cfg.S + 1):
        StateSpace(s=s, S=cfg.S, M=cfg.modulation.M, N_tilde=cfg.fba.N_tilde).check(cfg.fba.max_states)
    with pytest.raises(StateSpaceTooLargeError):
        StateSpace(s=1, S=cfg.S, M=cfg.modulation.M, N_tilde=9).check(cfg.fba.max_states)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("S: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(broken)


def test_settings_from_env(monkeypatch):
    monkeypatch.setenv("SICEQ_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("SICEQ_WORKERS", "3")
    monkeypatch.setenv("SICEQ_OUTPUT_DIR", "out")
    settings = RunnerSettings.from_env()
    assert settings.log_level == "DEBUG"
    assert settings.workers == 3
    assert settings.output_dir == "out"


# sweeps

def test_empty_snr_grid_writes_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    df = run_sweep(_tiny_config(snr_db=[], output=str(out)))
    assert df.empty
    assert out.read_text().strip() == ",".join(REPORT_COLUMNS)


def test_fba_sweep_rates(runner):
    rows = runner.run(_tiny_config())
    df = ResultWriter.to_frame(rows)
    assert list(df.columns) == REPORT_COLUMNS
    assert len(df) == 4
    avg = df[df["stage"] == "avg"].set_index("snr_db")["rate_bpcu"]
    assert 0.0 <= avg[0.0] < avg[10.0] <= 1.0
    assert avg[10.0] > 0.8
    assert set(df["equalizer"]) == {"fba"}
    assert runner.statistics["total_points_evaluated"] == 2


def test_sic_sweep_reports_every_stage(runner):
    df = ResultWriter.to_frame(runner.run(_tiny_config(S=2, snr_db=[5.0])))
    assert list(df["stage"]) == ["1", "2", "avg"]
    stage_rates = df["rate_bpcu"].to_numpy()
    assert stage_rates[2] == pytest.approx(stage_rates[:2].mean())
    assert df["multiplications_per_app"].iloc[0] == 2 * 2 ** 3


def test_results_do_not_depend_on_worker_count(runner):
    serial = runner.run(_tiny_config(workers=1, snr_db=[3.0]))
    parallel = runner.run(_tiny_config(workers=2, snr_db=[3.0]))
    assert [r["rate_bpcu"] for r in serial] == [r["rate_bpcu"] for r in parallel]


def test_gibbs_sweep(runner):
    cfg = _tiny_config(equalizer="gibbs", snr_db=[5.0], n=40,
                       gibbs={"N_tilde": 2, "N_iter": 6, "N_par": 4, "burn_in": 2})
    df = ResultWriter.to_frame(runner.run(cfg))
    assert set(df["equalizer"]) == {"gibbs"}
    assert df["rate_bpcu"].between(0.0, 1.0).all()


def test_nn_sweep_trains_then_reuses_checkpoints(runner):
    cfg = _tiny_config(equalizer="nn", S=2, snr_db=[4.0, 8.0], n=16, n_blk=1,
                       nn={"L_Y": 3, "L_IC": 2, "hidden": [4],
                           "train": {"N_iter": 3, "N_batch": 2, "T_RNN": 4, "seed": 0}})
    first = runner.run(cfg)
    saved = sorted(p.name for p in Path(runner.settings.checkpoint_dir).glob("*.sicrnn"))
    assert saved == ["tiny_2-ASK_S2_s1_snr4.sicrnn", "tiny_2-ASK_S2_s1_snr8.sicrnn",
                     "tiny_2-ASK_S2_s2_snr4.sicrnn", "tiny_2-ASK_S2_s2_snr8.sicrnn"]
    assert (Path(runner.settings.checkpoint_dir) / "tiny_2-ASK_S2_s1_snr4.loss.csv").exists()
    second = runner.run(cfg)
    assert [r["rate_bpcu"] for r in first] == [r["rate_bpcu"] for r in second]


def test_write_outputs(runner, tmp_path):
    cfg = _tiny_config(snr_db=[2.0], output="rates.csv", parquet=True, gnuplot=True)
    rows = runner.run(cfg)
    path = runner.write(cfg, rows)
    assert path == Path(runner.settings.output_dir) / "rates.csv"
    assert len(pd.read_csv(path)) == 2
    assert len(pd.read_parquet(path.with_suffix(".parquet"))) == 2
    table = path.with_suffix(".dat").read_text()
    assert table.startswith("# stage 1 (fba, 2-ASK, S=1)")
    assert "# stage avg" in table


@pytest.mark.slow
def test_trained_rnn_tracks_fba_and_gains_from_sic(runner):
    surrogate = {"name": "fiber-b2b", "options": {"memory_symbols": 6}}
    nn = {"L_Y": 32, "L_IC": 16, "hidden": [64],
          "train": {"lr": 1e-3, "N_batch": 128, "N_iter": 2000, "T_RNN": 32, "seed": 0}}
    common = {"channel": surrogate, "modulation": {"family": "PAM", "M": 4}, "snr_db": [10.0],
              "n": 20_000, "n_blk": 1, "seed": 5}

    def avg_rate(**cfg):
        df = ResultWriter.to_frame(runner.run(config_from_dict({**common, **cfg})))
        return float(df[df["stage"] == "avg"]["rate_bpcu"].iloc[0])

    fba_sdd = avg_rate(equalizer="fba", S=1)
    nn_sdd = avg_rate(equalizer="nn", S=1, nn=nn)
    nn_sic = avg_rate(equalizer="nn", S=2, nn=nn)
    assert abs(nn_sdd - fba_sdd) <= 0.15
    assert nn_sic >= nn_sdd + 0.05


# jobs

async def test_async_job_tracking(runner):
    result = await runner.run_async(_tiny_config(snr_db=[1.0]), label="tiny fba")
    assert result["status"] == "completed"
    assert len(result["rows"]) == 2
    status = runner.get_job_status(result["job_id"])
    assert status["status"] == "completed" and status["points_count"] == 1
    assert runner.get_statistics()["successful_jobs"] == 1
    assert runner.list_jobs()[0]["job_id"] == result["job_id"]


async def test_failed_job_is_recorded(runner):
    result = await runner.run_async(_tiny_config(channel={"name": "coax"}))
    assert result["status"] == "failed"
    assert result["client_error"] is True
    assert "coax" in result["error"]
    stats = runner.get_statistics()
    assert stats["failed_jobs"] == 1 and stats["active_jobs"] == 0
    assert runner.get_job_status("no-such-job") is None


# command line

def test_cli_oracle_check(capsys):
    assert cli.main(["oracle-check", "--trials", "3", "--seed", "1"]) == 0
    assert "max |FBA - brute force|" in capsys.readouterr().out


def test_cli_simulate(tmp_path):
    out = tmp_path / "frame.npz"
    assert cli.main(["simulate", "--profile", "tiny", "--family", "ASK", "--M", "2",
                     "--n", "12", "--out", str(out)]) == 0
    data = np.load(out)
    assert data["x"].shape == (12,) and data["y"].shape == (12,)


def test_cli_reports_configuration_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("S: 3\nn: 10\n")
    assert cli.main(["evaluate", "--config", str(bad), "--snr-db", "0"]) == 2
