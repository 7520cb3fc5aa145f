"""
Test Setup for the SIC equalizer toolkit
Basic tests to validate the setup and functionality
"""

from pathlib import Path

import numpy as np
from loguru import logger

REPO = Path(__file__).parent


def test_imports():
    """Test that all required modules can be imported"""
    from src.channel import build_channel, make_auxiliary, profile_spec
    from src.fba import FbaEqualizer, run_fba_stage
    from src.gibbs import GibbsEqualizer, run_gibbs_stage
    from src.modem import make_alphabet, calibrate_gain
    from src.nn import NnEqualizer, train_stage
    from src.runner import SweepRunner, load_config
    from src.sic import run_sic, estimate_rate
    logger.info("✓ All packages imported successfully")


def test_default_config():
    """Test the shipped experiment file loads"""
    from src.runner import load_config

    cfg = load_config(REPO / "config" / "default.yaml")
    assert cfg.snr_db == sorted(cfg.snr_db)
    assert cfg.n % cfg.S == 0
    logger.info(f"✓ Default config loaded: {cfg.modulation.M}-{cfg.modulation.family}, S={cfg.S}, {cfg.equalizer}")


def test_cli_parser():
    """Test every CLI subcommand is registered"""
    import cli

    parser = cli.build_parser()
    for command in (["simulate"], ["train", "--snr-db", "5", "--out", "m.sicrnn"], ["evaluate", "--snr-db", "0"],
                    ["sweep"], ["oracle-check"]):
        args = parser.parse_args(command)
        assert callable(args.func)
    logger.info("✓ CLI parser built successfully")


def test_basic_functionality():
    """Test a tiny end-to-end SIC evaluation"""
    from src.channel import build_channel, simulate_frame, tiny_profile
    from src.fba import FbaEqualizer
    from src.modem import draw_symbols, make_alphabet
    from src.sic import estimate_rate, run_sic, stage_true_indices

    channel = build_channel(tiny_profile())
    alphabet = make_alphabet("ASK", 2)
    rng = np.random.default_rng(0)
    frame = draw_symbols(alphabet, 40, rng, channel)
    y = simulate_frame(frame, channel, rng)
    apps = run_sic(y, frame, FbaEqualizer.from_channel(channel, alphabet), 2)
    truths = stage_true_indices(frame, 2)
    rates = [estimate_rate(a, t) for a, t in zip(apps, truths)]
    assert all(0.0 <= r <= 1.0 for r in rates)
    logger.info(f"✓ SIC stage rates: {rates}")
