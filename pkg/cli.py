"""
Command-line entry point: simulate | train | evaluate | sweep | oracle-check
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from loguru import logger

from src.channel.auxiliary import make_auxiliary
from src.channel.model import build_channel, simulate_frame
from src.channel.profiles import profile_spec, tiny_profile
from src.errors import SicEqError
from src.fba.oracle import brute_force_apps
from src.fba.trellis import run_fba_stage
from src.modem.alphabet import make_alphabet
from src.modem.source import calibrate_gain, db_to_linear, draw_symbols
from src.nn.checkpoint import save_checkpoint, save_loss_trace
from src.nn.training import TrainConfig, train_stage
from src.runner.config import ExperimentConfig, RunnerSettings, configure_logging, load_config
from src.runner.pipeline import ResultWriter, SweepRunner, run_sweep
from src.sic.receiver import stage_input


def _load(args) -> ExperimentConfig:
    return load_config(args.config) if args.config else ExperimentConfig()


def cmd_simulate(args, settings: RunnerSettings) -> int:
    channel = build_channel(profile_spec(args.profile, L_fib=args.L_fib))
    base = make_alphabet(args.family, args.M)
    alphabet = base.with_gain(calibrate_gain(base, channel, db_to_linear(args.snr_db)))
    rng = np.random.default_rng(args.seed)
    frame = draw_symbols(alphabet, args.n, rng, channel)
    y = simulate_frame(frame, channel, rng)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.savez(out, y=y, x=frame.x, indices=frame.indices, gain=alphabet.gain, snr_db=args.snr_db)
    logger.info(f"Wrote {frame.n} symbols and {y.size} samples to {out}")
    return 0


def cmd_train(args, settings: RunnerSettings) -> int:
    cfg = _load(args)
    runner = SweepRunner(settings)
    channel, base = runner.build_setup(cfg)
    alphabet = base.with_gain(calibrate_gain(base, channel, db_to_linear(args.snr_db)))
    topology = runner.nn_topology(cfg, channel, alphabet, args.stage)
    tp = cfg.nn.train
    train_cfg = TrainConfig(lr=tp.lr, N_batch=tp.N_batch, N_iter=tp.N_iter, T_RNN=tp.T_RNN,
                            seed=tp.seed if tp.seed is not None else cfg.seed)
    result = train_stage(channel, alphabet, cfg.S, args.stage, topology, train_cfg)
    path = save_checkpoint(args.out, result.model, train_config=train_cfg.to_dict(),
                           extra={"snr_db": args.snr_db, "stage": args.stage, "S": cfg.S})
    save_loss_trace(Path(path).with_suffix(".loss.csv"), result.losses)
    if result.losses:
        print(f"final loss {np.mean(result.losses[-100:]):.4f} bits/symbol")
    return 0


def cmd_evaluate(args, settings: RunnerSettings) -> int:
    cfg = _load(args).model_copy(update={"snr_db": [args.snr_db], "output": None})
    rows = SweepRunner(settings).run(cfg)
    print(ResultWriter.to_frame(rows).to_string(index=False))
    return 0


def cmd_sweep(args, settings: RunnerSettings) -> int:
    cfg = _load(args)
    if args.output:
        cfg = cfg.model_copy(update={"output": args.output})
    df = run_sweep(cfg, settings)
    print(df[df["stage"] == "avg"][["snr_db", "rate_bpcu"]].to_string(index=False))
    return 0


def _random_instance(rng: np.random.Generator):
    taps = rng.standard_normal(3)
    nonlinearity = rng.choice(["identity", "sld"])
    channel = build_channel(tiny_profile(g_taps=taps, nonlinearity=str(nonlinearity),
                                         noise_sigma2=float(rng.uniform(0.2, 1.0))))
    base = make_alphabet(str(rng.choice(["PAM", "ASK"])), int(rng.choice([2, 4])))
    alphabet = base.with_gain(calibrate_gain(base, channel, db_to_linear(rng.uniform(0.0, 6.0))))
    S = int(rng.integers(1, 4))
    n = S * int(rng.integers(2, 7 // S + 2))
    return channel, alphabet, S, n


def cmd_oracle_check(args, settings: RunnerSettings) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for trial in range(args.trials):
        channel, alphabet, S, n = _random_instance(rng)
        aux = make_auxiliary(channel, alphabet, int(rng.integers(0, channel.memory + 1)))
        frame = draw_symbols(alphabet, n, rng, channel)
        y = simulate_frame(frame, channel, rng)
        for s in range(1, S + 1):
            stage = stage_input(y, frame, s, S)
            fba = run_fba_stage(stage, aux, alphabet).apps(alphabet.M)
            ref = brute_force_apps(stage, aux, alphabet)
            dev = float(np.max(np.abs(fba.q - ref.q)))
            worst = max(worst, dev)
            logger.debug(f"Trial {trial}: {alphabet.label} n={n} S={S} s={s} N_tilde={aux.memory} deviation {dev:.3g}")
    print(f"max |FBA - brute force| over {args.trials} trials: {worst:.3e}")
    return 0 if worst <= args.tol else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="siceq", description="SIC equalizer rate toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one frame and save y and x")
    p.add_argument("--profile", default="fiber-b2b")
    p.add_argument("--L-fib", type=float, default=None)
    p.add_argument("--family", default="PAM")
    p.add_argument("--M", type=int, default=4)
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="frame.npz")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train one stage network and save a checkpoint")
    p.add_argument("--config", default=None)
    p.add_argument("--stage", type=int, default=1)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="estimate SIC rates at one SNR point")
    p.add_argument("--config", default=None)
    p.add_argument("--snr-db", type=float, required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="run the configured SNR sweep and write the CSV")
    p.add_argument("--config", default="config/default.yaml")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="compare FBA with brute-force marginals on random small instances")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    settings = RunnerSettings.from_env()
    configure_logging(settings.log_level)
    try:
        return args.func(args, settings)
    except SicEqError as e:
        logger.error(f"{args.command} failed: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
