"""
Rate sweep pipeline
SNR sweeps over SIC receivers with job tracking and result persistence
"""

import asyncio
import uuid
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from src.channel.model import DiscreteChannel, build_channel, simulate_frame
from src.channel.profiles import profile_spec
from src.errors import SicEqError
from src.fba.equalizer import FbaEqualizer
from src.gibbs.equalizer import GibbsEqualizer
from src.gibbs.sampler import GibbsConfig
from src.modem.alphabet import ModulationAlphabet, make_alphabet
from src.modem.source import calibrate_gain, db_to_linear, draw_symbols
from src.nn.checkpoint import load_checkpoint, save_checkpoint, save_loss_trace
from src.nn.equalizer import NnEqualizer
from src.nn.inputs import input_lag
from src.nn.model import RnnModel
from src.nn.topology import RnnTopology
from src.nn.training import TrainConfig, train_stage
from src.runner.config import ExperimentConfig, RunnerSettings
from src.sic.apps import AppMatrix
from src.sic.rates import REPORT_COLUMNS, RateReport, estimate_rate
from src.sic.receiver import Equalizer, run_sic, stage_true_indices


@dataclass
class RateJob:
    """Sweep job representation"""
    job_id: str
    label: str
    status: str
    created_at: datetime
    completed_at: Optional[datetime]
    points_count: int
    equalizer: str
    output_path: Optional[str] = None
    error_message: Optional[str] = None


class ResultWriter:
    """Result persistence for rate rows"""

    @staticmethod
    def to_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    @staticmethod
    def to_csv(rows: List[Dict[str, Any]], path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        ResultWriter.to_frame(rows).to_csv(path, index=False, float_format="%.10g")
        return path

    @staticmethod
    def to_parquet(rows: List[Dict[str, Any]], path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        ResultWriter.to_frame(rows).to_parquet(path, index=False)
        return path

    @staticmethod
    def to_gnuplot(rows: List[Dict[str, Any]], path: Path) -> Path:
        """Whitespace table, one index block per stage (plot with `index i`)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df = ResultWriter.to_frame(rows)
        blocks = []
        for stage, group in df.groupby("stage", sort=False):
            lines = [f"# stage {stage} ({group['equalizer'].iloc[0]}, {group['modulation'].iloc[0]}, S={group['S'].iloc[0]})",
                     "# snr_db rate_bpcu"]
            lines += [f"{r.snr_db:.6g} {r.rate_bpcu:.10g}" for r in group.itertuples()]
            blocks.append("\n".join(lines))
        path.write_text("\n\n\n".join(blocks) + "\n")
        return path


def _evaluate_frame(channel: DiscreteChannel,
                    alphabet: ModulationAlphabet,
                    equalizer: Equalizer,
                    S: int,
                    n: int,
                    seed: np.random.SeedSequence) -> Tuple[List[AppMatrix], List[np.ndarray]]:
    rng = np.random.default_rng(seed)
    frame = draw_symbols(alphabet, n, rng, channel)
    y = simulate_frame(frame, channel, rng)
    return run_sic(y, frame, equalizer, S, rng), stage_true_indices(frame, S)


class SweepRunner:
    """Main rate sweep class"""

    def __init__(self, settings: Optional[RunnerSettings] = None):
        self.settings = settings or RunnerSettings()
        self.jobs: Dict[str, RateJob] = {}
        self.statistics = {
            'total_jobs': 0,
            'successful_jobs': 0,
            'failed_jobs': 0,
            'total_points_evaluated': 0,
        }

    # building blocks

    def build_setup(self, cfg: ExperimentConfig) -> Tuple[DiscreteChannel, ModulationAlphabet]:
        spec = profile_spec(cfg.channel.name, L_fib=cfg.channel.L_fib, **cfg.channel.options)
        channel = build_channel(spec)
        alphabet = make_alphabet(cfg.modulation.family, cfg.modulation.M)
        return channel, alphabet

    def nn_topology(self, cfg: ExperimentConfig, channel: DiscreteChannel,
                    alphabet: ModulationAlphabet, s: int) -> RnnTopology:
        return RnnTopology(
            M=alphabet.M, L_Y=cfg.nn.L_Y, L_IC=cfg.nn.L_IC, hidden=tuple(cfg.nn.hidden),
            Gamma=cfg.S - s + 1, y_complex=not channel.output_is_real,
            x_complex=not alphabet.is_real, time_varying=cfg.nn.time_varying,
            lag=input_lag(channel),
        )

    def _checkpoint_path(self, cfg: ExperimentConfig, alphabet: ModulationAlphabet, snr_db: float, s: int) -> Path:
        name = f"{cfg.channel.name}_{alphabet.label}_S{cfg.S}_s{s}_snr{snr_db:g}.sicrnn"
        return Path(self.settings.checkpoint_dir) / name

    def train_models(self, cfg: ExperimentConfig, channel: DiscreteChannel, alphabet: ModulationAlphabet,
                     snr_db: float, warm: Optional[Dict[int, RnnModel]] = None) -> Dict[int, RnnModel]:
        """Load or train one network per stage at this SNR."""
        models = {}
        tp = cfg.nn.train
        for s in range(1, cfg.S + 1):
            topology = self.nn_topology(cfg, channel, alphabet, s)
            path = self._checkpoint_path(cfg, alphabet, snr_db, s)
            if path.exists() and not cfg.nn.retrain:
                models[s], _ = load_checkpoint(path, expected=topology)
                logger.info(f"Stage {s}/{cfg.S}: loaded {path}")
                continue
            train_cfg = TrainConfig(lr=tp.lr, N_batch=tp.N_batch, N_iter=tp.N_iter, T_RNN=tp.T_RNN,
                                    seed=tp.seed if tp.seed is not None else cfg.seed + 1000 * s)
            init = (warm or {}).get(s) if tp.warm_start else None
            result = train_stage(channel, alphabet, cfg.S, s, topology, train_cfg, init=init)
            save_checkpoint(path, result.model, train_config=train_cfg.to_dict(),
                            extra={"snr_db": snr_db, "stage": s, "S": cfg.S})
            save_loss_trace(path.with_suffix(".loss.csv"), result.losses)
            models[s] = result.model
        return models

    def build_equalizer(self, cfg: ExperimentConfig, channel: DiscreteChannel, alphabet: ModulationAlphabet,
                        snr_db: float, warm: Optional[Dict[int, RnnModel]] = None) -> Equalizer:
        if cfg.equalizer == "fba":
            return FbaEqualizer.from_channel(channel, alphabet, cfg.fba.N_tilde,
                                             normalize=cfg.fba.normalize, max_states=cfg.fba.max_states,
                                             log_domain=cfg.fba.log_domain)
        if cfg.equalizer == "gibbs":
            g = cfg.gibbs
            return GibbsEqualizer.from_channel(channel, alphabet,
                                               GibbsConfig(N_tilde=g.N_tilde, N_iter=g.N_iter,
                                                           N_par=g.N_par, burn_in=g.burn_in))
        return NnEqualizer(self.train_models(cfg, channel, alphabet, snr_db, warm), channel.spec.N_os)

    def evaluate_point(self, cfg: ExperimentConfig, channel: DiscreteChannel, alphabet: ModulationAlphabet,
                       equalizer: Equalizer, snr_db: float, point: int) -> RateReport:
        """Monte-Carlo SIC rates over n_blk frames at one SNR."""
        seeds = np.random.SeedSequence([cfg.seed, point]).spawn(cfg.n_blk)
        workers = cfg.workers or self.settings.workers
        args = [(channel, alphabet, equalizer, cfg.S, cfg.n, seq) for seq in seeds]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_evaluate_frame, *zip(*args)))
        else:
            results = [_evaluate_frame(*a) for a in args]

        apps = [r[0] for r in results]
        truths = [r[1] for r in results]
        rates = [estimate_rate([a[s] for a in apps], [t[s] for t in truths]) for s in range(cfg.S)]
        return RateReport(stage_rates=rates, Ptx_dB=snr_db, modulation=alphabet.label, M=alphabet.M,
                          S=cfg.S, equalizer=equalizer.name, n=cfg.n, N_blk=cfg.n_blk, seed=cfg.seed,
                          multiplications_per_app=equalizer.multiplications_per_app(cfg.S))

    def run(self, cfg: ExperimentConfig) -> List[Dict[str, Any]]:
        """Sweep all SNR points (low to high) and return the report rows."""
        channel, base = self.build_setup(cfg)
        rows: List[Dict[str, Any]] = []
        warm: Optional[Dict[int, RnnModel]] = None
        for point, snr_db in enumerate(cfg.snr_db):
            alphabet = base.with_gain(calibrate_gain(base, channel, db_to_linear(snr_db)))
            equalizer = self.build_equalizer(cfg, channel, alphabet, snr_db, warm)
            if isinstance(equalizer, NnEqualizer):
                warm = equalizer.models
            report = self.evaluate_point(cfg, channel, alphabet, equalizer, snr_db, point)
            logger.info(f"{alphabet.label} {equalizer.name} S={cfg.S} at {snr_db:g} dB: "
                        f"stage rates {[round(r, 4) for r in report.stage_rates]}, avg {report.average:.4f} bpcu")
            rows.extend(report.to_rows())
            self.statistics['total_points_evaluated'] += 1
        return rows

    def write(self, cfg: ExperimentConfig, rows: List[Dict[str, Any]]) -> Optional[Path]:
        if not cfg.output:
            return None
        path = Path(cfg.output)
        if not path.is_absolute() and path.parent == Path("."):
            path = Path(self.settings.output_dir) / path
        ResultWriter.to_csv(rows, path)
        if cfg.parquet:
            ResultWriter.to_parquet(rows, path.with_suffix(".parquet"))
        if cfg.gnuplot:
            ResultWriter.to_gnuplot(rows, path.with_suffix(".dat"))
        logger.info(f"Wrote {len(rows)} rows to {path}")
        return path

    async def run_async(self, cfg: ExperimentConfig, label: str = "sweep") -> Dict[str, Any]:
        """Run a sweep as a tracked job"""
        job_id = str(uuid.uuid4())
        logger.info(f"Starting sweep job {job_id} ({label})")
        job = RateJob(
            job_id=job_id,
            label=label,
            status="processing",
            created_at=datetime.utcnow(),
            completed_at=None,
            points_count=len(cfg.snr_db),
            equalizer=cfg.equalizer,
        )
        self.jobs[job_id] = job

        try:
            logger.info(f"Job {job_id}: evaluating {len(cfg.snr_db)} SNR points with {cfg.equalizer}")
            rows = await asyncio.to_thread(self.run, cfg)
            path = self.write(cfg, rows)
            job.output_path = str(path) if path else None
            job.status = "completed"
            job.completed_at = datetime.utcnow()
            self.statistics['total_jobs'] += 1
            self.statistics['successful_jobs'] += 1
            logger.info(f"Job {job_id}: completed with {len(rows)} rows")
            return {
                "job_id": job_id,
                "status": "completed",
                "message": f"Evaluated {len(cfg.snr_db)} SNR points",
                "rows": rows,
                "output_path": job.output_path,
            }
        except Exception as e:
            job.status = "failed"
            job.error_message = str(e)
            job.completed_at = datetime.utcnow()
            self.statistics['total_jobs'] += 1
            self.statistics['failed_jobs'] += 1
            logger.error(f"Job {job_id}: failed with error: {e}")
            return {
                "job_id": job_id,
                "status": "failed",
                "message": f"Sweep job failed: {e}",
                "rows": [],
                "error": str(e),
                "client_error": isinstance(e, SicEqError),
            }

    def get_job_status(self, job_id: str) -> Optional[Dict[str, Any]]:
        if job_id not in self.jobs:
            return None
        job = self.jobs[job_id]
        return {
            "job_id": job.job_id,
            "label": job.label,
            "status": job.status,
            "created_at": job.created_at.isoformat(),
            "completed_at": job.completed_at.isoformat() if job.completed_at else None,
            "points_count": job.points_count,
            "equalizer": job.equalizer,
            "output_path": job.output_path,
            "error_message": job.error_message,
        }

    def get_statistics(self) -> Dict[str, Any]:
        return {
            **self.statistics,
            "active_jobs": len([job for job in self.jobs.values() if job.status == "processing"]),
            "total_jobs_tracked": len(self.jobs),
        }

    def list_jobs(self, limit: int = 10) -> List[Dict[str, Any]]:
        sorted_jobs = sorted(self.jobs.values(), key=lambda x: x.created_at, reverse=True)
        return [self.get_job_status(job.job_id) for job in sorted_jobs[:limit]]


def run_sweep(cfg: ExperimentConfig, settings: Optional[RunnerSettings] = None) -> pd.DataFrame:
    """Run a sweep synchronously, write the configured outputs and return the rows."""
    runner = SweepRunner(settings)
    rows = runner.run(cfg)
    runner.write(cfg, rows)
    return ResultWriter.to_frame(rows)
