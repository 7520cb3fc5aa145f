"""
Experiment configuration models, YAML loading and environment settings.
"""

import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.errors import ConfigError


class ChannelProfile(BaseModel):
    """Named channel profile plus overrides passed to the profile builder."""
    name: str = "fiber-b2b"
    L_fib: Optional[float] = None
    options: Dict[str, Any] = Field(default_factory=dict)


class ModulationConfig(BaseModel):
    family: Literal["PAM", "ASK", "SQAM"] = "PAM"
    M: int = 4

    @field_validator("family", mode="before")
    @classmethod
    def upper_family(cls, v):
        return v.upper() if isinstance(v, str) else v


class FbaParams(BaseModel):
    N_tilde: Optional[int] = None
    max_states: int = 2 ** 20
    normalize: bool = True
    log_domain: bool = False


class GibbsParams(BaseModel):
    N_tilde: int = 21
    N_iter: int = 125
    N_par: int = 64
    burn_in: int = 25


class TrainParams(BaseModel):
    lr: float = 1e-3
    N_batch: int = 128
    N_iter: int = 10_000
    T_RNN: int = 32
    seed: Optional[int] = None
    warm_start: bool = True


class NnParams(BaseModel):
    L_Y: int = 32
    L_IC: int = 16
    hidden: List[int] = Field(default_factory=lambda: [64])
    time_varying: bool = True
    retrain: bool = False
    train: TrainParams = Field(default_factory=TrainParams)


class ExperimentConfig(BaseModel):
    channel: ChannelProfile = Field(default_factory=ChannelProfile)
    modulation: ModulationConfig = Field(default_factory=ModulationConfig)
    S: int = 1
    equalizer: Literal["fba", "gibbs", "nn"] = "fba"
    fba: FbaParams = Field(default_factory=FbaParams)
    gibbs: GibbsParams = Field(default_factory=GibbsParams)
    nn: NnParams = Field(default_factory=NnParams)
    snr_db: List[float] = Field(default_factory=lambda: [0.0, 5.0, 10.0])
    n: int = 1000
    n_blk: int = 10
    seed: int = 0
    workers: Optional[int] = None
    output: Optional[str] = None
    parquet: bool = False
    gnuplot: bool = False

    @field_validator("snr_db")
    @classmethod
    def increasing_snr(cls, v: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(v[:-1], v[1:])):
            raise ValueError("SNR grid must be strictly increasing")
        return v

    @model_validator(mode="after")
    def check_blocks(self) -> "ExperimentConfig":
        if self.S < 1:
            raise ValueError(f"S must be >= 1, got {self.S}")
        if self.n < 1 or self.n % self.S:
            raise ValueError(f"n={self.n} must be a positive multiple of S={self.S}")
        if self.n_blk < 1:
            raise ValueError(f"n_blk must be >= 1, got {self.n_blk}")
        return self


class RunnerSettings(BaseModel):
    """Process-wide settings taken from the environment (.env supported)."""
    log_level: str = "INFO"
    output_dir: str = "results"
    workers: int = 1
    checkpoint_dir: str = "checkpoints"

    @classmethod
    def from_env(cls) -> "RunnerSettings":
        load_dotenv()
        return cls(
            log_level=os.getenv("SICEQ_LOG_LEVEL", "INFO"),
            output_dir=os.getenv("SICEQ_OUTPUT_DIR", "results"),
            workers=int(os.getenv("SICEQ_WORKERS", "1")),
            checkpoint_dir=os.getenv("SICEQ_CHECKPOINT_DIR", "checkpoints"),
        )


def config_from_dict(data: Optional[Dict[str, Any]]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data or {})
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment configuration: {e}")


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read a YAML experiment file."""
    try:
        with open(path, "r") as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}")
    except yaml.YAMLError as e:
        raise ConfigError(f"Malformed YAML in {path}: {e}")
    return config_from_dict(data)


def configure_logging(level: str = "INFO") -> None:
    """Route loguru output to stderr at the given level."""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(),
               format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function} - {message}")
