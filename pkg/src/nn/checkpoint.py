"""
Versioned checkpoint files for trained stage networks.

Byte layout:
    6 bytes   magic b"SICRNN"
    uint32    format version (little endian)
    uint32    header length in bytes
    header    UTF-8 JSON (CheckpointHeader)
    blocks    float64 little-endian arrays, row-major, in header.blocks order
              (network parameters, then norm_mean and norm_std)
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field, ValidationError

from src.errors import CheckpointError, ShapeMismatchError
from src.nn.model import RnnModel, param_shapes
from src.nn.topology import RnnTopology

MAGIC = b"SICRNN"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<II")


class BlockSpec(BaseModel):
    name: str
    shape: List[int]


class CheckpointHeader(BaseModel):
    version: int = FORMAT_VERSION
    topology: Dict[str, Any]
    Gamma: int
    n_phases: int
    blocks: List[BlockSpec]
    train_config: Optional[Dict[str, Any]] = None
    seed: Optional[int] = None
    extra: Dict[str, Any] = Field(default_factory=dict)


def _blocks(model: RnnModel) -> List[Tuple[str, np.ndarray]]:
    blocks = [(name, model.params[name]) for name in param_shapes(model.topology)]
    return blocks + [("norm_mean", model.norm_mean), ("norm_std", model.norm_std)]


def save_checkpoint(path: Union[str, Path],
                    model: RnnModel,
                    train_config: Optional[Dict[str, Any]] = None,
                    extra: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    blocks = _blocks(model)
    header = CheckpointHeader(
        topology=model.topology.to_dict(),
        Gamma=model.topology.Gamma,
        n_phases=model.topology.n_phases,
        blocks=[BlockSpec(name=name, shape=list(arr.shape)) for name, arr in blocks],
        train_config=train_config,
        seed=(train_config or {}).get("seed"),
        extra=extra or {},
    )
    raw_header = header.model_dump_json().encode("utf-8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(_PREFIX.pack(FORMAT_VERSION, len(raw_header)))
            fh.write(raw_header)
            for _, arr in blocks:
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint {path}: {e}")
    logger.info(f"Saved checkpoint {path} ({model.num_parameters} parameters)")
    return path


def load_checkpoint(path: Union[str, Path],
                    expected: Optional[RnnTopology] = None) -> Tuple[RnnModel, CheckpointHeader]:
    """Read a checkpoint; raises CheckpointError on any format or topology mismatch."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}")

    if data[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file")
    offset = len(MAGIC)
    if len(data) < offset + _PREFIX.size:
        raise CheckpointError(f"{path}: truncated prefix")
    version, header_len = _PREFIX.unpack_from(data, offset)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    offset += _PREFIX.size

    try:
        header = CheckpointHeader.model_validate(json.loads(data[offset:offset + header_len].decode("utf-8")))
        topology = RnnTopology.from_dict(header.topology)
    except (ValidationError, ValueError, TypeError, KeyError) as e:
        raise CheckpointError(f"{path}: corrupt header: {e}")
    offset += header_len

    if expected is not None and topology != expected:
        raise CheckpointError(f"{path}: topology {topology} does not match expected {expected}")

    arrays = {}
    for block in header.blocks:
        count = int(np.prod(block.shape)) if block.shape else 1
        end = offset + 8 * count
        if end > len(data):
            raise CheckpointError(f"{path}: truncated block {block.name}")
        arrays[block.name] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(block.shape).copy()
        offset = end
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")

    try:
        norm_mean, norm_std = arrays.pop("norm_mean"), arrays.pop("norm_std")
        model = RnnModel(topology, arrays, norm_mean, norm_std)
    except (KeyError, ShapeMismatchError) as e:
        raise CheckpointError(f"{path}: blocks do not match topology: {e}")
    return model, header


def save_loss_trace(path: Union[str, Path], losses: List[float]) -> Path:
    """Training losses (bits per symbol) as CSV next to the checkpoint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"iteration": np.arange(1, len(losses) + 1), "loss_bits": losses}).to_csv(path, index=False)
    return path
