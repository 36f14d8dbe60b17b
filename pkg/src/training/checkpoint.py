"""
Checkpoints
Atomic checkpoint directories and the newline-delimited metrics log
"""
import json
import os
import shutil
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import pandas as pd

from src.model.encoder import EncoderSpec
from src.model.params import Params
from src.tensor.io import TensorFormatError, load_tensor, save_tensor
from src.utils.errors import CheckpointError
from src.utils.logger import get_logger

logger = get_logger()

PathLike = Union[str, Path]

MANIFEST = "manifest.json"
CHECKPOINT_FORMAT = "vtdl-checkpoint"
CHECKPOINT_VERSION = 1
TENSOR_VERSION = 2   # f64 payload, bit-exact resume
METRIC_KEYS = ("step", "epoch", "loss", "lr", "mean_pos_sim", "mean_neg_sim")


class CheckpointCorrupt(CheckpointError):
    """Checkpoint missing, incomplete or unreadable"""
    pass


@dataclass
class CheckpointData:
    """Everything stored in one checkpoint directory"""
    online: Params
    history: Params
    velocity: Params
    bank_slots: Any
    bank_cursor: int
    m: float
    epoch: int
    step: int
    seed: int
    spec: EncoderSpec
    config: Dict[str, Any]


def checkpoint_name(epoch: int) -> str:
    return f"epoch_{epoch:04d}"


def _tensor_file(group: str, name: str) -> str:
    return f"{group}/{name}.vtdl"


def _write_group(root: Path, group: str, params: Params) -> Dict[str, str]:
    (root / group).mkdir(parents=True, exist_ok=True)
    index = OrderedDict()
    for name, value in params.items():
        rel = _tensor_file(group, name)
        save_tensor(value, root / rel, version=TENSOR_VERSION)
        index[name] = rel
    return index


def save_checkpoint(data: CheckpointData, run_dir: PathLike) -> Path:
    """
    Write a checkpoint directory atomically

    Files go to a temporary sibling directory which is then renamed to
    run_dir/epoch_XXXX, replacing an existing checkpoint of that epoch.

    Args:
        data: Checkpoint contents
        run_dir: Run directory

    Returns:
        Path of the checkpoint directory
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    final = run_dir / checkpoint_name(data.epoch)
    tmp = run_dir / f".{final.name}.tmp-{os.getpid()}"
    if tmp.exists():
        shutil.rmtree(tmp)

    try:
        tmp.mkdir()
        manifest = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "epoch": data.epoch,
            "step": data.step,
            "rng": {"seed": data.seed, "epoch": data.epoch, "step": data.step},
            "m": data.m,
            "spec": data.spec.to_dict(),
            "config": data.config,
            "tensors": {
                "online": _write_group(tmp, "online", data.online),
                "history": _write_group(tmp, "history", data.history),
                "velocity": _write_group(tmp, "velocity", data.velocity),
            },
            "bank": {"cursor": data.bank_cursor, "file": "bank/slots.vtdl"},
        }
        (tmp / "bank").mkdir()
        save_tensor(data.bank_slots, tmp / "bank" / "slots.vtdl", version=TENSOR_VERSION)
        (tmp / MANIFEST).write_text(json.dumps(manifest, indent=2))

        if final.exists():
            shutil.rmtree(final)
        os.replace(tmp, final)
    except Exception:
        shutil.rmtree(tmp, ignore_errors=True)
        raise

    logger.log_checkpoint(final, data.epoch)
    return final


def resolve_checkpoint(path: PathLike) -> Path:
    """
    A checkpoint directory, or the latest checkpoint inside a run directory
    """
    path = Path(path)
    if (path / MANIFEST).is_file():
        return path
    if path.is_dir():
        candidates = sorted(p for p in path.glob("epoch_*") if (p / MANIFEST).is_file())
        if candidates:
            return candidates[-1]
    raise CheckpointCorrupt(f"no checkpoint found at {path}")


def _read_group(root: Path, index: Dict[str, str]) -> Params:
    return OrderedDict((name, load_tensor(root / rel)) for name, rel in index.items())


def load_checkpoint(path: PathLike) -> CheckpointData:
    """
    Read a checkpoint written by save_checkpoint

    Args:
        path: Checkpoint directory or run directory (latest checkpoint)

    Returns:
        CheckpointData

    Raises:
        CheckpointCorrupt: on any missing file, format error or inconsistency
    """
    root = resolve_checkpoint(path)
    try:
        manifest = json.loads((root / MANIFEST).read_text())
        if manifest.get("format") != CHECKPOINT_FORMAT:
            raise CheckpointCorrupt(f"{root}: not a checkpoint manifest")
        if manifest.get("version") != CHECKPOINT_VERSION:
            raise CheckpointCorrupt(f"{root}: unsupported checkpoint version {manifest.get('version')}")

        tensors = manifest["tensors"]
        online = _read_group(root, tensors["online"])
        history = _read_group(root, tensors["history"])
        velocity = _read_group(root, tensors["velocity"])
        bank_slots = load_tensor(root / manifest["bank"]["file"])
        spec = EncoderSpec.from_dict(manifest["spec"])

        expected = spec.param_shapes()
        for group_name, group in (("online", online), ("history", history), ("velocity", velocity)):
            if list(group.keys()) != list(expected.keys()):
                raise CheckpointCorrupt(f"{root}: {group_name} tensors do not match the encoder spec")
            for name, shape in expected.items():
                if tuple(group[name].shape) != shape:
                    raise CheckpointCorrupt(f"{root}: {group_name}/{name} has shape {list(group[name].shape)}")

        return CheckpointData(
            online=online,
            history=history,
            velocity=velocity,
            bank_slots=bank_slots,
            bank_cursor=int(manifest["bank"]["cursor"]),
            m=float(manifest["m"]),
            epoch=int(manifest["epoch"]),
            step=int(manifest["step"]),
            seed=int(manifest["rng"]["seed"]),
            spec=spec,
            config=manifest.get("config", {}),
        )
    except CheckpointCorrupt:
        raise
    except (OSError, ValueError, KeyError, TypeError, TensorFormatError) as e:
        raise CheckpointCorrupt(f"{root}: {e}") from e


def load_encoder(path: PathLike, which: str = "history") -> Tuple[Params, EncoderSpec]:
    """Parameters of one network from a checkpoint ("history" or "online")"""
    if which not in ("history", "online"):
        raise ValueError(f"encoder must be 'history' or 'online', got {which!r}")
    data = load_checkpoint(path)
    return (data.history if which == "history" else data.online), data.spec


class MetricsLog:
    """
    Newline-delimited JSON training metrics

    One record per completed step with the keys of METRIC_KEYS (plus
    grad_norm).
    """

    def __init__(self, path: PathLike):
        self.path = Path(path)

    def reset(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("")

    def append(self, record: Dict[str, Any]):
        with self.path.open("a") as handle:
            handle.write(json.dumps(record) + "\n")

    def read(self) -> List[Dict[str, Any]]:
        if not self.path.exists():
            return []
        return [json.loads(line) for line in self.path.read_text().splitlines() if line.strip()]

    def truncate(self, step: int):
        """Keep records up to and including the given step"""
        kept = [r for r in self.read() if r["step"] <= step]
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("".join(json.dumps(r) + "\n" for r in kept))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.read())

    def __len__(self) -> int:
        return len(self.read())
