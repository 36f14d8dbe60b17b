"""
Ablation Harness
Pretrain and probe named configuration variants over several seeds
"""
import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import pandas as pd

from src.evaluation.probe import ProbeConfig, ProbeEncoder, appearance_control, linear_probe
from src.evaluation.synthetic import LabeledDataset
from src.reporting.charts import ChartGenerator
from src.training.checkpoint import MetricsLog
from src.training.config import TrainConfig
from src.training.trainer import METRICS_FILE, run_pretrain
from src.utils.errors import ConfigError
from src.utils.logger import get_logger

logger = get_logger()

PathLike = Union[str, Path]


def _tca_only(cfg: TrainConfig, cutout: bool, internal: bool, external: bool):
    cfg.tca.enable_cutout = cutout
    cfg.tca.enable_internal_mix = internal
    cfg.tca.enable_external_mix = external


VARIANTS: Dict[str, Callable[[TrainConfig], None]] = {
    "full": lambda cfg: None,
    "basic_only": lambda cfg: _tca_only(cfg, False, False, False),
    "cutout_only": lambda cfg: _tca_only(cfg, True, False, False),
    "internal_mix_only": lambda cfg: _tca_only(cfg, False, True, False),
    "external_mix_only": lambda cfg: _tca_only(cfg, False, False, True),
    "no_intra": lambda cfg: setattr(cfg.objective, "use_intra_negative", False),
    "no_bank": lambda cfg: setattr(cfg.objective, "use_bank_negatives", False),
}
SWEEPS = {
    "tau": lambda cfg, v: setattr(cfg.sampling, "tau", v),
    "stride": lambda cfg, v: setattr(cfg.sampling, "temporal_stride", v),
}


def apply_variant(base: TrainConfig, variant: str) -> TrainConfig:
    """
    Copy of base with a named variant applied

    Names are the keys of VARIANTS or a sweep "tau=<n>" / "stride=<n>".
    """
    cfg = copy.deepcopy(base)
    if variant in VARIANTS:
        VARIANTS[variant](cfg)
    elif "=" in variant and variant.split("=", 1)[0] in SWEEPS:
        key, value = variant.split("=", 1)
        try:
            SWEEPS[key](cfg, int(value))
        except ValueError:
            raise ConfigError(f"ablation variant {variant!r} needs an integer value") from None
    else:
        known = list(VARIANTS) + [f"{k}=<n>" for k in SWEEPS]
        raise ConfigError(f"unknown ablation variant {variant!r}; known: {known}")
    cfg.check()
    return cfg


@dataclass
class AblationResult:
    """Per-run rows and the per-variant summary"""
    runs: pd.DataFrame
    summary: pd.DataFrame

    def to_dict(self) -> Dict:
        return {
            "runs": self.runs.to_dict(orient="records"),
            "summary": self.summary.reset_index().to_dict(orient="records"),
        }


def run_ablation(
    variants: Sequence[str],
    seeds: Sequence[int],
    dataset: LabeledDataset,
    base_config: TrainConfig,
    workdir: PathLike,
    probe_cfg: Optional[ProbeConfig] = None,
    with_control: bool = True
) -> AblationResult:
    """
    Pretrain and probe every (variant, seed)

    Args:
        variants: Variant names
        seeds: Training seeds
        dataset: Labelled dataset (train split used for pretraining)
        base_config: Configuration the variants modify
        workdir: Output directory; runs go to workdir/<variant>/seed_<s>
        probe_cfg: Probe configuration
        with_control: Also run the appearance control per checkpoint

    Returns:
        AblationResult (also written as ablation.json and ablation.png)
    """
    workdir = Path(workdir)
    probe_cfg = probe_cfg or ProbeConfig()
    configs = {variant: apply_variant(base_config, variant) for variant in variants}

    rows: List[Dict] = []
    for variant, cfg in configs.items():
        for seed in seeds:
            run_cfg = copy.deepcopy(cfg)
            run_cfg.seed = int(seed)
            run_dir = workdir / variant / f"seed_{seed}"
            logger.info(f"Ablation run {variant} seed {seed}", category="evaluation")

            checkpoint = run_pretrain(dataset.train, run_cfg, run_dir)
            encoder = ProbeEncoder.from_checkpoint(checkpoint, probe_cfg.encoder)
            probe = linear_probe(encoder, dataset, probe_cfg)
            metrics = MetricsLog(run_dir / METRICS_FILE).to_frame()
            row = {
                "variant": variant,
                "seed": int(seed),
                "run_dir": str(run_dir),
                "top1": probe.top1,
                "final_loss": float(metrics["loss"].iloc[-1]) if not metrics.empty else float("nan"),
            }
            if with_control:
                row["control_top1"] = appearance_control(encoder, dataset, probe_cfg).top1
            rows.append(row)

    runs = pd.DataFrame(rows)
    value_columns = [c for c in ("top1", "control_top1", "final_loss") if c in runs.columns]
    summary = runs.groupby("variant", sort=False)[value_columns].agg(["mean", "std"])
    summary.columns = [f"{col}_{stat}" for col, stat in summary.columns]

    result = AblationResult(runs=runs, summary=summary)
    workdir.mkdir(parents=True, exist_ok=True)
    (workdir / "ablation.json").write_text(json.dumps(result.to_dict(), indent=2, default=float))
    ChartGenerator().create_ablation_chart(runs, workdir / "ablation.png")
    logger.info(f"Ablation summary:\n{summary.to_string()}", category="evaluation")
    return result
