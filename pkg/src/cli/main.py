"""
Command-Line Interface
Synthetic data, pretraining, probing, triplet preview, ablations and the self-check suite
"""
import argparse
import json
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from config.settings import validate_config
from src.augment.pipeline import augment_triplet
from src.cli.config_file import ConfigFile
from src.evaluation.ablation import run_ablation
from src.evaluation.probe import ProbeEncoder, linear_probe, one_hot_hook
from src.evaluation.synthetic import LABELS_FILE, DatasetError, generate_synthetic, load_dataset, save_dataset
from src.health.diagnostics import FAULTS, SystemDiagnostics, format_table
from src.reporting.charts import ChartGenerator
from src.sampling.triplet import check_video, sample_triplet
from src.tensor.io import load_frame_dir, save_frame_dir
from src.training.checkpoint import MetricsLog
from src.training.trainer import METRICS_FILE, run_pretrain
from src.utils.errors import ConfigError, PropertyFailure, VTDLError, exit_code_for
from src.utils.logger import get_logger

logger = get_logger()

LOSS_CHART = "loss.png"
RECORD_FILE = "augmentation_record.json"


def _emit(text: str):
    """Machine-readable output goes to stdout; logs go to stderr"""
    sys.stdout.write(text + "\n")
    sys.stdout.flush()


def cmd_synth(args: argparse.Namespace) -> int:
    """Generate the synthetic motion dataset into --out"""
    config = ConfigFile.load(args.config)
    config.apply_seed(args.seed)
    config.synth.check()

    started = time.time()
    dataset = generate_synthetic(config.synth)
    save_dataset(dataset, args.out)
    logger.log_performance("synth", time.time() - started)
    return 0


def cmd_pretrain(args: argparse.Namespace) -> int:
    """Pretrain on the train split of --data; checkpoints and metrics go to --out"""
    config = ConfigFile.load(args.config)
    config.apply_seed(args.seed)

    dataset = load_dataset(args.data)
    started = time.time()
    checkpoint = run_pretrain(dataset.train, config.train, args.out, resume=args.resume)
    logger.log_performance("pretrain", time.time() - started)

    out_dir = Path(args.out)
    metrics = MetricsLog(out_dir / METRICS_FILE).to_frame()
    ChartGenerator().create_loss_chart(metrics, out_dir / LOSS_CHART)
    logger.info(f"Final checkpoint: {checkpoint}", category="cli")
    return 0


def cmd_probe(args: argparse.Namespace) -> int:
    """Linear probe of a checkpoint; prints the ProbeResult JSON"""
    config = ConfigFile.load(args.config)
    if args.encoder:
        config.probe.encoder = args.encoder
    config.probe.check()

    encoder = ProbeEncoder.from_checkpoint(args.checkpoint, config.probe.encoder)
    dataset = load_dataset(args.data)
    hook = one_hot_hook(dataset.n_classes) if args.one_hot_hook else None

    result = linear_probe(encoder, dataset, config.probe, feature_hook=hook, control=args.control)
    _emit(result.to_json())
    return 0


def _donor_id(data_dir: Path, video_id: str) -> Optional[str]:
    """Next video id after video_id in sorted order, wrapping"""
    labels_path = data_dir / LABELS_FILE
    if labels_path.is_file():
        ids = sorted(json.loads(labels_path.read_text()))
    else:
        ids = sorted(p.name for p in data_dir.iterdir() if p.is_dir())
    others = [vid for vid in ids if vid != video_id]
    if not others:
        return None
    later = [vid for vid in others if vid > video_id]
    return later[0] if later else others[0]


def cmd_preview_triplet(args: argparse.Namespace) -> int:
    """Sample and augment one triplet; write its frames and augmentation record"""
    config = ConfigFile.load(args.config)
    config.apply_seed(args.seed)
    cfg = config.train

    data_dir = Path(args.data)
    video_dir = data_dir / args.video
    if not video_dir.is_dir():
        raise DatasetError(f"{data_dir}: no video '{args.video}'")
    video = load_frame_dir(video_dir)

    donor = None
    if cfg.tca.enable_external_mix:
        donor_id = _donor_id(data_dir, args.video)
        donor = load_frame_dir(data_dir / donor_id) if donor_id else None

    check_video(video, cfg.sampling)
    rng = np.random.default_rng(cfg.seed)
    triplet = sample_triplet(video, cfg.sampling, rng)
    triplet = augment_triplet(triplet, donor, cfg.basic_aug, cfg.tca, rng, cfg.tca_on_negative)

    out_dir = Path(args.out)
    for name in ("anchor", "positive", "negative"):
        save_frame_dir(getattr(triplet, name), out_dir / name)
    record = {
        "video": args.video,
        "donor": donor.source_id if donor is not None else None,
        "t_a": triplet.t_a,
        "t_p": triplet.t_p,
        "t_n": triplet.t_n,
        "record": triplet.augmentation_record,
    }
    (out_dir / RECORD_FILE).write_text(json.dumps(record, indent=2, default=float) + "\n")
    logger.info(f"Triplet preview for {args.video} written to {out_dir}", category="cli")
    return 0


def cmd_selfcheck(args: argparse.Namespace) -> int:
    """Run the invariance suite; exit 1 naming every failed property"""
    diagnostics = SystemDiagnostics(fault=args.inject_fault, seed=args.seed or 0)
    results = diagnostics.run_all_diagnostics()
    _emit(format_table(results))

    failed = results['summary']['failed_names']
    if failed:
        raise PropertyFailure(f"failed properties: {', '.join(failed)}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    """Pretrain and probe each variant over several seeds"""
    config = ConfigFile.load(args.config)
    dataset = load_dataset(args.data)
    result = run_ablation(
        args.variants,
        args.seeds,
        dataset,
        config.train,
        args.out,
        probe_cfg=config.probe,
        with_control=not args.no_control,
    )
    _emit(json.dumps(result.to_dict(), indent=2, default=float))
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "synth": cmd_synth,
    "pretrain": cmd_pretrain,
    "probe": cmd_probe,
    "preview-triplet": cmd_preview_triplet,
    "selfcheck": cmd_selfcheck,
    "ablate": cmd_ablate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vtdl",
        description="Temporal-discriminative self-supervised video pretraining at desk scale",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument('--log-level', type=str.upper, default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help='console log level, overrides LOG_LEVEL')
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p = command("synth", "generate the synthetic moving-square dataset")
    p.add_argument('--config', type=str, default=None, help='JSON configuration file')
    p.add_argument('--out', type=str, required=True, help='dataset directory to write')
    p.add_argument('--seed', type=int, default=None, help='overrides VTDL_SEED and synth.seed')

    p = command("pretrain", "pretrain an encoder on a dataset directory")
    p.add_argument('--config', type=str, default=None, help='JSON configuration file')
    p.add_argument('--data', type=str, required=True, help='dataset directory (PNG frames + labels.json)')
    p.add_argument('--out', type=str, required=True, help='run directory for checkpoints and metrics')
    p.add_argument('--resume', type=str, default=None, help='checkpoint or run directory to continue from')
    p.add_argument('--seed', type=int, default=None, help='overrides VTDL_SEED and train.seed')

    p = command("probe", "linear probe of a pretrained checkpoint")
    p.add_argument('--checkpoint', type=str, required=True, help='checkpoint or run directory')
    p.add_argument('--data', type=str, required=True, help='labelled dataset directory')
    p.add_argument('--config', type=str, default=None, help='JSON configuration file (probe section)')
    p.add_argument('--control', action='store_true', help='probe motion-removed clips (appearance control)')
    p.add_argument('--encoder', choices=("history", "online"), default=None,
                   help='network to probe (default from probe.encoder)')
    p.add_argument('--one-hot-hook', action='store_true', help=argparse.SUPPRESS)

    p = command("preview-triplet", "write one augmented triplet as PNG frames")
    p.add_argument('--config', type=str, default=None, help='JSON configuration file')
    p.add_argument('--data', type=str, required=True, help='dataset directory')
    p.add_argument('--video', type=str, required=True, help='video id, e.g. train_00000')
    p.add_argument('--out', type=str, required=True, help='output directory')
    p.add_argument('--seed', type=int, default=None, help='overrides VTDL_SEED and train.seed')

    p = command("selfcheck", "run the invariance self-check suite")
    p.add_argument('--inject-fault', choices=FAULTS, default=None, help='deliberately break one property')
    p.add_argument('--seed', type=int, default=None, help='seed of the random check inputs')

    p = command("ablate", "pretrain and probe configuration variants")
    p.add_argument('--config', type=str, default=None, help='base JSON configuration file')
    p.add_argument('--data', type=str, required=True, help='labelled dataset directory')
    p.add_argument('--out', type=str, required=True, help='ablation work directory')
    p.add_argument('--variants', nargs='+', default=["full", "basic_only"],
                   help='variant names (full, basic_only, cutout_only, internal_mix_only, '
                        'external_mix_only, no_intra, no_bank, tau=<n>, stride=<n>)')
    p.add_argument('--seeds', nargs='+', type=int, default=[0, 1, 2], help='training seeds')
    p.add_argument('--no-control', action='store_true', help='skip the appearance control probe')

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one command and map failures to exit codes

    Returns:
        0 ok, 1 property failure, 2 config, 3 I/O, 4 data, 5 checkpoint
    """
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command]
    if args.log_level:
        logger.set_console_level(args.log_level)

    try:
        issues = validate_config()
        if issues:
            raise ConfigError("; ".join(issues))
        return handler(args)
    except (VTDLError, OSError) as e:
        code = exit_code_for(e)
        logger.log_failure(args.command, e, code)
        return code
    except Exception as e:
        logger.exception(f"{args.command}: unexpected error: {e}", category="errors")
        return exit_code_for(e)


def run(argv: Optional[List[str]] = None):
    sys.exit(main(argv))


if __name__ == "__main__":
    run()
