"""
Evaluation Module
Synthetic motion data, linear probe, appearance control and ablations
"""
from src.evaluation.synthetic import (
    SynthConfig,
    LabeledDataset,
    generate_synthetic,
    render_video,
    draw_appearance,
    video_label,
    split_labels,
    split_size,
    video_rng,
    save_dataset,
    load_dataset,
    ConfigInfeasible,
    DatasetError,
    DIRECTIONS,
)
from src.evaluation.probe import (
    ProbeConfig,
    ProbeResult,
    ProbeEncoder,
    linear_probe,
    appearance_control,
    probe_clip,
    static_clip,
    one_hot_hook,
    extract_features,
)
from src.evaluation.ablation import AblationResult, apply_variant, run_ablation, VARIANTS

__all__ = [
    "SynthConfig",
    "LabeledDataset",
    "generate_synthetic",
    "render_video",
    "draw_appearance",
    "video_label",
    "split_labels",
    "split_size",
    "video_rng",
    "save_dataset",
    "load_dataset",
    "ConfigInfeasible",
    "DatasetError",
    "DIRECTIONS",
    "ProbeConfig",
    "ProbeResult",
    "ProbeEncoder",
    "linear_probe",
    "appearance_control",
    "probe_clip",
    "static_clip",
    "one_hot_hook",
    "extract_features",
    "AblationResult",
    "apply_variant",
    "run_ablation",
    "VARIANTS",
]
