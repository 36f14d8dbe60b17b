"""
Triplet Augmentation Pipeline
Routes Basic Augmentation to every triplet member and TCA to the positive
"""
from dataclasses import replace
from typing import Optional

import numpy as np

from src.augment.basic import BasicAugConfig, basic_augment
from src.augment.tca import TCAConfig, apply_tca
from src.sampling.triplet import TemporalTriplet
from src.tensor.core import VideoClip


def augment_triplet(
    triplet: TemporalTriplet,
    donor: Optional[VideoClip],
    ba: BasicAugConfig,
    tca: TCAConfig,
    rng: np.random.Generator,
    tca_on_negative: bool = False
) -> TemporalTriplet:
    """
    Augment a temporal triplet

    Anchor and negative receive Basic Augmentation only, each with its own
    draw; the positive receives Basic Augmentation followed by TCA. With
    tca_on_negative the negative also goes through TCA.

    Args:
        triplet: Sampled triplet
        donor: Clip from another video for external mix
        ba: Basic Augmentation configuration
        tca: TCA configuration
        rng: Seeded generator
        tca_on_negative: Also apply TCA to the negative

    Returns:
        New triplet with augmented members and an extended record
    """
    record = {name: list(entries) for name, entries in triplet.augmentation_record.items()}

    anchor, params = basic_augment(triplet.anchor, ba, rng)
    record["anchor"].append(params.record())

    positive, params = basic_augment(triplet.positive, ba, rng)
    record["positive"].append(params.record())
    positive, tca_record = apply_tca(positive, donor, tca, rng)
    record["positive"].extend(tca_record)

    negative, params = basic_augment(triplet.negative, ba, rng)
    record["negative"].append(params.record())
    if tca_on_negative:
        negative, tca_record = apply_tca(negative, donor, tca, rng)
        record["negative"].extend(tca_record)

    return replace(
        triplet,
        anchor=anchor,
        positive=positive,
        negative=negative,
        augmentation_record=record,
    )
