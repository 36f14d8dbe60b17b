"""
Tests for the category logger
"""
import pytest

from src.utils.logger import CATEGORIES, get_logger


def test_run_log_keeps_training_records(tmp_path):
    logger = get_logger()
    with logger.run_log(tmp_path / "run") as path:
        logger.log_epoch(1, 2, 0.5, 0.05, 1.0)
        logger.log_probe(0.75, 8)
    logger.log_epoch(2, 2, 0.4, 0.05, 1.0)

    text = path.read_text()
    assert "epoch 1/2: mean loss 0.5000" in text
    assert "linear probe" not in text
    assert "epoch 2/2" not in text


def test_unknown_category_rejected():
    with pytest.raises(ValueError):
        get_logger().info("hello", category="trading")


def test_every_default_category_is_known():
    assert {"cli", "errors", "training", "selfcheck"} <= CATEGORIES
