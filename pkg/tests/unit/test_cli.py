"""
Tests for the configuration document and the vtdl command line
"""
import json

import pytest

from config.settings import AppConfig, validate_config
from src.cli.config_file import ConfigFile, ConfigValidationError, config_schema, schema_markdown
from src.cli.main import build_parser, main
from src.evaluation.synthetic import LABELS_FILE
from src.utils.errors import ConfigError

TINY_CONFIG = {
    "sampling": {"clip_len": 4, "temporal_stride": 2, "tau": 2, "crop_size": 20},
    "basic_aug": {"crop_size": 16},
    "model": {"blocks": [[4, 2, 1], [8, 2, 2]], "embed_dim": 16},
    "objective": {"bank_size": 16},
    "train": {"epochs": 1, "batch_size": 4, "lr_decay_every": 1, "seed": 7},
    "synth": {"n_train": 2, "n_test": 2, "clip_len_source": 16, "seed": 3},
    "probe": {"epochs": 30},
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(TINY_CONFIG))
    return path


@pytest.fixture
def data_dir(tmp_path, config_path):
    out = tmp_path / "data"
    assert main(["synth", "--config", str(config_path), "--out", str(out)]) == 0
    return out


def test_config_defaults():
    config = ConfigFile.load(None)
    assert config.train.sampling is config.sampling
    assert config.train.objective.bank_size == 1024
    assert config.synth.n_classes == 4


def test_config_from_file(config_path):
    config = ConfigFile.load(config_path)
    assert config.model.blocks == ((4, 2, 1), (8, 2, 2))
    assert config.train.model is config.model
    assert config.train.epochs == 1
    assert config.probe.epochs == 30
    assert config.source == config_path


def test_config_rejects_bad_documents(tmp_path):
    path = tmp_path / "bad.json"

    path.write_text('{"train": {"epochs": 2,}}')
    with pytest.raises(ConfigValidationError, match="line 1, column"):
        ConfigFile.load(path)

    path.write_text(json.dumps({"train": {"epochz": 2}, "extra": {}}))
    with pytest.raises(ConfigValidationError) as info:
        ConfigFile.load(path)
    assert "unknown key 'train.epochz'" in info.value.issues
    assert "unknown section 'extra'" in info.value.issues

    path.write_text(json.dumps({"train": {"epochs": True, "lr0": "fast"}}))
    with pytest.raises(ConfigValidationError) as info:
        ConfigFile.load(path)
    assert len(info.value.issues) == 2

    path.write_text(json.dumps({"objective": {"temperature": -1.0}}))
    with pytest.raises(ConfigError):
        ConfigFile.load(path)

    with pytest.raises(ConfigValidationError):
        ConfigFile.load(tmp_path / "absent.json")


def test_seed_precedence(config_path, monkeypatch):
    """--seed beats VTDL_SEED, which beats the file"""
    monkeypatch.delenv("VTDL_SEED", raising=False)
    config = ConfigFile.load(config_path)
    assert config.apply_seed(None) is None
    assert (config.train.seed, config.synth.seed) == (7, 3)

    monkeypatch.setenv("VTDL_SEED", "11")
    config = ConfigFile.load(config_path)
    config.apply_seed(None)
    assert (config.train.seed, config.synth.seed) == (11, 11)

    config = ConfigFile.load(config_path)
    config.apply_seed(5)
    assert (config.train.seed, config.synth.seed) == (5, 5)

    monkeypatch.setenv("VTDL_SEED", "eleven")
    with pytest.raises(ConfigValidationError):
        ConfigFile.load(config_path).apply_seed(None)


def test_config_schema_covers_every_section():
    schema = config_schema()
    assert set(schema) == {"sampling", "basic_aug", "tca", "model", "objective", "train", "synth", "probe"}
    assert schema["objective"]["temperature"] == {"type": "float", "default": 0.07}
    assert "sampling" not in schema["train"]
    assert "### `train`" in schema_markdown()


def test_parser_subcommands():
    parser = build_parser()
    args = parser.parse_args(["--log-level", "debug", "selfcheck", "--inject-fault", "bank_lifo"])
    assert args.log_level == "DEBUG"
    assert args.inject_fault == "bank_lifo"
    args = parser.parse_args(["ablate", "--data", "d", "--out", "o"])
    assert args.variants == ["full", "basic_only"] and args.seeds == [0, 1, 2]
    with pytest.raises(SystemExit):
        parser.parse_args(["selfcheck", "--inject-fault", "unknown"])


def test_exit_code_for_config_errors(tmp_path, config_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["synth", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2

    bad.write_text(json.dumps({"synth": {"frame_sizes": 32}}))
    assert main(["synth", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2

    bad.write_text(json.dumps({"synth": {"square_size": 32, "frame_size": 32}}))
    assert main(["synth", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2


@pytest.mark.parametrize("setting, value", [("LOG_LEVEL", "LOUD"), ("SEED", "seven")])
def test_bad_environment_settings_exit_with_config_code(tmp_path, config_path, monkeypatch, setting, value):
    if setting == "LOG_LEVEL":
        monkeypatch.setattr(AppConfig, "LOG_LEVEL", value)
    else:
        monkeypatch.setenv(AppConfig.SEED_ENV_VAR, value)
    assert validate_config()
    assert main(["synth", "--config", str(config_path), "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()


def test_synth_writes_dataset(data_dir):
    labels = json.loads((data_dir / LABELS_FILE).read_text())
    assert len(labels) == 16
    assert sorted(set(labels.values())) == [0, 1, 2, 3]
    assert len(list((data_dir / "train_00000").glob("*.png"))) == 16


def test_pretrain_and_probe(tmp_path, config_path, data_dir, capsys):
    run = tmp_path / "run"
    assert main(["pretrain", "--config", str(config_path), "--data", str(data_dir), "--out", str(run)]) == 0
    assert (run / "epoch_0001" / "manifest.json").is_file()
    assert (run / "loss.png").is_file()
    assert "epoch 1/1" in (run / "run.log").read_text()
    assert len((run / "metrics.jsonl").read_text().splitlines()) == 2
    capsys.readouterr()

    args = ["probe", "--checkpoint", str(run), "--data", str(data_dir), "--config", str(config_path)]
    assert main(args + ["--one-hot-hook"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["top1"] == 1.0
    assert result["n_test"] == 8

    assert main(args + ["--control", "--encoder", "online"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["control"] and result["encoder"] == "online"


def test_probe_missing_checkpoint(tmp_path, data_dir):
    assert main(["probe", "--checkpoint", str(tmp_path / "nothing"), "--data", str(data_dir)]) == 5


def test_pretrain_missing_dataset(tmp_path, config_path):
    args = ["pretrain", "--config", str(config_path), "--data", str(tmp_path / "none"), "--out", str(tmp_path / "r")]
    assert main(args) == 4


def test_preview_triplet(tmp_path, config_path, data_dir):
    out = tmp_path / "preview"
    args = ["preview-triplet", "--config", str(config_path), "--data", str(data_dir),
            "--video", "train_00002", "--out", str(out)]
    assert main(args) == 0

    for name in ("anchor", "positive", "negative"):
        assert len(list((out / name).glob("*.png"))) == 4
    record = json.loads((out / "augmentation_record.json").read_text())
    assert record["video"] == "train_00002"
    assert record["donor"] == "train_00003"
    assert record["t_p"] == record["t_a"]
    assert abs(record["t_a"] - record["t_n"]) > 2
    assert [r["op"] for r in record["record"]["anchor"]] == ["basic"]
    assert [r["op"] for r in record["record"]["negative"]] == ["basic"]
    for entry in record["record"]["positive"]:
        if entry["op"] in ("internal_mix", "external_mix"):
            assert 0.5 <= entry["alpha"] <= 1.0

    assert main(args[:-4] + ["--video", "train_99999", "--out", str(out)]) == 4


def test_selfcheck_reports_injected_fault(capsys):
    assert main(["selfcheck", "--inject-fault", "bank_lifo"]) == 1
    rows = {line.split()[0]: line.split()[-1] for line in capsys.readouterr().out.splitlines() if line.strip()}
    assert rows["bank_fifo"] == "FAIL"
    assert rows["loss_oracle"] == "PASS"
