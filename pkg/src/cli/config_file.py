"""
Config File Loader
Load, type-check and validate the JSON configuration document
"""
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union, get_args, get_origin, get_type_hints

from config.settings import seed_override, AppConfig
from src.augment.basic import BasicAugConfig
from src.augment.tca import TCAConfig
from src.evaluation.probe import ProbeConfig
from src.evaluation.synthetic import SynthConfig
from src.model.encoder import EncoderSpec
from src.objective.loss import ObjectiveConfig
from src.sampling.triplet import SamplingConfig
from src.training.config import TrainConfig
from src.utils.errors import ConfigError, StorageError
from src.utils.logger import get_logger

logger = get_logger()

PathLike = Union[str, Path]

SECTIONS = {
    "sampling": SamplingConfig,
    "basic_aug": BasicAugConfig,
    "tca": TCAConfig,
    "model": EncoderSpec,
    "objective": ObjectiveConfig,
    "train": TrainConfig,
    "synth": SynthConfig,
    "probe": ProbeConfig,
}
# TrainConfig fields filled from their own sections
NESTED_TRAIN_FIELDS = ("sampling", "basic_aug", "tca", "objective", "model")


class ConfigValidationError(ConfigError):
    """Configuration document failed parsing or validation"""

    def __init__(self, issues: List[str], source: Optional[PathLike] = None):
        self.issues = list(issues)
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(where + "; ".join(self.issues))


def _section_fields(section: str) -> Dict[str, Any]:
    """Field name -> resolved type hint for a section"""
    cls = SECTIONS[section]
    hints = get_type_hints(cls)
    names = [f.name for f in fields(cls)]
    if section == "train":
        names = [n for n in names if n not in NESTED_TRAIN_FIELDS]
    return {name: hints[name] for name in names}


def _type_name(hint: Any) -> str:
    origin = get_origin(hint)
    if origin is None:
        return getattr(hint, "__name__", str(hint))
    args = get_args(hint)
    if origin is Union:
        inner = [_type_name(a) for a in args if a is not type(None)]
        return f"{inner[0]} or null" if len(inner) == 1 else " | ".join(inner)
    if origin is tuple:
        if len(args) == 2 and args[1] is Ellipsis:
            return f"array of {_type_name(args[0])}"
        return "[" + ", ".join(_type_name(a) for a in args) + "]"
    return str(hint)


def _coerce(value: Any, hint: Any, path: str, issues: List[str]) -> Any:
    """
    Check a JSON value against a type hint

    Integers are accepted where floats are expected; booleans are never
    accepted as numbers. Lists become tuples.
    """
    origin = get_origin(hint)

    if origin is Union:
        args = get_args(hint)
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(value, inner[0], path, issues)

    if origin is tuple:
        args = get_args(hint)
        if not isinstance(value, list):
            issues.append(f"{path} must be {_type_name(hint)}")
            return None
        if len(args) == 2 and args[1] is Ellipsis:
            if not value:
                issues.append(f"{path} must not be empty")
                return None
            return tuple(_coerce(v, args[0], f"{path}[{i}]", issues) for i, v in enumerate(value))
        if len(value) != len(args):
            issues.append(f"{path} must have exactly {len(args)} entries")
            return None
        return tuple(_coerce(v, a, f"{path}[{i}]", issues) for i, (v, a) in enumerate(zip(value, args)))

    if hint is bool:
        if not isinstance(value, bool):
            issues.append(f"{path} must be a boolean")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            issues.append(f"{path} must be an integer")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            issues.append(f"{path} must be a number")
            return value
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            issues.append(f"{path} must be a string")
        return value

    issues.append(f"{path} has unsupported type {_type_name(hint)}")
    return value


def _parse_section(section: str, raw: Any, issues: List[str]) -> Dict[str, Any]:
    if not isinstance(raw, dict):
        issues.append(f"section '{section}' must be an object")
        return {}
    known = _section_fields(section)
    parsed = {}
    for key, value in raw.items():
        path = f"{section}.{key}"
        if key not in known:
            issues.append(f"unknown key '{path}'")
            continue
        parsed[key] = _coerce(value, known[key], path, issues)
    return parsed


@dataclass
class ConfigFile:
    """
    Parsed configuration document

    Features:
    - one typed dataclass per section, defaults for omitted keys
    - unknown sections and keys rejected
    - every issue collected before raising
    - seed precedence flag > VTDL_SEED > file
    """
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    basic_aug: BasicAugConfig = field(default_factory=BasicAugConfig)
    tca: TCAConfig = field(default_factory=TCAConfig)
    model: EncoderSpec = field(default_factory=EncoderSpec)
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    source: Optional[Path] = None

    def __post_init__(self):
        # train carries the same section objects
        for name in NESTED_TRAIN_FIELDS:
            setattr(self.train, name, getattr(self, name))

    @classmethod
    def from_dict(cls, data: Any, source: Optional[PathLike] = None) -> "ConfigFile":
        """
        Build and validate a configuration from a decoded JSON document

        Raises:
            ConfigValidationError: listing every problem found
        """
        if not isinstance(data, dict):
            raise ConfigValidationError(["top level must be a JSON object"], source)

        issues: List[str] = []
        for key in data:
            if key not in SECTIONS:
                issues.append(f"unknown section '{key}'")

        parsed = {
            section: _parse_section(section, data[section], issues)
            for section in SECTIONS
            if section in data
        }
        if issues:
            raise ConfigValidationError(issues, source)

        sections = {}
        for section, section_cls in SECTIONS.items():
            if section == "train":
                continue
            try:
                sections[section] = section_cls(**parsed.get(section, {}))
            except (TypeError, ValueError) as e:
                issues.append(f"section '{section}': {e}")
        if issues:
            raise ConfigValidationError(issues, source)

        nested = {name: sections[name] for name in NESTED_TRAIN_FIELDS}
        train = TrainConfig(**parsed.get("train", {}), **nested)
        config = cls(train=train, source=Path(source) if source else None, **sections)
        config.validate_all()
        return config

    @classmethod
    def load(cls, path: Optional[PathLike]) -> "ConfigFile":
        """
        Load a configuration file; None yields the defaults

        Raises:
            ConfigValidationError: malformed JSON (with line and column) or invalid values
            StorageError: file cannot be read
        """
        if path is None:
            config = cls()
            config.validate_all()
            return config

        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigValidationError([f"config file not found: {path}"]) from None
        except OSError as e:
            raise StorageError(f"cannot read config file {path}: {e}") from e

        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigValidationError(
                [f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}"], path
            ) from None

        config = cls.from_dict(data, source=path)
        logger.info(f"Loaded configuration from {path}", category="cli")
        return config

    def validate_all(self):
        """Run every section's validation (train covers its nested sections)"""
        issues = self.train.validate() + self.synth.validate() + self.probe.validate()
        if issues:
            raise ConfigValidationError(issues, self.source)

    def apply_seed(self, flag: Optional[int] = None) -> Optional[int]:
        """
        Resolve the effective seed and write it into train and synth

        Returns:
            The overriding seed, or None when the file values stand
        """
        try:
            env_seed = seed_override()
        except ValueError:
            raise ConfigValidationError([f"{AppConfig.SEED_ENV_VAR} must be an integer"]) from None

        seed = flag if flag is not None else env_seed
        if seed is not None:
            self.train.seed = int(seed)
            self.synth.seed = int(seed)
            logger.info(f"Seed override: {seed}", category="cli")
        return seed

    def to_dict(self) -> Dict[str, Any]:
        train = {k: v for k, v in self.train.to_dict().items() if k not in NESTED_TRAIN_FIELDS}
        return {
            "sampling": _plain(self.sampling),
            "basic_aug": _plain(self.basic_aug),
            "tca": _plain(self.tca),
            "model": self.model.to_dict(),
            "objective": _plain(self.objective),
            "train": train,
            "synth": _plain(self.synth),
            "probe": _plain(self.probe),
        }


def _plain(section: Any) -> Dict[str, Any]:
    return {f.name: _jsonable(getattr(section, f.name)) for f in fields(section)}


def _jsonable(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def config_schema() -> Dict[str, Dict[str, Dict[str, Any]]]:
    """
    Published schema: section -> key -> {type, default}
    """
    defaults = ConfigFile().to_dict()
    schema = {}
    for section in SECTIONS:
        schema[section] = {
            name: {"type": _type_name(hint), "default": defaults[section][name]}
            for name, hint in _section_fields(section).items()
        }
    return schema


def schema_markdown() -> str:
    """Render config_schema() as the markdown tables of docs/CONFIG.md"""
    lines = []
    for section, keys in config_schema().items():
        lines.append(f"### `{section}`")
        lines.append("")
        lines.append("| key | type | default |")
        lines.append("|-----|------|---------|")
        for name, entry in keys.items():
            lines.append(f"| `{name}` | {entry['type']} | `{json.dumps(entry['default'])}` |")
        lines.append("")
    return "\n".join(lines)


if __name__ == "__main__":
    print(schema_markdown())
