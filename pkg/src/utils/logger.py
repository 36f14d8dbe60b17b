"""
Logging
loguru sinks for pretraining runs, probes and the self-check suite
"""
import sys
import json
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, Optional

from loguru import logger

from config.settings import LOG_LEVELS, AppConfig


CATEGORIES = frozenset({
    "tensor_io",
    "sampling",
    "augment",
    "model",
    "objective",
    "training",
    "evaluation",
    "selfcheck",
    "cli",
    "errors",
})

# Categories copied into a run directory's run.log
RUN_CATEGORIES = frozenset({"training", "objective", "model", "sampling", "augment"})

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <7}</level> | "
    "<cyan>{extra[category]: <10}</cyan> | <level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <7} | {extra[category]} | {message}"


class CustomLogger:
    """
    Category-tagged logger over loguru

    Features:
    - Console sink on stderr; stdout stays free for JSON results
    - Optional rotating files under VTDL_LOG_DIR: app.log, app.json, <category>.log
    - Per-run log file inside a pretraining output directory
    - Helpers for train steps, epochs, checkpoints, probes and self-check properties
    """

    def __init__(self, name: str = "vtdl"):
        self.name = name
        self.logger = logger
        self._console_id: Optional[int] = None
        self._ready = False

    def setup(
        self,
        level: str = "INFO",
        console_output: bool = True,
        log_dir: Optional[Path] = None,
        rotation: str = "50 MB",
        retention: int = 10
    ):
        """
        Install sinks once per process

        Args:
            level: Minimum level for every sink
            console_output: Attach the stderr sink
            log_dir: Directory for file sinks, None disables them
            rotation: Size at which file sinks rotate
            retention: Rotated files kept per sink
        """
        if self._ready:
            return

        self.logger.remove()
        self.logger.configure(extra={"category": "cli"})

        if console_output:
            self._console_id = self.logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level, colorize=True)

        if log_dir is not None:
            self._add_file_sinks(Path(log_dir), level, rotation, retention)

        self._ready = True

    def _add_file_sinks(self, log_dir: Path, level: str, rotation: str, retention: int):
        log_dir.mkdir(parents=True, exist_ok=True)
        self.logger.add(log_dir / "app.log", format=FILE_FORMAT, level=level,
                        rotation=rotation, retention=retention)
        self.logger.add(log_dir / "app.json", level=level, rotation=rotation,
                        retention=retention, serialize=True)
        for category in sorted(CATEGORIES):
            self.logger.add(
                log_dir / f"{category}.log",
                format=FILE_FORMAT,
                level=level,
                rotation=rotation,
                retention=retention,
                filter=lambda record, cat=category: record["extra"].get("category") == cat,
            )

    def set_console_level(self, level: str):
        """Replace the stderr sink with one at a new level"""
        if self._console_id is not None:
            self.logger.remove(self._console_id)
        self._console_id = self.logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level.upper(), colorize=True)

    def _emit(self, level: str, message: str, category: str, **kwargs):
        if category not in CATEGORIES:
            raise ValueError(f"unknown log category {category!r}")
        self.logger.bind(category=category).opt(depth=2).log(level, message, **kwargs)

    def debug(self, message: str, category: str = "cli", **kwargs):
        self._emit("DEBUG", message, category, **kwargs)

    def info(self, message: str, category: str = "cli", **kwargs):
        self._emit("INFO", message, category, **kwargs)

    def warning(self, message: str, category: str = "cli", **kwargs):
        self._emit("WARNING", message, category, **kwargs)

    def error(self, message: str, category: str = "errors", **kwargs):
        self._emit("ERROR", message, category, **kwargs)

    def exception(self, message: str, category: str = "errors", **kwargs):
        """Error with the active traceback attached"""
        if category not in CATEGORIES:
            raise ValueError(f"unknown log category {category!r}")
        self.logger.bind(category=category).opt(exception=True, depth=1).error(message, **kwargs)

    def log_train_step(self, step: int, epoch: int, loss: float, lr: float):
        self.debug(f"step {step} epoch {epoch}: loss {loss:.6f} lr {lr:.2e}", category="training")

    def log_epoch(self, epoch: int, epochs: int, mean_loss: float, lr: float, duration: float):
        """One line per finished epoch"""
        self.info(
            f"epoch {epoch}/{epochs}: mean loss {mean_loss:.4f}, lr {lr:.2e}, {duration:.1f}s",
            category="training",
        )

    def log_checkpoint(self, path: Path, epoch: int):
        self.info(f"checkpoint epoch {epoch} -> {path}", category="training")

    def log_probe(self, top1: float, n_test: int, control: bool = False):
        kind = "appearance control" if control else "linear probe"
        self.info(f"{kind}: top1 {top1:.2%} on {n_test} test clips", category="evaluation")

    def log_selfcheck(self, name: str, passed: bool, details: Optional[Dict] = None):
        """PASS at INFO, FAIL at WARNING with the measured details"""
        message = f"{name}: {'PASS' if passed else 'FAIL'}"
        if details:
            message += f" {json.dumps(details, default=str, sort_keys=True)}"
        self._emit("INFO" if passed else "WARNING", message, "selfcheck")

    def log_failure(self, command: str, error: BaseException, exit_code: int):
        """A domain error that ends a command"""
        self.error(f"{command} failed with exit {exit_code}: {type(error).__name__}: {error}")

    def log_performance(self, operation: str, duration: float):
        self.debug(f"{operation} took {duration:.3f}s", category="cli")

    @contextmanager
    def run_log(self, run_dir: Path) -> Iterator[Path]:
        """
        Copy training-side records into <run_dir>/run.log while the block runs

        Args:
            run_dir: Pretraining output directory

        Yields:
            Path of the run log
        """
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        path = run_dir / "run.log"
        sink = self.logger.add(
            path,
            format=FILE_FORMAT,
            level="DEBUG",
            filter=lambda record: record["extra"].get("category") in RUN_CATEGORIES,
        )
        try:
            with self.logger.contextualize(run=str(run_dir)):
                yield path
        finally:
            self.logger.remove(sink)


_logger_instance: Optional[CustomLogger] = None


def setup_logging(
    level: Optional[str] = None,
    console_output: bool = True,
    log_dir: Optional[Path] = None
) -> CustomLogger:
    """
    Configure the process-wide logger from arguments or AppConfig

    Args:
        level: Log level, LOG_LEVEL when omitted
        console_output: Attach the stderr sink
        log_dir: File sink directory, VTDL_LOG_DIR when omitted

    Returns:
        CustomLogger: Configured logger instance
    """
    global _logger_instance

    if _logger_instance is None:
        _logger_instance = CustomLogger()

    level = (level or AppConfig.LOG_LEVEL).upper()
    _logger_instance.setup(
        # unknown levels are reported by validate_config
        level=level if level in LOG_LEVELS else "INFO",
        console_output=console_output,
        log_dir=log_dir or AppConfig.LOG_DIR,
    )
    return _logger_instance


def get_logger() -> CustomLogger:
    """Process-wide logger, configured on first use"""
    if _logger_instance is None:
        return setup_logging()
    return _logger_instance
