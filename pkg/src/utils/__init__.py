"""
Utilities Module
Logging and the shared error taxonomy
"""
from .logger import get_logger, setup_logging, CustomLogger, CATEGORIES
from .errors import (
    VTDLError,
    PropertyFailure,
    ConfigError,
    StorageError,
    DataError,
    CheckpointError,
    exit_code_for,
)

__all__ = [
    "get_logger",
    "setup_logging",
    "CustomLogger",
    "CATEGORIES",
    "VTDLError",
    "PropertyFailure",
    "ConfigError",
    "StorageError",
    "DataError",
    "CheckpointError",
    "exit_code_for",
]
