"""
CLI Module
Command-line surface and JSON configuration loader
"""
from src.cli.config_file import ConfigFile, ConfigValidationError, config_schema, schema_markdown
from src.cli.main import build_parser, main

__all__ = [
    'ConfigFile',
    'ConfigValidationError',
    'config_schema',
    'schema_markdown',
    'build_parser',
    'main',
]
