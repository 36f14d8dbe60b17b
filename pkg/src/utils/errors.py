"""
Error Taxonomy
Base exceptions shared by every module and their command-line exit codes
"""


class VTDLError(Exception):
    """Base class for all domain errors"""
    exit_code: int = 1


class PropertyFailure(VTDLError):
    """An invariance property failed during selfcheck"""
    exit_code = 1


class ConfigError(VTDLError):
    """Invalid configuration"""
    exit_code = 2


class StorageError(VTDLError):
    """File-system or file-format failure"""
    exit_code = 3


class DataError(VTDLError):
    """Input data violates a precondition"""
    exit_code = 4


class CheckpointError(VTDLError):
    """Checkpoint missing or unreadable"""
    exit_code = 5


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the command-line exit code"""
    if isinstance(exc, VTDLError):
        return exc.exit_code
    if isinstance(exc, OSError):
        return StorageError.exit_code
    return 1
