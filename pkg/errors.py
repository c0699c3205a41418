"""
Exception hierarchy shared by every package, plus the CLI exit-code mapping.

Library code raises these; only the command-line layer turns them into exit
codes and operator messages.
"""

from typing import Optional


class MamNetError(RuntimeError):
    """Base class for all pipeline errors. Messages are prefixed with the stage."""

    exit_code = 1

    def __init__(self, message: str, stage: Optional[str] = None):
        self.stage = stage
        self.detail = message
        super().__init__(f"[{stage}] {message}" if stage else message)


class ConfigurationError(MamNetError, ValueError):
    """Invalid dimensions, rates, keys or other caller-supplied settings."""

    exit_code = 1


class UsageError(MamNetError):
    """Bad command-line flags or config-file contents."""

    exit_code = 1


class DataError(MamNetError):
    """Missing files, malformed CSV, non-finite inputs, empty datasets."""

    exit_code = 2


class NumericFailure(MamNetError):
    """NaN/inf produced during computation. `stage` names where it appeared."""

    exit_code = 3


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit code (0 is reserved for success)."""
    if isinstance(error, MamNetError):
        return error.exit_code
    return 1
