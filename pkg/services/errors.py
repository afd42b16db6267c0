"""
Errors raised by the proof stages, each mapped to a CLI exit code.
"""
from typing import Optional

from numerics.rpa import ExistenceResult


class ProofError(Exception):
    """Base class for pipeline errors"""

    exit_code = 1


class ConfigError(ProofError):
    """Invalid or unreadable configuration"""

    exit_code = 2


class MissingCertificateError(ProofError):
    """An upstream certificate needed by a stage is not available"""

    exit_code = 3


class ProofFailure(ProofError):
    """A stage could not certify its object"""

    exit_code = 4

    def __init__(self, message: str, result: Optional[ExistenceResult] = None):
        super().__init__(message)
        self.result = result


class NewtonFailure(ProofFailure):
    """Newton's method did not reach the requested tolerance"""


class GuessError(ProofFailure):
    """No admissible initial guess or tuning parameter was found"""
