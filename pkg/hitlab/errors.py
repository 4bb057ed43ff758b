"""
Domain errors. The CLI reports ``err.name`` on standard error and exits 1.
"""

from __future__ import annotations
from typing import Optional


class HitlabError(Exception):
    @property
    def name(self) -> str:
        return type(self).__name__


# graph_model

class InvalidProbability(HitlabError, ValueError):
    pass


class InvalidSize(HitlabError, ValueError):
    pass


class MonotonicityViolation(HitlabError, ValueError):
    pass


class IndexOutOfRange(HitlabError, IndexError):
    pass


class IsolatedVertex(HitlabError):
    pass


# spectral

class ConvergenceFailure(HitlabError):
    pass


class SpectralInvariantError(HitlabError):
    """Top eigenvalue of B is not 1 (disconnected or corrupted input)."""


class NearDisconnected(HitlabError):
    pass


# hitting

class SameVertex(HitlabError, ValueError):
    pass


class NotConnected(HitlabError):
    pass


class SingularSystem(HitlabError):
    pass


class StepCapExceeded(HitlabError):
    pass


class DimensionMismatch(HitlabError, ValueError):
    pass


class CrossMethodMismatch(HitlabError):
    pass


# clt_harness

class IsolatedTarget(HitlabError):
    pass


class InsufficientSamples(HitlabError, ValueError):
    pass


class TooManyRejections(HitlabError):
    pass


class ConfigError(HitlabError, ValueError):
    pass


# file IO

class ParseError(HitlabError):
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        super().__init__(f"{where}{message}")
