"""Exception and warning types raised by the package."""

from __future__ import annotations

import numpy as np


class AnisoEqError(Exception):
    """Base class for all errors raised by :mod:`anisoeq`."""


class EvaluationDomainError(AnisoEqError):
    """A field evaluated to a non-finite value."""

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at point {_fmt_point(point)}"
        super().__init__(message)
        self.point = None if point is None else np.asarray(point, dtype=float)


class StencilError(EvaluationDomainError):
    """A finite-difference stencil point was excluded or non-finite."""


class ConstructionError(AnisoEqError):
    """A field or free function could not be built (e.g. missing derivative)."""


class UnsupportedMetadataError(AnisoEqError):
    """A state was asked for metadata it does not carry (surface function, density)."""


class ParameterDomainError(AnisoEqError):
    """A free function vanishes or changes sign on the sampled range."""


class FirehoseViolationError(ParameterDomainError):
    """Parameters would make 1 - tau non-positive."""


class DensityError(ParameterDomainError):
    """Density is non-positive somewhere on the samples."""


class InvariantError(AnisoEqError):
    """A declared invariant of a parameter object does not hold."""


class PreconditionError(AnisoEqError):
    """An input state fails the checks a transform requires."""

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} (worst point {_fmt_point(point)})"
        super().__init__(message)
        self.point = None if point is None else np.asarray(point, dtype=float)


class SingularAnisotropyError(AnisoEqError):
    """Pressure tensor requested where |B| = 0."""


class ConfigError(AnisoEqError):
    """Pipeline configuration is malformed or does not type-check."""


class ExportError(AnisoEqError):
    """Grid export hit a non-finite sample."""


class PhysicalityWarning(UserWarning):
    """Constructed pressure is negative somewhere on the samples."""


def _fmt_point(p):
    p = np.asarray(p, dtype=float).ravel()
    return "(" + ", ".join(f"{v:.6g}" for v in p) + ")"
