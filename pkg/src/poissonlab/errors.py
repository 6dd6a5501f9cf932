"""Exception types shared across the package."""

from __future__ import annotations


class PoissonLabError(Exception):
    """Base class for all package errors."""


class EvaluationError(PoissonLabError, ArithmeticError):
    """A field or map produced a non-finite value."""


class DimensionError(PoissonLabError, ValueError):
    pass


class SingularSystemError(PoissonLabError, ArithmeticError):
    """A linear solve hit a pivot below the singularity threshold."""


class ChartDomainError(PoissonLabError, ValueError):
    """A point fell outside the domain where a chart is invertible."""


class MembershipError(PoissonLabError, ValueError):
    pass


class ComposabilityError(PoissonLabError, ValueError):
    """Source and target of a would-be product do not match."""


class CompatibilityError(PoissonLabError, ValueError):
    """A Lie bialgebra candidate fails the cocycle condition."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class RankDeficiencyError(PoissonLabError, ArithmeticError):
    pass


class ConfigError(PoissonLabError, ValueError):
    pass
