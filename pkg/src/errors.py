# Exception hierarchy shared by every robustpls module.
from __future__ import annotations


class RobustPLSError(Exception):
    """Base class for all errors raised by this package."""


class SpecificationError(RobustPLSError, ValueError):
    """Invalid spec, config, shape or factor count."""


class DomainError(RobustPLSError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UndefinedCorrelationError(DomainError):
    """Pearson correlation requested for a constant sequence."""


class MatrixParseError(SpecificationError):
    """Malformed matrix file. `row` and `col` are 1-based."""

    def __init__(self, message: str, row: int, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class DegenerateError(RobustPLSError, ArithmeticError):
    """Numerically degenerate residual, score, weights or coefficients."""


class OptimizationError(RobustPLSError, RuntimeError):
    """Failure inside the half-quadratic loop of one factor."""

    def __init__(self, message: str, factor: int | None = None, iteration: int | None = None):
        where = []
        if factor is not None:
            where.append(f"factor {factor}")
        if iteration is not None:
            where.append(f"HQ iteration {iteration}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.factor = factor
        self.iteration = iteration
