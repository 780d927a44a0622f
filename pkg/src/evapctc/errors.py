"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """1-based location of a token in circuit source text."""

    line: int
    column: int

    def __str__(self) -> str:
        return f"line {self.line}, col {self.column}"


class EvapCtcError(Exception):
    """Base class for all library errors."""

    code = "error"


class ValidationError(EvapCtcError):
    """An input violated a documented precondition."""

    code = "validation"


class ShapeError(ValidationError):
    code = "shape"


class SizeError(ValidationError):
    code = "size"


class CapacityError(ValidationError):
    code = "capacity"


class DegenerateChannelError(ValidationError):
    code = "degenerate_channel"


class HorizonSingularityError(ValidationError):
    code = "horizon_singularity"


class ConvergenceError(EvapCtcError):
    """An iterative solve hit its iteration cap."""

    code = "convergence"

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class ParseError(ValidationError):
    code = "parse"

    def __init__(self, message: str, span: SourceSpan) -> None:
        self.span = span
        self.bare_message = message
        super().__init__(f"{span}: {message}")
