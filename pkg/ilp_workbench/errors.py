#!/usr/bin/env python3
"""
Exception hierarchy for the workbench.

Every error raised on purpose by the package derives from IlpError so the
command-line front-end can map it to a stable exit code.
"""

from typing import Optional


class IlpError(Exception):
    """Base class for all workbench errors."""


class ParseError(IlpError):
    """Formula text does not match the grammar."""

    def __init__(self, message: str, text: str = "", line: Optional[int] = None,
                 column: Optional[int] = None):
        self.text = text
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class AssociativityError(ParseError):
    """A chain of |> without parentheses."""


class PreconditionError(IlpError):
    """An operation was called outside its pre-condition."""


class BudgetExceeded(IlpError):
    """A configured resource limit was hit."""

    def __init__(self, limit: str, value: int):
        self.limit = limit
        self.value = value
        super().__init__(f"{limit} budget of {value} exceeded")


class VerificationError(IlpError):
    """A constructed object failed its own mandatory re-check."""


class DerivationError(IlpError):
    """Malformed proof object or illegal rule instance."""


class ModelError(IlpError):
    """Invalid frame or model, or an unknown world or variable."""


class ConfigError(IlpError, ValueError):
    """Invalid configuration value."""
