"""Exceptions shared across the toolkit.

The CLI maps these to exit codes: ValidationError (and its subclass
DomainError) to 1, NumericalHealthError to 2.
"""


class ValidationError(ValueError):
    """Invalid input, configuration, or measure data."""


class DomainError(ValidationError):
    """Evaluation requested outside the domain of a transform or flow map."""


class NumericalHealthError(RuntimeError):
    """A numerical invariant that should hold by construction failed."""
