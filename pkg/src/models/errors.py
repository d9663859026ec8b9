"""
Exception hierarchy for Keyframer.

Every error carries the property path it refers to and the exit code the
command line surface reports for it.
"""


class KeyframerError(Exception):
    """Base class for all Keyframer errors."""

    exit_code = 1

    def __init__(self, message, path="$"):
        """
        Initialize the error.

        Args:
            message (str): Human readable description
            path (str): Property path of the offending element
        """
        super().__init__(message)
        self.message = message
        self.path = path

    def to_document(self):
        """Return the machine-readable error document."""
        return {
            "error": {
                "type": type(self).__name__,
                "message": self.message,
                "path": self.path,
            }
        }

    def __str__(self):
        if self.path and self.path != "$":
            return f"{self.message} (at {self.path})"
        return self.message


# Parsing and validation

class ChartSyntaxError(KeyframerError):
    """The document is not well-formed structured text."""


class ValidationError(KeyframerError):
    """A document or value violates a structural invariant."""


class UnsupportedFeature(KeyframerError):
    """The document uses a construct outside the supported chart subset."""

    exit_code = 2


# Data engine

class UnknownField(ValidationError):
    """A transform or encoding references a field that does not exist."""


class TypeMismatch(ValidationError):
    """A predicate operand or aggregate does not match the field type."""


class EmptyDomain(KeyframerError):
    """A channel has no values to derive a scale domain from."""


class KindMismatch(KeyframerError):
    """Continuous and discrete domains cannot be combined."""


# Edit operations

class InapplicableOp(KeyframerError):
    """An edit operation's from-state does not match the chart."""


class InvalidResult(KeyframerError):
    """Applying a block of edit operations produced an invalid chart."""


class InvalidIntermediate(KeyframerError):
    """A recombination produced an invalid intermediate keyframe."""


# Search

class CombinatorialLimit(KeyframerError):
    """Too many edit operations to enumerate their recombinations."""

    exit_code = 3


class NoValidSequence(KeyframerError):
    """Every enumerated keyframe sequence was invalid."""

    exit_code = 3


class InfeasibleBudget(KeyframerError):
    """The requested number of stages cannot be met."""

    exit_code = 3


# Timeline

class CoverageMismatch(KeyframerError):
    """Animation stages do not cover exactly the components that change."""


class JoinAmbiguity(KeyframerError):
    """Join keys are duplicated on both sides of a keyframe pair."""


class OutOfRange(KeyframerError):
    """A sample time lies outside [0, 1]."""


# Animation library

class AnimationNotFound(KeyframerError):
    """No stored animation has the requested name."""
