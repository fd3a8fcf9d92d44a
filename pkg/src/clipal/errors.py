"""Exception hierarchy shared across the engine.

Everything raised on purpose derives from ClipalError so the CLI can
map validation failures to a single exit code.
"""


class ClipalError(Exception):
    """Base class for all engine errors."""


class MalformedProbabilities(ClipalError):
    """A class-probability vector is out of range or does not sum to 1."""


class InvariantViolation(ClipalError):
    """A domain object would violate one of its structural invariants."""


class ParseError(ClipalError):
    """A persisted file has malformed syntax."""


class SchemaError(ClipalError):
    """A persisted file parses but does not match the expected schema."""


class EmptyPool(ClipalError):
    """No clips are available where at least one is required."""


class EmptySelection(ClipalError):
    """A selection output was requested for zero clips."""


class BudgetTooSmall(ClipalError):
    """The frame budget does not cover even a single clip."""


class MissingEmbeddings(ClipalError):
    """A clip lacks the track-query embeddings a feature-space method needs."""


class DimensionMismatch(ClipalError):
    """Embeddings of inconsistent dimensionality were mixed."""


class DifferentVideo(ClipalError):
    """A temporal distance was requested between clips of different videos."""


class MissingBackward(ClipalError):
    """Strict bidirectional scoring was requested on a forward-only clip."""


class ConfigError(ClipalError):
    """A configuration value is out of range or inconsistent."""


class SelectionShortfall(Warning):
    """Fewer admissible clips than the budget allowed; batch is partial."""
