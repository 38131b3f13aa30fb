"""Exception types shared across the package.

Everything user-facing derives from EngineError so the service and CLI can
distinguish bad input data from genuine bugs.
"""


class EngineError(Exception):
    """Base class for errors caused by input data or configuration."""


class ParseError(EngineError):
    """A flat input file could not be parsed.

    Carries the logical source name (e.g. "counts") and the 1-based line
    number so callers can point at the offending file location.
    """

    def __init__(self, source: str, line: int, message: str):
        self.source = source
        self.line = line
        self.message = message
        super().__init__(f"{source}, line {line}: {message}")


class InvalidCounts(EngineError):
    """Contingency counts are inconsistent (negative derived cell or n=0)."""


class UndefinedForTable(EngineError):
    """An association measure's precondition fails on this table.

    Callers building a graph treat this as edge weight 0.
    """


class NoAlternativeFound(EngineError):
    """Neither a lemma nor any of its alternatives occurs in the count store."""


class MissingInventory(EngineError):
    """A (lemma, pos) has no sense inventory entry."""

    def __init__(self, lemma: str, pos: str):
        self.lemma = lemma
        self.pos = pos
        super().__init__(f"no sense inventory for {lemma!r}/{pos}")


class MissingClusters(EngineError):
    """Clustered initialization requested but the resource has no clusters."""


class UnknownConcept(EngineError):
    """A concept id is not present in the global concept list."""


class UnknownInstance(EngineError):
    """An answered instance id does not exist in the gold standard."""


class ConfigError(EngineError):
    """Pipeline configuration is invalid (bad value or missing file)."""
