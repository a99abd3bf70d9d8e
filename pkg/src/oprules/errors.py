"""Exception types shared across the package."""

from __future__ import annotations


class OprulesError(Exception):
    """Base class for every error raised by this package."""


# --- tree library ---

class MalformedTree(OprulesError):
    """Tree structure violates the forest/layer invariants."""


class InvalidTree(OprulesError):
    """Attempt to commit a tree that was never validated."""


class SchemaError(OprulesError):
    """A single persisted record failed validation.

    Collected per record by loaders instead of aborting the whole load.
    """

    def __init__(self, record_index: int, reason: str):
        super().__init__(f"record {record_index}: {reason}")
        self.record_index = record_index
        self.reason = reason


class DuplicateId(SchemaError):
    def __init__(self, record_index: int, item_id: str):
        super().__init__(record_index, f"duplicate id {item_id!r}")
        self.item_id = item_id


# --- provider / gateway ---

class ProviderError(OprulesError):
    """Model provider failed after exhausting retries."""


class ScriptedResponseMissing(ProviderError):
    """The scripted fixture has no response for this prompt."""


class EmptyCompletion(OprulesError):
    """Provider returned text with no extractable assertion."""


class DegenerateTree(OprulesError):
    """Tree construction produced no leaf rule naming any operator."""


class UnparseableJudgment(OprulesError):
    """Judge response contained no decimal score."""


class EmptyRuleSet(OprulesError):
    """Rule adaptation produced no usable rules."""


# --- assertion semantics ---

class SvaSyntaxError(OprulesError):
    """Assertion text is not well-formed over the supported grammar."""

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        detail = f"{message} at position {position}"
        if expected:
            detail += " (expected " + " | ".join(expected) + ")"
        super().__init__(detail)
        self.position = position
        self.expected = expected


class UnsupportedConstruct(OprulesError):
    """Legal SVA outside the evaluated subset.

    Distinct from SvaSyntaxError: counts as a syntax pass but cannot be
    checked functionally.
    """

    def __init__(self, construct: str, position: int = 0):
        super().__init__(f"unsupported construct {construct!r} at position {position}")
        self.construct = construct
        self.position = position


class UnknownSignal(OprulesError):
    """Assertion references a signal absent from the trace."""


class BudgetExceeded(OprulesError):
    def __init__(self, required: int, budget: int):
        super().__init__(
            f"equivalence check needs {required} trace evaluations, budget is {budget}"
        )
        self.required = required
        self.budget = budget


class ToolNotFound(OprulesError):
    """External checker binary could not be executed."""


class ToolParseError(OprulesError):
    """External checker output matched none of the verdict patterns."""


# --- training / evaluation ---

class OracleError(OprulesError):
    """Equivalence oracle failed for a specific item."""

    def __init__(self, item_id: str, reason: str):
        super().__init__(f"item {item_id}: {reason}")
        self.item_id = item_id
        self.reason = reason


class MissingPrediction(OprulesError):
    def __init__(self, item_id: str):
        super().__init__(f"no prediction for item {item_id}")
        self.item_id = item_id
