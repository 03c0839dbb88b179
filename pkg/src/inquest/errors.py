"""Semantic exception hierarchy shared by all engine modules."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(EngineError):
    """A caller broke a documented precondition (empty input, bad range, ...)."""


class UnknownIdError(EngineError):
    """A referenced identifier does not resolve."""

    def __init__(self, kind: str, identifier: str):
        super().__init__(f"unknown {kind}: {identifier!r}")
        self.kind = kind
        self.identifier = identifier


class InvalidNetworkError(EngineError):
    """An operation requiring a well-formed network received a defective one.

    Carries the structural defect list so callers can report every problem
    at once instead of failing on the first.
    """

    def __init__(self, defects):
        lines = "; ".join(f"{d.rule}@{d.subject}: {d.detail}" for d in defects)
        super().__init__(f"network has {len(defects)} structural defect(s): {lines}")
        self.defects = list(defects)


class PatternMismatchError(EngineError):
    """A credibility pattern was applied to an evidence item of another type."""


class StatementParseError(EngineError):
    """A statement, rule, or alert document failed to parse."""


class DocumentError(EngineError):
    """A serialized document (network, KB, evidence, bundle) is malformed."""
