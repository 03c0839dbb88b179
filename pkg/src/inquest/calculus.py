"""Symbolic probability scale and the min/max combination operators.

Hypotheses and evidence are weighed on a six-level ordered scale rather
than numeric probabilities:

    no support < barely likely < likely < very likely < almost certain < certain

Conjunctions take the minimum of their members, disjunctions the maximum.
The inferential force an evidence item lends a hypothesis is the minimum
of the item's credibility and its relevance.  Favoring and disfavoring
forces are balanced by rank subtraction clamped at the bottom of the
scale, so equal opposing forces cancel to "no support".

All operators are pure functions on immutable values and safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Mapping, Sequence

from .errors import ContractViolation

__all__ = [
    "SymbolicProbability",
    "SCALE",
    "IndicatorCombination",
    "conjoin",
    "disjoin",
    "inferential_force",
    "balance",
    "combined_indicator",
]


class SymbolicProbability(IntEnum):
    """One of six ordered qualitative probability levels.

    The integer value is the rank; comparison, ``min`` and ``max`` follow
    the scale order.  Short aliases (``NS`` .. ``C``) are provided for
    terse fixture and test code.
    """

    NO_SUPPORT = 0
    BARELY_LIKELY = 1
    LIKELY = 2
    VERY_LIKELY = 3
    ALMOST_CERTAIN = 4
    CERTAIN = 5

    # short aliases
    NS = 0
    BL = 1
    L = 2
    VL = 3
    AC = 4
    C = 5

    @property
    def rank(self) -> int:
        return int(self)

    @property
    def label(self) -> str:
        """Canonical lowercase label used in every file format and API."""
        return _LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "SymbolicProbability":
        try:
            return _BY_LABEL[label]
        except KeyError:
            known = ", ".join(repr(l) for l in _BY_LABEL)
            raise ContractViolation(
                f"unknown probability label {label!r}; expected one of {known}"
            ) from None

    @classmethod
    def from_rank(cls, rank: int) -> "SymbolicProbability":
        if not 0 <= rank <= 5:
            raise ContractViolation(f"probability rank out of range [0, 5]: {rank}")
        return cls(rank)

    def __str__(self) -> str:
        return self.label


_LABELS: dict[SymbolicProbability, str] = {
    SymbolicProbability.NO_SUPPORT: "no support",
    SymbolicProbability.BARELY_LIKELY: "barely likely",
    SymbolicProbability.LIKELY: "likely",
    SymbolicProbability.VERY_LIKELY: "very likely",
    SymbolicProbability.ALMOST_CERTAIN: "almost certain",
    SymbolicProbability.CERTAIN: "certain",
}

_BY_LABEL = {label: value for value, label in _LABELS.items()}

#: The whole scale in ascending order.
SCALE: tuple[SymbolicProbability, ...] = tuple(SymbolicProbability)


@dataclass(frozen=True)
class IndicatorCombination:
    """One row of a combined-indicator table.

    ``indicators`` is the set of sub-indicators that must all be present
    for the row to apply; ``relevance`` caps the support the row can
    contribute.
    """

    indicators: frozenset[str]
    relevance: SymbolicProbability

    def __post_init__(self) -> None:
        object.__setattr__(self, "indicators", frozenset(self.indicators))
        if not self.indicators:
            raise ContractViolation("an indicator combination needs at least one indicator")


def conjoin(values: Iterable[SymbolicProbability]) -> SymbolicProbability:
    """Probability of a conjunction: the minimum of its members."""
    values = list(values)
    if not values:
        raise ContractViolation("conjoin requires at least one value")
    return min(values)


def disjoin(values: Iterable[SymbolicProbability]) -> SymbolicProbability:
    """Probability of a disjunction: the maximum of its members."""
    values = list(values)
    if not values:
        raise ContractViolation("disjoin requires at least one value")
    return max(values)


def inferential_force(
    credibility: SymbolicProbability, relevance: SymbolicProbability
) -> SymbolicProbability:
    """Support an evidence item lends a hypothesis: min(credibility, relevance)."""
    return min(credibility, relevance)


def balance(
    favoring: SymbolicProbability, disfavoring: SymbolicProbability
) -> SymbolicProbability:
    """Net a favoring force against a disfavoring one.

    Rank subtraction clamped at the bottom of the scale: with no
    disfavoring force the favoring force passes through unchanged; a
    disfavoring force at least as strong as the favoring one yields
    "no support".
    """
    return SymbolicProbability(max(0, favoring.rank - disfavoring.rank))


def combined_indicator(
    pattern: Sequence[IndicatorCombination],
    present: Mapping[str, SymbolicProbability],
) -> SymbolicProbability:
    """Disjunction of all applicable conjunctions of present indicators.

    A combination applies when every one of its indicators is present.
    Each applicable combination contributes the minimum of its relevance
    and the conjunction of its indicators' probabilities; the result is
    the maximum contribution, or "no support" when nothing applies.
    Missing indicators simply disable combinations; they are not errors.
    """
    if not pattern:
        raise ContractViolation("combined_indicator requires a non-empty pattern")
    contributions = []
    for combination in pattern:
        if combination.indicators <= present.keys():
            strength = conjoin(present[i] for i in combination.indicators)
            contributions.append(min(combination.relevance, strength))
    if not contributions:
        return SymbolicProbability.NO_SUPPORT
    return disjoin(contributions)
