"""Evidence taxonomy, source profiles, and credibility assessment patterns.

Evidence items are classified by how they can be examined: tangible
items directly (the thing itself or a representation of it), testimonial
items only through their human source, authoritative records by
reference, and "missing" marks stand for items expected but not found.

Per type there is a credibility assessment pattern: a tree of indicators
whose leaves are assessed on a source profile and whose internal levels
combine bottom-up through combined-indicator tables.  The shipped
testimonial pattern grounds credibility in source competence, veracity,
and accuracy, with veracity further decomposed into truthfulness of the
information (corroboration vs. contradiction) and trustworthiness of the
source (character, reliability, goals).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from itertools import combinations
from typing import Mapping, Optional

from .calculus import IndicatorCombination, SymbolicProbability, combined_indicator
from .errors import ContractViolation, PatternMismatchError

__all__ = [
    "EvidenceType",
    "TESTIMONIAL_TYPES",
    "EvidenceItem",
    "IndicatorAssessment",
    "SourceProfile",
    "CredibilityPattern",
    "AssessmentStep",
    "builtin_patterns",
    "default_combination_table",
    "assess_credibility",
    "mark_missing",
]


class EvidenceType(str, Enum):
    TANGIBLE_REAL = "tangible-real"
    TANGIBLE_DEMONSTRATIVE = "tangible-demonstrative"
    TESTIMONIAL_DIRECT = "testimonial-direct"
    TESTIMONIAL_SECONDHAND = "testimonial-secondhand"
    TESTIMONIAL_OPINION = "testimonial-opinion"
    AUTHORITATIVE_RECORD = "authoritative-record"
    MISSING = "missing"


TESTIMONIAL_TYPES = frozenset(
    {
        EvidenceType.TESTIMONIAL_DIRECT,
        EvidenceType.TESTIMONIAL_SECONDHAND,
        EvidenceType.TESTIMONIAL_OPINION,
    }
)

#: Built-in indicator vocabulary; KB files may extend it with pattern-specific leaves.
INDICATOR_VOCABULARY = frozenset(
    {
        "competence",
        "veracity",
        "accuracy",
        "truthfulness-of-information",
        "trustworthiness",
        "corroborative-evidence",
        "contradictory-evidence",
        "character",
        "reliability",
        "goals",
        "authority-of-publisher",
        "corroboration",
        "recency",
        "credibility",
    }
)


@dataclass(frozen=True)
class EvidenceItem:
    id: str
    type: EvidenceType
    statement: str
    credibility: SymbolicProbability = SymbolicProbability.NS
    source: Optional[str] = None
    observed_at: Optional[datetime] = None
    recorded_at: Optional[datetime] = None
    provenance_note: str = ""
    # statement template this item contradicts, if it is contrary evidence
    contradicts: Optional[str] = None
    # source-declared relevance override used when the item is linked
    relevance: Optional[SymbolicProbability] = None

    def __post_init__(self) -> None:
        if self.type in TESTIMONIAL_TYPES and not self.source:
            raise ContractViolation(f"testimonial item {self.id!r} must reference a source profile")
        if self.type is EvidenceType.MISSING and self.credibility is not SymbolicProbability.NS:
            raise ContractViolation(f"missing item {self.id!r} must carry 'no support' credibility")
        if (
            self.observed_at is not None
            and self.recorded_at is not None
            and self.recorded_at < self.observed_at
        ):
            raise ContractViolation(f"item {self.id!r} recorded before it was observed")


@dataclass(frozen=True)
class IndicatorAssessment:
    probability: SymbolicProbability
    note: str

    def __post_init__(self) -> None:
        if not self.note.strip():
            raise ContractViolation("an indicator assessment must cite a supporting note")


@dataclass(frozen=True)
class SourceProfile:
    id: str
    name: str
    assessments: Mapping[str, IndicatorAssessment] = field(default_factory=dict)


@dataclass(frozen=True)
class CredibilityPattern:
    """Indicator tree plus per-parent combined-indicator tables."""

    id: str
    applicable_type: EvidenceType
    tree: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    tables: Mapping[str, tuple[IndicatorCombination, ...]] = field(default_factory=dict)
    root: str = "credibility"
    # value used when no indicator at all is assessed
    default: Optional[SymbolicProbability] = None

    def validate(self) -> list[str]:
        problems: list[str] = []
        seen: set[str] = set()
        frontier = [self.root]
        while frontier:
            indicator = frontier.pop()
            if indicator in seen:
                problems.append(f"indicator {indicator!r} reached twice; tree must be acyclic")
                continue
            seen.add(indicator)
            frontier.extend(self.tree.get(indicator, ()))
        for parent, children in self.tree.items():
            table = self.tables.get(parent)
            if not table:
                problems.append(f"indicator {parent!r} has children but no combination table")
                continue
            sets = [c.indicators for c in table]
            if len(sets) != len(set(sets)):
                problems.append(f"duplicate combination sets under {parent!r}")
            for combination in table:
                extra = combination.indicators - set(children)
                if extra:
                    problems.append(
                        f"combination under {parent!r} uses non-child indicators {sorted(extra)}"
                    )
        return problems


@dataclass(frozen=True)
class AssessmentStep:
    indicator: str
    method: str  # "direct" | "combined" | "absent" | "default"
    inputs: tuple[str, ...]
    result: str


def default_combination_table(children: tuple[str, ...]) -> tuple[IndicatorCombination, ...]:
    """Fallback table: all children certain, any two likely, any one barely likely."""
    full = frozenset(children)
    table: dict[frozenset[str], SymbolicProbability] = {full: SymbolicProbability.C}
    for child in children:
        table.setdefault(frozenset({child}), SymbolicProbability.BL)
    for pair in combinations(children, 2):
        table.setdefault(frozenset(pair), SymbolicProbability.L)
    rows = [IndicatorCombination(indicators, relevance) for indicators, relevance in table.items()]
    rows.sort(key=lambda c: (len(c.indicators), tuple(sorted(c.indicators))))
    return tuple(rows)


def builtin_patterns() -> list[CredibilityPattern]:
    """The shipped credibility patterns, keyed to the evidence taxonomy."""
    testimonial_tree = {
        "credibility": ("competence", "veracity", "accuracy"),
        "veracity": ("truthfulness-of-information", "trustworthiness"),
        "truthfulness-of-information": ("corroborative-evidence", "contradictory-evidence"),
        "trustworthiness": ("character", "reliability", "goals"),
    }
    testimonial_tables = {
        "credibility": (
            IndicatorCombination(frozenset({"veracity"}), SymbolicProbability.BL),
            IndicatorCombination(frozenset({"competence", "veracity"}), SymbolicProbability.L),
            IndicatorCombination(
                frozenset({"competence", "veracity", "accuracy"}), SymbolicProbability.C
            ),
        ),
        "veracity": default_combination_table(testimonial_tree["veracity"]),
        "truthfulness-of-information": default_combination_table(
            testimonial_tree["truthfulness-of-information"]
        ),
        "trustworthiness": default_combination_table(testimonial_tree["trustworthiness"]),
    }
    testimonial = CredibilityPattern(
        id="testimonial-direct",
        applicable_type=EvidenceType.TESTIMONIAL_DIRECT,
        tree=testimonial_tree,
        tables=testimonial_tables,
    )

    # Simplified pattern for web-sourced representations; not taken from a
    # published table, see the package docs.
    internet_tree = {"credibility": ("authority-of-publisher", "corroboration", "recency")}
    internet = CredibilityPattern(
        id="internet-source",
        applicable_type=EvidenceType.TANGIBLE_DEMONSTRATIVE,
        tree=internet_tree,
        tables={"credibility": default_combination_table(internet_tree["credibility"])},
    )

    # Authoritative records are accepted as true; default stays below
    # certain because reference tables can be outdated.  A profile with a
    # direct "credibility" assessment can raise (or lower) it.
    authoritative = CredibilityPattern(
        id="authoritative-record",
        applicable_type=EvidenceType.AUTHORITATIVE_RECORD,
        default=SymbolicProbability.AC,
    )
    return [testimonial, internet, authoritative]


def _resolve(
    indicator: str,
    pattern: CredibilityPattern,
    profile: SourceProfile,
    steps: list[AssessmentStep],
) -> Optional[SymbolicProbability]:
    direct = profile.assessments.get(indicator)
    if direct is not None:
        steps.append(AssessmentStep(indicator, "direct", (), direct.probability.label))
        return direct.probability
    children = pattern.tree.get(indicator)
    if not children:
        steps.append(AssessmentStep(indicator, "absent", (), ""))
        return None
    present: dict[str, SymbolicProbability] = {}
    for child in children:
        value = _resolve(child, pattern, profile, steps)
        if value is not None:
            present[child] = value
    if not present:
        steps.append(AssessmentStep(indicator, "absent", (), ""))
        return None
    value = combined_indicator(pattern.tables[indicator], present)
    steps.append(
        AssessmentStep(
            indicator,
            "combined",
            tuple(f"{child}={prob.label}" for child, prob in sorted(present.items())),
            value.label,
        )
    )
    return value


def assess_credibility(
    item: EvidenceItem,
    profile: SourceProfile,
    pattern: CredibilityPattern,
) -> tuple[SymbolicProbability, tuple[AssessmentStep, ...]]:
    """Compose leaf indicator assessments bottom-up to the root credibility.

    An indicator is present when the profile assesses it directly or any
    of its descendants is present; a directly assessed indicator shadows
    its own sub-tree.  Returns the root value and the full step trace;
    callers record the value on the item.
    """
    if pattern.applicable_type is not item.type:
        raise PatternMismatchError(
            f"pattern {pattern.id!r} applies to {pattern.applicable_type.value}, "
            f"item {item.id!r} is {item.type.value}"
        )
    steps: list[AssessmentStep] = []
    value = _resolve(pattern.root, pattern, profile, steps)
    if value is None:
        value = pattern.default if pattern.default is not None else SymbolicProbability.NS
        steps.append(AssessmentStep(pattern.root, "default", (), value.label))
    return value, tuple(steps)


def mark_missing(expected: str, reason: str, item_id: Optional[str] = None) -> EvidenceItem:
    """Create a marker for evidence that was expected but not found.

    A missing item keeps its leaf in the unanswered count until it is
    resolved by an actual finding.
    """
    if item_id is None:
        slug = "".join(ch if ch.isalnum() else "-" for ch in expected.lower()).strip("-")
        while "--" in slug:
            slug = slug.replace("--", "-")
        item_id = f"missing-{slug[:48]}"
    return EvidenceItem(
        id=item_id,
        type=EvidenceType.MISSING,
        statement=expected,
        credibility=SymbolicProbability.NS,
        provenance_note=reason,
    )
