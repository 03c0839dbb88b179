"""Reference knowledge bases: declaratively authored rule files.

A KB document carries explanation rules (abduction), decomposition rules
(hypothesis refinement), co-occurrence cases, optional credibility
pattern overrides, source profiles, and an entity type registry.  Each
loaded KB is an immutable version identified by a content hash, so a
running analysis can pin exactly the knowledge it used.
"""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .abduction import CaseRecord, ExplanationRule
from .calculus import IndicatorCombination, SymbolicProbability
from .collection import DecompositionRule
from .errors import DocumentError
from .evidence import (
    CredibilityPattern,
    EvidenceType,
    SourceProfile,
    builtin_patterns,
    default_combination_table,
)
from .files import canonical_yaml, load_document, profile_from_document, profile_to_document
from .network import Side
from .statements import StatementParseError, parse_atom, parse_statement

__all__ = ["ReferenceKnowledgeBase", "kb_from_document", "kb_to_document", "load_kb", "validate_kb"]


@dataclass(frozen=True)
class ReferenceKnowledgeBase:
    version: str
    explanation_rules: tuple[ExplanationRule, ...] = ()
    decomposition_rules: tuple[DecompositionRule, ...] = ()
    cases: tuple[CaseRecord, ...] = ()
    patterns: tuple[CredibilityPattern, ...] = ()
    profiles: tuple[SourceProfile, ...] = ()
    entity_types: Mapping[str, str] = field(default_factory=dict)

    def pattern_for(self, evidence_type: EvidenceType) -> Optional[CredibilityPattern]:
        for pattern in self.patterns:
            if pattern.applicable_type is evidence_type:
                return pattern
        return None

    def profile(self, profile_id: str) -> Optional[SourceProfile]:
        for profile in self.profiles:
            if profile.id == profile_id:
                return profile
        return None


def _parse_probability(value: Any, context: str) -> SymbolicProbability:
    try:
        return SymbolicProbability.from_label(value)
    except Exception as exc:
        raise DocumentError(f"{context}: {exc}") from exc


def _explanation_rule(entry: Mapping[str, Any]) -> ExplanationRule:
    rule_id = entry.get("id")
    if not rule_id:
        raise DocumentError("explanation rule without an id")
    context = f"explanation rule {rule_id}"
    try:
        hypothesis = parse_statement(entry["hypothesis"])
        observable = parse_atom(entry["observable"])
    except KeyError as exc:
        raise DocumentError(f"{context}: missing {exc}") from exc
    except StatementParseError as exc:
        raise DocumentError(f"{context}: {exc}") from exc
    relevance = entry.get("prior-relevance", "likely")
    return ExplanationRule(
        id=rule_id,
        hypothesis=hypothesis,
        observable=observable,
        prior_relevance=_parse_probability(relevance, context),
        species_hints=frozenset(entry.get("species-hints", [])),
        label=entry.get("label"),
    )


def _decomposition_rule(entry: Mapping[str, Any]) -> DecompositionRule:
    rule_id = entry.get("id")
    if not rule_id:
        raise DocumentError("decomposition rule without an id")
    context = f"decomposition rule {rule_id}"
    try:
        return DecompositionRule(
            id=rule_id,
            parent=parse_atom(entry["parent"]),
            side=Side(entry.get("side", "favoring")),
            relevance=_parse_probability(entry.get("relevance", "likely"), context),
            children=tuple(parse_atom(c) for c in entry["children"]),
        )
    except KeyError as exc:
        raise DocumentError(f"{context}: missing {exc}") from exc
    except (StatementParseError, ValueError) as exc:
        raise DocumentError(f"{context}: {exc}") from exc


def _case_record(entry: Mapping[str, Any]) -> CaseRecord:
    case_id = entry.get("id")
    if not case_id:
        raise DocumentError("case record without an id")
    context = f"case {case_id}"
    try:
        return CaseRecord(
            id=case_id,
            hypothesis=parse_atom(entry["hypothesis"]),
            co_occurrence=parse_atom(entry["co-occurs"]),
            note=entry.get("note", ""),
        )
    except KeyError as exc:
        raise DocumentError(f"{context}: missing {exc}") from exc
    except StatementParseError as exc:
        raise DocumentError(f"{context}: {exc}") from exc


def _pattern(entry: Mapping[str, Any]) -> CredibilityPattern:
    pattern_id = entry.get("id")
    if not pattern_id:
        raise DocumentError("credibility pattern without an id")
    context = f"pattern {pattern_id}"
    tree = {
        parent: tuple(children) for parent, children in (entry.get("tree") or {}).items()
    }
    tables: dict[str, tuple[IndicatorCombination, ...]] = {}
    for parent, rows in (entry.get("tables") or {}).items():
        combinations = []
        for row in rows:
            combinations.append(
                IndicatorCombination(
                    frozenset(row["indicators"]),
                    _parse_probability(row["relevance"], context),
                )
            )
        tables[parent] = tuple(combinations)
    for parent, children in tree.items():
        tables.setdefault(parent, default_combination_table(children))
    default = entry.get("default")
    try:
        pattern = CredibilityPattern(
            id=pattern_id,
            applicable_type=EvidenceType(entry["applies-to"]),
            tree=tree,
            tables=tables,
            root=entry.get("root", "credibility"),
            default=_parse_probability(default, context) if default else None,
        )
    except KeyError as exc:
        raise DocumentError(f"{context}: missing {exc}") from exc
    except ValueError as exc:
        raise DocumentError(f"{context}: {exc}") from exc
    problems = pattern.validate()
    if problems:
        raise DocumentError(f"{context}: " + "; ".join(problems))
    return pattern


def kb_from_document(document: Mapping[str, Any]) -> ReferenceKnowledgeBase:
    if not isinstance(document, Mapping):
        raise DocumentError("a KB document must be a mapping")
    explanation = tuple(
        _explanation_rule(e) for e in document.get("explanation-rules", []) or []
    )
    decomposition = tuple(
        _decomposition_rule(e) for e in document.get("decomposition-rules", []) or []
    )
    cases = tuple(_case_record(e) for e in document.get("cases", []) or [])
    overrides = tuple(_pattern(e) for e in document.get("patterns", []) or [])
    overridden_types = {p.applicable_type for p in overrides}
    patterns = overrides + tuple(
        p for p in builtin_patterns() if p.applicable_type not in overridden_types
    )
    profiles = tuple(
        profile_from_document(e) for e in document.get("profiles", []) or []
    )
    entity_types = dict(document.get("entities") or {})
    version = hashlib.sha256(
        canonical_yaml(_canonical_document(document)).encode("utf-8")
    ).hexdigest()[:12]
    return ReferenceKnowledgeBase(
        version=version,
        explanation_rules=explanation,
        decomposition_rules=decomposition,
        cases=cases,
        patterns=patterns,
        profiles=profiles,
        entity_types=entity_types,
    )


def _canonical_document(document: Mapping[str, Any]) -> dict[str, Any]:
    """Id-sorted copy so the version hash ignores authoring order."""
    out = dict(document)
    for section in ("explanation-rules", "decomposition-rules", "cases", "patterns", "profiles"):
        entries = out.get(section)
        if isinstance(entries, list):
            out[section] = sorted(entries, key=lambda e: str(e.get("id", "")))
    return out


def kb_to_document(kb: ReferenceKnowledgeBase) -> dict[str, Any]:
    document: dict[str, Any] = {}
    if kb.explanation_rules:
        document["explanation-rules"] = [
            {
                "id": r.id,
                "hypothesis": r.hypothesis.render(),
                "observable": r.observable.render(),
                "prior-relevance": r.prior_relevance.label,
                **({"label": r.label} if r.label else {}),
                **({"species-hints": sorted(r.species_hints)} if r.species_hints else {}),
            }
            for r in sorted(kb.explanation_rules, key=lambda r: r.id)
        ]
    if kb.decomposition_rules:
        document["decomposition-rules"] = [
            {
                "id": r.id,
                "parent": r.parent.render(),
                "side": r.side.value,
                "relevance": r.relevance.label,
                "children": [c.render() for c in r.children],
            }
            for r in sorted(kb.decomposition_rules, key=lambda r: r.id)
        ]
    if kb.cases:
        document["cases"] = [
            {
                "id": c.id,
                "hypothesis": c.hypothesis.render(),
                "co-occurs": c.co_occurrence.render(),
                **({"note": c.note} if c.note else {}),
            }
            for c in sorted(kb.cases, key=lambda c: c.id)
        ]
    if kb.profiles:
        document["profiles"] = [
            profile_to_document(p) for p in sorted(kb.profiles, key=lambda p: p.id)
        ]
    if kb.entity_types:
        document["entities"] = dict(sorted(kb.entity_types.items()))
    return document


def load_kb(path) -> ReferenceKnowledgeBase:
    return kb_from_document(load_document(path) or {})


def validate_kb(kb: ReferenceKnowledgeBase) -> list[str]:
    """Collect defects that would make rules unusable at analysis time."""
    problems: list[str] = []
    seen_rules: set[str] = set()
    for rule in kb.explanation_rules:
        if rule.id in seen_rules:
            problems.append(f"duplicate explanation rule id {rule.id!r}")
        seen_rules.add(rule.id)
        hint_forms = rule.species_hints - {"simple", "existential", "analogical"}
        if hint_forms:
            problems.append(
                f"explanation rule {rule.id!r}: unknown species hints {sorted(hint_forms)}"
            )
        existential = bool(rule.existential_variables())
        if "existential" in rule.species_hints and not existential:
            problems.append(
                f"explanation rule {rule.id!r}: hinted existential but every "
                "hypothesis variable is bound by the observable"
            )
        if "simple" in rule.species_hints and existential:
            problems.append(
                f"explanation rule {rule.id!r}: hinted simple but the hypothesis "
                "introduces unbound variables"
            )
        if rule.label:
            names = {v.name for v in rule.hypothesis.variables()}
            names |= {v.name for v in rule.observable.variables()}
            fields = {
                name for _, name, _, _ in string.Formatter().parse(rule.label) if name
            }
            unknown = fields - names
            if unknown:
                problems.append(
                    f"explanation rule {rule.id!r}: label references unknown "
                    f"variables {sorted(unknown)}"
                )
    seen_decomposition: set[str] = set()
    for rule in kb.decomposition_rules:
        if rule.id in seen_decomposition:
            problems.append(f"duplicate decomposition rule id {rule.id!r}")
        seen_decomposition.add(rule.id)
    seen_cases: set[str] = set()
    for case in kb.cases:
        if case.id in seen_cases:
            problems.append(f"duplicate case id {case.id!r}")
        seen_cases.add(case.id)
        h_vars = {v.name for v in case.hypothesis.variables()}
        k_vars = {v.name for v in case.co_occurrence.variables()}
        if not k_vars <= h_vars:
            # extra variables become fresh entities; flag them for review
            problems.append(
                f"case {case.id!r}: co-occurrence variables {sorted(k_vars - h_vars)} "
                "are not bound by the hypothesis pattern and will become fresh entities"
            )
    for pattern in kb.patterns:
        problems.extend(f"pattern {pattern.id!r}: {p}" for p in pattern.validate())
    return problems
