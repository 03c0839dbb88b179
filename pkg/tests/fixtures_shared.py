"""Shared fixtures: ship-alert KB fragments and the 3x3x3 synthetic ladder."""

from __future__ import annotations

from inquest.abduction import CaseRecord, ExplanationRule
from inquest.calculus import SymbolicProbability as SP
from inquest.collection import DecompositionRule, FixtureSource
from inquest.evidence import EvidenceItem, EvidenceType
from inquest.network import Side
from inquest.statements import parse_atom, parse_statement


def ship_rules() -> list[ExplanationRule]:
    """Three explanations for a lost vessel track."""
    return [
        ExplanationRule(
            id="r-covert",
            hypothesis=parse_statement("performs-covert-goods-transfer(?ship)"),
            observable=parse_atom("ais-track-lost(?ship, ?time, ?loc)"),
            label="{ship} performs covert goods transfer",
        ),
        ExplanationRule(
            id="r-fishing",
            hypothesis=parse_statement("performs-illegal-fishing-operations(?ship)"),
            observable=parse_atom("ais-track-lost(?ship, ?time, ?loc)"),
            label="{ship} performs illegal fishing operations",
        ),
        ExplanationRule(
            id="r-pirates",
            hypothesis=parse_statement("avoids-tracking-by-pirates(?ship)"),
            observable=parse_atom("ais-track-lost(?ship, ?time, ?loc)"),
            label="{ship} avoids tracking by pirates",
        ),
    ]


def ship_cases() -> list[CaseRecord]:
    return [
        CaseRecord(
            id="case-loiter",
            hypothesis=parse_atom("performs-covert-goods-transfer(?s)"),
            co_occurrence=parse_atom("loiters-at-night(?s)"),
            note="transfer vessels loitered at night in past incidents",
        )
    ]


def ship_decomposition() -> list[DecompositionRule]:
    return [
        DecompositionRule(
            id="d-covert-fav",
            parent=parse_atom("performs-covert-goods-transfer(?ship)"),
            side=Side.FAVORING,
            relevance=SP.VL,
            children=(
                parse_atom("loiters-at-night(?ship)"),
                parse_atom("rendezvous-with-vessel(?ship, ?other)"),
            ),
        ),
        DecompositionRule(
            id="d-covert-dis",
            parent=parse_atom("performs-covert-goods-transfer(?ship)"),
            side=Side.DISFAVORING,
            relevance=SP.VL,
            children=(parse_atom("transponder-maintenance-scheduled(?ship)"),),
        ),
        DecompositionRule(
            id="d-fishing-fav",
            parent=parse_atom("performs-illegal-fishing-operations(?ship)"),
            side=Side.FAVORING,
            relevance=SP.VL,
            children=(
                parse_atom("inside-protected-fishing-zone(?ship)"),
                parse_atom("fishing-gear-deployed(?ship)"),
            ),
        ),
        DecompositionRule(
            id="d-fishing-dis",
            parent=parse_atom("performs-illegal-fishing-operations(?ship)"),
            side=Side.DISFAVORING,
            relevance=SP.L,
            children=(parse_atom("no-fishing-equipment-aboard(?ship)"),),
        ),
        DecompositionRule(
            id="d-pirates-fav",
            parent=parse_atom("avoids-tracking-by-pirates(?ship)"),
            side=Side.FAVORING,
            relevance=SP.VL,
            children=(parse_atom("inside-piracy-risk-area(?ship)"),),
        ),
        DecompositionRule(
            id="d-pirates-dis",
            parent=parse_atom("avoids-tracking-by-pirates(?ship)"),
            side=Side.DISFAVORING,
            relevance=SP.L,
            children=(parse_atom("no-piracy-reports-nearby(?ship)"),),
        ),
    ]


def ladder_rules() -> list[ExplanationRule]:
    """Three-level, branching-three explanation ladder for pruning tests."""
    rules = []
    for v1 in "abc":
        rules.append(
            ExplanationRule(
                id=f"lvl1-{v1}",
                hypothesis=parse_statement(f"phen-{v1}(?c)"),
                observable=parse_atom("anomaly(?c)"),
            )
        )
        for v2 in "abc":
            rules.append(
                ExplanationRule(
                    id=f"lvl2-{v1}{v2}",
                    hypothesis=parse_statement(f"proc-{v1}{v2}(?c)"),
                    observable=parse_atom(f"phen-{v1}(?c)"),
                )
            )
            for v3 in "abc":
                rules.append(
                    ExplanationRule(
                        id=f"lvl3-{v1}{v2}{v3}",
                        hypothesis=parse_statement(f"mech-{v1}{v2}{v3}(?c)"),
                        observable=parse_atom(f"proc-{v1}{v2}(?c)"),
                    )
                )
    return rules


def ladder_source() -> FixtureSource:
    """Evidence favoring the planted chain phen-a -> proc-ab -> mech-abc."""
    items = [
        EvidenceItem(
            id="ev-phen-a",
            type=EvidenceType.TANGIBLE_REAL,
            statement="phen-a(Case1)",
            credibility=SP.L,
        ),
        EvidenceItem(
            id="ev-proc-ab",
            type=EvidenceType.TANGIBLE_REAL,
            statement="proc-ab(Case1)",
            credibility=SP.L,
        ),
        EvidenceItem(
            id="ev-mech-abc",
            type=EvidenceType.TANGIBLE_REAL,
            statement="mech-abc(Case1)",
            credibility=SP.VL,
        ),
    ]
    return FixtureSource(items, source_id="ladder-fixture")
