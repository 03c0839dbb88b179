"""Self-analysis of a finished or in-progress analysis for reasoning biases.

Three detectors, each a pure function of the analysis artifacts:

* confirmation: a hypothesis was evidenced on one side only and nobody
  even searched for the contrary;
* satisficing: alternatives were generated but only one candidate was
  ever developed and tested;
* absence of evidence: a confident conclusion rests on thin coverage.

All findings are advisory in effect; they never block a report.  The
trigger conditions are deliberately the weakest ones implying the bias,
to keep false positives low.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Collection, Sequence

from .abduction import AbductionTrace
from .calculus import SymbolicProbability
from .collection import CollectionRequest, leaf_polarity
from .errors import ContractViolation
from .network import ArgumentationNetwork, EvaluationResult, Side

__all__ = [
    "BiasKind",
    "Severity",
    "BiasFinding",
    "detect_confirmation",
    "detect_satisficing",
    "detect_absence_of_evidence",
]


class BiasKind(str, Enum):
    CONFIRMATION = "confirmation"
    SATISFICING = "satisficing"
    ABSENCE_OF_EVIDENCE = "absence-of-evidence"


class Severity(str, Enum):
    ADVISORY = "advisory"
    WARNING = "warning"


@dataclass(frozen=True)
class BiasFinding:
    kind: BiasKind
    location: str
    severity: Severity
    rule: str
    explanation: str


def _descendants(network: ArgumentationNetwork, node_id: str) -> set[str]:
    closed: set[str] = set()
    frontier = [node_id]
    while frontier:
        current = frontier.pop()
        if current in closed:
            continue
        closed.add(current)
        for arg in network.child_arguments(current):
            frontier.extend(arg.children)
    return closed


def detect_confirmation(
    network: ArgumentationNetwork, requests: Sequence[CollectionRequest]
) -> list[BiasFinding]:
    """One-sided support that was never challenged.

    Fires on a node whose subtree holds at least one favoring evidence
    link, no disfavoring argument or link, and for which no request ever
    went looking for contrary evidence.  Only the topmost such node is
    reported.  Request polarity is read relative to the node: a request
    whose root-frame side differs from the node's own polarity counts as
    a contrary search for that node.
    """
    polarity = leaf_polarity(network)
    requests_by_leaf: dict[str, list[CollectionRequest]] = {}
    for request in requests:
        requests_by_leaf.setdefault(request.leaf, []).append(request)

    fires: set[str] = set()
    for node_id in network.nodes:
        subtree = _descendants(network, node_id)
        links = [l for l in network.evidence_links.values() if l.parent in subtree]
        if not any(l.side is Side.FAVORING for l in links):
            continue
        if any(l.side is Side.DISFAVORING for l in links):
            continue
        if any(
            a.side is Side.DISFAVORING
            for a in network.arguments.values()
            if a.parent in subtree
        ):
            continue
        node_sign = polarity.get(node_id, Side.FAVORING)
        contrary_searched = False
        for leaf in subtree:
            for request in requests_by_leaf.get(leaf, ()):
                relative = (
                    Side.FAVORING if request.side is node_sign else Side.DISFAVORING
                )
                if relative is Side.DISFAVORING:
                    contrary_searched = True
        if not contrary_searched:
            fires.add(node_id)

    # keep only nodes with no firing ancestor
    findings = []
    for node_id in sorted(fires):
        if any(
            node_id in _descendants(network, other) and other != node_id
            for other in fires
        ):
            continue
        findings.append(
            BiasFinding(
                kind=BiasKind.CONFIRMATION,
                location=node_id,
                severity=Severity.WARNING,
                rule="favoring-evidence-without-contrary-search",
                explanation=(
                    f"hypothesis {node_id!r} is supported by favoring evidence only; "
                    "its subtree has no disfavoring argument or evidence link and no "
                    "collection request ever searched for contrary evidence"
                ),
            )
        )
    return findings


def detect_satisficing(
    trace: AbductionTrace, developed: Collection[str], analysis_id: str
) -> list[BiasFinding]:
    """Alternatives existed but only one candidate was developed."""
    findings: list[BiasFinding] = []
    first_step = next((s for s in trace.steps if s.candidates), None)
    if first_step is None:
        return findings
    generated = {c.id: c for c in first_step.candidates}
    developed_here = [c for c in generated if c in set(developed)]
    if len(generated) >= 2 and len(developed_here) == 1:
        undeveloped = sorted(c for c in generated if c not in developed_here)
        texts = "; ".join(f"{c}: {generated[c].text}" for c in undeveloped)
        findings.append(
            BiasFinding(
                kind=BiasKind.SATISFICING,
                location=analysis_id,
                severity=Severity.WARNING,
                rule="single-candidate-developed-despite-alternatives",
                explanation=(
                    f"only candidate {developed_here[0]!r} was networked and tested; "
                    f"{len(undeveloped)} generated alternative(s) were never developed "
                    f"({texts})"
                ),
            )
        )
    return findings


def detect_absence_of_evidence(
    network: ArgumentationNetwork,
    evaluation: EvaluationResult,
    threshold: float = 0.5,
) -> list[BiasFinding]:
    """Confident root conclusions with coverage below the threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ContractViolation(f"coverage threshold must lie in (0, 1], got {threshold}")
    findings = []
    for root in network.competing_roots:
        probability = evaluation.probabilities[root]
        coverage = evaluation.coverage[root]
        if probability < SymbolicProbability.LIKELY:
            continue
        if coverage.ratio >= threshold:
            continue
        unanswered = sorted(
            leaf
            for leaf in _descendants(network, root)
            if network.is_leaf(leaf) and evaluation.coverage[leaf].answered == 0
        )
        findings.append(
            BiasFinding(
                kind=BiasKind.ABSENCE_OF_EVIDENCE,
                location=root,
                severity=Severity.ADVISORY,
                rule="confident-conclusion-under-coverage-threshold",
                explanation=(
                    f"root {root!r} concluded {probability.label} with coverage "
                    f"{coverage} (< {threshold:.2f}); unanswered leaves: "
                    f"{', '.join(unanswered) if unanswered else 'none'}"
                ),
            )
        )
    return findings
