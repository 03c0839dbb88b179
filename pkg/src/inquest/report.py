"""Structured analysis reports with a deterministic text rendering.

The text layout is fixed and every list is ordered (rankings first,
then lexicographic ids), so two reports over identical analysis state
are byte-identical — golden-file comparisons are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

from .bias import BiasFinding, BiasKind, Severity
from .calculus import SymbolicProbability
from .errors import DocumentError
from .network import (
    ArgumentationNetwork,
    CompetingRank,
    Coverage,
    EvaluationResult,
    Side,
)

__all__ = [
    "Conclusion",
    "Citation",
    "StructuredReport",
    "build_report",
    "render_report_text",
    "report_to_document",
    "report_from_document",
    "finding_to_document",
    "finding_from_document",
]


@dataclass(frozen=True)
class Conclusion:
    root: str
    statement: str
    probability: SymbolicProbability
    coverage: Coverage
    assumption_dependent: bool


@dataclass(frozen=True)
class Citation:
    id: str
    statement: str
    type: str
    credibility: SymbolicProbability
    source: Optional[str] = None


@dataclass(frozen=True)
class StructuredReport:
    analysis_id: str
    generated_at: str
    kb_version: str
    conclusions: tuple[Conclusion, ...]
    outline: tuple[str, ...]
    citations: tuple[Citation, ...]
    assumptions: tuple[tuple[str, str], ...]
    findings: tuple[BiasFinding, ...]


def _outline(
    network: ArgumentationNetwork, evaluation: EvaluationResult, root: str
) -> list[str]:
    lines: list[str] = []

    def visit(node_id: str, indent: int) -> None:
        pad = "  " * indent
        node = network.nodes[node_id]
        probability = evaluation.probabilities[node_id]
        coverage = evaluation.coverage[node_id]
        marker = " [assumed]" if node.assumption is not None else ""
        lines.append(
            f"{pad}- {node.statement} :: {probability.label} (coverage {coverage}){marker}"
        )
        for link in network.links_of(node_id):
            ref = network.evidence[link.evidence]
            sign = "+" if link.side is Side.FAVORING else "-"
            missing = ", missing" if ref.missing else ""
            lines.append(
                f"{pad}  {sign} evidence {link.evidence}: credibility "
                f"{ref.credibility.label}, relevance {link.relevance.label}{missing}"
            )
        for arg in network.child_arguments(node_id):
            sign = "+" if arg.side is Side.FAVORING else "-"
            lines.append(
                f"{pad}  {sign} argument {arg.id} (relevance {arg.relevance.label})"
            )
            for child in arg.children:
                visit(child, indent + 2)

    visit(root, 0)
    return lines


def build_report(
    analysis_id: str,
    kb_version: str,
    generated_at: str,
    network: ArgumentationNetwork,
    evaluation: EvaluationResult,
    rankings: Sequence[CompetingRank],
    candidate_texts: Mapping[str, str],
    findings: Sequence[BiasFinding] = (),
) -> StructuredReport:
    """Assemble a report consistent with one evaluation of one network.

    ``candidate_texts`` maps root node ids to the hypothesis statements
    shown for them (falling back to the node statement).
    """
    conclusions = tuple(
        Conclusion(
            root=rank.root,
            statement=candidate_texts.get(rank.root, network.nodes[rank.root].statement),
            probability=rank.probability,
            coverage=rank.coverage,
            assumption_dependent=evaluation.assumption_dependent[rank.root],
        )
        for rank in rankings
    )
    outline: list[str] = []
    for rank in rankings:
        outline.extend(_outline(network, evaluation, rank.root))
    referenced = {link.evidence for link in network.evidence_links.values()}
    citations = tuple(
        Citation(
            id=ref.id,
            statement=ref.statement,
            type="missing" if ref.missing else "evidence",
            credibility=ref.credibility,
        )
        for ref_id, ref in sorted(network.evidence.items())
        if ref_id in referenced
    )
    assumptions = tuple(
        (node.id, node.assumption.label)
        for node in sorted(network.nodes.values(), key=lambda n: n.id)
        if node.assumption is not None
    )
    return StructuredReport(
        analysis_id=analysis_id,
        generated_at=generated_at,
        kb_version=kb_version,
        conclusions=conclusions,
        outline=tuple(outline),
        citations=citations,
        assumptions=assumptions,
        findings=tuple(findings),
    )


def render_report_text(report: StructuredReport) -> str:
    lines = [
        f"ANALYSIS REPORT {report.analysis_id}",
        f"generated-at: {report.generated_at}",
        f"knowledge-base: {report.kb_version}",
        "",
        "== CONCLUSIONS ==",
    ]
    for index, conclusion in enumerate(report.conclusions, start=1):
        suffix = " [rests on assumptions]" if conclusion.assumption_dependent else ""
        lines.append(
            f"{index}. {conclusion.statement} -> {conclusion.probability.label} "
            f"(coverage {conclusion.coverage}){suffix}"
        )
    lines += ["", "== ARGUMENT OUTLINE =="]
    lines.extend(report.outline)
    lines += ["", "== EVIDENCE =="]
    if report.citations:
        for citation in report.citations:
            source = f", source {citation.source}" if citation.source else ""
            statement = f' "{citation.statement}"' if citation.statement else ""
            lines.append(
                f"- {citation.id}:{statement} credibility {citation.credibility.label}"
                f"{source}"
            )
    else:
        lines.append("(no evidence collected)")
    lines += ["", "== ASSUMPTIONS IN FORCE =="]
    if report.assumptions:
        for node_id, label in report.assumptions:
            lines.append(f"- {node_id}: {label}")
    else:
        lines.append("(none)")
    lines += ["", "== BIAS FINDINGS =="]
    if report.findings:
        for finding in report.findings:
            lines.append(
                f"- [{finding.severity.value}] {finding.kind.value} at "
                f"{finding.location}: {finding.explanation}"
            )
    else:
        lines.append("(none)")
    return "\n".join(lines) + "\n"


def finding_to_document(finding: BiasFinding) -> dict[str, Any]:
    return {
        "kind": finding.kind.value,
        "location": finding.location,
        "severity": finding.severity.value,
        "rule": finding.rule,
        "explanation": finding.explanation,
    }


def finding_from_document(document: Mapping[str, Any]) -> BiasFinding:
    try:
        return BiasFinding(
            kind=BiasKind(document["kind"]),
            location=document["location"],
            severity=Severity(document["severity"]),
            rule=document["rule"],
            explanation=document["explanation"],
        )
    except (KeyError, ValueError) as exc:
        raise DocumentError(f"bad bias finding document: {exc}") from exc


def report_to_document(report: StructuredReport) -> dict[str, Any]:
    return {
        "analysis-id": report.analysis_id,
        "generated-at": report.generated_at,
        "kb-version": report.kb_version,
        "conclusions": [
            {
                "root": c.root,
                "statement": c.statement,
                "probability": c.probability.label,
                "coverage": {"answered": c.coverage.answered, "total": c.coverage.total},
                "assumption-dependent": c.assumption_dependent,
            }
            for c in report.conclusions
        ],
        "outline": list(report.outline),
        "citations": [
            {
                "id": c.id,
                "statement": c.statement,
                "type": c.type,
                "credibility": c.credibility.label,
                **({"source": c.source} if c.source else {}),
            }
            for c in report.citations
        ],
        "assumptions": [list(pair) for pair in report.assumptions],
        "findings": [finding_to_document(f) for f in report.findings],
    }


def report_from_document(document: Mapping[str, Any]) -> StructuredReport:
    try:
        return StructuredReport(
            analysis_id=document["analysis-id"],
            generated_at=document["generated-at"],
            kb_version=document["kb-version"],
            conclusions=tuple(
                Conclusion(
                    root=c["root"],
                    statement=c["statement"],
                    probability=SymbolicProbability.from_label(c["probability"]),
                    coverage=Coverage(c["coverage"]["answered"], c["coverage"]["total"]),
                    assumption_dependent=c["assumption-dependent"],
                )
                for c in document.get("conclusions", [])
            ),
            outline=tuple(document.get("outline", [])),
            citations=tuple(
                Citation(
                    id=c["id"],
                    statement=c.get("statement", ""),
                    type=c.get("type", "evidence"),
                    credibility=SymbolicProbability.from_label(c["credibility"]),
                    source=c.get("source"),
                )
                for c in document.get("citations", [])
            ),
            assumptions=tuple(
                (pair[0], pair[1]) for pair in document.get("assumptions", [])
            ),
            findings=tuple(
                finding_from_document(f) for f in document.get("findings", [])
            ),
        )
    except (KeyError, ValueError) as exc:
        raise DocumentError(f"bad report document: {exc}") from exc
