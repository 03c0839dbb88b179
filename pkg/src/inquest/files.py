"""Canonical document serialization for networks, evidence, and results.

Every on-disk artifact is a structured UTF-8 document (YAML; JSON loads
too since it is a YAML subset).  Serialization is diff-stable: map keys
are sorted and entry lists are ordered lexicographically by id.  A
network file is self-contained — each evidence-link entry embeds the
credibility snapshot of the item it references.

Probability values serialize as their exact lowercase labels
("no support" ... "certain") everywhere.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .calculus import SymbolicProbability
from .collection import CollectionRequest, RequestStatus
from .errors import DocumentError
from .evidence import (
    EvidenceItem,
    EvidenceType,
    IndicatorAssessment,
    SourceProfile,
)
from .network import (
    Argument,
    ArgumentationNetwork,
    Coverage,
    EvaluationResult,
    EvidenceLink,
    EvidenceRef,
    HypothesisNode,
    NodeRole,
    Side,
    TraceEntry,
)

__all__ = [
    "canonical_yaml",
    "parse_timestamp",
    "format_timestamp",
    "network_to_document",
    "network_from_document",
    "dump_network",
    "load_network",
    "evaluation_to_document",
    "evaluation_from_document",
    "item_to_document",
    "item_from_document",
    "profile_to_document",
    "profile_from_document",
    "repository_documents",
    "request_to_document",
    "request_from_document",
]


def canonical_yaml(document: Any) -> str:
    return yaml.safe_dump(
        document, sort_keys=True, allow_unicode=True, default_flow_style=False
    )


def load_document(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DocumentError(f"cannot parse {path}: {exc}") from exc


def format_timestamp(value: datetime) -> str:
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_timestamp(text: str) -> datetime:
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    try:
        value = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise DocumentError(f"bad timestamp {text!r}") from exc
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value


def _probability(document: Any, context: str) -> SymbolicProbability:
    if not isinstance(document, str):
        raise DocumentError(f"{context}: probability must be a label string")
    try:
        return SymbolicProbability.from_label(document)
    except Exception as exc:
        raise DocumentError(f"{context}: {exc}") from exc


def _require(document: Mapping[str, Any], key: str, context: str) -> Any:
    if key not in document:
        raise DocumentError(f"{context}: missing required field {key!r}")
    return document[key]


# -- argumentation networks ----------------------------------------------


def network_to_document(network: ArgumentationNetwork) -> dict[str, Any]:
    nodes = []
    for node in sorted(network.nodes.values(), key=lambda n: n.id):
        entry: dict[str, Any] = {
            "id": node.id,
            "statement": node.statement,
            "role": node.role.value,
        }
        if node.assumption is not None:
            entry["assumption"] = node.assumption.label
        nodes.append(entry)

    arguments = []
    for arg in sorted(network.arguments.values(), key=lambda a: a.id):
        arguments.append(
            {
                "id": arg.id,
                "parent": arg.parent,
                "side": arg.side.value,
                "relevance": arg.relevance.label,
                "children": list(arg.children),
            }
        )

    links = []
    for link in sorted(network.evidence_links.values(), key=lambda l: l.id):
        ref = network.evidence[link.evidence]
        entry = {
            "id": link.id,
            "parent": link.parent,
            "evidence": link.evidence,
            "side": link.side.value,
            "relevance": link.relevance.label,
            "credibility": ref.credibility.label,
        }
        if ref.missing:
            entry["missing"] = True
        if ref.statement:
            entry["statement"] = ref.statement
        links.append(entry)

    return {
        "nodes": nodes,
        "arguments": arguments,
        "evidence-links": links,
        "competing-roots": sorted(network.competing_roots),
    }


def network_from_document(document: Mapping[str, Any]) -> ArgumentationNetwork:
    if not isinstance(document, Mapping):
        raise DocumentError("network document must be a mapping")
    nodes: dict[str, HypothesisNode] = {}
    for entry in document.get("nodes", []) or []:
        node_id = _require(entry, "id", "node")
        if node_id in nodes:
            raise DocumentError(f"duplicate node id {node_id!r}")
        assumption = entry.get("assumption")
        nodes[node_id] = HypothesisNode(
            id=node_id,
            statement=_require(entry, "statement", f"node {node_id}"),
            role=NodeRole(entry.get("role", "leaf")),
            assumption=(
                _probability(assumption, f"node {node_id}") if assumption else None
            ),
        )

    arguments: dict[str, Argument] = {}
    for entry in document.get("arguments", []) or []:
        arg_id = _require(entry, "id", "argument")
        if arg_id in arguments:
            raise DocumentError(f"duplicate argument id {arg_id!r}")
        arguments[arg_id] = Argument(
            id=arg_id,
            parent=_require(entry, "parent", f"argument {arg_id}"),
            side=Side(_require(entry, "side", f"argument {arg_id}")),
            relevance=_probability(
                _require(entry, "relevance", f"argument {arg_id}"), f"argument {arg_id}"
            ),
            children=tuple(_require(entry, "children", f"argument {arg_id}")),
        )

    links: dict[str, EvidenceLink] = {}
    refs: dict[str, EvidenceRef] = {}
    for entry in document.get("evidence-links", []) or []:
        link_id = _require(entry, "id", "evidence link")
        if link_id in links:
            raise DocumentError(f"duplicate evidence link id {link_id!r}")
        evidence_id = _require(entry, "evidence", f"link {link_id}")
        links[link_id] = EvidenceLink(
            id=link_id,
            parent=_require(entry, "parent", f"link {link_id}"),
            evidence=evidence_id,
            side=Side(_require(entry, "side", f"link {link_id}")),
            relevance=_probability(
                _require(entry, "relevance", f"link {link_id}"), f"link {link_id}"
            ),
        )
        ref = EvidenceRef(
            id=evidence_id,
            credibility=_probability(
                _require(entry, "credibility", f"link {link_id}"), f"link {link_id}"
            ),
            missing=bool(entry.get("missing", False)),
            statement=entry.get("statement", ""),
        )
        known = refs.get(evidence_id)
        if known is not None and known != ref:
            raise DocumentError(
                f"links disagree on the snapshot of evidence {evidence_id!r}"
            )
        refs[evidence_id] = ref

    return ArgumentationNetwork(
        nodes=nodes,
        arguments=arguments,
        evidence_links=links,
        competing_roots=tuple(document.get("competing-roots", []) or []),
        evidence=refs,
    )


def dump_network(network: ArgumentationNetwork, path: str | Path) -> None:
    Path(path).write_text(canonical_yaml(network_to_document(network)), encoding="utf-8")


def load_network(path: str | Path) -> ArgumentationNetwork:
    return network_from_document(load_document(path))


# -- evaluation results ----------------------------------------------------


def evaluation_to_document(result: EvaluationResult) -> dict[str, Any]:
    return {
        "probabilities": {n: p.label for n, p in sorted(result.probabilities.items())},
        "coverage": {
            n: {"answered": c.answered, "total": c.total}
            for n, c in sorted(result.coverage.items())
        },
        "assumption-dependent": {
            n: bool(v) for n, v in sorted(result.assumption_dependent.items())
        },
        "trace": [
            {
                "node": entry.node,
                "operation": entry.operation,
                "inputs": list(entry.inputs),
                "output": entry.output,
            }
            for entry in result.trace
        ],
    }


def evaluation_from_document(document: Mapping[str, Any]) -> EvaluationResult:
    return EvaluationResult(
        probabilities={
            n: _probability(p, f"probability of {n}")
            for n, p in (document.get("probabilities") or {}).items()
        },
        coverage={
            n: Coverage(entry["answered"], entry["total"])
            for n, entry in (document.get("coverage") or {}).items()
        },
        assumption_dependent=dict(document.get("assumption-dependent") or {}),
        trace=tuple(
            TraceEntry(
                node=entry["node"],
                operation=entry["operation"],
                inputs=tuple(entry.get("inputs", [])),
                output=entry["output"],
            )
            for entry in document.get("trace", []) or []
        ),
    )


# -- evidence items and source profiles -------------------------------------


def item_to_document(item: EvidenceItem) -> dict[str, Any]:
    entry: dict[str, Any] = {
        "id": item.id,
        "type": item.type.value,
        "statement": item.statement,
        "credibility": item.credibility.label,
    }
    if item.source:
        entry["source"] = item.source
    if item.observed_at:
        entry["observed-at"] = format_timestamp(item.observed_at)
    if item.recorded_at:
        entry["recorded-at"] = format_timestamp(item.recorded_at)
    if item.provenance_note:
        entry["note"] = item.provenance_note
    if item.contradicts:
        entry["contradicts"] = item.contradicts
    if item.relevance is not None:
        entry["relevance"] = item.relevance.label
    return entry


def item_from_document(document: Mapping[str, Any]) -> EvidenceItem:
    item_id = _require(document, "id", "evidence item")
    context = f"item {item_id}"
    credibility = document.get("credibility")
    relevance = document.get("relevance")
    observed = document.get("observed-at")
    recorded = document.get("recorded-at")
    try:
        return EvidenceItem(
            id=item_id,
            type=EvidenceType(_require(document, "type", context)),
            statement=_require(document, "statement", context),
            credibility=(
                _probability(credibility, context)
                if credibility is not None
                else SymbolicProbability.NS
            ),
            source=document.get("source"),
            observed_at=parse_timestamp(observed) if observed else None,
            recorded_at=parse_timestamp(recorded) if recorded else None,
            provenance_note=document.get("note", ""),
            contradicts=document.get("contradicts"),
            relevance=_probability(relevance, context) if relevance else None,
        )
    except ValueError as exc:
        raise DocumentError(f"{context}: {exc}") from exc


def profile_to_document(profile: SourceProfile) -> dict[str, Any]:
    return {
        "id": profile.id,
        "name": profile.name,
        "assessments": {
            indicator: {
                "probability": assessment.probability.label,
                "note": assessment.note,
            }
            for indicator, assessment in sorted(profile.assessments.items())
        },
    }


def profile_from_document(document: Mapping[str, Any]) -> SourceProfile:
    profile_id = _require(document, "id", "source profile")
    assessments = {}
    for indicator, entry in (document.get("assessments") or {}).items():
        assessments[indicator] = IndicatorAssessment(
            probability=_probability(
                _require(entry, "probability", f"assessment {indicator}"),
                f"profile {profile_id}",
            ),
            note=_require(entry, "note", f"assessment {indicator} of {profile_id}"),
        )
    return SourceProfile(
        id=profile_id,
        name=document.get("name", profile_id),
        assessments=assessments,
    )


def repository_documents(
    items: list[EvidenceItem], profiles: list[SourceProfile]
) -> dict[str, Any]:
    return {
        "items": [item_to_document(i) for i in sorted(items, key=lambda i: i.id)],
        "profiles": [
            profile_to_document(p) for p in sorted(profiles, key=lambda p: p.id)
        ],
    }


# -- collection requests ----------------------------------------------------


def request_to_document(request: CollectionRequest) -> dict[str, Any]:
    entry: dict[str, Any] = {
        "id": request.id,
        "leaf": request.leaf,
        "source": request.source,
        "query": request.query,
        "side": request.side.value,
        "status": request.status.value,
    }
    if request.issued_at:
        entry["issued-at"] = format_timestamp(request.issued_at)
    if request.failure:
        entry["failure"] = request.failure
    return entry


def request_from_document(document: Mapping[str, Any]) -> CollectionRequest:
    request_id = _require(document, "id", "collection request")
    issued = document.get("issued-at")
    return CollectionRequest(
        id=request_id,
        leaf=_require(document, "leaf", f"request {request_id}"),
        source=_require(document, "source", f"request {request_id}"),
        query=_require(document, "query", f"request {request_id}"),
        side=Side(document.get("side", "favoring")),
        status=RequestStatus(document.get("status", "open")),
        issued_at=parse_timestamp(issued) if issued else None,
        failure=document.get("failure", ""),
    )
