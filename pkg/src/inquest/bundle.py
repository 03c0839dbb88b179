"""Analysis bundles: the serializable unit of exchange between pipeline stages.

A bundle carries everything one analysis knows — alert, pinned KB
version, candidates, the merged argumentation network, requests,
evidence snapshot, evaluation, trace, findings, and report.  Bundles
are append-only versioned: every stage writes a new version to a
per-analysis JSONL log and never rewrites history.  The store tolerates
a torn final line (a crash in mid-write) by ignoring it, so restart
always resumes from the last durable version.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional

from .abduction import AbductionTrace, HypothesisCandidate, StepRecord
from .calculus import SymbolicProbability
from .errors import ContractViolation, DocumentError, UnknownIdError
from .files import (
    evaluation_from_document,
    evaluation_to_document,
    item_from_document,
    item_to_document,
    network_from_document,
    network_to_document,
    request_from_document,
    request_to_document,
)
from .evidence import EvidenceItem
from .network import (
    ArgumentationNetwork,
    CompetingRank,
    Coverage,
    EvaluationResult,
)
from .report import (
    StructuredReport,
    finding_from_document,
    finding_to_document,
    report_from_document,
    report_to_document,
)
from .statements import parse_statement

__all__ = ["AnalysisStatus", "AnalysisBundle", "BundleStore"]


class AnalysisStatus(str, Enum):
    QUEUED = "queued"
    GENERATING = "generating"
    COLLECTING = "collecting"
    ANALYZING = "analyzing"
    CONCLUDED = "concluded"
    AWAITING_HUMAN = "awaiting-human"
    PARKED = "parked"


#: Pipeline order; awaiting-human and parked are gates outside the line.
PIPELINE_ORDER = (
    AnalysisStatus.QUEUED,
    AnalysisStatus.GENERATING,
    AnalysisStatus.COLLECTING,
    AnalysisStatus.ANALYZING,
    AnalysisStatus.CONCLUDED,
)


@dataclass(frozen=True)
class AnalysisBundle:
    analysis_id: str
    version: int
    status: AnalysisStatus
    mode: str
    alert: Mapping[str, Any]
    kb_version: str
    candidates: tuple[HypothesisCandidate, ...] = ()
    root_of: Mapping[str, str] = field(default_factory=dict)
    network: Optional[ArgumentationNetwork] = None
    requests: tuple = ()
    evidence_items: tuple[EvidenceItem, ...] = ()
    evaluation: Optional[EvaluationResult] = None
    rankings: tuple[CompetingRank, ...] = ()
    trace: Optional[AbductionTrace] = None
    findings: tuple = ()
    report: Optional[StructuredReport] = None
    report_text: Optional[str] = None
    pending: Optional[str] = None  # awaiting-human gate: "collect" | "conclude"
    error: Optional[str] = None
    event_sequence: int = 0
    transitions: tuple[tuple[int, str, str], ...] = ()

    def advanced(self, status: AnalysisStatus, stamp: str, **changes) -> "AnalysisBundle":
        """Next version with a recorded transition."""
        return replace(
            self,
            version=self.version + 1,
            status=status,
            transitions=self.transitions + ((self.version + 1, status.value, stamp),),
            **changes,
        )


def _candidate_to_document(candidate: HypothesisCandidate) -> dict[str, Any]:
    return {
        "id": candidate.id,
        "statement": candidate.statement.render(),
        "text": candidate.text,
        "rule": candidate.rule,
        "species": candidate.species,
        "bindings": [list(pair) for pair in candidate.bindings],
        "fresh-entities": list(candidate.fresh_entities),
        "parent": candidate.parent,
    }


def _candidate_from_document(document: Mapping[str, Any]) -> HypothesisCandidate:
    return HypothesisCandidate(
        id=document["id"],
        statement=parse_statement(document["statement"]),
        text=document["text"],
        rule=document["rule"],
        species=document["species"],
        bindings=tuple((a, b) for a, b in document.get("bindings", [])),
        fresh_entities=tuple(document.get("fresh-entities", [])),
        parent=document.get("parent"),
    )


def _rank_to_document(rank: CompetingRank) -> dict[str, Any]:
    return {
        "root": rank.root,
        "probability": rank.probability.label,
        "coverage": {"answered": rank.coverage.answered, "total": rank.coverage.total},
    }


def _rank_from_document(document: Mapping[str, Any]) -> CompetingRank:
    return CompetingRank(
        root=document["root"],
        probability=SymbolicProbability.from_label(document["probability"]),
        coverage=Coverage(
            document["coverage"]["answered"], document["coverage"]["total"]
        ),
    )


def _trace_to_document(trace: AbductionTrace) -> dict[str, Any]:
    return {
        "examined": trace.examined,
        "stop-reason": trace.stop_reason,
        "steps": [
            {
                "index": step.index,
                "observation": step.observation,
                "parent": step.parent_candidate,
                "candidates": [_candidate_to_document(c) for c in step.candidates],
                "rankings": [_rank_to_document(r) for r in step.rankings],
                "survivors": list(step.survivors),
                "selected": step.selected,
                "unverified": list(step.unverified),
                "stop-reason": step.stop_reason,
            }
            for step in trace.steps
        ],
    }


def _trace_from_document(document: Mapping[str, Any]) -> AbductionTrace:
    return AbductionTrace(
        steps=tuple(
            StepRecord(
                index=step["index"],
                observation=step["observation"],
                parent_candidate=step.get("parent"),
                candidates=tuple(
                    _candidate_from_document(c) for c in step.get("candidates", [])
                ),
                rankings=tuple(_rank_from_document(r) for r in step.get("rankings", [])),
                survivors=tuple(step.get("survivors", [])),
                selected=step.get("selected"),
                unverified=tuple(step.get("unverified", [])),
                stop_reason=step.get("stop-reason"),
            )
            for step in document.get("steps", [])
        ),
        examined=document.get("examined", 0),
        stop_reason=document.get("stop-reason", ""),
    )


def bundle_to_document(bundle: AnalysisBundle) -> dict[str, Any]:
    return {
        "analysis-id": bundle.analysis_id,
        "version": bundle.version,
        "status": bundle.status.value,
        "mode": bundle.mode,
        "alert": dict(bundle.alert),
        "kb-version": bundle.kb_version,
        "candidates": [_candidate_to_document(c) for c in bundle.candidates],
        "root-of": dict(sorted(bundle.root_of.items())),
        "network": network_to_document(bundle.network) if bundle.network else None,
        "requests": [request_to_document(r) for r in bundle.requests],
        "evidence-items": [item_to_document(i) for i in bundle.evidence_items],
        "evaluation": (
            evaluation_to_document(bundle.evaluation) if bundle.evaluation else None
        ),
        "rankings": [_rank_to_document(r) for r in bundle.rankings],
        "trace": _trace_to_document(bundle.trace) if bundle.trace else None,
        "findings": [finding_to_document(f) for f in bundle.findings],
        "report": report_to_document(bundle.report) if bundle.report else None,
        "report-text": bundle.report_text,
        "pending": bundle.pending,
        "error": bundle.error,
        "event-sequence": bundle.event_sequence,
        "transitions": [list(t) for t in bundle.transitions],
    }


def bundle_from_document(document: Mapping[str, Any]) -> AnalysisBundle:
    try:
        return AnalysisBundle(
            analysis_id=document["analysis-id"],
            version=document["version"],
            status=AnalysisStatus(document["status"]),
            mode=document.get("mode", "autonomous"),
            alert=document.get("alert", {}),
            kb_version=document.get("kb-version", ""),
            candidates=tuple(
                _candidate_from_document(c) for c in document.get("candidates", [])
            ),
            root_of=dict(document.get("root-of", {})),
            network=(
                network_from_document(document["network"])
                if document.get("network")
                else None
            ),
            requests=tuple(
                request_from_document(r) for r in document.get("requests", [])
            ),
            evidence_items=tuple(
                item_from_document(i) for i in document.get("evidence-items", [])
            ),
            evaluation=(
                evaluation_from_document(document["evaluation"])
                if document.get("evaluation")
                else None
            ),
            rankings=tuple(
                _rank_from_document(r) for r in document.get("rankings", [])
            ),
            trace=(
                _trace_from_document(document["trace"])
                if document.get("trace")
                else None
            ),
            findings=tuple(
                finding_from_document(f) for f in document.get("findings", [])
            ),
            report=(
                report_from_document(document["report"])
                if document.get("report")
                else None
            ),
            report_text=document.get("report-text"),
            pending=document.get("pending"),
            error=document.get("error"),
            event_sequence=document.get("event-sequence", 0),
            transitions=tuple(
                (t[0], t[1], t[2]) for t in document.get("transitions", [])
            ),
        )
    except (KeyError, ValueError) as exc:
        raise DocumentError(f"bad bundle document: {exc}") from exc


class BundleStore:
    """Append-only per-analysis bundle log plus an atomic dedup index."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "analyses").mkdir(parents=True, exist_ok=True)

    def _log_path(self, analysis_id: str) -> Path:
        return self.root / "analyses" / analysis_id / "log.jsonl"

    def list_analyses(self) -> list[str]:
        return sorted(
            p.name for p in (self.root / "analyses").iterdir() if p.is_dir()
        )

    def append(self, bundle: AnalysisBundle) -> AnalysisBundle:
        path = self._log_path(bundle.analysis_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        latest = self.latest(bundle.analysis_id)
        expected = 1 if latest is None else latest.version + 1
        if bundle.version != expected:
            raise ContractViolation(
                f"bundle version must increase monotonically: expected {expected}, "
                f"got {bundle.version}"
            )
        line = json.dumps(bundle_to_document(bundle), sort_keys=True)
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(line + "\n")
            handle.flush()
            os.fsync(handle.fileno())
        return bundle

    def history(self, analysis_id: str) -> list[AnalysisBundle]:
        path = self._log_path(analysis_id)
        if not path.exists():
            return []
        bundles = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                try:
                    bundles.append(bundle_from_document(json.loads(line)))
                except (json.JSONDecodeError, DocumentError):
                    break  # torn tail from a crash in mid-write
        return bundles

    def latest(self, analysis_id: str) -> Optional[AnalysisBundle]:
        history = self.history(analysis_id)
        return history[-1] if history else None

    def require_latest(self, analysis_id: str) -> AnalysisBundle:
        bundle = self.latest(analysis_id)
        if bundle is None:
            raise UnknownIdError("analysis", analysis_id)
        return bundle

    # -- dedup index -------------------------------------------------------
    def _index_path(self) -> Path:
        return self.root / "analyses" / "index.json"

    def _read_index(self) -> dict[str, str]:
        path = self._index_path()
        if not path.exists():
            return {}
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return {}

    def lookup_dedup(self, key: str) -> Optional[str]:
        return self._read_index().get(key)

    def record_dedup(self, key: str, analysis_id: str) -> None:
        index = self._read_index()
        index[key] = analysis_id
        temp = self._index_path().with_suffix(".tmp")
        temp.write_text(json.dumps(index, sort_keys=True, indent=1), encoding="utf-8")
        os.replace(temp, self._index_path())
