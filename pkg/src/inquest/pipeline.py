"""The autonomous reasoner service: alert intake and the staged pipeline.

An analysis moves through queued -> generating -> collecting ->
analyzing -> concluded.  Every transition appends a new bundle version
to the store, so a crash at any boundary restarts cleanly: the runner
reloads the last durable version and re-executes the remaining stages,
which are deterministic for a pinned KB version and evidence snapshot.

Candidate analysis is parallelizable — candidates share nothing — and
the merged result is reassembled in canonical order, so worker count
never changes the outcome.  Human control varies by mode: autonomous
runs straight through; on-the-loop leaves a veto window at each stage
transition; in-the-loop halts for approval after hypothesis generation
(where the analyst prunes the candidate set) and again before the
conclusion is committed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from .abduction import (
    AbductionTrace,
    FreshNames,
    HypothesisCandidate,
    Observation,
    StepRecord,
    abduce,
    analogical_refine,
)
from .bias import detect_absence_of_evidence, detect_confirmation, detect_satisficing
from .bundle import AnalysisBundle, AnalysisStatus, BundleStore
from .calculus import SymbolicProbability
from .collection import (
    EvidenceRepository,
    RequestStatus,
    apply_attachments,
    collect,
    decompose,
    generate_requests,
    search_items,
)
from .errors import ContractViolation, DocumentError, StatementParseError, UnknownIdError
from .evidence import (
    EvidenceItem,
    EvidenceType,
    SourceProfile,
    TESTIMONIAL_TYPES,
    assess_credibility,
)
from .files import (
    canonical_yaml,
    format_timestamp,
    item_from_document,
    item_to_document,
    load_document,
    parse_timestamp,
    profile_from_document,
    profile_to_document,
)
from .kb import ReferenceKnowledgeBase, kb_from_document
from .network import (
    ArgumentationNetwork,
    EvidenceChange,
    EvidenceLink,
    EvidenceRef,
    Side,
    apply_evidence_change,
    compare_competing,
    evaluate,
    merge_evaluations,
    what_if,
)
from .report import StructuredReport, build_report, render_report_text
from .statements import parse_statement

__all__ = ["ServiceConfig", "ReasonerService", "MODES"]

MODES = ("autonomous", "on-the-loop", "in-the-loop")

#: Fault-injection hook honoured by the stage runner (test instrumentation):
#: exit hard right after the version with this status has been persisted.
FAULT_ENV = "INQUEST_FAULT_EXIT_AFTER"


@dataclass
class ServiceConfig:
    mode: str = "autonomous"
    workers: int = 1
    decomposition_depth: int = 5
    bias_threshold: float = 0.5
    veto_window: Optional[float] = None  # None: 30s on-the-loop, else 0
    fault_exit_after: Optional[str] = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ContractViolation(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.workers < 1:
            raise ContractViolation("worker count must be positive")
        if self.veto_window is None:
            self.veto_window = 30.0 if self.mode == "on-the-loop" else 0.0
        if self.fault_exit_after is None:
            self.fault_exit_after = os.environ.get(FAULT_ENV) or None


class ReasonerService:
    """Single-node, multi-worker analysis service over a data directory."""

    def __init__(
        self,
        data_dir: str | Path,
        config: ServiceConfig | None = None,
    ):
        self.data_dir = Path(data_dir)
        self.config = config or ServiceConfig()
        self.store = BundleStore(self.data_dir)
        (self.data_dir / "kb").mkdir(parents=True, exist_ok=True)
        (self.data_dir / "evidence").mkdir(parents=True, exist_ok=True)
        self.kb: Optional[ReferenceKnowledgeBase] = None
        self.repository = EvidenceRepository()
        self._lock = threading.RLock()
        self._vetoes: set[str] = set()
        self._load_state()

    # -- state persistence -------------------------------------------------

    def _load_state(self) -> None:
        current = self.data_dir / "kb" / "CURRENT"
        if current.exists():
            version = current.read_text(encoding="utf-8").strip()
            document = load_document(self.data_dir / "kb" / f"{version}.yaml")
            self.kb = kb_from_document(document or {})
        snapshot = self.data_dir / "evidence" / "repository.yaml"
        items: list[EvidenceItem] = []
        profiles = []
        if snapshot.exists():
            document = load_document(snapshot) or {}
            items = [item_from_document(e) for e in document.get("items", [])]
            profiles = [profile_from_document(e) for e in document.get("profiles", [])]
        entity_types = dict(self.kb.entity_types) if self.kb else {}
        self.repository = EvidenceRepository(
            items=items, profiles=profiles, entity_types=entity_types
        )
        if self.kb:
            for profile in self.kb.profiles:
                self.repository.add_profile(profile)
        for analysis_id in self.store.list_analyses():
            bundle = self.store.latest(analysis_id)
            if bundle is None:
                continue
            self.repository.register_analysis(analysis_id)
            self.repository._sequences[analysis_id] = bundle.event_sequence
            if bundle.network is not None:
                self._subscribe_leaves(analysis_id, bundle.network)

    def _persist_repository(self) -> None:
        document = {
            "items": [item_to_document(i) for i in self.repository.items()],
            "profiles": [profile_to_document(p) for p in self.repository.profiles()],
        }
        path = self.data_dir / "evidence" / "repository.yaml"
        temp = path.with_suffix(".tmp")
        temp.write_text(canonical_yaml(document), encoding="utf-8")
        os.replace(temp, path)

    def _append_event_log(self, events) -> None:
        path = self.data_dir / "evidence" / "events.jsonl"
        with open(path, "a", encoding="utf-8") as handle:
            for event in events:
                handle.write(
                    json.dumps(
                        {
                            "analysis": event.analysis,
                            "sequence": event.sequence,
                            "kind": event.kind,
                            "item": item_to_document(event.item),
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )

    # -- knowledge base ------------------------------------------------------

    def put_kb(self, document: Mapping[str, Any]) -> str:
        kb = kb_from_document(document)
        path = self.data_dir / "kb" / f"{kb.version}.yaml"
        path.write_text(canonical_yaml(dict(document)), encoding="utf-8")
        current = self.data_dir / "kb" / "CURRENT"
        temp = current.with_suffix(".tmp")
        temp.write_text(kb.version, encoding="utf-8")
        os.replace(temp, current)
        self.kb = kb
        self.repository.entity_types = dict(kb.entity_types)
        for profile in kb.profiles:
            self.repository.add_profile(profile)
        return kb.version

    def load_evidence_file(self, path: str | Path) -> int:
        """Seed the repository from an evidence document; returns item count."""
        document = load_document(path) or {}
        for entry in document.get("profiles", []) or []:
            self.repository.add_profile(profile_from_document(entry))
        count = 0
        for entry in document.get("items", []) or []:
            self.ingest_evidence(entry)
            count += 1
        return count

    # -- alert intake --------------------------------------------------------

    def _parse_alert(self, document: Mapping[str, Any]) -> Observation:
        if not isinstance(document, Mapping) or "statement" not in document:
            raise StatementParseError("an alert document needs a 'statement' field")
        statement = parse_statement(str(document["statement"]))
        if not statement.is_ground():
            free = ", ".join(v.render() for v in statement.variables())
            raise StatementParseError(
                f"alert statement has unbound variables: {free}"
            )
        received = document.get("received-at")
        return Observation(
            id=str(document.get("id", "alert")),
            statement=statement,
            received_at=parse_timestamp(received) if received else None,
            text=str(document.get("text", "")),
        )

    def _stamp(self, observation_time: Optional[datetime]) -> str:
        if observation_time is not None:
            return format_timestamp(observation_time)
        return format_timestamp(datetime.now(timezone.utc))

    def submit_alert(self, document: Mapping[str, Any]) -> str:
        if self.kb is None:
            raise ContractViolation("no knowledge base loaded; PUT /kb or pass --kb first")
        observation = self._parse_alert(document)
        dedup_source = document.get("dedup-key") or json.dumps(
            dict(document), sort_keys=True
        )
        dedup_key = hashlib.sha256(
            f"{self.kb.version}|{dedup_source}".encode("utf-8")
        ).hexdigest()
        with self._lock:
            existing = self.store.lookup_dedup(dedup_key)
            if existing is not None:
                return existing
            analysis_id = f"an-{dedup_key[:10]}"
            bundle = AnalysisBundle(
                analysis_id=analysis_id,
                version=1,
                status=AnalysisStatus.QUEUED,
                mode=self.config.mode,
                alert=dict(document),
                kb_version=self.kb.version,
                transitions=(
                    (1, AnalysisStatus.QUEUED.value, self._stamp(observation.received_at)),
                ),
            )
            self.store.append(bundle)
            self.store.record_dedup(dedup_key, analysis_id)
            self.repository.register_analysis(analysis_id)
        self._fault_hook(AnalysisStatus.QUEUED)
        return analysis_id

    # -- pipeline ------------------------------------------------------------

    def _fault_hook(self, status: AnalysisStatus) -> None:
        if self.config.fault_exit_after == status.value:
            os._exit(3)

    def _subscribe_leaves(self, analysis_id: str, network: ArgumentationNetwork) -> None:
        queries = []
        for node_id in sorted(network.nodes):
            if network.is_leaf(node_id):
                try:
                    queries.append(parse_statement(network.nodes[node_id].statement))
                except StatementParseError:
                    continue
        self.repository.subscribe(analysis_id, queries)

    def run_pipeline(self, analysis_id: str, mode: Optional[str] = None) -> AnalysisBundle:
        """Drive the bundle through its remaining stages."""
        if mode is not None and mode not in MODES:
            raise ContractViolation(f"unknown mode {mode!r}")
        while True:
            with self._lock:
                bundle = self.store.require_latest(analysis_id)
                if mode is not None and bundle.mode != mode:
                    bundle = self.store.append(
                        bundle.advanced(bundle.status, self._now_stamp(bundle), mode=mode)
                    )
                if bundle.status not in (
                    AnalysisStatus.QUEUED,
                    AnalysisStatus.GENERATING,
                    AnalysisStatus.COLLECTING,
                    AnalysisStatus.ANALYZING,
                ):
                    return bundle
                if analysis_id in self._vetoes:
                    self._vetoes.discard(analysis_id)
                    return self.store.append(
                        bundle.advanced(
                            AnalysisStatus.PARKED,
                            self._now_stamp(bundle),
                            error="vetoed by operator",
                        )
                    )
                try:
                    if bundle.status is AnalysisStatus.QUEUED:
                        bundle = self.store.append(
                            bundle.advanced(
                                AnalysisStatus.GENERATING, self._now_stamp(bundle)
                            )
                        )
                    elif bundle.status is AnalysisStatus.GENERATING:
                        bundle = self.store.append(self._stage_generate(bundle))
                    elif bundle.status is AnalysisStatus.COLLECTING:
                        bundle = self.store.append(self._stage_collect(bundle))
                    else:
                        bundle = self.store.append(self._stage_analyze(bundle))
                    persisted = bundle.status
                except Exception as exc:  # noqa: BLE001 - park, keep retryable
                    return self.store.append(
                        bundle.advanced(
                            AnalysisStatus.PARKED, self._now_stamp(bundle), error=str(exc)
                        )
                    )
            self._fault_hook(persisted)
            if bundle.status is AnalysisStatus.AWAITING_HUMAN:
                return bundle
            self._veto_wait(analysis_id, bundle)

    def _veto_wait(self, analysis_id: str, bundle: AnalysisBundle) -> None:
        if bundle.mode != "on-the-loop" or self.config.veto_window <= 0:
            return
        deadline = time.monotonic() + self.config.veto_window
        while time.monotonic() < deadline:
            if analysis_id in self._vetoes:
                return
            time.sleep(min(0.05, self.config.veto_window))

    def _now_stamp(self, bundle: AnalysisBundle) -> str:
        received = bundle.alert.get("received-at")
        if received:
            return received
        return format_timestamp(datetime.now(timezone.utc))

    # -- stages ---------------------------------------------------------------

    def _stage_generate(self, bundle: AnalysisBundle) -> AnalysisBundle:
        assert self.kb is not None
        observation = self._parse_alert(bundle.alert)
        names = FreshNames()
        base = abduce(
            observation,
            self.kb.explanation_rules,
            self.kb.entity_types,
            names,
            id_prefix="c.",
        )
        candidates: list[HypothesisCandidate] = []
        for candidate in base:
            candidates.extend(
                analogical_refine(candidate, self.kb.cases, self.kb.entity_types, names)
            )

        stamp = self._now_stamp(bundle)
        if not candidates:
            trace = AbductionTrace(
                steps=(
                    StepRecord(
                        1, observation.statement.render(), None, (), (), (), None, (),
                        stop_reason="no explanation in KB",
                    ),
                ),
                examined=0,
                stop_reason="no explanation in KB",
            )
            report = StructuredReport(
                analysis_id=bundle.analysis_id,
                generated_at=stamp,
                kb_version=bundle.kb_version,
                conclusions=(),
                outline=("(no hypothesis in the knowledge base explains this alert)",),
                citations=(),
                assumptions=(),
                findings=(),
            )
            return bundle.advanced(
                AnalysisStatus.CONCLUDED,
                stamp,
                trace=trace,
                report=report,
                report_text=render_report_text(report),
            )

        network: Optional[ArgumentationNetwork] = None
        root_of: dict[str, str] = {}
        for candidate in sorted(candidates, key=lambda c: c.id):
            skeleton = decompose(
                candidate,
                self.kb.decomposition_rules,
                max_depth=self.config.decomposition_depth,
                entity_types=self.kb.entity_types,
                id_prefix=f"{candidate.id}/",
            ).network
            root_of[candidate.id] = skeleton.competing_roots[0]
            network = skeleton if network is None else network.merged_with(skeleton)
        assert network is not None
        self._subscribe_leaves(bundle.analysis_id, network)

        trace = AbductionTrace(
            steps=(
                StepRecord(
                    1,
                    observation.statement.render(),
                    None,
                    tuple(candidates),
                    (),
                    tuple(c.id for c in candidates),
                    None,
                    (),
                ),
            ),
            examined=len(candidates),
            stop_reason="single-step alert analysis",
        )
        status = (
            AnalysisStatus.AWAITING_HUMAN
            if bundle.mode == "in-the-loop"
            else AnalysisStatus.COLLECTING
        )
        return bundle.advanced(
            status,
            stamp,
            candidates=tuple(candidates),
            root_of=root_of,
            network=network,
            trace=trace,
            pending="collect" if status is AnalysisStatus.AWAITING_HUMAN else None,
        )

    def _stage_collect(self, bundle: AnalysisBundle) -> AnalysisBundle:
        assert bundle.network is not None
        observation = self._parse_alert(bundle.alert)
        requests = generate_requests(
            bundle.network,
            [self.repository.binding],
            existing=bundle.requests,
            issued_at=observation.received_at,
        )
        outcome = collect(list(bundle.requests) + requests, self.repository)
        network = apply_attachments(bundle.network, outcome.attachments)
        referenced = {link.evidence for link in network.evidence_links.values()}
        snapshot = tuple(
            item for item in self.repository.items() if item.id in referenced
        )
        return bundle.advanced(
            AnalysisStatus.ANALYZING,
            self._now_stamp(bundle),
            network=network,
            requests=outcome.requests,
            evidence_items=snapshot,
        )

    def _candidate_subnetwork(
        self, network: ArgumentationNetwork, root: str
    ) -> ArgumentationNetwork:
        nodes: set[str] = set()
        frontier = [root]
        while frontier:
            current = frontier.pop()
            if current in nodes:
                continue
            nodes.add(current)
            for arg in network.child_arguments(current):
                frontier.extend(arg.children)
        links = {
            link_id: link
            for link_id, link in network.evidence_links.items()
            if link.parent in nodes
        }
        refs = {
            ref_id: ref
            for ref_id, ref in network.evidence.items()
            if ref_id in {l.evidence for l in links.values()}
        }
        return ArgumentationNetwork(
            nodes={n: network.nodes[n] for n in nodes},
            arguments={
                a_id: a for a_id, a in network.arguments.items() if a.parent in nodes
            },
            evidence_links=links,
            competing_roots=(root,),
            evidence=refs,
        )

    def _evaluate_candidate(self, subnetwork: ArgumentationNetwork):
        return evaluate(subnetwork)

    def _stage_analyze(self, bundle: AnalysisBundle) -> AnalysisBundle:
        assert bundle.network is not None and bundle.trace is not None
        subnetworks = {
            candidate_id: self._candidate_subnetwork(bundle.network, root)
            for candidate_id, root in sorted(bundle.root_of.items())
        }

        def evaluate_with_retry(candidate_id: str):
            try:
                return self._evaluate_candidate(subnetworks[candidate_id])
            except Exception:
                # one re-dispatch per candidate; a second failure parks the bundle
                return self._evaluate_candidate(subnetworks[candidate_id])

        ordered = sorted(subnetworks)
        if self.config.workers == 1:
            results = [evaluate_with_retry(c) for c in ordered]
        else:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                results = list(pool.map(evaluate_with_retry, ordered))
        evaluation = merge_evaluations(bundle.network, results)
        rankings = compare_competing(bundle.network, evaluation)

        candidate_of_root = {root: cand for cand, root in bundle.root_of.items()}
        step = bundle.trace.steps[0]
        completed = StepRecord(
            index=step.index,
            observation=step.observation,
            parent_candidate=step.parent_candidate,
            candidates=step.candidates,
            rankings=tuple(rankings),
            survivors=step.survivors,
            selected=candidate_of_root.get(rankings[0].root) if rankings else None,
            unverified=tuple(
                candidate_id
                for candidate_id, root in sorted(bundle.root_of.items())
                if not subnetworks[candidate_id].evidence_links
            ),
        )
        trace = AbductionTrace(
            steps=(completed,) + bundle.trace.steps[1:],
            examined=bundle.trace.examined,
            stop_reason=bundle.trace.stop_reason,
        )

        findings = tuple(
            detect_confirmation(bundle.network, bundle.requests)
            + detect_satisficing(
                trace, set(bundle.root_of), bundle.analysis_id
            )
            + detect_absence_of_evidence(
                bundle.network, evaluation, self.config.bias_threshold
            )
        )
        stamp = self._now_stamp(bundle)
        results: dict[str, Any] = {
            "evaluation": evaluation,
            "rankings": tuple(rankings),
            "trace": trace,
            "findings": findings,
        }
        if bundle.mode == "in-the-loop":
            return bundle.advanced(
                AnalysisStatus.AWAITING_HUMAN, stamp, pending="conclude", **results
            )
        analyzed = dataclasses.replace(bundle, **results)
        report = self._build_report(analyzed, stamp)
        return bundle.advanced(
            AnalysisStatus.CONCLUDED,
            stamp,
            report=report,
            report_text=render_report_text(report),
            **results,
        )

    def _build_report(self, bundle: AnalysisBundle, stamp: str) -> StructuredReport:
        assert bundle.network is not None and bundle.evaluation is not None
        texts = {
            root: next(c.text for c in bundle.candidates if c.id == candidate_id)
            for candidate_id, root in bundle.root_of.items()
        }
        return build_report(
            analysis_id=bundle.analysis_id,
            kb_version=bundle.kb_version,
            generated_at=stamp,
            network=bundle.network,
            evaluation=bundle.evaluation,
            rankings=bundle.rankings,
            candidate_texts=texts,
            findings=bundle.findings,
        )

    # -- human control -----------------------------------------------------

    def resume(self, analysis_id: str, action: str, reason: str = "") -> AnalysisBundle:
        if action not in ("approve", "veto"):
            raise ContractViolation(f"unknown resume action {action!r}")
        with self._lock:
            bundle = self.store.require_latest(analysis_id)
            stamp = self._now_stamp(bundle)
            if action == "veto":
                if bundle.status in (AnalysisStatus.CONCLUDED, AnalysisStatus.PARKED):
                    raise ContractViolation(
                        f"analysis {analysis_id} is {bundle.status.value}; veto window expired"
                    )
                self._vetoes.add(analysis_id)
                if bundle.status is AnalysisStatus.AWAITING_HUMAN:
                    self._vetoes.discard(analysis_id)
                    return self.store.append(
                        bundle.advanced(
                            AnalysisStatus.PARKED, stamp, error=reason or "vetoed", pending=None
                        )
                    )
                return bundle
            if bundle.status is not AnalysisStatus.AWAITING_HUMAN:
                raise ContractViolation(
                    f"analysis {analysis_id} is not awaiting approval"
                )
            if bundle.pending == "collect":
                self.store.append(
                    bundle.advanced(AnalysisStatus.COLLECTING, stamp, pending=None)
                )
            elif bundle.pending == "conclude":
                report = self._build_report(bundle, stamp)
                return self.store.append(
                    bundle.advanced(
                        AnalysisStatus.CONCLUDED,
                        stamp,
                        pending=None,
                        report=report,
                        report_text=render_report_text(report),
                    )
                )
            else:
                raise ContractViolation(f"bundle has no pending gate: {bundle.pending!r}")
        return self.run_pipeline(analysis_id)

    # -- queries and updates -------------------------------------------------

    def get_analysis(self, analysis_id: str) -> AnalysisBundle:
        return self.store.require_latest(analysis_id)

    def history(self, analysis_id: str) -> list[AnalysisBundle]:
        history = self.store.history(analysis_id)
        if not history:
            raise UnknownIdError("analysis", analysis_id)
        return history

    def post_assumption(
        self,
        analysis_id: str,
        node_id: str,
        value: Optional[SymbolicProbability],
    ) -> AnalysisBundle:
        with self._lock:
            bundle = self.store.require_latest(analysis_id)
            if bundle.network is None:
                raise ContractViolation("analysis has no network yet")
            if node_id not in bundle.network.nodes:
                raise UnknownIdError("node", node_id)
            nodes = dict(bundle.network.nodes)
            nodes[node_id] = dataclasses.replace(nodes[node_id], assumption=value)
            network = dataclasses.replace(bundle.network, nodes=nodes)
            stamp = self._now_stamp(bundle)
            changes: dict[str, Any] = {"network": network}
            if bundle.evaluation is not None:
                evaluation = what_if(bundle.network, {node_id: value})
                rankings = compare_competing(network, evaluation)
                findings = tuple(
                    detect_confirmation(network, bundle.requests)
                    + detect_satisficing(bundle.trace, set(bundle.root_of), analysis_id)
                    + detect_absence_of_evidence(
                        network, evaluation, self.config.bias_threshold
                    )
                )
                changes.update(evaluation=evaluation, rankings=tuple(rankings), findings=findings)
            advanced = bundle.advanced(bundle.status, stamp, **changes)
            if bundle.report_text is not None:
                report = self._build_report(advanced, stamp)
                advanced = dataclasses.replace(
                    advanced, report=report, report_text=render_report_text(report)
                )
            return self.store.append(advanced)

    def ingest_evidence(self, document: Mapping[str, Any]) -> list[str]:
        item = item_from_document(document)
        if "credibility" not in document:
            item = dataclasses.replace(
                item, credibility=self._assess_item(item)
            )
        elif item.type in TESTIMONIAL_TYPES and self.repository.get_profile(item.source) is None:
            if self.kb is None or self.kb.profile(item.source) is None:
                raise ContractViolation(
                    f"testimonial item {item.id!r} names unknown source {item.source!r}"
                )
        with self._lock:
            events = self.repository.ingest(item)
            self._persist_repository()
            self._append_event_log(events)
            affected = []
            for event in events:
                if self._apply_event(event):
                    affected.append(event.analysis)
            return sorted(set(affected))

    def _assess_item(self, item: EvidenceItem) -> SymbolicProbability:
        if self.kb is None:
            raise ContractViolation("no knowledge base loaded")
        pattern = self.kb.pattern_for(item.type)
        if pattern is None:
            return item.credibility
        profile = None
        if item.source:
            profile = self.repository.get_profile(item.source) or self.kb.profile(item.source)
        if item.type in TESTIMONIAL_TYPES and profile is None:
            raise ContractViolation(
                f"testimonial item {item.id!r} names unknown source {item.source!r}"
            )
        if profile is None:
            from .evidence import SourceProfile

            profile = SourceProfile(id="anonymous", name="unattributed")
        value, _ = assess_credibility(item, profile, pattern)
        return value

    def _apply_event(self, event) -> bool:
        """Incrementally fold one repository change into its analysis."""
        bundle = self.store.latest(event.analysis)
        if bundle is None or bundle.network is None:
            return False
        if event.sequence <= bundle.event_sequence:
            return False  # already applied (at-least-once delivery)
        network = bundle.network
        baseline = bundle.evaluation
        item = event.item
        changed = False
        if item.id in network.evidence and event.kind == "revised":
            network, result = __import__("inquest.network", fromlist=["apply_evidence_change"]).apply_evidence_change(
                network,
                EvidenceChange(
                    kind="revise-credibility",
                    evidence_id=item.id,
                    credibility=item.credibility,
                ),
                baseline=baseline,
            )
            baseline = result
            changed = True
        else:
            from .network import EvidenceLink, EvidenceRef, Side as NetworkSide
            from .evidence import EvidenceType

            for node_id in sorted(network.nodes):
                if not network.is_leaf(node_id):
                    continue
                try:
                    query = parse_statement(network.nodes[node_id].statement)
                except StatementParseError:
                    continue
                for hit in search_items([item], query, self.repository.entity_types):
                    marker = "f" if hit.side is NetworkSide.FAVORING else "d"
                    link_id = f"{node_id}.{item.id}.{marker}"
                    if link_id in network.evidence_links:
                        continue
                    incoming = {
                        child: arg.relevance
                        for arg in network.arguments.values()
                        for child in arg.children
                    }
                    relevance = (
                        hit.relevance
                        or item.relevance
                        or incoming.get(node_id, SymbolicProbability.C)
                    )
                    network, result = __import__("inquest.network", fromlist=["apply_evidence_change"]).apply_evidence_change(
                        network,
                        EvidenceChange(
                            kind="add",
                            link=EvidenceLink(link_id, node_id, item.id, hit.side, relevance),
                            ref=EvidenceRef(
                                item.id,
                                item.credibility,
                                missing=item.type is EvidenceType.MISSING,
                                statement=item.statement,
                            ),
                        ),
                        baseline=baseline,
                    )
                    baseline = result
                    changed = True
        if not changed:
            return False

        from .collection import RequestStatus

        requests = tuple(
            dataclasses.replace(request, status=RequestStatus.FULFILLED)
            if request.leaf in {l.parent for l in network.evidence_links.values() if l.evidence == item.id}
            and request.status is not RequestStatus.FULFILLED
            else request
            for request in bundle.requests
        )
        stamp = self._now_stamp(bundle)
        referenced = {link.evidence for link in network.evidence_links.values()}
        snapshot = tuple(
            i for i in self.repository.items() if i.id in referenced
        )
        changes: dict[str, Any] = {
            "network": network,
            "requests": requests,
            "evidence_items": snapshot,
            "event_sequence": event.sequence,
        }
        if bundle.evaluation is not None and baseline is not None:
            rankings = compare_competing(network, baseline)
            findings = tuple(
                detect_confirmation(network, requests)
                + detect_satisficing(bundle.trace, set(bundle.root_of), event.analysis)
                + detect_absence_of_evidence(network, baseline, self.config.bias_threshold)
            )
            changes.update(
                evaluation=baseline, rankings=tuple(rankings), findings=findings
            )
        advanced = bundle.advanced(bundle.status, stamp, **changes)
        if bundle.report_text is not None:
            advanced = dataclasses.replace(
                self._concluded(advanced, stamp), status=bundle.status
            )
        self.store.append(advanced)
        return True

    def generate_report(self, analysis_id: str) -> tuple[StructuredReport, str]:
        bundle = self.store.require_latest(analysis_id)
        if bundle.evaluation is None or bundle.network is None:
            raise ContractViolation(
                f"analysis {analysis_id} has not been evaluated yet"
            )
        stamp = self._now_stamp(bundle)
        report = self._build_report(bundle, stamp)
        return report, render_report_text(report)
