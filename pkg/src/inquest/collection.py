"""Hypotheses in search of evidence: decomposition, requests, collection.

A hypothesis is decomposed into simpler hypotheses by declarative rules
until no rule applies or the depth bound is reached; the resulting
skeleton's leaves become evidence-collection requests, one per leaf per
registered source.  Sources answer requests with evidence items that are
attached to the leaves as favoring or disfavoring links.  A repository
doubles as the in-repo source and as the monitored store: analyses
subscribe to the leaf queries they depend on and receive sequenced
change events whenever a matching item arrives or is revised.
"""

from __future__ import annotations

import dataclasses
import threading
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Mapping, Optional, Protocol, Sequence

from .errors import ContractViolation, InvalidNetworkError, UnknownIdError
from .calculus import SymbolicProbability
from .evidence import EvidenceItem, EvidenceType, SourceProfile
from .network import (
    Argument,
    ArgumentationNetwork,
    EvidenceLink,
    EvidenceRef,
    HypothesisNode,
    NodeRole,
    Side,
    validate,
)
from .statements import (
    Atom,
    Statement,
    Variable,
    match_atom,
    parse_statement,
    substitute_atom,
)

__all__ = [
    "DecompositionRule",
    "RequestStatus",
    "CollectionRequest",
    "SourceKind",
    "EvidenceSourceBinding",
    "SourceHit",
    "EvidenceSource",
    "Decomposition",
    "DecompositionStep",
    "Attachment",
    "CollectionResult",
    "ChangeEvent",
    "EvidenceRepository",
    "FixtureSource",
    "decompose",
    "generate_requests",
    "collect",
    "apply_attachments",
    "monitor",
    "search_items",
]


@dataclass(frozen=True)
class DecompositionRule:
    """If the parent pattern holds, the child conjunction should too."""

    id: str
    parent: Atom
    side: Side
    relevance: SymbolicProbability
    children: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ContractViolation(f"decomposition rule {self.id!r} has no children")


class RequestStatus(str, Enum):
    OPEN = "open"
    FULFILLED = "fulfilled"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class CollectionRequest:
    id: str
    leaf: str
    source: str
    query: str
    side: Side  # polarity of the leaf relative to its root
    status: RequestStatus = RequestStatus.OPEN
    issued_at: Optional[datetime] = None
    failure: str = ""


class SourceKind(str, Enum):
    FILE_REPOSITORY = "file-repository"
    IN_MEMORY_FIXTURE = "in-memory-fixture"
    EXTERNAL_ADAPTER = "external-adapter"


@dataclass(frozen=True)
class EvidenceSourceBinding:
    id: str
    kind: SourceKind
    description: str = ""


@dataclass(frozen=True)
class SourceHit:
    item: EvidenceItem
    side: Side
    relevance: Optional[SymbolicProbability] = None


class EvidenceSource(Protocol):
    binding: EvidenceSourceBinding

    def search(self, query: Statement) -> list[SourceHit]: ...


@dataclass(frozen=True)
class DecompositionStep:
    """Audit record: which rule justified which argument, and its unifier."""

    node: str
    rule: str
    argument: str
    bindings: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Decomposition:
    network: ArgumentationNetwork
    steps: tuple[DecompositionStep, ...]


def _single_atom(statement: Statement) -> Atom:
    if len(statement.atoms) != 1:
        raise ContractViolation(
            f"expected a single-atom statement, got {statement.render()!r}"
        )
    return statement.atoms[0]


def decompose(
    candidate,
    rules: Sequence[DecompositionRule],
    max_depth: int = 5,
    entity_types: Mapping[str, str] | None = None,
    id_prefix: str = "",
) -> Decomposition:
    """Expand a hypothesis candidate into an argumentation skeleton.

    ``candidate`` needs ``statement`` (a Statement) and ``text`` fields.
    Every rule whose parent pattern matches a node spawns one argument;
    conjunction statements are first split through a certain favoring
    argument so leaves are always single atoms.  Recursion stops at
    ``max_depth`` argument levels below the root or when nothing applies.
    """
    if max_depth < 1:
        raise ContractViolation("max_depth must be at least 1")
    rules = sorted(rules, key=lambda r: r.id)
    nodes: list[HypothesisNode] = []
    arguments: list[Argument] = []
    steps: list[DecompositionStep] = []
    counter = {"h": 0, "a": 0}

    def new_node(statement: Statement, text: str) -> str:
        counter["h"] += 1
        node_id = f"{id_prefix}h{counter['h']}"
        nodes.append(HypothesisNode(node_id, text, NodeRole.LEAF))
        return node_id

    def new_argument(parent: str, side: Side, relevance: SymbolicProbability, children: tuple[str, ...]) -> str:
        counter["a"] += 1
        arg_id = f"{id_prefix}a{counter['a']}"
        arguments.append(Argument(arg_id, parent, side, relevance, children))
        return arg_id

    root_statement: Statement = candidate.statement
    root_id = new_node(root_statement, candidate.text or root_statement.render())
    queue: list[tuple[str, Statement, int]] = [(root_id, root_statement, 0)]

    while queue:
        node_id, statement, depth = queue.pop(0)
        if len(statement.atoms) > 1:
            # split the conjunction without consuming decomposition depth
            children = []
            for atom in statement.atoms:
                child_statement = Statement((atom,))
                child_id = new_node(child_statement, atom.render())
                children.append(child_id)
                queue.append((child_id, child_statement, depth))
            new_argument(node_id, Side.FAVORING, SymbolicProbability.C, tuple(children))
            continue
        if depth >= max_depth:
            continue
        atom = statement.atoms[0]
        for rule in rules:
            bindings = match_atom(rule.parent, atom, entity_types)
            if bindings is None:
                continue
            children = []
            for child_pattern in rule.children:
                child_atom = substitute_atom(child_pattern, bindings)
                child_statement = Statement((child_atom,))
                child_id = new_node(child_statement, child_atom.render())
                children.append(child_id)
                queue.append((child_id, child_statement, depth + 1))
            arg_id = new_argument(node_id, rule.side, rule.relevance, tuple(children))
            rendered = tuple(
                sorted(
                    (name, term.render() if isinstance(term, Variable) else term)
                    for name, term in bindings.items()
                )
            )
            steps.append(DecompositionStep(node_id, rule.id, arg_id, rendered))

    with_children = {a.parent for a in arguments}
    finalized = []
    for node in nodes:
        if node.id == root_id:
            role = NodeRole.ROOT
        elif node.id in with_children:
            role = NodeRole.INTERMEDIATE
        else:
            role = NodeRole.LEAF
        finalized.append(dataclasses.replace(node, role=role))

    network = ArgumentationNetwork.build(
        nodes=finalized,
        arguments=arguments,
        competing_roots=[root_id],
    )
    return Decomposition(network, tuple(steps))


def leaf_polarity(network: ArgumentationNetwork) -> dict[str, Side]:
    """Sign of each node relative to its root (favoring through an even
    number of disfavoring arguments)."""
    has_parent = {c for a in network.arguments.values() for c in a.children}
    polarity: dict[str, Side] = {}
    frontier = [(n, Side.FAVORING) for n in sorted(network.nodes) if n not in has_parent]
    while frontier:
        node_id, sign = frontier.pop(0)
        if node_id in polarity:
            continue
        polarity[node_id] = sign
        for arg in network.child_arguments(node_id):
            child_sign = sign if arg.side is Side.FAVORING else (
                Side.DISFAVORING if sign is Side.FAVORING else Side.FAVORING
            )
            frontier.extend((child, child_sign) for child in arg.children)
    return polarity


def generate_requests(
    network: ArgumentationNetwork,
    sources: Sequence[EvidenceSourceBinding],
    existing: Iterable[CollectionRequest] = (),
    issued_at: Optional[datetime] = None,
) -> list[CollectionRequest]:
    """One request per unanswered (leaf, source) pair, ordered by leaf then source."""
    defects = validate(network)
    if defects:
        raise InvalidNetworkError(defects)
    if not sources:
        raise ContractViolation(
            "no evidence source is registered; register a file repository or "
            "an in-memory fixture before generating collection requests"
        )
    taken = {(r.leaf, r.source) for r in existing}
    polarity = leaf_polarity(network)
    requests: list[CollectionRequest] = []
    leaves = sorted(n for n in network.nodes if network.is_leaf(n))
    for leaf in leaves:
        for binding in sorted(sources, key=lambda s: s.id):
            if (leaf, binding.id) in taken:
                continue
            requests.append(
                CollectionRequest(
                    id=f"req.{leaf}.{binding.id}",
                    leaf=leaf,
                    source=binding.id,
                    query=network.nodes[leaf].statement,
                    side=polarity.get(leaf, Side.FAVORING),
                    status=RequestStatus.OPEN,
                    issued_at=issued_at,
                )
            )
    return requests


@dataclass(frozen=True)
class Attachment:
    request_id: str
    leaf: str
    item: EvidenceItem
    side: Side
    relevance: Optional[SymbolicProbability]


@dataclass(frozen=True)
class CollectionResult:
    attachments: tuple[Attachment, ...]
    requests: tuple[CollectionRequest, ...]
    failures: tuple[tuple[str, str], ...]


def collect(
    requests: Sequence[CollectionRequest],
    source: EvidenceSource,
    entity_types: Mapping[str, str] | None = None,
) -> CollectionResult:
    """Answer this source's open requests; hits fulfil, misses exhaust.

    A failing source leaves its request open and records the reason.
    """
    attachments: list[Attachment] = []
    updated: list[CollectionRequest] = []
    failures: list[tuple[str, str]] = []
    for request in sorted(requests, key=lambda r: r.id):
        if request.source != source.binding.id or request.status is not RequestStatus.OPEN:
            updated.append(request)
            continue
        try:
            hits = source.search(parse_statement(request.query))
        except Exception as exc:  # noqa: BLE001 - adapter failures are data
            failures.append((request.id, str(exc)))
            updated.append(dataclasses.replace(request, failure=str(exc)))
            continue
        for hit in hits:
            attachments.append(
                Attachment(request.id, request.leaf, hit.item, hit.side, hit.relevance)
            )
        status = RequestStatus.FULFILLED if hits else RequestStatus.EXHAUSTED
        updated.append(dataclasses.replace(request, status=status))
    return CollectionResult(tuple(attachments), tuple(updated), tuple(failures))


def apply_attachments(
    network: ArgumentationNetwork, attachments: Iterable[Attachment]
) -> ArgumentationNetwork:
    """Attach collected items to their leaves as evidence links."""
    links = dict(network.evidence_links)
    refs = dict(network.evidence)
    incoming_relevance: dict[str, SymbolicProbability] = {}
    for arg in network.arguments.values():
        for child in arg.children:
            incoming_relevance.setdefault(child, arg.relevance)
    for attachment in sorted(attachments, key=lambda a: (a.leaf, a.item.id, a.side.value)):
        relevance = (
            attachment.relevance
            or attachment.item.relevance
            or incoming_relevance.get(attachment.leaf, SymbolicProbability.C)
        )
        marker = "f" if attachment.side is Side.FAVORING else "d"
        link_id = f"{attachment.leaf}.{attachment.item.id}.{marker}"
        links[link_id] = EvidenceLink(
            link_id, attachment.leaf, attachment.item.id, attachment.side, relevance
        )
        refs[attachment.item.id] = EvidenceRef(
            attachment.item.id,
            attachment.item.credibility,
            missing=attachment.item.type is EvidenceType.MISSING,
            statement=attachment.item.statement,
        )
    return dataclasses.replace(network, evidence_links=links, evidence=refs)


def search_items(
    items: Iterable[EvidenceItem],
    query: Statement,
    entity_types: Mapping[str, str] | None = None,
) -> list[SourceHit]:
    """Match a leaf query against items: statement matches favor the leaf,
    declared contradictions disfavor it."""
    atom = _single_atom(query)
    hits: list[SourceHit] = []
    for item in sorted(items, key=lambda i: i.id):
        try:
            statement_atom = parse_statement(item.statement).atoms[0]
        except Exception:
            continue
        if match_atom(atom, statement_atom, entity_types) is not None:
            hits.append(SourceHit(item, Side.FAVORING, item.relevance))
        if item.contradicts:
            contradicted = parse_statement(item.contradicts).atoms[0]
            if match_atom(contradicted, atom, entity_types) is not None or match_atom(
                atom, contradicted, entity_types
            ) is not None:
                hits.append(SourceHit(item, Side.DISFAVORING, item.relevance))
    return hits


@dataclass(frozen=True)
class ChangeEvent:
    analysis: str
    sequence: int
    kind: str  # "added" | "revised"
    item: EvidenceItem


class EvidenceRepository:
    """Single-writer evidence store with per-analysis change monitoring.

    Mutations are serialized by a lock; readers get snapshot lists.
    Sequence numbers are monotone per analysis, so replaying the event
    log reproduces every incremental update in order.
    """

    def __init__(
        self,
        items: Iterable[EvidenceItem] = (),
        profiles: Iterable[SourceProfile] = (),
        binding: EvidenceSourceBinding | None = None,
        entity_types: Mapping[str, str] | None = None,
    ):
        self.binding = binding or EvidenceSourceBinding(
            "repository", SourceKind.FILE_REPOSITORY, "in-process evidence repository"
        )
        self.entity_types = dict(entity_types or {})
        self._items: dict[str, EvidenceItem] = {i.id: i for i in items}
        self._profiles: dict[str, SourceProfile] = {p.id: p for p in profiles}
        self._subscriptions: dict[str, list[Statement]] = {}
        self._sequences: dict[str, int] = {}
        self._events: list[ChangeEvent] = []
        self._lock = threading.Lock()

    # -- read side -------------------------------------------------------
    def items(self) -> list[EvidenceItem]:
        return sorted(self._items.values(), key=lambda i: i.id)

    def profiles(self) -> list[SourceProfile]:
        return sorted(self._profiles.values(), key=lambda p: p.id)

    def get_item(self, item_id: str) -> EvidenceItem:
        try:
            return self._items[item_id]
        except KeyError:
            raise UnknownIdError("evidence item", item_id) from None

    def get_profile(self, profile_id: str) -> Optional[SourceProfile]:
        return self._profiles.get(profile_id)

    def search(self, query: Statement) -> list[SourceHit]:
        return search_items(self.items(), query, self.entity_types)

    def events_for(self, analysis: str, after: int = 0) -> list[ChangeEvent]:
        return [e for e in self._events if e.analysis == analysis and e.sequence > after]

    # -- monitoring ------------------------------------------------------
    def register_analysis(self, analysis: str) -> None:
        with self._lock:
            self._subscriptions.setdefault(analysis, [])
            self._sequences.setdefault(analysis, 0)

    def subscribe(self, analysis: str, queries: Iterable[Statement]) -> None:
        with self._lock:
            if analysis not in self._subscriptions:
                raise UnknownIdError("analysis", analysis)
            self._subscriptions[analysis].extend(queries)

    def _matches(self, item: EvidenceItem, analysis: str) -> bool:
        try:
            statement_atom = parse_statement(item.statement).atoms[0]
        except Exception:
            return False
        contradicted = (
            parse_statement(item.contradicts).atoms[0] if item.contradicts else None
        )
        for query in self._subscriptions.get(analysis, ()):
            atom = query.atoms[0]
            if match_atom(atom, statement_atom, self.entity_types) is not None:
                return True
            if contradicted is not None and (
                match_atom(contradicted, atom, self.entity_types) is not None
                or match_atom(atom, contradicted, self.entity_types) is not None
            ):
                return True
        return False

    def _emit(self, kind: str, item: EvidenceItem) -> list[ChangeEvent]:
        events = []
        for analysis in sorted(self._subscriptions):
            if self._matches(item, analysis):
                self._sequences[analysis] += 1
                event = ChangeEvent(analysis, self._sequences[analysis], kind, item)
                self._events.append(event)
                events.append(event)
        return events

    # -- write side ------------------------------------------------------
    def add_profile(self, profile: SourceProfile) -> None:
        with self._lock:
            self._profiles[profile.id] = profile

    def ingest(self, item: EvidenceItem) -> list[ChangeEvent]:
        with self._lock:
            kind = "revised" if item.id in self._items else "added"
            self._items[item.id] = item
            return self._emit(kind, item)

    def revise_credibility(
        self, item_id: str, credibility: SymbolicProbability
    ) -> list[ChangeEvent]:
        with self._lock:
            item = self._items.get(item_id)
            if item is None:
                raise UnknownIdError("evidence item", item_id)
            revised = dataclasses.replace(item, credibility=credibility)
            self._items[item_id] = revised
            return self._emit("revised", revised)

    def resolve_missing(self, missing_id: str, found: EvidenceItem) -> list[ChangeEvent]:
        """Replace an expected-but-absent marker with the actual finding."""
        with self._lock:
            marker = self._items.get(missing_id)
            if marker is None:
                raise UnknownIdError("evidence item", missing_id)
            if marker.type is not EvidenceType.MISSING:
                raise ContractViolation(f"item {missing_id!r} is not a missing marker")
            del self._items[missing_id]
            kind = "revised" if found.id in self._items else "added"
            self._items[found.id] = found
            return self._emit(kind, found)


class FixtureSource:
    """In-memory evidence source for tests and desk fixtures."""

    def __init__(
        self,
        items: Iterable[EvidenceItem],
        source_id: str = "fixture",
        entity_types: Mapping[str, str] | None = None,
    ):
        self.binding = EvidenceSourceBinding(
            source_id, SourceKind.IN_MEMORY_FIXTURE, "in-memory fixture source"
        )
        self._items = list(items)
        self.entity_types = dict(entity_types or {})

    def search(self, query: Statement) -> list[SourceHit]:
        return search_items(self._items, query, self.entity_types)


def monitor(
    repository: EvidenceRepository,
    subscriptions: Iterable[tuple[str, Statement]],
) -> None:
    """Register leaf queries so future repository changes emit events."""
    grouped: dict[str, list[Statement]] = {}
    for analysis, query in subscriptions:
        grouped.setdefault(analysis, []).append(query)
    for analysis, queries in grouped.items():
        repository.subscribe(analysis, queries)
