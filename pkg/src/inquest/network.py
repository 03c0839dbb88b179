"""Argumentation networks: structure, validation, and bottom-up evaluation.

A network is a directed acyclic graph of hypothesis nodes.  Arguments
connect a parent hypothesis to a conjunction of child hypotheses on a
favoring or disfavoring side; evidence links attach evidence items to
argument-less (leaf) nodes.  Evaluation runs bottom-up:

* leaf with evidence: each side's force is the disjunction of the
  inferential forces (min of credibility and relevance) of its links;
  the node probability balances favoring against disfavoring force;
* leaf with neither evidence nor assumption: "no support", counted as
  an unanswered question;
* node with an assumption: the assumption replaces the computed value
  at that node and marks the node and its ancestors assumption-dependent;
* internal node: each argument contributes the minimum of its relevance
  and the conjunction of its children's probabilities; contributions
  combine per side by disjunction and the sides are balanced.

Alongside each probability the evaluator reports coverage: how many of
the distinct leaf questions beneath a node have been answered by
evidence or an assumption.  Networks are immutable values; every
operation returns fresh results without mutating its inputs.
"""

from __future__ import annotations

import dataclasses
import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Literal, Mapping, Optional, Sequence

from .calculus import SymbolicProbability, balance, conjoin, disjoin, inferential_force
from .errors import ContractViolation, InvalidNetworkError, UnknownIdError

__all__ = [
    "Side",
    "NodeRole",
    "HypothesisNode",
    "Argument",
    "EvidenceLink",
    "EvidenceRef",
    "ArgumentationNetwork",
    "Defect",
    "Coverage",
    "TraceEntry",
    "EvaluationResult",
    "EvidenceChange",
    "CompetingRank",
    "validate",
    "evaluate",
    "merge_evaluations",
    "what_if",
    "apply_evidence_change",
    "compare_competing",
]

#: Soft ceiling on network size; evaluation is linear in nodes + edges.
MAX_NODES = 10_000


class Side(str, Enum):
    FAVORING = "favoring"
    DISFAVORING = "disfavoring"


class NodeRole(str, Enum):
    ROOT = "root"
    INTERMEDIATE = "intermediate"
    LEAF = "leaf"


@dataclass(frozen=True)
class HypothesisNode:
    id: str
    statement: str
    role: NodeRole = NodeRole.LEAF
    assumption: Optional[SymbolicProbability] = None


@dataclass(frozen=True)
class Argument:
    """One independent strategy for showing a hypothesis true or false.

    The children are interpreted as a conjunction.
    """

    id: str
    parent: str
    side: Side
    relevance: SymbolicProbability
    children: tuple[str, ...]


@dataclass(frozen=True)
class EvidenceLink:
    id: str
    parent: str
    evidence: str
    side: Side
    relevance: SymbolicProbability


@dataclass(frozen=True)
class EvidenceRef:
    """Credibility snapshot of an evidence item referenced by links.

    Keeping the snapshot inside the network makes a serialized network
    self-contained and evaluation a pure function of the network value.
    """

    id: str
    credibility: SymbolicProbability
    missing: bool = False
    statement: str = ""


@dataclass(frozen=True)
class ArgumentationNetwork:
    nodes: Mapping[str, HypothesisNode]
    arguments: Mapping[str, Argument]
    evidence_links: Mapping[str, EvidenceLink]
    competing_roots: tuple[str, ...] = ()
    evidence: Mapping[str, EvidenceRef] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        nodes: Iterable[HypothesisNode],
        arguments: Iterable[Argument] = (),
        evidence_links: Iterable[EvidenceLink] = (),
        competing_roots: Iterable[str] = (),
        evidence: Iterable[EvidenceRef] = (),
    ) -> "ArgumentationNetwork":
        return cls(
            nodes={n.id: n for n in nodes},
            arguments={a.id: a for a in arguments},
            evidence_links={l.id: l for l in evidence_links},
            competing_roots=tuple(competing_roots),
            evidence={e.id: e for e in evidence},
        )

    def child_arguments(self, node_id: str) -> list[Argument]:
        return sorted(
            (a for a in self.arguments.values() if a.parent == node_id),
            key=lambda a: a.id,
        )

    def links_of(self, node_id: str) -> list[EvidenceLink]:
        return sorted(
            (l for l in self.evidence_links.values() if l.parent == node_id),
            key=lambda l: l.id,
        )

    def is_leaf(self, node_id: str) -> bool:
        return not any(a.parent == node_id for a in self.arguments.values())

    def merged_with(self, other: "ArgumentationNetwork") -> "ArgumentationNetwork":
        """Union of two disjoint networks; competing roots concatenate."""
        overlap = self.nodes.keys() & other.nodes.keys()
        if overlap:
            raise ContractViolation(f"cannot merge networks sharing node ids: {sorted(overlap)}")
        return ArgumentationNetwork(
            nodes={**self.nodes, **other.nodes},
            arguments={**self.arguments, **other.arguments},
            evidence_links={**self.evidence_links, **other.evidence_links},
            competing_roots=self.competing_roots + other.competing_roots,
            evidence={**self.evidence, **other.evidence},
        )


@dataclass(frozen=True)
class Defect:
    rule: str
    subject: str
    detail: str


@dataclass(frozen=True)
class Coverage:
    answered: int
    total: int

    @property
    def ratio(self) -> float:
        return self.answered / self.total if self.total else 0.0

    def __str__(self) -> str:
        return f"{self.answered}/{self.total}"


@dataclass(frozen=True)
class TraceEntry:
    node: str
    operation: str
    inputs: tuple[str, ...]
    output: str


@dataclass(frozen=True)
class EvaluationResult:
    probabilities: dict[str, SymbolicProbability]
    coverage: dict[str, Coverage]
    assumption_dependent: dict[str, bool]
    trace: tuple[TraceEntry, ...]


@dataclass(frozen=True)
class CompetingRank:
    root: str
    probability: SymbolicProbability
    coverage: Coverage


@dataclass(frozen=True)
class EvidenceChange:
    """A single mutation of a network's evidence layer.

    kind "add":                link and ref describe the new attachment
    kind "revise-credibility": evidence_id gets credibility
    kind "retract":            link_id is removed (orphaned refs pruned)
    """

    kind: Literal["add", "revise-credibility", "retract"]
    link: Optional[EvidenceLink] = None
    ref: Optional[EvidenceRef] = None
    evidence_id: Optional[str] = None
    credibility: Optional[SymbolicProbability] = None
    link_id: Optional[str] = None


def validate(network: ArgumentationNetwork) -> list[Defect]:
    """Collect every structural defect; an empty list means well-formed."""
    defects: list[Defect] = []
    nodes = network.nodes

    if len(nodes) > MAX_NODES:
        defects.append(
            Defect("size-limit", "network", f"{len(nodes)} nodes exceeds the {MAX_NODES} soft limit")
        )

    has_parent: set[str] = set()
    children_of: dict[str, set[str]] = {node_id: set() for node_id in nodes}
    for arg in sorted(network.arguments.values(), key=lambda a: a.id):
        if arg.parent not in nodes:
            defects.append(Defect("unresolved-reference", arg.id, f"parent node {arg.parent!r} not found"))
        if not arg.children:
            defects.append(Defect("empty-children", arg.id, "argument has no child hypotheses"))
        for child in arg.children:
            if child not in nodes:
                defects.append(Defect("unresolved-reference", arg.id, f"child node {child!r} not found"))
            else:
                has_parent.add(child)
                if arg.parent in nodes:
                    children_of[arg.parent].add(child)

    for link in sorted(network.evidence_links.values(), key=lambda l: l.id):
        if link.parent not in nodes:
            defects.append(Defect("unresolved-reference", link.id, f"parent node {link.parent!r} not found"))
        elif children_of[link.parent]:
            defects.append(
                Defect("leaf-only-evidence", link.id, f"node {link.parent!r} has child arguments and cannot take evidence")
            )
        if link.evidence not in network.evidence:
            defects.append(
                Defect("unresolved-reference", link.id, f"no credibility snapshot for evidence {link.evidence!r}")
            )

    for root in network.competing_roots:
        if root not in nodes:
            defects.append(Defect("unresolved-reference", root, "competing root not found"))
        elif root in has_parent:
            defects.append(Defect("root-with-parent", root, "competing root is the child of an argument"))

    for node in sorted(nodes.values(), key=lambda n: n.id):
        is_leaf = not children_of[node.id]
        if node.role is NodeRole.LEAF and not is_leaf:
            defects.append(Defect("role-mismatch", node.id, "declared leaf but has child arguments"))
        if node.role is NodeRole.ROOT and node.id in has_parent:
            defects.append(Defect("role-mismatch", node.id, "declared root but has a parent argument"))
        if node.role is NodeRole.INTERMEDIATE and (is_leaf or node.id not in has_parent):
            defects.append(Defect("role-mismatch", node.id, "declared intermediate but is a root or a leaf"))

    # iterative cycle detection over the argument graph (0 visiting, 1 done)
    state: dict[str, int] = {}
    for start in sorted(nodes):
        if start in state:
            continue
        state[start] = 0
        path = [start]
        stack = [(start, iter(sorted(children_of.get(start, ()))))]
        while stack:
            node_id, pending_children = stack[-1]
            descended = False
            for child in pending_children:
                if state.get(child) == 0:
                    cycle = path[path.index(child):] + [child]
                    defects.append(Defect("cycle", child, " -> ".join(cycle)))
                elif child not in state:
                    state[child] = 0
                    path.append(child)
                    stack.append((child, iter(sorted(children_of.get(child, ())))))
                    descended = True
                    break
            if not descended:
                state[node_id] = 1
                stack.pop()
                path.pop()

    # every non-leaf must be reachable from some root (= parentless node)
    roots = [node_id for node_id in nodes if node_id not in has_parent]
    reachable: set[str] = set()
    frontier = list(roots)
    while frontier:
        current = frontier.pop()
        if current in reachable:
            continue
        reachable.add(current)
        frontier.extend(children_of.get(current, ()))
    for node_id in sorted(nodes):
        if children_of[node_id] and node_id not in reachable:
            defects.append(Defect("unreachable", node_id, "non-leaf node not reached from any root"))

    return defects


def _topological_order(network: ArgumentationNetwork) -> list[str]:
    """Children-before-parents order, lexicographic among ready nodes."""
    children_of: dict[str, set[str]] = {node_id: set() for node_id in network.nodes}
    parents_of: dict[str, set[str]] = {node_id: set() for node_id in network.nodes}
    for arg in network.arguments.values():
        for child in arg.children:
            children_of[arg.parent].add(child)
            parents_of[child].add(arg.parent)
    pending = {node_id: len(children) for node_id, children in children_of.items()}
    ready = [node_id for node_id, count in pending.items() if count == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        current = heapq.heappop(ready)
        order.append(current)
        for parent in parents_of[current]:
            pending[parent] -= 1
            if pending[parent] == 0:
                heapq.heappush(ready, parent)
    return order


def _evaluate_node(
    network: ArgumentationNetwork,
    node: HypothesisNode,
    probabilities: Mapping[str, SymbolicProbability],
    dependent: Mapping[str, bool],
) -> tuple[SymbolicProbability, bool, list[TraceEntry]]:
    entries: list[TraceEntry] = []
    arguments = network.child_arguments(node.id)
    links = network.links_of(node.id)

    if node.assumption is not None:
        entries.append(TraceEntry(node.id, "assumption", (node.assumption.label,), node.assumption.label))
        return node.assumption, True, entries

    forces: dict[Side, list[SymbolicProbability]] = {Side.FAVORING: [], Side.DISFAVORING: []}
    is_dependent = False

    if arguments:
        for arg in arguments:
            child_probs = [probabilities[c] for c in arg.children]
            contribution = min(arg.relevance, conjoin(child_probs))
            forces[arg.side].append(contribution)
            is_dependent = is_dependent or any(dependent[c] for c in arg.children)
            entries.append(
                TraceEntry(
                    node.id,
                    "argument",
                    (arg.id, arg.relevance.label) + tuple(p.label for p in child_probs),
                    contribution.label,
                )
            )
    elif links:
        for link in links:
            ref = network.evidence[link.evidence]
            force = inferential_force(ref.credibility, link.relevance)
            forces[link.side].append(force)
            entries.append(
                TraceEntry(
                    node.id,
                    "inferential-force",
                    (link.id, ref.credibility.label, link.relevance.label),
                    force.label,
                )
            )
    else:
        entries.append(TraceEntry(node.id, "unanswered", (), SymbolicProbability.NS.label))
        return SymbolicProbability.NS, False, entries

    sides: dict[Side, SymbolicProbability] = {}
    for side in (Side.FAVORING, Side.DISFAVORING):
        if forces[side]:
            combined = disjoin(forces[side])
            entries.append(
                TraceEntry(node.id, f"disjoin-{side.value}", tuple(f.label for f in forces[side]), combined.label)
            )
        else:
            combined = SymbolicProbability.NS
        sides[side] = combined

    probability = balance(sides[Side.FAVORING], sides[Side.DISFAVORING])
    entries.append(
        TraceEntry(
            node.id,
            "balance",
            (sides[Side.FAVORING].label, sides[Side.DISFAVORING].label),
            probability.label,
        )
    )
    if (
        sides[Side.FAVORING] == sides[Side.DISFAVORING]
        and sides[Side.FAVORING] > SymbolicProbability.NS
    ):
        entries.append(
            TraceEntry(
                node.id,
                "conflict",
                (sides[Side.FAVORING].label, sides[Side.DISFAVORING].label),
                "favoring and disfavoring forces cancel",
            )
        )
    return probability, is_dependent, entries


def _leaf_answered(network: ArgumentationNetwork, node: HypothesisNode) -> bool:
    if node.assumption is not None:
        return True
    return any(
        not network.evidence[link.evidence].missing for link in network.links_of(node.id)
    )


def _evaluate(
    network: ArgumentationNetwork,
    recompute: set[str] | None = None,
    baseline: EvaluationResult | None = None,
    baseline_entries: Mapping[str, tuple[TraceEntry, ...]] | None = None,
) -> EvaluationResult:
    defects = validate(network)
    if defects:
        raise InvalidNetworkError(defects)

    order = _topological_order(network)
    probabilities: dict[str, SymbolicProbability] = {}
    dependent: dict[str, bool] = {}
    coverage: dict[str, Coverage] = {}
    leafsets: dict[str, frozenset[str]] = {}
    per_node_entries: dict[str, tuple[TraceEntry, ...]] = {}

    for node_id in order:
        node = network.nodes[node_id]
        reuse = (
            recompute is not None
            and baseline is not None
            and baseline_entries is not None
            and node_id not in recompute
            and node_id in baseline.probabilities
        )
        if reuse:
            probability = baseline.probabilities[node_id]
            is_dependent = baseline.assumption_dependent[node_id]
            entries: Sequence[TraceEntry] = baseline_entries[node_id]
        else:
            probability, is_dependent, entries = _evaluate_node(network, node, probabilities, dependent)
        probabilities[node_id] = probability
        dependent[node_id] = is_dependent
        per_node_entries[node_id] = tuple(entries)

        arguments = network.child_arguments(node_id)
        if arguments:
            subtree: frozenset[str] = frozenset().union(
                *(leafsets[c] for arg in arguments for c in arg.children)
            )
            # assumption-dependence propagates through arguments as well
            if node.assumption is None:
                dependent[node_id] = is_dependent or any(
                    dependent[c] for arg in arguments for c in arg.children
                )
        else:
            subtree = frozenset((node_id,))
        leafsets[node_id] = subtree
        answered = sum(1 for leaf in subtree if _leaf_answered(network, network.nodes[leaf]))
        coverage[node_id] = Coverage(answered, len(subtree))

    trace = tuple(entry for node_id in order for entry in per_node_entries[node_id])
    return EvaluationResult(probabilities, coverage, dependent, trace)


def evaluate(network: ArgumentationNetwork) -> EvaluationResult:
    """Deterministic bottom-up evaluation of a validated network."""
    return _evaluate(network)


def merge_evaluations(
    network: ArgumentationNetwork, results: Iterable[EvaluationResult]
) -> EvaluationResult:
    """Combine evaluations of disjoint components into one result.

    The trace is reordered into the merged network's canonical node
    order, so the outcome is identical to evaluating the merged network
    in one call — regardless of how the component work was split.
    """
    probabilities: dict[str, SymbolicProbability] = {}
    coverage: dict[str, Coverage] = {}
    dependent: dict[str, bool] = {}
    entries: dict[str, list[TraceEntry]] = {}
    for result in results:
        probabilities.update(result.probabilities)
        coverage.update(result.coverage)
        dependent.update(result.assumption_dependent)
        for entry in result.trace:
            entries.setdefault(entry.node, []).append(entry)
    missing = sorted(set(network.nodes) - set(probabilities))
    if missing:
        raise ContractViolation(f"merged results do not cover nodes: {missing}")
    order = _topological_order(network)
    trace = tuple(entry for node in order for entry in entries.get(node, ()))
    return EvaluationResult(probabilities, coverage, dependent, trace)


def what_if(
    network: ArgumentationNetwork,
    overrides: Mapping[str, Optional[SymbolicProbability]],
) -> EvaluationResult:
    """Evaluate a copy with assumptions applied (value) or cleared (None)."""
    unknown = sorted(set(overrides) - set(network.nodes))
    if unknown:
        raise UnknownIdError("node", unknown[0])
    nodes = dict(network.nodes)
    for node_id, value in overrides.items():
        nodes[node_id] = dataclasses.replace(nodes[node_id], assumption=value)
    return evaluate(dataclasses.replace(network, nodes=nodes))


def _ancestors_of(network: ArgumentationNetwork, node_ids: set[str]) -> set[str]:
    parents_of: dict[str, set[str]] = {}
    for arg in network.arguments.values():
        for child in arg.children:
            parents_of.setdefault(child, set()).add(arg.parent)
    closed: set[str] = set()
    frontier = list(node_ids)
    while frontier:
        current = frontier.pop()
        if current in closed:
            continue
        closed.add(current)
        frontier.extend(parents_of.get(current, ()))
    return closed


def apply_evidence_change(
    network: ArgumentationNetwork,
    change: EvidenceChange,
    baseline: EvaluationResult | None = None,
) -> tuple[ArgumentationNetwork, EvaluationResult]:
    """Apply one evidence mutation and re-evaluate only the touched chain.

    Returns the changed network and a result value-identical to a full
    evaluation of it.  When a baseline result for the unchanged network
    is supplied, untouched nodes reuse its values and trace entries.
    """
    links = dict(network.evidence_links)
    refs = dict(network.evidence)
    touched_leaves: set[str] = set()

    if change.kind == "add":
        if change.link is None or change.ref is None:
            raise ContractViolation("add change requires both a link and an evidence snapshot")
        if change.link.parent not in network.nodes:
            raise UnknownIdError("node", change.link.parent)
        previous = refs.get(change.ref.id)
        if previous is not None and previous != change.ref:
            # replacing a snapshot touches every leaf already linked to it
            touched_leaves.update(
                link.parent for link in links.values() if link.evidence == change.ref.id
            )
        links[change.link.id] = change.link
        refs[change.ref.id] = change.ref
        touched_leaves.add(change.link.parent)
    elif change.kind == "revise-credibility":
        if change.evidence_id is None or change.credibility is None:
            raise ContractViolation("revise-credibility requires an evidence id and a credibility")
        if change.evidence_id not in refs:
            raise UnknownIdError("evidence", change.evidence_id)
        refs[change.evidence_id] = dataclasses.replace(
            refs[change.evidence_id], credibility=change.credibility
        )
        touched_leaves.update(
            link.parent for link in links.values() if link.evidence == change.evidence_id
        )
    elif change.kind == "retract":
        if change.link_id is None:
            raise ContractViolation("retract requires a link id")
        link = links.pop(change.link_id, None)
        if link is None:
            raise UnknownIdError("evidence link", change.link_id)
        touched_leaves.add(link.parent)
        still_referenced = {l.evidence for l in links.values()}
        refs = {ref_id: ref for ref_id, ref in refs.items() if ref_id in still_referenced}
    else:
        raise ContractViolation(f"unknown change kind {change.kind!r}")

    changed = dataclasses.replace(network, evidence_links=links, evidence=refs)
    if baseline is None:
        return changed, evaluate(changed)

    recompute = _ancestors_of(changed, touched_leaves)
    baseline_entries: dict[str, tuple[TraceEntry, ...]] = {}
    for entry in baseline.trace:
        baseline_entries.setdefault(entry.node, ())
        baseline_entries[entry.node] += (entry,)
    result = _evaluate(changed, recompute=recompute, baseline=baseline, baseline_entries=baseline_entries)
    return changed, result


def compare_competing(
    network: ArgumentationNetwork,
    result: EvaluationResult | None = None,
) -> list[CompetingRank]:
    """Rank competing roots by probability, then coverage ratio, then id."""
    if not network.competing_roots:
        raise ContractViolation("the network has no competing roots to compare")
    if result is None:
        result = evaluate(network)
    ranks = [
        CompetingRank(root, result.probabilities[root], result.coverage[root])
        for root in network.competing_roots
    ]
    ranks.sort(key=lambda r: (-r.probability.rank, -r.coverage.ratio, r.root))
    return ranks
