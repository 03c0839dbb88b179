"""Rule-based abduction: competing hypotheses that would explain an observation.

``abduce`` pairs an observation against explanation rules of the form
"hypothesis -> observable".  One matching rule tags its candidate
overcoded, several tag every candidate undercoded; a rule whose
hypothesis holds variables the observable never binds posits a fresh
entity and tags the candidate existential.  ``analogical_refine`` then
widens candidates with statements that co-occurred with the hypothesis
in past cases.

``multi_step_investigate`` drives the full loop: abduce, decompose each
candidate, collect evidence, test, keep the best few survivors, and use
each survivor as the next observation.  A survivor chain accepted while
intermediate steps lack evidence is marked unverified in the trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping, Optional, Sequence

from .calculus import SymbolicProbability
from .collection import (
    CollectionRequest,
    DecompositionRule,
    EvidenceSource,
    apply_attachments,
    collect,
    decompose,
    generate_requests,
)
from .errors import ContractViolation
from .network import (
    ArgumentationNetwork,
    CompetingRank,
    EvaluationResult,
    compare_competing,
    evaluate,
)
from .statements import Atom, Statement, Term, Variable, match_atom, substitute

__all__ = [
    "ExplanationRule",
    "Observation",
    "HypothesisCandidate",
    "CaseRecord",
    "FreshNames",
    "Limits",
    "StepRecord",
    "AbductionTrace",
    "Investigation",
    "abduce",
    "analogical_refine",
    "multi_step_investigate",
]

SPECIES_FORMS = ("simple", "existential", "analogical")
SPECIES_CODINGS = ("overcoded", "undercoded")


@dataclass(frozen=True)
class ExplanationRule:
    """Prior knowledge "hypothesis -> observable" driving abduction."""

    id: str
    hypothesis: Statement
    observable: Atom
    prior_relevance: SymbolicProbability = SymbolicProbability.LIKELY
    species_hints: frozenset[str] = frozenset()
    label: Optional[str] = None

    def existential_variables(self) -> tuple[Variable, ...]:
        observable_names = {v.name for v in self.observable.variables()}
        return tuple(
            v for v in self.hypothesis.variables() if v.name not in observable_names
        )


@dataclass(frozen=True)
class Observation:
    id: str
    statement: Statement
    received_at: Optional[datetime] = None
    text: str = ""

    def __post_init__(self) -> None:
        if not self.statement.is_ground():
            free = ", ".join(v.render() for v in self.statement.variables())
            raise ContractViolation(
                f"observation {self.id!r} is not ground (free variables: {free})"
            )


@dataclass(frozen=True)
class HypothesisCandidate:
    id: str
    statement: Statement
    text: str
    rule: str
    species: str  # "<form> <coding>", e.g. "existential undercoded"
    bindings: tuple[tuple[str, str], ...] = ()
    fresh_entities: tuple[str, ...] = ()
    parent: Optional[str] = None  # candidate this one's observation came from

    @property
    def coding(self) -> str:
        return self.species.split()[-1]


@dataclass(frozen=True)
class CaseRecord:
    """Past co-occurrence: when the hypothesis pattern held, so did the other."""

    id: str
    hypothesis: Atom
    co_occurrence: Atom
    note: str = ""

    def __post_init__(self) -> None:
        h_vars = {v.name for v in self.hypothesis.variables()}
        k_vars = {v.name for v in self.co_occurrence.variables()}
        if not h_vars & k_vars:
            raise ContractViolation(
                f"case {self.id!r}: hypothesis and co-occurrence share no variable"
            )


class FreshNames:
    """Deterministic fresh-entity naming: first 'buyer' becomes buyer-1."""

    def __init__(self) -> None:
        self._counters: dict[str, int] = {}

    def next(self, base: str) -> str:
        self._counters[base] = self._counters.get(base, 0) + 1
        return f"{base}-{self._counters[base]}"


def _render_bindings(bindings: Mapping[str, Term]) -> tuple[tuple[str, str], ...]:
    return tuple(
        sorted(
            (name, term.render() if isinstance(term, Variable) else term)
            for name, term in bindings.items()
        )
    )


def _candidate_text(rule: ExplanationRule, statement: Statement, bindings: Mapping[str, Term]) -> str:
    if rule.label is None:
        return statement.render()
    values = {
        name: (term.render() if isinstance(term, Variable) else term)
        for name, term in bindings.items()
    }
    try:
        return rule.label.format(**values)
    except (KeyError, IndexError):
        return statement.render()


def abduce(
    observation: Observation,
    rules: Sequence[ExplanationRule],
    entity_types: Mapping[str, str] | None = None,
    names: FreshNames | None = None,
    id_prefix: str = "",
    parent: Optional[str] = None,
) -> list[HypothesisCandidate]:
    """One candidate per rule whose observable matches the observation.

    An empty result signals that no prior knowledge explains the
    observation (creative abduction is a human task).  Candidates are
    ordered by prior relevance descending, then rule id.
    """
    names = names or FreshNames()
    matched: list[tuple[ExplanationRule, dict[str, Term]]] = []
    for rule in sorted(rules, key=lambda r: r.id):
        for atom in observation.statement.atoms:
            bindings = match_atom(rule.observable, atom, entity_types)
            if bindings is not None:
                matched.append((rule, bindings))
                break
    coding = "overcoded" if len(matched) == 1 else "undercoded"
    matched.sort(key=lambda pair: (-pair[0].prior_relevance.rank, pair[0].id))

    candidates = []
    for rule, bindings in matched:
        fresh: list[str] = []
        for variable in rule.existential_variables():
            if variable.name not in bindings:
                entity = names.next(variable.name)
                bindings[variable.name] = entity
                fresh.append(entity)
        statement = substitute(rule.hypothesis, bindings)
        form = "existential" if fresh else "simple"
        candidates.append(
            HypothesisCandidate(
                id=f"{id_prefix}{rule.id}",
                statement=statement,
                text=_candidate_text(rule, statement, bindings),
                rule=rule.id,
                species=f"{form} {coding}",
                bindings=_render_bindings(bindings),
                fresh_entities=tuple(fresh),
                parent=parent,
            )
        )
    return candidates


def analogical_refine(
    candidate: HypothesisCandidate,
    cases: Sequence[CaseRecord],
    entity_types: Mapping[str, str] | None = None,
    names: FreshNames | None = None,
) -> list[HypothesisCandidate]:
    """The candidate plus one refinement per case whose hypothesis matches.

    A refinement conjoins the co-occurring statement under the shared
    bindings and keeps the original's coding.  Co-occurrence variables
    the match leaves unbound become fresh entities so refinements stay
    ground.
    """
    names = names or FreshNames()
    refined = [candidate]
    for case in sorted(cases, key=lambda c: c.id):
        bindings = None
        for atom in candidate.statement.atoms:
            bindings = match_atom(case.hypothesis, atom, entity_types)
            if bindings is not None:
                break
        if bindings is None:
            continue
        fresh = list(candidate.fresh_entities)
        for variable in case.co_occurrence.variables():
            if variable.name not in bindings:
                entity = names.next(variable.name)
                bindings[variable.name] = entity
                fresh.append(entity)
        extra = substitute(Statement((case.co_occurrence,)), bindings)
        refined.append(
            HypothesisCandidate(
                id=f"{candidate.id}+{case.id}",
                statement=Statement(candidate.statement.atoms + extra.atoms),
                text=f"{candidate.text} & {extra.render()}",
                rule=candidate.rule,
                species=f"analogical {candidate.coding}",
                bindings=candidate.bindings,
                fresh_entities=tuple(fresh),
                parent=candidate.parent,
            )
        )
    return refined


@dataclass(frozen=True)
class Limits:
    max_depth: int
    beam_width: Optional[int] = 1  # None means keep every candidate

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ContractViolation("max_depth must be positive")
        if self.beam_width is not None and self.beam_width < 1:
            raise ContractViolation("beam_width must be positive (or None for unbounded)")


@dataclass(frozen=True)
class StepRecord:
    index: int
    observation: str
    parent_candidate: Optional[str]
    candidates: tuple[HypothesisCandidate, ...]
    rankings: tuple[CompetingRank, ...]
    survivors: tuple[str, ...]
    selected: Optional[str]
    unverified: tuple[str, ...]  # survivors accepted without any evidence
    stop_reason: Optional[str] = None


@dataclass(frozen=True)
class AbductionTrace:
    steps: tuple[StepRecord, ...]
    examined: int
    stop_reason: str


@dataclass(frozen=True)
class Investigation:
    trace: AbductionTrace
    networks: Mapping[str, ArgumentationNetwork]
    evaluations: Mapping[str, EvaluationResult]
    requests: tuple[CollectionRequest, ...]


def _develop_candidate(
    candidate: HypothesisCandidate,
    decomposition_rules: Sequence[DecompositionRule],
    sources: Sequence[EvidenceSource],
    entity_types: Mapping[str, str] | None,
    decomposition_depth: int,
    step_index: int,
) -> tuple[ArgumentationNetwork, tuple[CollectionRequest, ...]]:
    prefix = f"s{step_index}.{candidate.id}/"
    skeleton = decompose(
        candidate,
        decomposition_rules,
        max_depth=decomposition_depth,
        entity_types=entity_types,
        id_prefix=prefix,
    ).network
    requests = generate_requests(skeleton, [s.binding for s in sources])
    network = skeleton
    pending: Sequence[CollectionRequest] = requests
    for source in sources:
        outcome = collect(pending, source, entity_types)
        network = apply_attachments(network, outcome.attachments)
        pending = outcome.requests
    return network, tuple(pending)


def multi_step_investigate(
    observation: Observation,
    rules: Sequence[ExplanationRule],
    cases: Sequence[CaseRecord],
    decomposition_rules: Sequence[DecompositionRule],
    sources: Sequence[EvidenceSource],
    limits: Limits,
    entity_types: Mapping[str, str] | None = None,
    decomposition_depth: int = 5,
) -> Investigation:
    """Abduce, test, prune, and recurse on survivors until done.

    Stops at the depth limit, when no rule matches, or when a survivor
    reaches "almost certain".  Deterministic for fixed inputs: fresh
    entities are numbered in rule order, candidate evaluation is merged
    in candidate id order.
    """
    names = FreshNames()
    steps: list[StepRecord] = []
    examined = 0
    frontier: list[tuple[Statement, Optional[str]]] = [(observation.statement, None)]
    final_networks: dict[str, ArgumentationNetwork] = {}
    final_evaluations: dict[str, EvaluationResult] = {}
    all_requests: list[CollectionRequest] = []
    stop_reason = "max depth reached"
    step_index = 0
    latest_survivors: tuple[str, ...] = ()

    for depth in range(1, limits.max_depth + 1):
        next_frontier: list[tuple[Statement, Optional[str]]] = []
        depth_survivors: list[str] = []
        depth_stop: Optional[str] = None
        for statement, parent in frontier:
            step_index += 1
            pseudo = Observation(f"{observation.id}.s{step_index}", statement)
            prefix = f"d{depth}." if parent is None else f"{parent}."
            base_candidates = abduce(
                pseudo, rules, entity_types, names, id_prefix=prefix, parent=parent
            )
            candidates: list[HypothesisCandidate] = []
            for candidate in base_candidates:
                candidates.extend(analogical_refine(candidate, cases, entity_types, names))
            examined += len(candidates)

            if not candidates:
                steps.append(
                    StepRecord(
                        step_index, statement.render(), parent, (), (), (), None, (),
                        stop_reason="no explanation in KB",
                    )
                )
                continue

            merged: Optional[ArgumentationNetwork] = None
            root_of: dict[str, str] = {}
            evidenced: set[str] = set()
            for candidate in candidates:
                network, pending = _develop_candidate(
                    candidate, decomposition_rules, sources, entity_types,
                    decomposition_depth, step_index,
                )
                all_requests.extend(pending)
                root_of[candidate.id] = network.competing_roots[0]
                if network.evidence_links:
                    evidenced.add(candidate.id)
                merged = network if merged is None else merged.merged_with(network)
                final_networks[candidate.id] = network
            assert merged is not None
            evaluation = evaluate(merged)
            for candidate in candidates:
                final_evaluations[candidate.id] = evaluation
            rankings = compare_competing(merged, evaluation)
            candidate_of_root = {root: cand for cand, root in root_of.items()}
            ordered = [candidate_of_root[rank.root] for rank in rankings]
            keep = len(ordered) if limits.beam_width is None else limits.beam_width
            survivors = tuple(ordered[:keep])
            unverified = tuple(s for s in survivors if s not in evidenced)
            steps.append(
                StepRecord(
                    step_index,
                    statement.render(),
                    parent,
                    tuple(candidates),
                    tuple(rankings),
                    survivors,
                    survivors[0] if survivors else None,
                    unverified,
                )
            )
            by_id = {c.id: c for c in candidates}
            depth_survivors.extend(survivors)
            for survivor in survivors:
                rank = next(r for r in rankings if root_of[survivor] == r.root)
                if rank.probability >= SymbolicProbability.ALMOST_CERTAIN:
                    depth_stop = f"survivor {survivor} reached {rank.probability.label}"
                next_frontier.append((by_id[survivor].statement, survivor))
        if depth_survivors:
            latest_survivors = tuple(depth_survivors)
        if depth == 1 and not depth_survivors:
            stop_reason = "no explanation in KB"
            break
        if depth_stop:
            stop_reason = depth_stop
            break
        if not next_frontier:
            stop_reason = "no further explanations in KB"
            break
        frontier = next_frontier

    keep_ids = set(latest_survivors)
    networks = {cid: net for cid, net in final_networks.items() if cid in keep_ids}
    evaluations = {cid: ev for cid, ev in final_evaluations.items() if cid in keep_ids}
    trace = AbductionTrace(tuple(steps), examined, stop_reason)
    return Investigation(trace, networks, evaluations, tuple(all_requests))
