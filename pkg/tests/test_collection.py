"""Decomposition, collection requests, source matching, and monitoring."""

from __future__ import annotations

import pytest

from inquest.abduction import HypothesisCandidate, Observation, abduce
from inquest.calculus import SymbolicProbability as SP
from inquest.collection import (
    ChangeEvent,
    CollectionRequest,
    DecompositionRule,
    EvidenceRepository,
    EvidenceSourceBinding,
    FixtureSource,
    RequestStatus,
    SourceKind,
    apply_attachments,
    collect,
    decompose,
    generate_requests,
    monitor,
)
from inquest.errors import ContractViolation, UnknownIdError
from inquest.evidence import EvidenceItem, EvidenceType
from inquest.network import Side, evaluate, validate
from inquest.statements import parse_atom, parse_statement

from fixtures_shared import ship_decomposition, ship_rules


def covert_candidate():
    return HypothesisCandidate(
        id="covert",
        statement=parse_statement("performs-covert-goods-transfer(Ship1)"),
        text="Ship1 performs covert goods transfer",
        rule="r-covert",
        species="simple undercoded",
    )


def simple_rule(rule_id="d1", parent="h(?x)", children=("c1(?x)", "c2(?x)", "c3(?x)")):
    return DecompositionRule(
        id=rule_id,
        parent=parse_atom(parent),
        side=Side.FAVORING,
        relevance=SP.VL,
        children=tuple(parse_atom(c) for c in children),
    )


def candidate_for(statement_text):
    return HypothesisCandidate(
        id="cand",
        statement=parse_statement(statement_text),
        text=statement_text,
        rule="r",
        species="simple overcoded",
    )


class TestDecompose:
    def test_three_child_favoring_rule(self):
        decomposition = decompose(candidate_for("h(K)"), [simple_rule()])
        network = decomposition.network
        assert validate(network) == []
        root = network.competing_roots[0]
        args = network.child_arguments(root)
        assert len(args) == 1
        assert len(args[0].children) == 3
        statements = sorted(network.nodes[c].statement for c in args[0].children)
        assert statements == ["c1(K)", "c2(K)", "c3(K)"]
        assert len(decomposition.steps) == 1
        assert decomposition.steps[0].rule == "d1"
        assert ("x", "K") in decomposition.steps[0].bindings

    def test_no_matching_rule_gives_single_node(self):
        decomposition = decompose(candidate_for("mystery(K)"), [simple_rule()])
        assert len(decomposition.network.nodes) == 1
        assert decomposition.steps == ()

    def test_self_recursive_rule_stops_at_depth(self):
        recursive = DecompositionRule(
            id="loop",
            parent=parse_atom("h(?x)"),
            side=Side.FAVORING,
            relevance=SP.L,
            children=(parse_atom("h(?x)"),),
        )
        decomposition = decompose(candidate_for("h(K)"), [recursive], max_depth=4)
        network = decomposition.network
        assert validate(network) == []
        assert len(network.nodes) == 5  # root + 4 levels
        assert len(decomposition.steps) == 4

    def test_conjunction_splits_before_rules_apply(self):
        decomposition = decompose(
            candidate_for("h(K) & other(K)"), [simple_rule()], max_depth=2
        )
        network = decomposition.network
        root = network.competing_roots[0]
        split = network.child_arguments(root)
        assert len(split) == 1 and split[0].relevance is SP.C
        # the h(K) conjunct still decomposes below the split
        expanded = [n for n in network.nodes.values() if n.statement == "c1(K)"]
        assert expanded

    def test_both_sides_applied(self):
        decomposition = decompose(covert_candidate(), ship_decomposition())
        sides = {a.side for a in decomposition.network.arguments.values()}
        assert sides == {Side.FAVORING, Side.DISFAVORING}

    def test_every_argument_justified_by_recorded_step(self):
        decomposition = decompose(covert_candidate(), ship_decomposition())
        justified = {step.argument for step in decomposition.steps}
        assert justified == set(decomposition.network.arguments)

    def test_depth_must_be_positive(self):
        with pytest.raises(ContractViolation):
            decompose(covert_candidate(), [], max_depth=0)


class TestGenerateRequests:
    def binding(self, source_id="repo"):
        return EvidenceSourceBinding(source_id, SourceKind.FILE_REPOSITORY)

    def test_one_request_per_leaf_single_source(self):
        network = decompose(candidate_for("h(K)"), [simple_rule()]).network
        requests = generate_requests(network, [self.binding()])
        assert len(requests) == 3
        assert all(r.status is RequestStatus.OPEN for r in requests)

    def test_two_sources_requests_ordered_leaf_then_source(self):
        network = decompose(candidate_for("h(K)"), [simple_rule()]).network
        requests = generate_requests(network, [self.binding("b"), self.binding("a")])
        assert len(requests) == 6
        keys = [(r.leaf, r.source) for r in requests]
        assert keys == sorted(keys)

    def test_existing_request_not_duplicated(self):
        network = decompose(candidate_for("h(K)"), [simple_rule()]).network
        first = generate_requests(network, [self.binding()])
        again = generate_requests(network, [self.binding()], existing=first)
        assert again == []

    def test_no_source_rejected_with_guidance(self):
        network = decompose(candidate_for("h(K)"), [simple_rule()]).network
        with pytest.raises(ContractViolation, match="register"):
            generate_requests(network, [])

    def test_request_side_tracks_leaf_polarity(self):
        decomposition = decompose(covert_candidate(), ship_decomposition())
        requests = generate_requests(decomposition.network, [self.binding()])
        by_query = {r.query: r.side for r in requests}
        assert by_query["loiters-at-night(Ship1)"] is Side.FAVORING
        assert by_query["transponder-maintenance-scheduled(Ship1)"] is Side.DISFAVORING


class TestCollect:
    def repository(self, *items):
        return EvidenceRepository(items=items)

    def test_matching_item_fulfils_request(self):
        network = decompose(covert_candidate(), ship_decomposition()).network
        repo = self.repository(
            EvidenceItem(
                id="ev-loiter",
                type=EvidenceType.TANGIBLE_DEMONSTRATIVE,
                statement="loiters-at-night(Ship1)",
                credibility=SP.VL,
            )
        )
        requests = generate_requests(network, [repo.binding])
        outcome = collect(requests, repo)
        assert len(outcome.attachments) == 1
        assert outcome.attachments[0].item.id == "ev-loiter"
        statuses = {r.query: r.status for r in outcome.requests}
        assert statuses["loiters-at-night(Ship1)"] is RequestStatus.FULFILLED
        assert statuses["transponder-maintenance-scheduled(Ship1)"] is RequestStatus.EXHAUSTED

    def test_empty_repository_exhausts_everything(self):
        network = decompose(candidate_for("h(K)"), [simple_rule()]).network
        repo = self.repository()
        requests = generate_requests(network, [repo.binding])
        outcome = collect(requests, repo)
        assert outcome.attachments == ()
        assert all(r.status is RequestStatus.EXHAUSTED for r in outcome.requests)
        result = evaluate(apply_attachments(network, outcome.attachments))
        root = network.competing_roots[0]
        assert result.coverage[root].answered == 0

    def test_contradicting_item_attaches_disfavoring(self):
        network = decompose(covert_candidate(), ship_decomposition()).network
        repo = self.repository(
            EvidenceItem(
                id="ev-no-loiter",
                type=EvidenceType.TANGIBLE_DEMONSTRATIVE,
                statement="at-berth-overnight(Ship1)",
                contradicts="loiters-at-night(?s)",
                credibility=SP.L,
            )
        )
        requests = generate_requests(network, [repo.binding])
        outcome = collect(requests, repo)
        assert len(outcome.attachments) == 1
        assert outcome.attachments[0].side is Side.DISFAVORING
        network = apply_attachments(network, outcome.attachments)
        link = next(iter(network.evidence_links.values()))
        assert link.side is Side.DISFAVORING

    def test_source_failure_keeps_request_open(self):
        class FailingSource:
            binding = EvidenceSourceBinding("flaky", SourceKind.EXTERNAL_ADAPTER)

            def search(self, query):
                raise RuntimeError("connection reset")

        network = decompose(candidate_for("h(K)"), [simple_rule()]).network
        requests = generate_requests(network, [FailingSource.binding])
        outcome = collect(requests, FailingSource())
        assert all(r.status is RequestStatus.OPEN for r in outcome.requests)
        assert all("connection reset" in r.failure for r in outcome.requests)
        assert len(outcome.failures) == 3

    def test_relevance_defaults_to_incoming_argument(self):
        network = decompose(covert_candidate(), ship_decomposition()).network
        repo = self.repository(
            EvidenceItem(
                id="ev-loiter",
                type=EvidenceType.TANGIBLE_DEMONSTRATIVE,
                statement="loiters-at-night(Ship1)",
                credibility=SP.C,
            )
        )
        outcome = collect(generate_requests(network, [repo.binding]), repo)
        network = apply_attachments(network, outcome.attachments)
        link = next(iter(network.evidence_links.values()))
        assert link.relevance is SP.VL  # d-covert-fav relevance

    def test_source_declared_relevance_wins(self):
        network = decompose(covert_candidate(), ship_decomposition()).network
        repo = self.repository(
            EvidenceItem(
                id="ev-loiter",
                type=EvidenceType.TANGIBLE_DEMONSTRATIVE,
                statement="loiters-at-night(Ship1)",
                credibility=SP.C,
                relevance=SP.BL,
            )
        )
        outcome = collect(generate_requests(network, [repo.binding]), repo)
        network = apply_attachments(network, outcome.attachments)
        link = next(iter(network.evidence_links.values()))
        assert link.relevance is SP.BL


class TestMonitor:
    def fixture_item(self, item_id="ev-1", statement="loiters-at-night(Ship1)"):
        return EvidenceItem(
            id=item_id,
            type=EvidenceType.TANGIBLE_DEMONSTRATIVE,
            statement=statement,
            credibility=SP.L,
        )

    def test_matching_addition_emits_sequenced_event(self):
        repo = EvidenceRepository()
        repo.register_analysis("an-1")
        monitor(repo, [("an-1", parse_statement("loiters-at-night(?s)"))])
        events = repo.ingest(self.fixture_item())
        assert len(events) == 1
        assert events[0] == ChangeEvent("an-1", 1, "added", self.fixture_item())

    def test_revision_increments_sequence(self):
        repo = EvidenceRepository()
        repo.register_analysis("an-1")
        monitor(repo, [("an-1", parse_statement("loiters-at-night(?s)"))])
        repo.ingest(self.fixture_item())
        events = repo.revise_credibility("ev-1", SP.C)
        assert len(events) == 1
        assert events[0].sequence == 2
        assert events[0].kind == "revised"
        assert events[0].item.credibility is SP.C

    def test_non_matching_item_emits_nothing(self):
        repo = EvidenceRepository()
        repo.register_analysis("an-1")
        monitor(repo, [("an-1", parse_statement("loiters-at-night(?s)"))])
        events = repo.ingest(self.fixture_item(statement="weather-report(Area9)"))
        assert events == []

    def test_unknown_analysis_rejected(self):
        repo = EvidenceRepository()
        with pytest.raises(UnknownIdError):
            monitor(repo, [("ghost", parse_statement("a(?x)"))])

    def test_event_log_replay(self):
        repo = EvidenceRepository()
        repo.register_analysis("an-1")
        monitor(repo, [("an-1", parse_statement("loiters-at-night(?s)"))])
        repo.ingest(self.fixture_item())
        repo.revise_credibility("ev-1", SP.C)
        log = repo.events_for("an-1")
        assert [e.sequence for e in log] == [1, 2]
        assert repo.events_for("an-1", after=1) == log[1:]

    def test_resolve_missing_replaces_marker(self):
        from inquest.evidence import mark_missing

        repo = EvidenceRepository(items=[mark_missing("track-log(Ship1)", "absent", "m1")])
        repo.register_analysis("an-1")
        monitor(repo, [("an-1", parse_statement("track-log(?s)"))])
        events = repo.resolve_missing(
            "m1", self.fixture_item("ev-log", "track-log(Ship1)")
        )
        assert [i.id for i in repo.items()] == ["ev-log"]
        assert len(events) == 1 and events[0].kind == "added"
