"""Hypothesis generation: species tagging, refinement, and the step loop."""

from __future__ import annotations

from itertools import product

import pytest

from inquest.abduction import (
    CaseRecord,
    ExplanationRule,
    FreshNames,
    HypothesisCandidate,
    Limits,
    Observation,
    abduce,
    analogical_refine,
    multi_step_investigate,
)
from inquest.calculus import SymbolicProbability as SP
from inquest.errors import ContractViolation
from inquest.statements import match_atom, parse_atom, parse_statement

from fixtures_shared import ladder_rules, ladder_source, ship_cases, ship_rules


def observation(text="ais-track-lost(Ship1, Time1, Location1)", obs_id="alert-1"):
    return Observation(obs_id, parse_statement(text))


def brute_force_matches(observation, rules):
    """Independent matcher: try every rule against every observation atom."""
    hits = set()
    for rule in rules:
        for atom in observation.statement.atoms:
            if match_atom(rule.observable, atom) is not None:
                hits.add(rule.id)
                break
    return hits


class TestAbduce:
    def test_ship_alert_yields_three_undercoded_candidates(self):
        candidates = abduce(observation(), ship_rules())
        assert [c.text for c in candidates] == [
            "Ship1 performs covert goods transfer",
            "Ship1 performs illegal fishing operations",
            "Ship1 avoids tracking by pirates",
        ]
        assert all(c.species == "simple undercoded" for c in candidates)

    def test_single_matching_rule_is_overcoded(self):
        candidates = abduce(observation(), ship_rules()[:1])
        assert len(candidates) == 1
        assert candidates[0].species == "simple overcoded"

    def test_existential_rule_creates_fresh_entity(self):
        rule = ExplanationRule(
            id="r-covert-buyer",
            hypothesis=parse_statement("covert-transfer(?ship, ?buyer)"),
            observable=parse_atom("ais-lost(?ship)"),
        )
        candidates = abduce(Observation("a", parse_statement("ais-lost(Ship1)")), [rule])
        assert len(candidates) == 1
        candidate = candidates[0]
        assert candidate.species == "existential overcoded"
        assert candidate.fresh_entities == ("buyer-1",)
        assert candidate.statement.render() == "covert-transfer(Ship1, buyer-1)"

    def test_no_matching_rule_returns_empty(self):
        candidates = abduce(observation("engine-failure(Ship1)"), ship_rules())
        assert candidates == []

    def test_non_ground_observation_rejected(self):
        with pytest.raises(ContractViolation):
            observation("ais-track-lost(?ship, Time1, Location1)")

    def test_ordering_by_prior_relevance_then_rule_id(self):
        rules = [
            ExplanationRule(
                id="z-strong",
                hypothesis=parse_statement("h1(?x)"),
                observable=parse_atom("obs(?x)"),
                prior_relevance=SP.VL,
            ),
            ExplanationRule(
                id="a-weak",
                hypothesis=parse_statement("h2(?x)"),
                observable=parse_atom("obs(?x)"),
                prior_relevance=SP.BL,
            ),
            ExplanationRule(
                id="m-strong",
                hypothesis=parse_statement("h3(?x)"),
                observable=parse_atom("obs(?x)"),
                prior_relevance=SP.VL,
            ),
        ]
        candidates = abduce(observation("obs(E)"), rules)
        assert [c.rule for c in candidates] == ["m-strong", "z-strong", "a-weak"]

    def test_completeness_matches_brute_force(self):
        rules = ship_rules() + ladder_rules()
        for text in (
            "ais-track-lost(Ship1, T, L)",
            "anomaly(Case1)",
            "phen-b(Case1)",
            "proc-ca(Case1)",
            "unrelated(Thing)",
        ):
            obs = observation(text, obs_id=f"obs-{text[:4]}")
            produced = {c.rule for c in abduce(obs, rules)}
            assert produced == brute_force_matches(obs, rules)

    def test_species_consistency(self):
        rules = ship_rules()
        candidates = abduce(observation(), rules)
        assert all(c.species.endswith("undercoded") for c in candidates)
        assert all(not c.fresh_entities for c in candidates)
        solo = abduce(observation(), rules[:1])
        assert solo[0].species.endswith("overcoded")

    def test_fresh_names_deterministic(self):
        names = FreshNames()
        assert names.next("buyer") == "buyer-1"
        assert names.next("buyer") == "buyer-2"
        assert names.next("seller") == "seller-1"


class TestAnalogicalRefine:
    def test_refinement_conjoins_co_occurrence(self):
        candidate = HypothesisCandidate(
            id="c1",
            statement=parse_statement("performs-covert-goods-transfer(Ship1)"),
            text="Ship1 performs covert goods transfer",
            rule="r-covert",
            species="simple undercoded",
        )
        refined = analogical_refine(candidate, ship_cases())
        assert len(refined) == 2
        assert refined[0] is candidate
        assert refined[1].statement.render() == (
            "performs-covert-goods-transfer(Ship1) & loiters-at-night(Ship1)"
        )
        assert refined[1].species == "analogical undercoded"

    def test_empty_case_base_keeps_only_original(self):
        candidate = abduce(observation(), ship_rules())[0]
        assert analogical_refine(candidate, []) == [candidate]

    def test_non_unifying_case_ignored(self):
        candidate = abduce(observation(), ship_rules())[1]  # fishing
        refined = analogical_refine(candidate, ship_cases())
        assert refined == [candidate]

    def test_unbound_case_variable_becomes_fresh_entity(self):
        case = CaseRecord(
            id="case-partner",
            hypothesis=parse_atom("performs-covert-goods-transfer(?s)"),
            co_occurrence=parse_atom("coordinates-with(?s, ?partner)"),
        )
        candidate = abduce(observation(), ship_rules())[0]
        refined = analogical_refine(candidate, [case])
        assert refined[1].statement.is_ground()
        assert "partner-1" in refined[1].fresh_entities

    def test_case_requires_shared_variable(self):
        with pytest.raises(ContractViolation):
            CaseRecord(
                id="bad",
                hypothesis=parse_atom("a(?x)"),
                co_occurrence=parse_atom("b(?y)"),
            )


class TestMultiStepInvestigate:
    def test_beam_one_selects_planted_chain_and_examines_nine(self):
        investigation = multi_step_investigate(
            Observation("alert", parse_statement("anomaly(Case1)")),
            ladder_rules(),
            [],
            [],
            [ladder_source()],
            Limits(max_depth=3, beam_width=1),
        )
        trace = investigation.trace
        assert trace.examined == 9
        selected = [step.selected for step in trace.steps]
        assert selected == ["d1.lvl1-a", "d1.lvl1-a.lvl2-ab", "d1.lvl1-a.lvl2-ab.lvl3-abc"]
        assert trace.stop_reason == "max depth reached"
        assert set(investigation.networks) == {"d1.lvl1-a.lvl2-ab.lvl3-abc"}

    def test_unbounded_beam_equals_exhaustive_composition(self):
        investigation = multi_step_investigate(
            Observation("alert", parse_statement("anomaly(Case1)")),
            ladder_rules(),
            [],
            [],
            [ladder_source()],
            Limits(max_depth=3, beam_width=None),
        )
        assert investigation.trace.examined == 3 + 9 + 27
        survivors = set(investigation.networks)
        assert len(survivors) == 27

        # exhaustive single-step composition of the rule chains
        expected = set()
        for v1, v2, v3 in product("abc", repeat=3):
            expected.add(f"d1.lvl1-{v1}.lvl2-{v1}{v2}.lvl3-{v1}{v2}{v3}")
        assert survivors == expected

    def test_beam_at_least_branching_keeps_all_candidates_per_level(self):
        wide = multi_step_investigate(
            Observation("alert", parse_statement("anomaly(Case1)")),
            ladder_rules(),
            [],
            [],
            [ladder_source()],
            Limits(max_depth=2, beam_width=3),
        )
        for step in wide.trace.steps:
            assert set(step.survivors) == {c.id for c in step.candidates}

    def test_depth_one_equals_abduce_plus_evaluate(self):
        investigation = multi_step_investigate(
            Observation("alert", parse_statement("anomaly(Case1)")),
            ladder_rules(),
            [],
            [],
            [ladder_source()],
            Limits(max_depth=1, beam_width=None),
        )
        assert len(investigation.trace.steps) == 1
        step = investigation.trace.steps[0]
        assert {c.rule for c in step.candidates} == {"lvl1-a", "lvl1-b", "lvl1-c"}
        assert step.rankings[0].probability is SP.L  # evidence for phen-a

    def test_no_explaining_rule_stops_immediately(self):
        investigation = multi_step_investigate(
            Observation("alert", parse_statement("unheard-of(X)")),
            ladder_rules(),
            [],
            [],
            [ladder_source()],
            Limits(max_depth=3, beam_width=1),
        )
        assert investigation.trace.stop_reason == "no explanation in KB"
        assert investigation.trace.steps[0].stop_reason == "no explanation in KB"
        assert investigation.networks == {}

    def test_stops_when_survivor_reaches_almost_certain(self):
        source = ladder_source()
        strong = multi_step_investigate(
            Observation("alert", parse_statement("anomaly(Case1)")),
            ladder_rules(),
            [],
            [],
            [_boosted(source)],
            Limits(max_depth=3, beam_width=1),
        )
        assert "almost certain" in strong.trace.stop_reason
        assert len(strong.trace.steps) == 1

    def test_examined_bounded_by_beam_branching_depth(self):
        investigation = multi_step_investigate(
            Observation("alert", parse_statement("anomaly(Case1)")),
            ladder_rules(),
            [],
            [],
            [ladder_source()],
            Limits(max_depth=3, beam_width=2),
        )
        assert investigation.trace.examined <= 2 * 3 * 3 + 3

    def test_determinism(self):
        def run():
            return multi_step_investigate(
                Observation("alert", parse_statement("anomaly(Case1)")),
                ladder_rules(),
                [],
                [],
                [ladder_source()],
                Limits(max_depth=3, beam_width=1),
            )

        first, second = run(), run()
        assert first.trace == second.trace

    def test_unverified_steps_marked(self):
        # no evidence at all: the chain is accepted without verification
        from inquest.collection import FixtureSource

        investigation = multi_step_investigate(
            Observation("alert", parse_statement("anomaly(Case1)")),
            ladder_rules(),
            [],
            [],
            [FixtureSource([], source_id="empty")],
            Limits(max_depth=2, beam_width=1),
        )
        for step in investigation.trace.steps:
            assert set(step.unverified) == set(step.survivors)

    def test_bad_limits_rejected(self):
        with pytest.raises(ContractViolation):
            Limits(max_depth=0)
        with pytest.raises(ContractViolation):
            Limits(max_depth=2, beam_width=0)


def _boosted(source):
    """Same fixture with the first-level item raised to almost certain."""
    from inquest.collection import FixtureSource
    import dataclasses

    items = [
        dataclasses.replace(item, credibility=SP.AC) if item.id == "ev-phen-a" else item
        for item in source._items
    ]
    return FixtureSource(items, source_id="boosted")
