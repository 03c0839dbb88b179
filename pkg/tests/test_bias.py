"""Each detector fires on its positive fixture and stays silent on the
minimally different negative one."""

from __future__ import annotations

import dataclasses

import pytest

from inquest.abduction import Limits, Observation, abduce, multi_step_investigate
from inquest.bias import (
    BiasKind,
    detect_absence_of_evidence,
    detect_confirmation,
    detect_satisficing,
)
from inquest.calculus import SymbolicProbability as SP
from inquest.collection import (
    CollectionRequest,
    EvidenceRepository,
    RequestStatus,
    apply_attachments,
    collect,
    decompose,
    generate_requests,
)
from inquest.errors import ContractViolation
from inquest.evidence import EvidenceItem, EvidenceType
from inquest.network import (
    Argument,
    ArgumentationNetwork,
    EvidenceLink,
    EvidenceRef,
    HypothesisNode,
    NodeRole,
    Side,
    evaluate,
)
from inquest.statements import parse_statement

from fixtures_shared import ship_rules
from test_network import h2a_network


class TestConfirmation:
    def test_silent_when_disfavoring_evidence_present(self):
        assert detect_confirmation(h2a_network(), []) == []

    def test_fires_when_contrary_side_removed_and_never_searched(self):
        network = h2a_network()
        links = {k: v for k, v in network.evidence_links.items() if k != "le3"}
        refs = {k: v for k, v in network.evidence.items() if k != "E3"}
        stripped = dataclasses.replace(network, evidence_links=links, evidence=refs)
        findings = detect_confirmation(stripped, [])
        assert len(findings) == 1
        assert findings[0].kind is BiasKind.CONFIRMATION
        assert findings[0].location == "H2a"
        assert "H2a" in findings[0].explanation

    def test_silent_when_contrary_was_searched_and_exhausted(self):
        network = h2a_network()
        links = {k: v for k, v in network.evidence_links.items() if k != "le3"}
        refs = {k: v for k, v in network.evidence.items() if k != "E3"}
        stripped = dataclasses.replace(network, evidence_links=links, evidence=refs)
        contrary_request = CollectionRequest(
            id="req.H2a.repo",
            leaf="H2a",
            source="repo",
            query="no-meeting-observed(Ship1)",
            side=Side.DISFAVORING,
            status=RequestStatus.EXHAUSTED,
        )
        assert detect_confirmation(stripped, [contrary_request]) == []

    def test_reports_topmost_node_only(self):
        network = ArgumentationNetwork.build(
            nodes=[
                HypothesisNode("root", "root", NodeRole.ROOT),
                HypothesisNode("mid", "mid", NodeRole.INTERMEDIATE),
                HypothesisNode("leaf", "leaf", NodeRole.LEAF),
            ],
            arguments=[
                Argument("a1", "root", Side.FAVORING, SP.C, ("mid",)),
                Argument("a2", "mid", Side.FAVORING, SP.C, ("leaf",)),
            ],
            evidence_links=[EvidenceLink("l1", "leaf", "e1", Side.FAVORING, SP.C)],
            competing_roots=["root"],
            evidence=[EvidenceRef("e1", SP.L)],
        )
        findings = detect_confirmation(network, [])
        assert [f.location for f in findings] == ["root"]


class TestSatisficing:
    def run_ship_investigation(self):
        repo = EvidenceRepository(
            items=[
                EvidenceItem(
                    id="ev-loiter",
                    type=EvidenceType.TANGIBLE_DEMONSTRATIVE,
                    statement="performs-covert-goods-transfer(Ship1)",
                    credibility=SP.L,
                )
            ]
        )
        return multi_step_investigate(
            Observation("alert-1", parse_statement("ais-track-lost(Ship1, Time1, Location1)")),
            ship_rules(),
            [],
            [],
            [repo],
            Limits(max_depth=1, beam_width=None),
        )

    def test_silent_when_all_candidates_developed(self):
        investigation = self.run_ship_investigation()
        developed = {c.id for s in investigation.trace.steps for c in s.candidates}
        assert detect_satisficing(investigation.trace, developed, "an-1") == []

    def test_fires_when_only_first_candidate_developed(self):
        investigation = self.run_ship_investigation()
        first = investigation.trace.steps[0].candidates[0]
        findings = detect_satisficing(investigation.trace, {first.id}, "an-1")
        assert len(findings) == 1
        finding = findings[0]
        assert finding.kind is BiasKind.SATISFICING
        assert "illegal fishing" in finding.explanation
        assert "pirates" in finding.explanation

    def test_silent_when_no_alternatives_existed(self):
        repo = EvidenceRepository()
        investigation = multi_step_investigate(
            Observation("alert-1", parse_statement("ais-track-lost(Ship1, T1, L1)")),
            ship_rules()[:1],
            [],
            [],
            [repo],
            Limits(max_depth=1, beam_width=None),
        )
        developed = {c.id for s in investigation.trace.steps for c in s.candidates}
        assert detect_satisficing(investigation.trace, developed, "an-1") == []


class TestAbsenceOfEvidence:
    def sparse_network(self, answered_leaves):
        """Root over four leaves, the first `answered_leaves` carrying
        very likely favoring evidence through independent arguments."""
        nodes = [HypothesisNode("root", "root", NodeRole.ROOT)]
        arguments = []
        links = []
        refs = []
        for i in range(4):
            leaf = f"leaf{i}"
            nodes.append(HypothesisNode(leaf, leaf, NodeRole.LEAF))
            arguments.append(Argument(f"a{i}", "root", Side.FAVORING, SP.C, (leaf,)))
            if i < answered_leaves:
                refs.append(EvidenceRef(f"e{i}", SP.VL))
                links.append(EvidenceLink(f"l{i}", leaf, f"e{i}", Side.FAVORING, SP.C))
        return ArgumentationNetwork.build(
            nodes=nodes,
            arguments=arguments,
            evidence_links=links,
            competing_roots=["root"],
            evidence=refs,
        )

    def test_fires_on_confident_root_with_thin_coverage(self):
        network = self.sparse_network(answered_leaves=1)
        result = evaluate(network)
        assert result.probabilities["root"] is SP.VL
        assert result.coverage["root"].ratio == 0.25
        findings = detect_absence_of_evidence(network, result)
        assert len(findings) == 1
        finding = findings[0]
        assert finding.kind is BiasKind.ABSENCE_OF_EVIDENCE
        assert "leaf1" in finding.explanation
        assert "leaf2" in finding.explanation
        assert "leaf3" in finding.explanation

    def test_silent_with_full_coverage(self):
        network = self.sparse_network(answered_leaves=4)
        result = evaluate(network)
        assert result.probabilities["root"] is SP.VL
        assert detect_absence_of_evidence(network, result) == []

    def test_silent_when_conclusion_not_confident(self):
        network = self.sparse_network(answered_leaves=0)
        result = evaluate(network)
        assert result.probabilities["root"] is SP.NS
        assert detect_absence_of_evidence(network, result) == []

    def test_threshold_validated(self):
        network = self.sparse_network(1)
        result = evaluate(network)
        with pytest.raises(ContractViolation):
            detect_absence_of_evidence(network, result, threshold=0.0)
        with pytest.raises(ContractViolation):
            detect_absence_of_evidence(network, result, threshold=1.5)

    def test_detectors_are_deterministic(self):
        network = self.sparse_network(1)
        result = evaluate(network)
        assert detect_absence_of_evidence(network, result) == detect_absence_of_evidence(
            network, result
        )
