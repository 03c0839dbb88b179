"""Statement parsing and one-way unification."""

from __future__ import annotations

import pytest

from inquest.errors import StatementParseError
from inquest.statements import (
    Atom,
    Variable,
    match_any,
    match_atom,
    parse_atom,
    parse_statement,
    substitute,
    substitute_atom,
)


class TestParsing:
    def test_ground_atom(self):
        atom = parse_atom("ais-track-lost(Ship1, Time1, Location1)")
        assert atom.predicate == "ais-track-lost"
        assert atom.args == ("Ship1", "Time1", "Location1")
        assert atom.is_ground()

    def test_variables_and_types(self):
        atom = parse_atom("covert-transfer(?ship:vessel, ?buyer)")
        ship, buyer = atom.args
        assert ship == Variable("ship", "vessel")
        assert buyer == Variable("buyer", None)
        assert not atom.is_ground()

    def test_zero_arity(self):
        assert parse_atom("night-time") == Atom("night-time")

    def test_conjunction_round_trip(self):
        stmt = parse_statement("a(x) & b(x, ?y)")
        assert len(stmt.atoms) == 2
        assert stmt.render() == "a(x) & b(x, ?y)"
        assert parse_statement(stmt.render()) == stmt

    @pytest.mark.parametrize(
        "bad", ["", "f(", "f()", "f(a,)", "f(a) &", "f(a b)", "?x(a)", "f(a,,b)"]
    )
    def test_rejects_malformed(self, bad):
        with pytest.raises(StatementParseError):
            parse_statement(bad)


class TestMatching:
    def test_binds_variables(self):
        pattern = parse_atom("ais-track-lost(?ship, ?t, ?loc)")
        target = parse_atom("ais-track-lost(Ship1, Time1, Location1)")
        assert match_atom(pattern, target) == {"ship": "Ship1", "t": "Time1", "loc": "Location1"}

    def test_repeated_variable_must_agree(self):
        pattern = parse_atom("meets(?x, ?x)")
        assert match_atom(pattern, parse_atom("meets(a, a)")) == {"x": "a"}
        assert match_atom(pattern, parse_atom("meets(a, b)")) is None

    def test_constants_must_be_equal(self):
        assert match_atom(parse_atom("f(a)"), parse_atom("f(b)")) is None
        assert match_atom(parse_atom("f(a)"), parse_atom("g(a)")) is None
        assert match_atom(parse_atom("f(a)"), parse_atom("f(a, b)")) is None

    def test_type_check_against_registry(self):
        pattern = parse_atom("track-lost(?ship:vessel)")
        registry = {"Ship1": "vessel", "Truck1": "truck"}
        assert match_atom(pattern, parse_atom("track-lost(Ship1)"), registry) == {"ship": "Ship1"}
        assert match_atom(pattern, parse_atom("track-lost(Truck1)"), registry) is None
        # constants of undeclared type stay permissive
        assert match_atom(pattern, parse_atom("track-lost(Boat9)"), registry) == {"ship": "Boat9"}

    def test_target_side_variables_stay_opaque(self):
        pattern = parse_atom("rendezvous(?a, ?b)")
        target = parse_atom("rendezvous(Ship1, ?other)")
        bindings = match_atom(pattern, target)
        assert bindings == {"a": "Ship1", "b": Variable("other")}
        # a pattern constant never matches an unknown
        assert match_atom(parse_atom("rendezvous(Ship1, Ship2)"), target) is None

    def test_match_any_scans_conjunction(self):
        stmt = parse_statement("covert-transfer(Ship1, Buyer1) & loiters(Ship1)")
        assert match_any(parse_atom("loiters(?s)"), stmt) == {"s": "Ship1"}
        assert match_any(parse_atom("fishes(?s)"), stmt) is None


class TestSubstitution:
    def test_bound_and_unbound(self):
        atom = parse_atom("covert-transfer(?ship, ?buyer)")
        out = substitute_atom(atom, {"ship": "Ship1"})
        assert out.render() == "covert-transfer(Ship1, ?buyer)"

    def test_statement_substitution_keeps_variable_terms(self):
        stmt = parse_statement("sold(?a, ?b)")
        out = substitute(stmt, {"a": "x", "b": Variable("other")})
        assert out.render() == "sold(x, ?other)"
