import pytest

from certplc import expr as E
from certplc import properties as P
from certplc.parsing import ParseError
from certplc.semantics import SfcState, init_state



def val(n, ty="int16"):
    return E.Value(ty, n)


class TestParsing:
    def test_file_with_several_invariants(self, loop_model):
        invs = P.parse_properties(
            "invariant a : always (x <= 10);\n"
            "invariant b : always (step(Init) || step(Step2));\n",
            loop_model)
        assert [i.name for i in invs] == ["a", "b"]

    def test_atoms(self, loop_model):
        f = P.parse_formula_text(
            "step(Init) && !action(A_Init) && actions_within {A_Init} "
            "&& steps_within {Init, Step2}", loop_model)
        kinds = set()

        def walk(g):
            kinds.add(type(g).__name__)
            for attr in ("lhs", "rhs", "arg"):
                if hasattr(g, attr):
                    walk(getattr(g, attr))
        walk(f)
        assert {"StepActive", "ActionActive", "ActionsWithin",
                "StepsWithin", "PNot", "PAnd"} <= kinds

    def test_unknown_step_rejected(self, loop_model):
        with pytest.raises(ParseError, match="unknown step"):
            P.parse_formula_text("step(Ghost)", loop_model)

    def test_unknown_action_rejected(self, loop_model):
        with pytest.raises(ParseError, match="unknown action"):
            P.parse_formula_text("actions_within {Ghost}", loop_model)

    def test_non_boolean_atom_rejected(self, loop_model):
        with pytest.raises(ParseError, match="boolean"):
            P.parse_formula_text("x + 1", loop_model)

    def test_duplicate_invariant_names(self, loop_model):
        with pytest.raises(ParseError, match="duplicate"):
            P.parse_properties("invariant a : always (true);\n"
                               "invariant a : always (true);", loop_model)

    def test_parenthesized_arithmetic(self, loop_model):
        f = P.parse_formula_text("(x + 1) <= 10", loop_model)
        assert isinstance(f, P.ArithAtom)


class TestPrinting:
    @pytest.mark.parametrize("text", [
        "x <= 10",
        "step(Init) || step(Step2)",
        "!(step(Init) && step(Step2))",
        "actions_within {A_Init}",
        "x <= 10 && (!action(A_Init) || x <= 9)",
        "steps_within {Init, Return, Step2}",
    ])
    def test_round_trip(self, text, loop_model):
        f = P.parse_formula_text(text, loop_model)
        printed = P.formula_text(f)
        assert P.parse_formula_text(printed, loop_model) == f

    def test_invariant_text(self, loop_model):
        inv = P.parse_properties("invariant a : always (x <= 10);",
                                 loop_model)[0]
        assert P.invariant_text(inv) == "invariant a : always (x <= 10);"


class TestSemantics:
    def test_holds_on_initial(self, loop_model):
        s = init_state(loop_model)
        assert P.holds_on(
            P.parse_formula_text("step(Init) && action(A_Init)", loop_model), s)
        assert not P.holds_on(
            P.parse_formula_text("step(Return)", loop_model), s)

    def test_subset_atoms(self, loop_model):
        s = SfcState({"x": val(0)}, ("Init",), ("A_Init", "A_Init"))
        assert P.holds_on(P.ActionsWithin(("A_Init",)), s)
        assert not P.holds_on(P.ActionsWithin(()), s)
        assert P.holds_on(P.StepsWithin(("Init", "Step2")), s)

    def test_negate_round_trip(self, loop_model):
        s = init_state(loop_model)
        for text in ("x <= 10", "step(Init) && x <= 0",
                     "actions_within {} || step(Return)"):
            f = P.parse_formula_text(text, loop_model)
            assert P.holds_on(f, s) != P.holds_on(P.negate(f), s)

    def test_conjuncts_flatten(self, loop_model):
        f = P.parse_formula_text("x <= 10 && step(Init) && x <= 9",
                                 loop_model)
        assert len(P.conjuncts(f)) == 3
