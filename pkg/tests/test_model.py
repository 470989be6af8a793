import pytest

from certplc import (canonical_text, model_digest, parse_model, validate)
from certplc.model import SfcModel, Transition
from certplc.parsing import ParseError
from certplc import expr as E

from conftest import FIXTURES, fixture_names, load_model

MINIMAL = "step Only [initial]\n"


class TestParse:
    def test_loop_fixture_shape(self):
        model = load_model("loop")
        assert model.steps == ("Init", "Return", "Step2")
        assert model.initial == ("Init",)
        assert len(model.transitions) == 3
        assert model.action_ids() == ("A_Init",)
        assert model.actions_of("Init") == ("A_Init",)
        assert model.actions_of("Return") == ()

    def test_minimal_model(self):
        model = parse_model(MINIMAL)
        assert model.steps == ("Only",)
        assert model.vars == ()
        assert model.transitions == ()
        assert validate(model) == []

    def test_unknown_step_in_target(self):
        bad = MINIMAL + "trans {Only} -[ true ]-> {Ghost}\n"
        with pytest.raises(ParseError, match="unknown step"):
            parse_model(bad)

    def test_duplicate_step(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_model("step A [initial]\nstep A\n")

    def test_duplicate_variable(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_model("var x : int8\nvar x : int16\n" + MINIMAL)

    def test_type_mismatch_in_guard(self):
        bad = ("var x : int16\nvar b : bool\n" + MINIMAL +
               "trans {Only} -[ x + b > 1 ]-> {Only}\n")
        with pytest.raises(ParseError):
            parse_model(bad)

    def test_guard_must_be_boolean(self):
        bad = "var x : int16\n" + MINIMAL + "trans {Only} -[ x + 1 ]-> {Only}\n"
        with pytest.raises(ParseError, match="boolean"):
            parse_model(bad)

    def test_initializer_out_of_range(self):
        with pytest.raises(ParseError, match="range"):
            parse_model("var x : int8 = 300\n" + MINIMAL)

    def test_time_flag_on_bool_rejected(self):
        with pytest.raises(ParseError, match="time"):
            parse_model("var b : bool [time]\n" + MINIMAL)

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_model("step Ok [initial]\nstep 123\n")
        assert err.value.line == 2
        assert err.value.col == 6

    def test_initializers_parse(self):
        model = parse_model("var x : int16 = 7\nvar t : int32 [time]\n"
                            "var b : bool = true\n" + MINIMAL)
        by_name = {v.name: v for v in model.vars}
        assert by_name["x"].init == 7
        assert by_name["t"].is_time
        assert by_name["b"].init == 1

    def test_priority_parses(self):
        model = parse_model(MINIMAL +
                            "trans {Only} -[ true ]-> {Only} [prio 2]\n")
        assert model.transitions[0].priority == 2


class TestValidate:
    def test_fixture_models_clean(self):
        for name in fixture_names():
            assert validate(load_model(name)) == []

    def test_empty_initial_set(self):
        model = parse_model(MINIMAL)
        broken = SfcModel(model.vars, model.steps, (), model.actions,
                          model.step_actions, model.transitions)
        assert any("initial" in v for v in validate(broken))

    def test_step_actions_not_total(self):
        model = parse_model(MINIMAL)
        broken = SfcModel(model.vars, model.steps, model.initial,
                          model.actions, (), model.transitions)
        assert any("not total" in v for v in validate(broken))

    def test_unknown_action_reference(self):
        model = parse_model(MINIMAL)
        broken = SfcModel(model.vars, model.steps, model.initial,
                          model.actions, (("Only", ("Ghost",)),),
                          model.transitions)
        assert any("unknown action" in v for v in validate(broken))

    def test_duplicate_transition_source(self):
        model = parse_model(MINIMAL)
        t = Transition(("Only", "Only"), E.BoolLit(True), ("Only",))
        broken = SfcModel(model.vars, model.steps, model.initial,
                          model.actions, model.step_actions, (t,))
        assert any("duplicate source" in v for v in validate(broken))


class TestCanonical:
    def test_parse_print_parse_is_parse(self):
        for name in fixture_names():
            text = (FIXTURES / f"{name}.sfc").read_text()
            once = parse_model(text)
            again = parse_model(canonical_text(once))
            assert once == again, name
            assert canonical_text(once) == canonical_text(again)

    def test_declaration_order_is_normalized(self):
        a = parse_model("var a : int8\nvar b : int16\n" + MINIMAL)
        b = parse_model("var b : int16\nvar a : int8\n" + MINIMAL)
        assert a == b
        assert canonical_text(a) == canonical_text(b)


class TestDigest:
    def test_deterministic(self):
        text = (FIXTURES / "loop.sfc").read_text()
        assert model_digest(parse_model(text)) == model_digest(parse_model(text))

    def test_semantic_edit_changes_digest(self):
        text = (FIXTURES / "loop.sfc").read_text()
        assert model_digest(parse_model(text)) != \
            model_digest(parse_model(text.replace("x < 10", "x < 11")))

    def test_reordered_declarations_share_digest(self):
        a = parse_model("var a : int8\nvar b : int16\n" + MINIMAL)
        b = parse_model("var b : int16\nvar a : int8\n" + MINIMAL)
        assert model_digest(a) == model_digest(b)

    def test_is_sha256_hex(self):
        d = model_digest(parse_model(MINIMAL))
        assert len(d) == 64
        int(d, 16)
