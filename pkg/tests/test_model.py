import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sweepd import model
from sweepd.errors import (
    IllegalTransition,
    MissingParameter,
    TypeMismatch,
    UnknownParameter,
    ValidationError,
)
from sweepd.model import ParameterDefinition, Run, canonicalize, next_seed, transition


def defs(*specs):
    return [ParameterDefinition(name=n, kind=k, default=d, position=i)
            for i, (n, k, d) in enumerate(specs)]


class TestCanonicalize:
    def test_two_floats(self):
        values, key = canonicalize(defs(("p1", "float", None), ("p2", "float", None)),
                                   {"p1": 0.2, "p2": 0.5})
        assert values == {"p1": 0.2, "p2": 0.5}
        assert key == "p1=0.2;p2=0.5"

    def test_default_fill(self):
        values, _ = canonicalize(defs(("n", "integer", 10)), {})
        assert values == {"n": 10}

    def test_wrong_kind(self):
        with pytest.raises(TypeMismatch):
            canonicalize(defs(("p1", "float", None)), {"p1": "abc"})

    def test_unknown_parameter(self):
        with pytest.raises(UnknownParameter):
            canonicalize(defs(("p1", "float", None)), {"p1": 1.0, "zz": 2})

    def test_missing_without_default(self):
        with pytest.raises(MissingParameter):
            canonicalize(defs(("p1", "float", None), ("p2", "float", None)), {"p1": 1.0})

    def test_integer_literal_for_float_kind(self):
        values, key = canonicalize(defs(("p1", "float", None)), {"p1": 1})
        assert values == {"p1": 1.0}
        assert isinstance(values["p1"], float)
        assert key == "p1=1.0"

    def test_integral_float_for_integer_kind(self):
        values, _ = canonicalize(defs(("n", "integer", None)), {"n": 10.0})
        assert values == {"n": 10}

    def test_fractional_float_for_integer_kind_rejected(self):
        with pytest.raises(TypeMismatch):
            canonicalize(defs(("n", "integer", None)), {"n": 10.5})

    def test_bool_not_accepted_as_number(self):
        with pytest.raises(TypeMismatch):
            canonicalize(defs(("n", "integer", None)), {"n": True})
        with pytest.raises(TypeMismatch):
            canonicalize(defs(("x", "float", None)), {"x": False})

    def test_boolean_and_string_rendering(self):
        values, key = canonicalize(defs(("flag", "boolean", None), ("s", "string", None)),
                                   {"flag": True, "s": "hello"})
        assert key == 'flag=true;s="hello"'

    def test_string_separators_cannot_forge_keys(self):
        d = defs(("a", "string", None), ("b", "string", None))
        _, key1 = canonicalize(d, {"a": "x;b=y", "b": "z"})
        _, key2 = canonicalize(d, {"a": "x", "b": "y;b=z"})
        assert key1 != key2

    def test_key_sorted_by_name(self):
        d = defs(("b", "integer", None), ("a", "integer", None))
        _, key = canonicalize(d, {"b": 2, "a": 1})
        assert key == "a=1;b=2"


# hypothesis: canonicalize is pure; distinct keys iff distinct values
_vals = st.one_of(
    st.integers(min_value=-10**6, max_value=10**6),
    st.floats(allow_nan=False, allow_infinity=False, width=64),
    st.booleans(),
    st.text(max_size=20),
)


@settings(max_examples=200)
@given(st.dictionaries(st.sampled_from(["a", "b", "c", "d"]), _vals, min_size=1))
def test_canonical_key_deterministic_and_order_free(values):
    kinds = {bool: "boolean", int: "integer", float: "float", str: "string"}
    d = [ParameterDefinition(name=n, kind=kinds[type(v)], position=i)
         for i, (n, v) in enumerate(values.items())]
    _, key1 = canonicalize(d, values)
    _, key2 = canonicalize(d, dict(reversed(list(values.items()))))
    assert key1 == key2
    assert isinstance(key1.encode("utf-8"), bytes)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False),
                          st.floats(allow_nan=False, allow_infinity=False)),
                min_size=1, max_size=30))
def test_distinct_key_count_matches_distinct_values(pairs):
    d = defs(("p1", "float", None), ("p2", "float", None))
    keys = {canonicalize(d, {"p1": a, "p2": b})[1] for a, b in pairs}
    distinct = {(repr(float(a)), repr(float(b))) for a, b in pairs}
    assert len(keys) == len(distinct)


class TestDefinitions:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ValidationError):
            model.validate_definitions(defs(("a", "float", None)) * 2)

    def test_positions_must_be_contiguous(self):
        bad = [ParameterDefinition(name="a", kind="float", position=0),
               ParameterDefinition(name="b", kind="float", position=2)]
        with pytest.raises(ValidationError):
            model.validate_definitions(bad)

    def test_default_typechecked(self):
        with pytest.raises(TypeMismatch):
            ParameterDefinition(name="a", kind="integer", default="x")

    def test_simulator_requires_command(self):
        with pytest.raises(ValidationError):
            model.Simulator(id="s", name="s", command="")


class TestSeeds:
    def test_smallest_free(self):
        assert next_seed([]) == 0
        assert next_seed([0, 1, 2]) == 3
        assert next_seed([1, 2]) == 0
        assert next_seed([0, 2, 3]) == 1

    @given(st.sets(st.integers(min_value=0, max_value=200)))
    def test_never_collides(self, used):
        seed = next_seed(used)
        assert seed >= 0
        assert seed not in used


def _run(status):
    return Run(id="r", parameter_set_id="p", seed=0, host_id="h", status=status)


class TestTransitions:
    LEGAL = {
        ("created", "submitted"), ("created", "cancelled"),
        ("submitted", "started"), ("submitted", "cancelled"),
        ("running", "succeeded"), ("running", "failed"),
    }

    def test_exhaustive_state_event_matrix(self):
        for status, event in itertools.product(model.STATUSES, model.EVENTS):
            run = _run(status)
            if (status, event) in self.LEGAL:
                out = transition(run, event, job_id="j1",
                                 exit_code=1 if event == "failed" else None)
                assert out.status != status
            else:
                with pytest.raises(IllegalTransition):
                    transition(run, event, job_id="j1")
                assert run.status == status  # frozen snapshot untouched

    def test_submit_happy_path(self):
        out = transition(_run("created"), "submitted", job_id="j1")
        assert out.status == "submitted"
        assert out.job_id == "j1"
        assert out.submitted_at is not None

    def test_succeeded_records_exit_zero(self):
        out = transition(_run("running"), "succeeded", exit_code=0)
        assert out.status == "finished"
        assert out.exit_code == 0
        assert out.finished_at is not None

    def test_terminal_states_frozen(self):
        for terminal in ("finished", "failed", "cancelled"):
            for event in model.EVENTS:
                with pytest.raises(IllegalTransition):
                    transition(_run(terminal), event, job_id="x")

    def test_failed_rejects_exit_zero(self):
        with pytest.raises(IllegalTransition):
            transition(_run("running"), "failed", exit_code=0)

    def test_submitted_requires_job_id(self):
        with pytest.raises(IllegalTransition):
            transition(_run("created"), "submitted")

    def test_exit_code_zero_iff_finished(self):
        ok = transition(_run("running"), "succeeded", exit_code=0)
        bad = transition(_run("running"), "failed", exit_code=3)
        assert (ok.exit_code == 0) == (ok.status == "finished")
        assert (bad.exit_code == 0) == (bad.status == "finished")
