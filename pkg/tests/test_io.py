import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodmetrics import InstanceError, bundled_instance
from prodmetrics import io
from prodmetrics.verify import generate_instance, random_spec


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10 ** 9))
def test_instance_round_trip(seed):
    inst = generate_instance(random_spec(seed))
    text = io.dumps_instance(inst.space, inst.mu, inst.nu)
    space, mu, nu = io.loads_instance(text)
    assert (space, mu, nu) == (inst.space, inst.mu, inst.nu)
    assert io.dumps_instance(space, mu, nu) == text


def test_scalars_are_ints_or_fraction_strings():
    assert io.scalar(Fraction(4, 2)) == 2
    assert io.scalar(Fraction(-3, 6)) == "-1/2"


def test_decimal_approximation():
    assert io.decimal_approx(Fraction(1, 3)) == "0.333333333333"
    assert io.decimal_approx(Fraction(0)) == "0"
    assert io.value_entry(Fraction(0))["exact"] == "0/1"


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    json.dumps({"sites": [], "mu": {}, "nu": {}}),
    json.dumps({"format": 2, "sites": [], "mu": {}, "nu": {}}),
    json.dumps({"format": 1, "sites": [{"points": ["0"], "metric": [["0.5"]]}],
                "mu": {"0": 1}, "nu": {"0": 1}}),
    json.dumps({"format": 1, "sites": [{"points": ["0"], "metric": [[0]]}], "mu": {"0": 1}}),
])
def test_malformed_documents(text):
    with pytest.raises(io.ParseError):
        io.loads_instance(text)


def test_validation_errors_are_not_parse_errors():
    doc = {"format": 1, "sites": [{"name": "a", "points": ["0", "1"], "metric": [[0, 1], [2, 0]]}],
           "mu": {"0": "1/2", "1": "1/3"}, "nu": {"1": 1}}
    with pytest.raises(InstanceError) as err:
        io.loads_instance(json.dumps(doc))
    kinds = sorted({v.kind for v in err.value.violations})
    assert kinds == ["BadMass", "NonMetric"]


def test_function_and_cost_documents():
    space, mu, _ = io.load_instance(bundled_instance("bernoulli2.inst"))
    f = io.loads_function(json.dumps({"format": 1, "values": {
        "0,0": 0, "0,1": "1/2", "1,0": 1, "1,1": "-1/3"}}), space)
    assert f((1, 1)) == Fraction(-1, 3)
    assert io.loads_function(json.dumps(io.function_to_dict(f)), space) == f
    with pytest.raises(InstanceError):
        io.loads_function(json.dumps({"format": 1, "values": {"0,0": 1}}), space)
    from prodmetrics import cost_matrix_e, WeightVector
    c = cost_matrix_e(space, WeightVector((Fraction(1, 2), Fraction(1, 2))))
    assert io.loads_cost(json.dumps(io.cost_to_dict(c)), space) == c


def test_bundled_instances_load():
    for name in ("bernoulli2.inst", "dirac.inst", "identical.inst"):
        space, mu, nu = io.load_instance(bundled_instance(name))
        assert len(space) >= 2
