import random
from fractions import Fraction

import pytest

from prodmetrics import FunctionOnX, WeightVector, validate_instance
from prodmetrics.io import instance_to_dict
from prodmetrics.metrics import simplex_grid
from prodmetrics.verify import (
    Instance,
    InstanceSpec,
    check_duality_fixed_e,
    check_metric_axioms,
    check_norm_characterization,
    check_prop1,
    check_prop2,
    check_sandwich,
    check_theorem,
    function_in_F_e,
    generate_instance,
    random_semi_metric,
    random_spec,
    run_suite,
)
from prodmetrics.smoothness import in_F_e


def test_generation_is_deterministic():
    spec = InstanceSpec(1, 2, (2, 3), 8)
    assert generate_instance(spec) == generate_instance(spec)
    assert random_spec(5) == random_spec(5)


def test_single_point_space_is_degenerate_but_valid():
    inst = generate_instance(InstanceSpec(3, 1, (1,), 8))
    assert inst.mu == inst.nu
    entry = check_theorem(inst)
    assert entry.passed and entry.detail["dobrushin"] == "0/1"


@pytest.mark.parametrize("seed", range(1, 16))
def test_generated_instances_revalidate(seed):
    inst = generate_instance(random_spec(seed))
    doc = instance_to_dict(inst.space, inst.mu, inst.nu)
    assert validate_instance(doc) == (inst.space, inst.mu, inst.nu)
    for site in inst.space.sites:
        assert all(v.denominator <= 8 for row in site.metric for v in row)
    assert all(m.denominator <= 8 for m in inst.mu.mass + inst.nu.mass)


def test_generation_shape_validation():
    with pytest.raises(ValueError):
        InstanceSpec(1, 5, (1,) * 5)
    with pytest.raises(ValueError):
        InstanceSpec(1, 2, (1,))
    with pytest.raises(ValueError):
        InstanceSpec(-1, 1, (1,))


def test_semi_metric_kinds():
    inst = generate_instance(InstanceSpec(9, 2, (2, 2)))
    rng = random.Random(0)
    for kind in ("symmetric", "asymmetric", "signed"):
        c = random_semi_metric(inst.space, rng, kind=kind)
        assert c.is_semi_metric()
        assert c.is_symmetric() == (kind == "symmetric")
    with pytest.raises(ValueError):
        random_semi_metric(inst.space, rng, kind="weird")


def test_function_in_F_e_lands_in_F_e():
    inst = generate_instance(InstanceSpec(4, 2, (3, 2)))
    rng = random.Random(2)
    for e in simplex_grid(2, 4):
        assert in_F_e(function_in_F_e(inst.space, e, rng), e)


def test_checks_on_dirac_and_identical():
    inst = generate_instance(InstanceSpec(7, 2, (2, 2)))
    space = inst.space
    from prodmetrics import Distribution
    dirac = Instance(0, space, Distribution.point_mass(space, (0, 0)),
                     Distribution.point_mass(space, (1, 1)))
    entry = check_theorem(dirac)
    expected = max(space.site_distance(s, (0, 0), (1, 1)) for s in range(2))
    assert entry.passed and entry.detail["steif"] == f"{expected.numerator}/{expected.denominator}"
    same = Instance(0, space, inst.mu, inst.mu)
    assert check_theorem(same).detail["steif"] == "0/1"
    assert check_duality_fixed_e(inst, WeightVector.zero(2)).detail["transport"] == "0/1"
    assert check_metric_axioms(inst.mu, inst.mu, inst.mu, 0).passed


def test_norm_check_directions():
    inst = generate_instance(InstanceSpec(8, 2, (2, 2)))
    space = inst.space
    grid = simplex_grid(2, 4)
    assert check_norm_characterization(FunctionOnX.constant(space, 3), 0, grid).passed
    ind = FunctionOnX.from_callable(space, lambda x: int(x[0] == 1))
    res = check_norm_characterization(ind.scaled(Fraction(1, 2) / space.sites[0].metric[0][1]), 0, grid)
    assert res.passed and res.detail["members"] > 0
    big = check_norm_characterization(ind.scaled(4 / space.sites[0].metric[0][1]), 0, grid)
    assert big.passed and big.detail["members"] == 0


def test_prop_checks():
    inst = generate_instance(InstanceSpec(12, 2, (2, 3)))
    rng = random.Random(1)
    c = random_semi_metric(inst.space, rng, kind="signed")
    assert check_prop1(FunctionOnX.constant(inst.space), c, 0).passed
    assert check_prop2(inst, c).passed
    assert check_sandwich(inst).passed


def test_suite_report_is_reproducible():
    a = run_suite(seed=1, count=3, grid=2)
    b = run_suite(seed=1, count=3, grid=2)
    assert a.passed
    assert a.to_text() == b.to_text()
    assert {e.name for e in a.entries} == {
        "theorem", "duality_fixed_e", "norm_characterization", "prop1", "prop2",
        "metric_axioms", "sandwich"}
