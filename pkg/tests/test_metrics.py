import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import line_metric, total_variation, w1_line
from prodmetrics import (
    BadCost,
    CostOnPairs,
    Distribution,
    ProductSpace,
    Site,
    SpaceMismatch,
    WeightVector,
    cost_matrix_e,
    dobrushin_distance,
    dobrushin_norm,
    dual_potential_value,
    grid_lower_bound,
    in_F_e,
    steif_distance,
    transport_value,
    two_function_value,
)
from prodmetrics.metrics import grid_lower_bounds, kantorovich_pair, simplex_grid, weak_duality_gap
from prodmetrics.verify import random_distribution, random_semi_metric

F = Fraction


def test_identical_distributions_are_at_distance_zero(bernoulli_pair):
    mu, _ = bernoulli_pair
    assert dobrushin_distance(mu, mu).value == 0
    st_res = steif_distance(mu, mu)
    assert st_res.value == 0
    assert max(st_res.witness_plan.site_costs()) == 0


def test_single_site_diracs():
    space = ProductSpace((Site.discrete("a", 2),))
    mu = Distribution.point_mass(space, (0,))
    nu = Distribution.point_mass(space, (1,))
    res = dobrushin_distance(mu, nu)
    assert res.value == 1
    assert res.witness_e.weights == (1,)
    assert steif_distance(mu, nu).value == 1


def test_bernoulli_product(bernoulli_pair):
    # independent per-site optimal couplings: site costs (1/4, 0); the first
    # marginal alone forces 1/4
    mu, nu = bernoulli_pair
    oracle = max(total_variation([F(1, 2)] * 2, [F(3, 4), F(1, 4)]),
                 total_variation([F(1, 2)] * 2, [F(1, 2)] * 2))
    assert oracle == F(1, 4)
    assert dobrushin_distance(mu, nu).value == oracle
    assert steif_distance(mu, nu).value == oracle


def test_dirac_pair_gives_largest_site_distance():
    space = ProductSpace((Site("a", ("0", "1", "2"), line_metric([0, 1, 3])),
                          Site("b", ("0", "1"), line_metric([0, F(5, 2)]))))
    x, y = (0, 0), (2, 1)
    mu, nu = Distribution.point_mass(space, x), Distribution.point_mass(space, y)
    expected = max(space.site_distance(s, x, y) for s in range(2))
    assert expected == 3
    assert steif_distance(mu, nu).value == dobrushin_distance(mu, nu).value == expected


def test_one_dimensional_transport():
    space = ProductSpace((Site.discrete("a", 2),))
    mu = Distribution(space, (F(3, 4), F(1, 4)))
    nu = Distribution(space, (F(1, 4), F(3, 4)))
    e = WeightVector((1,))
    # with m10 = a in [0, 1/4]: m11 = 1/4 - a, m01 = 1/2 + a, m00 = 1/4 - a
    family = [(F(1, 2) + a) + a for a in (F(k, 64) for k in range(17))]
    assert min(family) == F(1, 2)
    value, plan = transport_value(mu, nu, e)
    assert value == F(1, 2)
    assert dual_potential_value(mu, nu, e)[0] == F(1, 2)
    assert plan.first_marginal == mu and plan.second_marginal == nu


def test_zero_weight_gives_zero(bernoulli_pair):
    mu, nu = bernoulli_pair
    zero = WeightVector.zero(2)
    assert transport_value(mu, nu, zero)[0] == 0
    assert dual_potential_value(mu, nu, zero)[0] == 0
    e = WeightVector((F(1, 3), F(1, 3)))
    assert transport_value(mu, mu, e)[0] == 0
    assert dual_potential_value(mu, mu, e)[0] == 0


def _line_product_instance(seed):
    rng = random.Random(seed)
    sites, margs_mu, margs_nu, positions = [], [], [], []
    for s in range(rng.randint(1, 3)):
        n = rng.randint(1, 3)
        pos = sorted(rng.sample(range(0, 12), n))
        pos = [F(p, rng.randint(1, 3)) for p in pos]
        pos = sorted(set(pos))
        n = len(pos)
        sites.append(Site(f"s{s}", tuple(str(i) for i in range(n)), line_metric(pos)))
        positions.append(pos)
        for margs in (margs_mu, margs_nu):
            w = [rng.randint(0, 4) for _ in range(n)]
            if not sum(w):
                w[0] = 1
            margs.append([F(v, sum(w)) for v in w])
    space = ProductSpace(tuple(sites))
    return (space, Distribution.product(space, margs_mu), Distribution.product(space, margs_nu),
            [w1_line(p, a, b) for p, a, b in zip(positions, margs_mu, margs_nu)])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_product_measures_on_line_sites(seed):
    space, mu, nu, w1 = _line_product_instance(seed)
    expected = max(w1)
    assert steif_distance(mu, nu).value == expected
    assert dobrushin_distance(mu, nu).value == expected
    # the transport cost at fixed weights is additive over sites
    e = simplex_grid(space.num_sites, 3)[seed % len(simplex_grid(space.num_sites, 3))]
    assert transport_value(mu, nu, e)[0] == sum(w * v for w, v in zip(e.weights, w1))


def test_witness_invariants(bernoulli_pair):
    mu, nu = bernoulli_pair
    dob = dobrushin_distance(mu, nu)
    assert in_F_e(dob.witness_f, dob.witness_e)
    assert dobrushin_norm(dob.witness_f) <= 1
    assert mu.expect(dob.witness_f) - nu.expect(dob.witness_f) == dob.value
    st_res = steif_distance(mu, nu)
    costs = st_res.witness_plan.site_costs()
    assert all(c <= st_res.witness_t for c in costs)
    assert st_res.witness_t in costs and st_res.witness_t == st_res.value


def test_space_mismatch(bernoulli_pair):
    mu, _ = bernoulli_pair
    other = ProductSpace((Site.discrete("z", 2),))
    nu = Distribution.point_mass(other, (0,))
    with pytest.raises(SpaceMismatch):
        dobrushin_distance(mu, nu)
    with pytest.raises(SpaceMismatch):
        steif_distance(mu, nu)
    with pytest.raises(SpaceMismatch):
        transport_value(mu, nu, WeightVector((1,)))


def test_two_function_program_examples(bernoulli_pair):
    mu, nu = bernoulli_pair
    space = mu.space
    n = len(space)
    c = CostOnPairs(space, tuple(tuple(0 if i == j else 1 for j in range(n)) for i in range(n)))
    assert two_function_value(mu, mu, c, restricted=True) == 0
    e = WeightVector((F(1, 2), F(1, 4)))
    ce = cost_matrix_e(space, e)
    assert two_function_value(mu, nu, ce, True) == dual_potential_value(mu, nu, e)[0]
    assert two_function_value(mu, nu, ce, False) == two_function_value(mu, nu, ce, True)
    with pytest.raises(BadCost):
        two_function_value(mu, nu, CostOnPairs(space, ((1,) * n,) * n), False)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["symmetric", "asymmetric", "signed"]))
def test_two_function_restriction(seed, kind):
    rng = random.Random(seed)
    space = ProductSpace((Site.discrete("a", 2), Site.discrete("b", 2)))
    mu, nu = random_distribution(space, rng, 8), random_distribution(space, rng, 8)
    c = random_semi_metric(space, rng, kind=kind)
    assert two_function_value(mu, nu, c, False) == two_function_value(mu, nu, c, True)


def test_simplex_grid_counts():
    assert len(simplex_grid(2, 4)) == 15
    assert len(simplex_grid(3, 8, face_only=True)) == 45
    vertices = simplex_grid(3, 1)
    assert len(vertices) == 4 and WeightVector.zero(3) in vertices


def test_grid_lower_bound_at_vertices(bernoulli_pair):
    mu, nu = bernoulli_pair
    per_site = [transport_value(mu, nu, WeightVector.unit(2, s))[0] for s in range(2)]
    assert grid_lower_bound(mu, nu, 1) == max(per_site) == F(1, 4)
    assert grid_lower_bound(mu, mu, 4) == 0


def test_grid_lower_bound_single_site_is_exact():
    space = ProductSpace((Site("a", ("0", "1", "2"), line_metric([0, 1, 4])),))
    mu = Distribution(space, (F(1, 2), F(1, 4), F(1, 4)))
    nu = Distribution(space, (F(1, 8), F(1, 8), F(3, 4)))
    assert grid_lower_bound(mu, nu, 1) == steif_distance(mu, nu).value


def test_grid_bounds_monotone_and_below_steif():
    rng = random.Random(11)
    space = ProductSpace((Site.discrete("a", 2), Site("b", ("0", "1", "2"), line_metric([0, 2, 3]))))
    mu, nu = random_distribution(space, rng, 8), random_distribution(space, rng, 8)
    bounds = grid_lower_bounds(mu, nu, [1, 2, 4, 8])
    seq = [bounds[k] for k in (1, 2, 4, 8)]
    assert seq == sorted(seq)
    assert seq[-1] <= steif_distance(mu, nu).value


def test_kantorovich_pair_weak_duality(bernoulli_pair):
    mu, nu = bernoulli_pair
    e = WeightVector((F(1, 2), F(1, 2)))
    tv, plan, pv, f = kantorovich_pair(mu, nu, e)
    assert tv == pv
    assert weak_duality_gap(plan, f, cost_matrix_e(mu.space, e)) == 0
