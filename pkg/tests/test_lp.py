from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_max
from prodmetrics import lp as lpmod
from prodmetrics.lp import LinearProgram, LpCertificationError, Status, solve


def _one_var(rhs):
    lp = LinearProgram("max")
    x = lp.add_var("x", lower=0, objective=1)
    lp.add_constraint({x: 1}, "<=", rhs)
    return lp


@pytest.mark.parametrize("method", ["primal", "dual", "auto"])
def test_bounded_single_variable(method):
    sol = solve(_one_var(1), method)
    assert sol.status is Status.OPTIMAL
    assert sol.value == 1 and sol.primal == (1,)


@pytest.mark.parametrize("method", ["primal", "dual"])
def test_infeasible(method):
    assert solve(_one_var(-1), method).status is Status.INFEASIBLE


@pytest.mark.parametrize("method", ["primal", "dual"])
def test_unbounded(method):
    lp = LinearProgram("max")
    x = lp.add_var("x", lower=0, objective=1)
    y = lp.add_var("y", lower=None, objective=0)
    lp.add_constraint({x: 1, y: -1}, "<=", 0)
    assert solve(lp, method).status is Status.UNBOUNDED


@pytest.mark.parametrize("method", ["primal", "dual"])
def test_two_by_two_transport(method):
    # marginals (1/2, 1/2) both ways, cost [[0, 1], [1, 0]]
    lp = LinearProgram("min")
    m = [[lp.add_var(f"m{i}{j}", objective=int(i != j)) for j in range(2)] for i in range(2)]
    half = Fraction(1, 2)
    for i in range(2):
        lp.add_constraint({m[i][0]: 1, m[i][1]: 1}, "==", half)
        lp.add_constraint({m[0][i]: 1, m[1][i]: 1}, "==", half)
    sol = solve(lp, method)
    # one free parameter a = m00 in [0, 1/2]; cost 2*(1/2 - a)
    family = [2 * (half - Fraction(k, 8)) for k in range(5)]
    assert sol.value == min(family) == 0
    assert sol.primal == (half, 0, 0, half)


def test_beale_cycling_example_terminates():
    # Beale's problem cycles under the largest-coefficient rule.
    lp = LinearProgram("min")
    x = [lp.add_var(f"x{i}", objective=c)
         for i, c in enumerate([Fraction(-3, 4), 150, Fraction(-1, 50), 6])]
    lp.add_constraint(dict(zip(x, [Fraction(1, 4), -60, Fraction(-1, 25), 9])), "<=", 0)
    lp.add_constraint(dict(zip(x, [Fraction(1, 2), -90, Fraction(-1, 50), 3])), "<=", 0)
    lp.add_constraint({x[2]: 1}, "<=", 1)
    sol = solve(lp, "primal")
    assert sol.value == Fraction(-1, 20)
    assert sol.primal == (Fraction(1, 25), 0, 1, 0)


def test_klee_minty_cube():
    n = 4
    lp = LinearProgram("max")
    x = [lp.add_var(f"x{i}", objective=2 ** (n - 1 - i)) for i in range(n)]
    for i in range(n):
        coeffs = {x[j]: 2 ** (i - j + 1) for j in range(i)}
        coeffs[x[i]] = 1
        lp.add_constraint(coeffs, "<=", 5 ** (i + 1))
    for method in ("primal", "dual"):
        assert solve(lp, method).value == 5 ** n


def test_redundant_equalities():
    lp = LinearProgram("min")
    x = lp.add_var("x", objective=1)
    y = lp.add_var("y", objective=2)
    lp.add_constraint({x: 1, y: 1}, "==", 1)
    lp.add_constraint({x: 2, y: 2}, "==", 2)
    lp.add_constraint({x: 1, y: -1}, ">=", Fraction(-1, 3))
    sol = solve(lp, "primal")
    assert sol.value == 1 and sol.primal == (1, 0)


def test_bounds_and_free_variables():
    lp = LinearProgram("min")
    x = lp.add_var("x", lower=None, upper=-2, objective=-1)
    y = lp.add_var("y", lower=Fraction(1, 3), upper=Fraction(1, 2), objective=1)
    z = lp.add_var("z", lower=None, objective=0)
    lp.add_constraint({x: 1, z: 1}, "==", 0)
    lp.add_constraint({z: 1, y: 1}, ">=", Fraction(5, 2))
    for method in ("primal", "dual"):
        sol = solve(lp, method)
        # objective equals z + y on the feasible set, so the bound row is tight
        assert sol.value == Fraction(5, 2)
        assert lp.violations(sol.primal) == []
        assert sol.primal[0] == -sol.primal[2]


def test_dump_lists_everything():
    lp = LinearProgram("max")
    a = lp.add_var("a", lower=None, objective=Fraction(1, 2))
    lp.add_constraint({a: -3}, ">=", -1, name="cap")
    text = lp.dump()
    assert "maximize" in text and "+ 1/2 a" in text
    assert "cap: - 3 a >= -1" in text
    assert "-inf <= a <= +inf" in text


def test_certification_failure_is_raised(monkeypatch):
    real = lpmod._primal_route

    def corrupted(can):
        res = real(can)
        if res.status is Status.OPTIMAL:
            res.z = [v + 1 for v in res.z]
        return res

    monkeypatch.setattr(lpmod, "_primal_route", corrupted)
    with pytest.raises(LpCertificationError):
        solve(_one_var(1), "primal")


coef = st.integers(-4, 4)


@settings(max_examples=120, deadline=None)
@given(st.integers(1, 3), st.data())
def test_matches_vertex_enumeration(n, data):
    """Random bounded LPs: both routes agree with brute force."""
    rows = data.draw(st.integers(0, 4))
    c = data.draw(st.lists(coef, min_size=n, max_size=n))
    a_ub = [data.draw(st.lists(coef, min_size=n, max_size=n)) for _ in range(rows)]
    b_ub = [data.draw(st.integers(-3, 6)) for _ in range(rows)]
    box = data.draw(st.integers(1, 5))
    lp = LinearProgram("max")
    xs = [lp.add_var(lower=-box, upper=box, objective=ci) for ci in c]
    for row, rhs in zip(a_ub, b_ub):
        lp.add_constraint(dict(zip(xs, row)), "<=", rhs)
    # box as explicit rows for the oracle
    full_a = a_ub + [[int(i == j) for j in range(n)] for i in range(n)] \
        + [[-int(i == j) for j in range(n)] for i in range(n)]
    full_b = b_ub + [box] * (2 * n)
    expected = brute_force_max(c, full_a, full_b)
    for method in ("primal", "dual"):
        sol = solve(lp, method)
        if expected is None:
            assert sol.status is Status.INFEASIBLE
        else:
            assert sol.status is Status.OPTIMAL
            assert sol.value == expected
            assert lp.violations(sol.primal) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.data())
def test_deterministic(n, data):
    c = data.draw(st.lists(coef, min_size=n, max_size=n))
    lp = LinearProgram("min")
    xs = [lp.add_var(objective=ci, upper=3) for ci in c]
    lp.add_constraint({x: 1 for x in xs}, ">=", 1)
    assert solve(lp) == solve(lp)
