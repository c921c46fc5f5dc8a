"""The Dobrushin and Steif distances and the transport programs behind them.

Every quantity is the exact optimum of a linear program solved by
:func:`prodmetrics.lp.solve`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    ZERO,
    Coupling,
    CostOnPairs,
    Distribution,
    FunctionOnX,
    ProductSpace,
    SpaceMismatch,
    WeightVector,
    cost_matrix_e,
)
from .lp import LinearProgram, LpCertificationError, LpSolution, solve


@dataclass(frozen=True)
class DobrushinResult:
    value: Fraction
    witness_f: FunctionOnX
    witness_e: WeightVector
    lp: LinearProgram
    solution: LpSolution


@dataclass(frozen=True)
class SteifResult:
    value: Fraction
    witness_plan: Coupling
    witness_t: Fraction
    lp: LinearProgram
    solution: LpSolution


def _same_space(mu: Distribution, nu: Distribution) -> ProductSpace:
    if mu.space != nu.space:
        raise SpaceMismatch("the two distributions live on different product spaces")
    return mu.space


def _solve(lp: LinearProgram) -> LpSolution:
    sol = solve(lp)
    if not sol.optimal:
        raise LpCertificationError(f"expected a finite optimum, solver reported {sol.status.value}", lp)
    return sol


def _potential_vars(lp: LinearProgram, space: ProductSpace, weights, prefix: str = "f") -> list[int]:
    """One free variable per configuration; the first is pinned to 0."""
    out = []
    for i, cfg in enumerate(space.configs):
        name = f"{prefix}[{space.label(cfg)}]"
        if i == 0:
            out.append(lp.add_var(name, lower=0, upper=0, objective=weights[i]))
        else:
            out.append(lp.add_var(name, lower=None, objective=weights[i]))
    return out


def _plan_vars(lp: LinearProgram, space: ProductSpace, cost=None) -> list[list[int]]:
    n = len(space)
    labels = [space.label(c) for c in space.configs]
    return [[lp.add_var(f"m[{labels[i]}|{labels[j]}]", lower=0,
                        objective=0 if cost is None else cost[i][j])
             for j in range(n)] for i in range(n)]


def _marginal_rows(lp: LinearProgram, plan: list[list[int]], mu: Distribution, nu: Distribution):
    n = len(plan)
    for i in range(n):
        lp.add_constraint({plan[i][j]: 1 for j in range(n)}, "==", mu.mass[i], name=f"row{i}")
    for j in range(n):
        lp.add_constraint({plan[i][j]: 1 for i in range(n)}, "==", nu.mass[j], name=f"col{j}")


def _coupling_from(sol: LpSolution, plan, mu, nu) -> Coupling:
    x = sol.primal
    return Coupling(mu.space, tuple(tuple(x[v] for v in row) for row in plan), mu, nu)


def dobrushin_lp(mu: Distribution, nu: Distribution) -> tuple[LinearProgram, list[int], list[int]]:
    space = _same_space(mu, nu)
    diff = [a - b for a, b in zip(mu.mass, nu.mass)]
    lp = LinearProgram("max")
    f = _potential_vars(lp, space, diff)
    e = [lp.add_var(f"e[{site.name}]", lower=0) for site in space.sites]
    tables = space.site_distance_tables
    n = len(space)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            coeffs = {f[i]: 1, f[j]: -1}
            for s, t in enumerate(tables):
                if t[i][j]:
                    coeffs[e[s]] = -t[i][j]
            lp.add_constraint(coeffs, "<=", 0, name=f"lip{i},{j}")
    lp.add_constraint({v: 1 for v in e}, "<=", 1, name="simplex")
    return lp, f, e


def dobrushin_distance(mu: Distribution, nu: Distribution) -> DobrushinResult:
    """Supremum of ``(mu - nu)(f)`` over ``f`` with Dobrushin semi-norm at most 1.

    Solved as one joint program in the potential ``f`` and the weights
    ``e``: the pairs ``(f, e)`` with ``f`` 1-Lipschitz for ``c_e`` form a
    polyhedron and the objective ignores ``e``.
    """
    lp, f, e = dobrushin_lp(mu, nu)
    sol = _solve(lp)
    x = sol.primal
    return DobrushinResult(sol.value,
                           FunctionOnX(mu.space, tuple(x[v] for v in f)),
                           WeightVector(tuple(x[v] for v in e)), lp, sol)


def steif_lp(mu: Distribution, nu: Distribution):
    space = _same_space(mu, nu)
    lp = LinearProgram("min")
    plan = _plan_vars(lp, space)
    t = lp.add_var("t", lower=None, objective=1)
    _marginal_rows(lp, plan, mu, nu)
    n = len(space)
    for s, table in enumerate(space.site_distance_tables):
        coeffs = {plan[i][j]: table[i][j] for i in range(n) for j in range(n) if table[i][j]}
        coeffs[t] = -1
        lp.add_constraint(coeffs, "<=", 0, name=f"site[{space.sites[s].name}]")
    return lp, plan, t


def steif_distance(mu: Distribution, nu: Distribution) -> SteifResult:
    """Infimum over couplings of the largest expected site distance."""
    lp, plan, t = steif_lp(mu, nu)
    sol = _solve(lp)
    return SteifResult(sol.value, _coupling_from(sol, plan, mu, nu), sol.primal[t], lp, sol)


def transport_lp(mu: Distribution, nu: Distribution, cost: CostOnPairs):
    lp = LinearProgram("min")
    plan = _plan_vars(lp, mu.space, cost.cost)
    _marginal_rows(lp, plan, mu, nu)
    return lp, plan


def transport_value(mu: Distribution, nu: Distribution,
                    e: WeightVector) -> tuple[Fraction, Coupling]:
    """Optimal transport cost for ``c_e`` and an optimal plan."""
    space = _same_space(mu, nu)
    lp, plan = transport_lp(mu, nu, cost_matrix_e(space, e))
    sol = _solve(lp)
    return sol.value, _coupling_from(sol, plan, mu, nu)


def potential_lp(mu: Distribution, nu: Distribution, cost: CostOnPairs):
    diff = [a - b for a, b in zip(mu.mass, nu.mass)]
    lp = LinearProgram("max")
    f = _potential_vars(lp, mu.space, diff)
    n = len(f)
    c = cost.cost
    for i in range(n):
        for j in range(n):
            if i != j:
                lp.add_constraint({f[i]: 1, f[j]: -1}, "<=", c[i][j], name=f"lip{i},{j}")
    return lp, f


def dual_potential_value(mu: Distribution, nu: Distribution,
                         e: WeightVector) -> tuple[Fraction, FunctionOnX]:
    """Supremum of ``(mu - nu)(f)`` over ``f`` that are 1-Lipschitz for ``c_e``."""
    space = _same_space(mu, nu)
    lp, f = potential_lp(mu, nu, cost_matrix_e(space, e))
    sol = _solve(lp)
    return sol.value, FunctionOnX(space, tuple(sol.primal[v] for v in f))


def weak_duality_gap(plan: Coupling, f: FunctionOnX, cost: CostOnPairs) -> Fraction:
    """``plan(cost) - (mu - nu)(f)``; non-negative whenever f is 1-Lipschitz for cost."""
    mu, nu = plan.first_marginal, plan.second_marginal
    return plan.integrate(cost.cost) - (mu.expect(f) - nu.expect(f))


def kantorovich_pair(mu: Distribution, nu: Distribution, e: WeightVector):
    """Both sides of the fixed-weight duality, with the weak-duality assertion.

    Returns ``(transport value, plan, potential value, potential)``.
    """
    cost = cost_matrix_e(_same_space(mu, nu), e)
    tv, plan = transport_value(mu, nu, e)
    pv, f = dual_potential_value(mu, nu, e)
    gap = weak_duality_gap(plan, f, cost)
    if gap < 0:
        raise LpCertificationError(f"weak duality violated: gap {gap}")
    return tv, plan, pv, f


def two_function_lp(mu: Distribution, nu: Distribution, c: CostOnPairs, restricted: bool):
    space = _same_space(mu, nu)
    if c.space != space:
        raise SpaceMismatch("cost lives on a different product space")
    c.require_semi_metric()
    if restricted:
        return potential_lp(mu, nu, c)[0]
    lp = LinearProgram("max")
    f = _potential_vars(lp, space, mu.mass, prefix="f")
    g = [lp.add_var(f"g[{space.label(cfg)}]", lower=None, objective=nu.mass[j])
         for j, cfg in enumerate(space.configs)]
    n = len(space)
    for i in range(n):
        for j in range(n):
            lp.add_constraint({f[i]: 1, g[j]: 1}, "<=", c.cost[i][j], name=f"pair{i},{j}")
    return lp


def two_function_value(mu: Distribution, nu: Distribution, c: CostOnPairs,
                       restricted: bool) -> Fraction:
    """Supremum of ``mu(f) + nu(g)`` subject to ``f(x) + g(y) <= c(x, y)``.

    With ``restricted=True`` only pairs with ``g = -f`` are allowed.
    Raises :class:`BadCost` unless ``c`` is a semi-metric.
    """
    return _solve(two_function_lp(mu, nu, c, restricted)).value


def simplex_grid(num_sites: int, k: int, face_only: bool = False) -> list[WeightVector]:
    """Weight vectors with coordinates in ``{0, 1/k, ..., 1}`` and sum at most 1.

    ``face_only`` keeps only those summing to exactly 1.
    """
    if k < 1:
        raise ValueError("resolution must be a positive integer")
    out = []
    for combo in itertools.product(range(k + 1), repeat=num_sites):
        total = sum(combo)
        if total > k or (face_only and total != k):
            continue
        out.append(WeightVector(tuple(Fraction(a, k) for a in combo)))
    return out


def grid_lower_bounds(mu: Distribution, nu: Distribution, ks) -> dict[int, Fraction]:
    """:func:`grid_lower_bound` for several resolutions, sharing transport solves."""
    space = _same_space(mu, nu)
    cache: dict[tuple, Fraction] = {}
    out = {}
    for k in ks:
        best = ZERO
        # c_e grows with e, so the maximum sits on the face sum(e) = 1
        for e in simplex_grid(space.num_sites, k, face_only=True):
            if e.weights not in cache:
                cache[e.weights] = transport_value(mu, nu, e)[0]
            best = max(best, cache[e.weights])
        out[k] = best
    return out


def grid_lower_bound(mu: Distribution, nu: Distribution, resolution: int) -> Fraction:
    """Largest fixed-weight transport cost over the resolution-``k`` grid of weights."""
    return grid_lower_bounds(mu, nu, [resolution])[resolution]
