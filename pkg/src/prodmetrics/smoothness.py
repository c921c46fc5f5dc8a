"""Partial Lipschitz constants, the Dobrushin semi-norm and c-transforms."""

from __future__ import annotations

from fractions import Fraction

from .core import (
    ZERO,
    Config,
    CostOnPairs,
    FunctionOnX,
    ProductSpace,
    WeightVector,
    cost_matrix_e,
)


def _single_site_neighbours(space: ProductSpace, s: int):
    """Yield ``(i, j)`` index pairs of configurations differing only at site ``s``."""
    cfgs = space.configs
    n_s = space.sizes[s]
    for i, x in enumerate(cfgs):
        for b in range(n_s):
            if b != x[s]:
                y = x[:s] + (b,) + x[s + 1:]
                yield i, space.index_of(y)


def partial_lipschitz(f: FunctionOnX, s: int) -> Fraction:
    """Largest ``(f(x) - f(y)) / d_s(x, y)`` over ordered pairs agreeing off ``s``.

    Sites with a single point admit no such pair and give 0.
    """
    space = f.space
    if not 0 <= s < space.num_sites:
        raise IndexError(f"site index {s} out of range")
    metric = space.sites[s].metric
    cfgs = space.configs
    best = ZERO
    for i, j in _single_site_neighbours(space, s):
        q = (f.values[i] - f.values[j]) / metric[cfgs[i][s]][cfgs[j][s]]
        if q > best:
            best = q
    return best


def lipschitz_profile(f: FunctionOnX) -> tuple[Fraction, ...]:
    # plain tuple: need not lie in the weight simplex
    return tuple(partial_lipschitz(f, s) for s in range(f.space.num_sites))


def dobrushin_norm(f: FunctionOnX) -> Fraction:
    return sum(lipschitz_profile(f), ZERO)


def in_F_e(f: FunctionOnX, e: WeightVector) -> bool:
    """Whether ``f(x) - f(y) <= c_e(x, y)`` for every ordered pair."""
    cost = cost_matrix_e(f.space, e).cost
    v = f.values
    return all(v[i] - v[j] <= cost[i][j] for i in range(len(v)) for j in range(len(v)))


def chain_bound_holds(f: FunctionOnX, x: Config, y: Config) -> bool:
    """Check ``f(x) - f(y) <= sum_s Delta_s(f) d_s(x, y)``.

    This always holds (change coordinates one site at a time), so a failure
    means the partial Lipschitz constants were computed wrongly.
    """
    space = f.space
    bound = sum((partial_lipschitz(f, s) * space.site_distance(s, x, y)
                 for s in range(space.num_sites)), ZERO)
    return f(x) - f(y) <= bound


def c_transform(psi: FunctionOnX, c: CostOnPairs) -> FunctionOnX:
    """``x -> min_y psi(y) + c(y, x)``."""
    if psi.space != c.space:
        raise ValueError("function and cost live on different spaces")
    v = psi.values
    cost = c.cost
    n = len(v)
    return FunctionOnX(psi.space, tuple(
        min(v[j] + cost[j][i] for j in range(n)) for i in range(n)))


def c_convex_envelope(zeta: FunctionOnX, c: CostOnPairs) -> FunctionOnX:
    """``x -> max_y zeta(y) - c(x, y)``, c-convex by construction."""
    v = zeta.values
    cost = c.cost
    n = len(v)
    return FunctionOnX(zeta.space, tuple(
        max(v[j] - cost[i][j] for j in range(n)) for i in range(n)))


def is_one_lipschitz(psi: FunctionOnX, c: CostOnPairs) -> bool:
    """Whether ``psi(x) - psi(x') <= c(x', x)`` for all ordered pairs."""
    v = psi.values
    cost = c.cost
    n = len(v)
    return all(v[i] - v[k] <= cost[k][i] for i in range(n) for k in range(n))


def is_c_convex(psi: FunctionOnX, c: CostOnPairs) -> bool:
    """Decide c-convexity through the fixed-point test ``psi^c == psi``.

    For a semi-metric cost this is equivalent to the existence of a
    representation ``psi(x) = sup_y zeta(y) - c(x, y)``.
    """
    return c_transform(psi, c).values == psi.values


def is_c_convex_by_definition(psi: FunctionOnX, c: CostOnPairs) -> bool:
    """Existential test, independent of :func:`is_c_convex`.

    The largest ``zeta`` with ``max_y zeta(y) - c(x, y) <= psi(x)`` everywhere
    is ``zeta = psi^c``, so ``psi`` has a representation iff the envelope of
    ``psi^c`` reproduces it.
    """
    return c_convex_envelope(c_transform(psi, c), c).values == psi.values


def lipschitz_table(f: FunctionOnX) -> list[tuple[str, Fraction]]:
    return [(site.name, partial_lipschitz(f, s)) for s, site in enumerate(f.space.sites)]


def reversed_bound_holds(psi: FunctionOnX, c: CostOnPairs) -> bool:
    """``psi(x) - psi(x') >= -c(x, x')`` for all pairs."""
    v = psi.values
    cost = c.cost
    n = len(v)
    return all(v[i] - v[k] >= -cost[i][k] for i in range(n) for k in range(n))

