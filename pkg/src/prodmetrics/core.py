"""Finite product spaces, distributions on them, couplings and costs.

Every scalar is a :class:`fractions.Fraction`; nothing in this module rounds.
Configurations are tuples of point indices, one per site, enumerated in
lexicographic order with the first site varying slowest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Sequence

Rational = Fraction
Config = tuple[int, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_rational(value) -> Fraction:
    """Convert an int, a Fraction or a ``"p/q"`` string to a Fraction.

    Floats are rejected on purpose: a float literal is almost never the
    rational the caller meant.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(text)
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass 'p/q' instead")
    # gmpy2.mpq and other numbers.Rational implementations
    return Fraction(value.numerator, value.denominator)


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# --------------------------------------------------------------------------
# errors


@dataclass(frozen=True)
class Violation:
    kind: str  # NonMetric | BadMass | ShapeMismatch
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.message}"


class InstanceError(ValueError):
    """Raised when an instance breaks one or more invariants.

    ``violations`` lists every problem found, not only the first one.
    """

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class SpaceMismatch(ValueError):
    pass


class BadCost(ValueError):
    pass


def _require(violations: list[Violation]) -> None:
    if violations:
        raise InstanceError(violations)


# --------------------------------------------------------------------------
# sites and product spaces


def metric_violations(name: str, metric: Sequence[Sequence[Fraction]]) -> list[Violation]:
    """All ways in which a square matrix fails to be a metric."""
    out = []
    n = len(metric)
    for a, row in enumerate(metric):
        if len(row) != n:
            out.append(Violation("ShapeMismatch", f"site {name} row {a}",
                                 f"expected {n} entries, got {len(row)}"))
    if out:
        return out
    for a in range(n):
        if metric[a][a] != 0:
            out.append(Violation("NonMetric", f"site {name} [{a}][{a}]",
                                 f"diagonal entry {metric[a][a]} is not 0"))
        for b in range(n):
            if a == b:
                continue
            if metric[a][b] <= 0:
                out.append(Violation("NonMetric", f"site {name} [{a}][{b}]",
                                     f"off-diagonal entry {metric[a][b]} is not positive"))
            if b > a and metric[a][b] != metric[b][a]:
                out.append(Violation("NonMetric", f"site {name} [{a}][{b}]",
                                     f"asymmetric: {metric[a][b]} != {metric[b][a]}"))
    for a, b, c in itertools.product(range(n), repeat=3):
        if metric[a][c] > metric[a][b] + metric[b][c]:
            out.append(Violation("NonMetric", f"site {name} ({a},{b},{c})",
                                 f"triangle inequality fails: {metric[a][c]} > "
                                 f"{metric[a][b]} + {metric[b][c]}"))
    return out


@dataclass(frozen=True)
class Site:
    """One finite metric coordinate space."""

    name: str
    points: tuple[str, ...]
    metric: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(str(p) for p in self.points))
        object.__setattr__(
            self, "metric", tuple(tuple(as_rational(v) for v in row) for row in self.metric))
        problems = []
        if not self.points:
            problems.append(Violation("ShapeMismatch", f"site {self.name}", "no points"))
        if len(set(self.points)) != len(self.points):
            problems.append(Violation("ShapeMismatch", f"site {self.name}",
                                      "duplicate point labels"))
        for p in self.points:
            if "," in p or not p:
                problems.append(Violation("ShapeMismatch", f"site {self.name}",
                                          f"point label {p!r} is empty or contains ','"))
        if len(self.metric) != len(self.points):
            problems.append(Violation("ShapeMismatch", f"site {self.name}",
                                      f"{len(self.points)} points but {len(self.metric)} metric rows"))
        else:
            problems.extend(metric_violations(self.name, self.metric))
        _require(problems)

    @classmethod
    def discrete(cls, name: str, n: int) -> Site:
        """Site with points ``0..n-1`` and the discrete (0/1) metric."""
        return cls(name, tuple(str(i) for i in range(n)),
                   tuple(tuple(ZERO if a == b else ONE for b in range(n)) for a in range(n)))

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def diameter(self) -> Fraction:
        return max(max(row) for row in self.metric)


@dataclass(frozen=True, eq=True)
class ProductSpace:
    sites: tuple[Site, ...]

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        problems = []
        if not self.sites:
            problems.append(Violation("ShapeMismatch", "space", "at least one site is required"))
        names = [s.name for s in self.sites]
        if len(set(names)) != len(names):
            problems.append(Violation("ShapeMismatch", "space", "duplicate site names"))
        _require(problems)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(s.size for s in self.sites)

    @property
    def num_sites(self) -> int:
        return len(self.sites)

    @cached_property
    def configs(self) -> tuple[Config, ...]:
        return tuple(itertools.product(*(range(n) for n in self.sizes)))

    def __len__(self) -> int:
        return len(self.configs)

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        strides = []
        acc = 1
        for n in reversed(self.sizes):
            strides.append(acc)
            acc *= n
        return tuple(reversed(strides))

    def index_of(self, config: Sequence[int]) -> int:
        if len(config) != self.num_sites:
            raise ValueError(f"config {config!r} has wrong length")
        idx = 0
        for c, n, st in zip(config, self.sizes, self._strides):
            if not 0 <= c < n:
                raise ValueError(f"config {config!r} out of range")
            idx += c * st
        return idx

    def config_at(self, index: int) -> Config:
        return self.configs[index]

    def label(self, config: Sequence[int]) -> str:
        return ",".join(site.points[c] for site, c in zip(self.sites, config))

    def parse_label(self, label: str) -> Config:
        parts = label.split(",")
        if len(parts) != self.num_sites:
            raise ValueError(f"label {label!r} does not have {self.num_sites} coordinates")
        try:
            return tuple(site.points.index(p.strip()) for site, p in zip(self.sites, parts))
        except ValueError:
            raise ValueError(f"label {label!r} names an unknown point") from None

    def site_distance(self, s: int, x: Sequence[int], y: Sequence[int]) -> Fraction:
        """Distance between the ``s``-th coordinates of two configurations."""
        if not 0 <= s < self.num_sites:
            raise IndexError(f"site index {s} out of range")
        return self.sites[s].metric[x[s]][y[s]]

    @cached_property
    def site_distance_tables(self) -> tuple[tuple[tuple[Fraction, ...], ...], ...]:
        """``tables[s][i][j]`` is the site-``s`` distance between configs i and j."""
        cfgs = self.configs
        return tuple(
            tuple(tuple(site.metric[x[s]][y[s]] for y in cfgs) for x in cfgs)
            for s, site in enumerate(self.sites))

    @property
    def max_diameter(self) -> Fraction:
        return max(site.diameter for site in self.sites)


def enumerate_configs(space: ProductSpace) -> list[Config]:
    return list(space.configs)


def site_distance(space: ProductSpace, s: int, x: Config, y: Config) -> Fraction:
    return space.site_distance(s, x, y)


# --------------------------------------------------------------------------
# measures and functions


def _check_same_space(*objs) -> ProductSpace:
    space = objs[0].space
    for o in objs[1:]:
        if o.space != space:
            raise SpaceMismatch("objects live on different product spaces")
    return space


@dataclass(frozen=True)
class Distribution:
    space: ProductSpace
    mass: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "mass", tuple(as_rational(m) for m in self.mass))
        _require(mass_violations(self.space, self.mass, "distribution"))

    @classmethod
    def from_map(cls, space: ProductSpace, masses: Mapping) -> Distribution:
        """Build from ``{config tuple or label: mass}``; missing configs get 0."""
        vec = [ZERO] * len(space)
        for key, m in masses.items():
            cfg = space.parse_label(key) if isinstance(key, str) else tuple(key)
            vec[space.index_of(cfg)] += as_rational(m)
        return cls(space, tuple(vec))

    @classmethod
    def point_mass(cls, space: ProductSpace, config: Sequence[int]) -> Distribution:
        vec = [ZERO] * len(space)
        vec[space.index_of(config)] = ONE
        return cls(space, tuple(vec))

    @classmethod
    def product(cls, space: ProductSpace, marginals: Sequence[Sequence]) -> Distribution:
        """Independent product of per-site probability vectors."""
        margs = [[as_rational(v) for v in m] for m in marginals]
        vec = []
        for cfg in space.configs:
            p = ONE
            for s, c in enumerate(cfg):
                p *= margs[s][c]
            vec.append(p)
        return cls(space, tuple(vec))

    def expect(self, f: FunctionOnX) -> Fraction:
        _check_same_space(self, f)
        return sum((m * v for m, v in zip(self.mass, f.values)), ZERO)

    def as_map(self) -> dict[str, Fraction]:
        return {self.space.label(c): m for c, m in zip(self.space.configs, self.mass) if m}


def mass_violations(space: ProductSpace, mass: Sequence[Fraction], what: str) -> list[Violation]:
    if len(mass) != len(space):
        return [Violation("ShapeMismatch", what,
                          f"{len(mass)} masses for {len(space)} configurations")]
    out = [Violation("BadMass", f"{what} {space.label(c)}", f"negative mass {m}")
           for c, m in zip(space.configs, mass) if m < 0]
    total = sum(mass, ZERO)
    if total != 1:
        out.append(Violation("BadMass", what, f"masses sum to {total}, not 1"))
    return out


@dataclass(frozen=True)
class Coupling:
    """A transport plan on X x X with prescribed marginals."""

    space: ProductSpace
    plan: tuple[tuple[Fraction, ...], ...]
    first_marginal: Distribution
    second_marginal: Distribution

    def __post_init__(self):
        _check_same_space(self, self.first_marginal, self.second_marginal)
        object.__setattr__(
            self, "plan", tuple(tuple(as_rational(v) for v in row) for row in self.plan))
        n = len(self.space)
        problems = []
        if len(self.plan) != n or any(len(r) != n for r in self.plan):
            raise InstanceError([Violation("ShapeMismatch", "coupling", f"plan must be {n}x{n}")])
        for i, row in enumerate(self.plan):
            for j, v in enumerate(row):
                if v < 0:
                    problems.append(Violation("BadMass", f"coupling [{i}][{j}]", f"negative {v}"))
            if sum(row, ZERO) != self.first_marginal.mass[i]:
                problems.append(Violation("BadMass", f"coupling row {i}",
                                          "row sum differs from first marginal"))
        for j in range(n):
            if sum((self.plan[i][j] for i in range(n)), ZERO) != self.second_marginal.mass[j]:
                problems.append(Violation("BadMass", f"coupling column {j}",
                                          "column sum differs from second marginal"))
        _require(problems)

    @classmethod
    def diagonal(cls, mu: Distribution) -> Coupling:
        n = len(mu.space)
        plan = tuple(tuple(mu.mass[i] if i == j else ZERO for j in range(n)) for i in range(n))
        return cls(mu.space, plan, mu, mu)

    def integrate(self, cost: Sequence[Sequence[Fraction]]) -> Fraction:
        """Exact integral of a cost matrix against the plan."""
        return sum((v * cost[i][j] for i, row in enumerate(self.plan)
                    for j, v in enumerate(row) if v), ZERO)

    def site_costs(self) -> tuple[Fraction, ...]:
        """The expected site distance for every site."""
        return tuple(self.integrate(t) for t in self.space.site_distance_tables)


@dataclass(frozen=True)
class WeightVector:
    """A member of the weight simplex: non-negative, summing to at most 1."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(as_rational(w) for w in self.weights))
        bad = [Violation("ShapeMismatch", f"weight {s}", f"negative weight {w}")
               for s, w in enumerate(self.weights) if w < 0]
        if sum(self.weights, ZERO) > 1:
            bad.append(Violation("ShapeMismatch", "weights",
                                 f"weights sum to {sum(self.weights, ZERO)} > 1"))
        _require(bad)

    @classmethod
    def unit(cls, num_sites: int, s: int) -> WeightVector:
        return cls(tuple(ONE if t == s else ZERO for t in range(num_sites)))

    @classmethod
    def zero(cls, num_sites: int) -> WeightVector:
        return cls((ZERO,) * num_sites)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)


@dataclass(frozen=True)
class FunctionOnX:
    space: ProductSpace
    values: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(as_rational(v) for v in self.values))
        if len(self.values) != len(self.space):
            raise InstanceError([Violation(
                "ShapeMismatch", "function",
                f"{len(self.values)} values for {len(self.space)} configurations")])

    @classmethod
    def from_map(cls, space: ProductSpace, values: Mapping) -> FunctionOnX:
        vec = [ZERO] * len(space)
        for key, v in values.items():
            cfg = space.parse_label(key) if isinstance(key, str) else tuple(key)
            vec[space.index_of(cfg)] = as_rational(v)
        return cls(space, tuple(vec))

    @classmethod
    def constant(cls, space: ProductSpace, value=0) -> FunctionOnX:
        return cls(space, (as_rational(value),) * len(space))

    @classmethod
    def from_callable(cls, space: ProductSpace, fn) -> FunctionOnX:
        return cls(space, tuple(as_rational(fn(c)) for c in space.configs))

    def __call__(self, config: Sequence[int]) -> Fraction:
        return self.values[self.space.index_of(config)]

    def __neg__(self) -> FunctionOnX:
        return FunctionOnX(self.space, tuple(-v for v in self.values))

    def scaled(self, factor) -> FunctionOnX:
        k = as_rational(factor)
        return FunctionOnX(self.space, tuple(k * v for v in self.values))

    def shifted(self, amount) -> FunctionOnX:
        k = as_rational(amount)
        return FunctionOnX(self.space, tuple(v + k for v in self.values))

    def as_map(self) -> dict[str, Fraction]:
        return {self.space.label(c): v for c, v in zip(self.space.configs, self.values)}


@dataclass(frozen=True)
class CostOnPairs:
    """A cost matrix ``cost[i][j] = c(x_i, x_j)`` on configuration pairs.

    Only the shape is checked on construction; call
    :meth:`semi_metric_violations` or :meth:`require_semi_metric` where the
    zero-diagonal and triangle conditions matter. Symmetry and
    non-negativity are never required.
    """

    space: ProductSpace
    cost: tuple[tuple[Fraction, ...], ...] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "cost", tuple(tuple(as_rational(v) for v in row) for row in self.cost))
        n = len(self.space)
        if len(self.cost) != n or any(len(r) != n for r in self.cost):
            raise InstanceError([Violation("ShapeMismatch", "cost", f"cost must be {n}x{n}")])

    def __call__(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        return self.cost[self.space.index_of(x)][self.space.index_of(y)]

    def semi_metric_violations(self) -> list[str]:
        c = self.cost
        n = len(c)
        out = [f"c[{i}][{i}] = {c[i][i]} != 0" for i in range(n) if c[i][i] != 0]
        for i in range(n):
            ci = c[i]
            for j in range(n):
                cij = ci[j]
                cj = c[j]
                for k in range(n):
                    if ci[k] > cij + cj[k]:
                        out.append(f"c[{i}][{k}] = {ci[k]} > c[{i}][{j}] + c[{j}][{k}]")
        return out

    def is_semi_metric(self) -> bool:
        return not self.semi_metric_violations()

    def require_semi_metric(self) -> None:
        bad = self.semi_metric_violations()
        if bad:
            raise BadCost("cost is not a semi-metric: " + "; ".join(bad[:5]))

    def is_symmetric(self) -> bool:
        n = len(self.cost)
        return all(self.cost[i][j] == self.cost[j][i] for i in range(n) for j in range(i))

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for row in self.cost for v in row)


def cost_e(space: ProductSpace, e: WeightVector, x: Config, y: Config) -> Fraction:
    """The weighted cost ``sum_s e_s d_s(x, y)``."""
    if len(e) != space.num_sites:
        raise ValueError(f"weight vector has {len(e)} entries for {space.num_sites} sites")
    return sum((w * site.metric[x[s]][y[s]]
                for s, (w, site) in enumerate(zip(e.weights, space.sites)) if w), ZERO)


def cost_matrix_e(space: ProductSpace, e: WeightVector) -> CostOnPairs:
    if len(e) != space.num_sites:
        raise ValueError(f"weight vector has {len(e)} entries for {space.num_sites} sites")
    tables = space.site_distance_tables
    n = len(space)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            v = ZERO
            for w, t in zip(e.weights, tables):
                if w:
                    v += w * t[i][j]
            row.append(v)
        rows.append(tuple(row))
    return CostOnPairs(space, tuple(rows))


# --------------------------------------------------------------------------
# validation of raw descriptions


def validate_instance(raw: Mapping) -> tuple[ProductSpace, Distribution, Distribution]:
    """Build ``(space, mu, nu)`` from a plain description, or raise.

    ``raw`` has keys ``sites`` (list of ``{name, points, metric}``), ``mu``
    and ``nu`` (mass maps keyed by comma-joined point labels). On failure an
    :class:`InstanceError` lists every violated invariant.
    """
    problems: list[Violation] = []
    sites = []
    raw_sites = raw.get("sites")
    if not isinstance(raw_sites, list) or not raw_sites:
        raise InstanceError([Violation("ShapeMismatch", "sites", "missing or empty site list")])
    point_lists: list[Optional[list[str]]] = []
    for k, rs in enumerate(raw_sites):
        points = None
        try:
            name = str(rs.get("name", f"s{k}"))
            points = [str(p) for p in rs["points"]]
            metric = [[as_rational(v) for v in row] for row in rs["metric"]]
            sites.append(Site(name, tuple(points), tuple(tuple(r) for r in metric)))
        except InstanceError as err:
            problems.extend(err.violations)
        except (KeyError, TypeError, ValueError, ZeroDivisionError, AttributeError) as err:
            problems.append(Violation("ShapeMismatch", f"site {k}", f"malformed: {err}"))
        point_lists.append(points)
    if not problems:
        try:
            space = ProductSpace(tuple(sites))
        except InstanceError as err:
            problems.extend(err.violations)

    dists = []
    for key in ("mu", "nu"):
        masses = raw.get(key)
        if not isinstance(masses, Mapping):
            problems.append(Violation("ShapeMismatch", key, "missing mass map"))
            continue
        if any(p is None for p in point_lists):
            continue
        # checked against the raw labels, so mass errors surface even when a
        # site metric is broken
        index = {",".join(cfg): i
                 for i, cfg in enumerate(itertools.product(*point_lists))}
        vec = [ZERO] * len(index)
        ok = True
        for label, m in masses.items():
            norm = ",".join(part.strip() for part in str(label).split(","))
            try:
                if norm not in index:
                    raise ValueError(f"unknown configuration label {label!r}")
                vec[index[norm]] += as_rational(m)
            except (TypeError, ValueError, ZeroDivisionError) as err:
                problems.append(Violation("ShapeMismatch", f"{key} {label}", str(err)))
                ok = False
        if not ok:
            continue
        bad = [Violation("BadMass", f"{key} {lab}", f"negative mass {m}")
               for lab, m in zip(index, vec) if m < 0]
        total = sum(vec, ZERO)
        if total != 1:
            bad.append(Violation("BadMass", key, f"masses sum to {total}, not 1"))
        problems.extend(bad)
        if not problems:
            dists.append(Distribution(space, tuple(vec)))
    _require(problems)
    return space, dists[0], dists[1]
