"""Random instances and the exact check suite.

Each check turns one proved statement about the two distances into an
exact assertion on a concrete instance and records a :class:`CheckResult`.
Everything is driven by ``random.Random`` seeded with strings, so a seed
reproduces the same instances and the same report on every platform.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import (
    ZERO,
    CostOnPairs,
    Distribution,
    FunctionOnX,
    ProductSpace,
    Site,
    WeightVector,
    cost_matrix_e,
    format_rational,
)
from .io import instance_to_dict
from .lp import LpCertificationError
from .metrics import (
    dobrushin_distance,
    grid_lower_bounds,
    kantorovich_pair,
    simplex_grid,
    steif_distance,
    two_function_value,
)
from .smoothness import (
    c_transform,
    chain_bound_holds,
    dobrushin_norm,
    in_F_e,
    is_c_convex,
    is_c_convex_by_definition,
    is_one_lipschitz,
    lipschitz_profile,
    reversed_bound_holds,
)


@dataclass(frozen=True)
class InstanceSpec:
    seed: int
    site_count: int
    points_per_site: tuple[int, ...]
    denominator_bound: int = 8

    def __post_init__(self):
        object.__setattr__(self, "points_per_site", tuple(self.points_per_site))
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 1 <= self.site_count <= 4:
            raise ValueError("site_count must be in [1, 4]")
        if len(self.points_per_site) != self.site_count:
            raise ValueError("points_per_site needs one entry per site")
        if any(not 1 <= n <= 4 for n in self.points_per_site):
            raise ValueError("points per site must be in [1, 4]")
        if self.denominator_bound < 1:
            raise ValueError("denominator_bound must be positive")


@dataclass(frozen=True)
class Instance:
    seed: int
    space: ProductSpace
    mu: Distribution
    nu: Distribution


def random_spec(seed: int, max_sites: int = 3, max_points: int = 3, denom: int = 8) -> InstanceSpec:
    """Draw the shape of an instance from ``seed``."""
    rng = random.Random(f"shape:{seed}")
    k = rng.randint(1, max_sites)
    return InstanceSpec(seed, k, tuple(rng.randint(1, max_points) for _ in range(k)), denom)


def _shortest_path_closure(w: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(w)
    d = [row[:] for row in w]
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d


def random_site_metric(n: int, rng: random.Random, denom: int) -> list[list[Fraction]]:
    """A metric on ``n`` points: random positive edges, then shortest paths.

    All edges share one denominator ``q <= denom``, so every entry of the
    closure does too.
    """
    q = rng.randint(1, denom)
    w = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            w[a][b] = w[b][a] = Fraction(rng.randint(1, 2 * q), q)
    return _shortest_path_closure(w)


def random_distribution(space: ProductSpace, rng: random.Random, denom: int) -> Distribution:
    """Drop ``q <= denom`` units of mass ``1/q`` on uniformly chosen configurations."""
    q = rng.randint(1, denom)
    counts = [0] * len(space)
    for _ in range(q):
        counts[rng.randrange(len(space))] += 1
    return Distribution(space, tuple(Fraction(c, q) for c in counts))


def generate_instance(spec: InstanceSpec) -> Instance:
    rng = random.Random(f"instance:{spec.seed}")
    sites = []
    for s, n in enumerate(spec.points_per_site):
        metric = random_site_metric(n, rng, spec.denominator_bound)
        sites.append(Site(f"s{s}", tuple(str(a) for a in range(n)),
                          tuple(tuple(r) for r in metric)))
    space = ProductSpace(tuple(sites))
    mu = random_distribution(space, rng, spec.denominator_bound)
    nu = random_distribution(space, rng, spec.denominator_bound)
    return Instance(spec.seed, space, mu, nu)


def random_function(space: ProductSpace, rng: random.Random, denom: int = 8,
                    scale: int = 2) -> FunctionOnX:
    return FunctionOnX(space, tuple(
        Fraction(rng.randint(-scale * denom, scale * denom), rng.randint(1, denom))
        for _ in range(len(space))))


def random_semi_metric(space: ProductSpace, rng: random.Random, denom: int = 8,
                       kind: str = "asymmetric") -> CostOnPairs:
    """A random semi-metric on configurations.

    ``kind`` is ``"symmetric"`` (a metric), ``"asymmetric"`` (closure of a
    random directed graph) or ``"signed"`` (asymmetric, then tilted by a
    potential, ``c(x, y) + p(y) - p(x)``, which keeps the triangle
    inequality and the zero diagonal but may go negative).
    """
    n = len(space)
    q = rng.randint(1, denom)
    w = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            if a != b:
                w[a][b] = Fraction(rng.randint(1, 3 * q), q)
    if kind == "symmetric":
        for a in range(n):
            for b in range(a):
                w[a][b] = w[b][a]
    d = _shortest_path_closure(w)
    if kind == "signed":
        p = [Fraction(rng.randint(-2 * q, 2 * q), q) for _ in range(n)]
        d = [[d[a][b] + p[b] - p[a] for b in range(n)] for a in range(n)]
    elif kind not in ("symmetric", "asymmetric"):
        raise ValueError(f"unknown semi-metric kind {kind!r}")
    return CostOnPairs(space, tuple(tuple(r) for r in d))


def random_grid_weight(num_sites: int, rng: random.Random, resolution: int = 4) -> WeightVector:
    grid = simplex_grid(num_sites, resolution)
    return grid[rng.randrange(len(grid))]


def function_in_F_e(space: ProductSpace, e: WeightVector, rng: random.Random,
                    denom: int = 8) -> FunctionOnX:
    """A random member of F_e: scale a random function down to fit c_e.

    When some ``c_e(x, y)`` with ``x != y`` vanishes no scaling can help,
    and the function is pushed through the c_e-transform instead.
    """
    g = random_function(space, rng, denom)
    cost = cost_matrix_e(space, e).cost
    n = len(space)
    ratio = ZERO
    degenerate = False
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            diff = g.values[i] - g.values[j]
            if cost[i][j] == 0:
                degenerate = degenerate or diff != 0
            elif diff / cost[i][j] > ratio:
                ratio = diff / cost[i][j]
    if degenerate:
        return c_transform(g, CostOnPairs(space, cost))
    return g if ratio <= 1 else g.scaled(1 / ratio)


# --------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class CheckResult:
    name: str
    seed: int
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"check": self.name, "seed": self.seed,
                "status": "pass" if self.passed else "fail", "detail": self.detail}


@dataclass
class VerificationReport:
    entries: list[CheckResult] = field(default_factory=list)

    def add(self, result: CheckResult) -> None:
        self.entries.append(result)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[CheckResult]:
        return [e for e in self.entries if not e.passed]

    def sorted_entries(self) -> list[CheckResult]:
        return sorted(self.entries, key=lambda e: (e.seed, e.name))

    def to_text(self) -> str:
        entries = self.sorted_entries()
        doc = {"format": 1,
               "summary": {"checks": len(entries),
                           "failed": sum(not e.passed for e in entries)},
               "entries": [e.as_dict() for e in entries]}
        return json.dumps(doc, indent=1) + "\n"


def _q(v: Fraction) -> str:
    return format_rational(v)


def _failure_detail(inst: Optional[Instance], **extra) -> dict:
    out = {k: v for k, v in extra.items()}
    if inst is not None:
        out["instance"] = instance_to_dict(inst.space, inst.mu, inst.nu)
    return out


# --------------------------------------------------------------------------
# checks


def check_theorem(inst: Instance) -> CheckResult:
    """Dobrushin value equals Steif value, and both witnesses certify themselves."""
    mu, nu, space = inst.mu, inst.nu, inst.space
    try:
        dob = dobrushin_distance(mu, nu)
        st = steif_distance(mu, nu)
    except LpCertificationError as err:
        return CheckResult("theorem", inst.seed, False, _failure_detail(
            inst, error=str(err), lp=err.lp.dump() if err.lp else None))
    problems = []
    if dob.value != st.value:
        problems.append(f"D = {_q(dob.value)} != d-bar = {_q(st.value)}")
    f, e = dob.witness_f, dob.witness_e
    if not in_F_e(f, e):
        problems.append("Dobrushin witness f is not in F_e for the witness e")
    if dobrushin_norm(f) > 1:
        problems.append(f"witness norm {_q(dobrushin_norm(f))} > 1")
    if mu.expect(f) - nu.expect(f) != dob.value:
        problems.append("witness f does not attain the value")
    site_costs = st.witness_plan.site_costs()
    if st.witness_t != st.value or max(site_costs) != st.value:
        problems.append(f"witness t {_q(st.witness_t)} / max site cost "
                        f"{_q(max(site_costs))} differ from value {_q(st.value)}")
    # sup over sites equals sup over the weight simplex, attained at vertices
    vertex_best = max([ZERO] + [sum((w * m for w, m in zip(v.weights, site_costs)), ZERO)
                                for v in simplex_grid(space.num_sites, 1)])
    if vertex_best != max(site_costs):
        problems.append("weighted supremum over vertices differs from the site maximum")
    detail = {"dobrushin": _q(dob.value), "steif": _q(st.value)}
    if problems:
        detail.update(_failure_detail(inst, problems=problems,
                                      dobrushin_lp=dob.lp.dump(), steif_lp=st.lp.dump()))
    return CheckResult("theorem", inst.seed, not problems, detail)


def check_duality_fixed_e(inst: Instance, e: WeightVector) -> CheckResult:
    tv, plan, pv, f = kantorovich_pair(inst.mu, inst.nu, e)
    ok = tv == pv
    detail = {"e": [_q(w) for w in e.weights], "transport": _q(tv), "potential": _q(pv)}
    if not ok:
        detail.update(_failure_detail(inst))
    return CheckResult("duality_fixed_e", inst.seed, ok, detail)


def check_norm_characterization(f: FunctionOnX, seed: int,
                                e_samples: Sequence[WeightVector] = ()) -> CheckResult:
    """Both directions relating the semi-norm to the classes F_e.

    ``norm <= 1`` forces ``f`` into ``F_{Delta(f)}``; membership in any
    sampled ``F_e`` forces ``Delta_s(f) <= e_s`` and hence ``norm <= 1``.
    The chain bound is checked on every pair as a self-test of Delta.
    """
    space = f.space
    profile = lipschitz_profile(f)
    norm = sum(profile, ZERO)
    problems = []
    if norm <= 1 and not in_F_e(f, WeightVector(profile)):
        problems.append("norm <= 1 but f is not in F_Delta(f)")
    members = 0
    for e in e_samples:
        if in_F_e(f, e):
            members += 1
            if any(d > w for d, w in zip(profile, e.weights)):
                problems.append(f"f in F_e for e={[_q(w) for w in e.weights]} but Delta exceeds e")
            if norm > 1:
                problems.append("f in some F_e but norm > 1")
    for x in space.configs:
        for y in space.configs:
            if not chain_bound_holds(f, x, y):
                problems.append(f"chain bound fails at {x}, {y}")
    detail = {"norm": _q(norm), "members": members}
    if problems:
        detail["problems"] = problems
        detail["f"] = [_q(v) for v in f.values]
    return CheckResult("norm_characterization", seed, not problems, detail)


def check_prop1(psi: FunctionOnX, c: CostOnPairs, seed: int) -> CheckResult:
    """Fixed point, 1-Lipschitz and c-convexity agree on psi and on psi^c."""
    problems = []
    if not c.is_semi_metric():
        problems.append("cost is not a semi-metric")
    psi_c = c_transform(psi, c)
    verdicts = {}
    for label, h in (("psi", psi), ("psi^c", psi_c)):
        trio = (is_c_convex(h, c), is_one_lipschitz(h, c), c_transform(h, c).values == h.values,
                is_c_convex_by_definition(h, c))
        verdicts[label] = list(trio)
        if len(set(trio)) != 1:
            problems.append(f"criteria disagree on {label}: {trio}")
        if trio[1] and not reversed_bound_holds(h, c):
            problems.append(f"{label} is 1-Lipschitz but the reversed bound fails")
    if not is_one_lipschitz(psi_c, c):
        problems.append("psi^c is not 1-Lipschitz")
    if c_transform(psi_c, c).values != psi_c.values:
        problems.append("psi^cc != psi^c")
    detail = {"symmetric": c.is_symmetric(), "verdicts": verdicts}
    if problems:
        detail["problems"] = problems
    return CheckResult("prop1", seed, not problems, detail)


def check_prop2(inst: Instance, c: CostOnPairs) -> CheckResult:
    full = two_function_value(inst.mu, inst.nu, c, restricted=False)
    restricted = two_function_value(inst.mu, inst.nu, c, restricted=True)
    ok = full == restricted
    detail = {"unrestricted": _q(full), "restricted": _q(restricted),
              "symmetric": c.is_symmetric()}
    if not ok:
        detail.update(_failure_detail(inst, cost=[[_q(v) for v in r] for r in c.cost]))
    return CheckResult("prop2", inst.seed, ok, detail)


def check_metric_axioms(mu: Distribution, nu: Distribution, rho: Distribution,
                        seed: int) -> CheckResult:
    space = mu.space
    dists = {"mu": mu, "nu": nu, "rho": rho}
    names = list(dists)
    problems = []
    values = {}
    for metric_name, fn in (("dobrushin", lambda a, b: dobrushin_distance(a, b).value),
                            ("steif", lambda a, b: steif_distance(a, b).value)):
        d = {(a, b): fn(dists[a], dists[b]) for a in names for b in names}
        values[metric_name] = {f"{a},{b}": _q(v) for (a, b), v in d.items() if a < b}
        for (a, b), v in d.items():
            if v < 0:
                problems.append(f"{metric_name}({a},{b}) < 0")
            if (v == 0) != (dists[a].mass == dists[b].mass):
                problems.append(f"{metric_name}({a},{b}) = {_q(v)} breaks identity of indiscernibles")
            if v != d[b, a]:
                problems.append(f"{metric_name} not symmetric on ({a},{b})")
            for m in names:
                if v > d[a, m] + d[m, b]:
                    problems.append(f"{metric_name} triangle fails on {a},{m},{b}")
            if metric_name == "steif" and v > space.max_diameter:
                problems.append(f"steif({a},{b}) exceeds the largest site diameter")
    detail = {"values": values}
    if problems:
        detail["problems"] = problems
    return CheckResult("metric_axioms", seed, not problems, detail)


def check_sandwich(inst: Instance, ks: Iterable[int] = (1, 2, 4, 8)) -> CheckResult:
    """Grid lower bounds increase along nested grids and never pass the Steif value."""
    ks = list(ks)
    bounds = grid_lower_bounds(inst.mu, inst.nu, ks)
    st = steif_distance(inst.mu, inst.nu)
    problems = []
    seq = [bounds[k] for k in ks]
    if any(a > b for a, b in zip(seq, seq[1:])):
        problems.append("grid lower bound is not monotone")
    if any(v > st.value for v in seq):
        problems.append("grid lower bound exceeds the Steif value")
    if max(st.witness_plan.site_costs()) < st.value:
        problems.append("witness coupling beats the optimum")
    if inst.space.num_sites == 1 and bounds.get(1, st.value) != st.value:
        problems.append("single-site grid bound at k=1 differs from the Steif value")
    detail = {"bounds": {str(k): _q(v) for k, v in bounds.items()}, "steif": _q(st.value)}
    if problems:
        detail.update(_failure_detail(inst, problems=problems))
    return CheckResult("sandwich", inst.seed, not problems, detail)


# --------------------------------------------------------------------------
# suite


def run_suite(seed: int = 1, count: int = 10, max_sites: int = 3, max_points: int = 3,
              denom: int = 8, grid: int = 4, sandwich: bool = True,
              points: Optional[Sequence[int]] = None) -> VerificationReport:
    """Run every check on ``count`` instances with seeds ``seed, seed+1, ...``.

    ``points`` fixes the site sizes instead of drawing them.
    """
    report = VerificationReport()
    for sd in range(seed, seed + count):
        if points:
            spec = InstanceSpec(sd, len(points), tuple(points), denom)
        else:
            spec = random_spec(sd, max_sites, max_points, denom)
        inst = generate_instance(spec)
        rng = random.Random(f"checks:{sd}")
        space = inst.space
        report.add(check_theorem(inst))
        report.add(check_duality_fixed_e(inst, random_grid_weight(space.num_sites, rng, grid)))
        report.add(check_norm_characterization(random_function(space, rng, denom), sd,
                                               simplex_grid(space.num_sites, grid)))
        kind = ("symmetric", "asymmetric", "signed")[sd % 3]
        report.add(check_prop1(random_function(space, rng, denom),
                               random_semi_metric(space, rng, denom, kind), sd))
        report.add(check_prop2(inst, random_semi_metric(space, rng, denom, kind)))
        report.add(check_metric_axioms(inst.mu, inst.nu, random_distribution(space, rng, denom), sd))
        if sandwich:
            report.add(check_sandwich(inst, [k for k in (1, 2, 4, 8) if k <= max(grid, 1)]))
    return report
