"""Exact rational linear programming.

A revised simplex method with Bland's least-index rule, run in exact
rational arithmetic (``gmpy2.mpq`` when available, otherwise
``fractions.Fraction``). There are no tolerances anywhere.

Problems are first rewritten in a canonical form

    maximize c.z  subject to  rows (<=, ==, >=),  z_k >= 0 or z_k free.

When the canonical form has more rows than variables (the potential
programs built in :mod:`prodmetrics.metrics` have one row per ordered pair
of configurations) the solver runs on the dual program instead and reads
the primal point off the simplex multipliers. Either way the answer is
certified before it is returned: the primal point is checked against every
constraint of the original problem, the dual point against the dual
constraints, and the two objective values must coincide.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .core import as_rational

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

_ZERO = _Q(0)
_ONE = _Q(1)


class Relation(str, enum.Enum):
    LE = "<="
    EQ = "=="
    GE = ">="


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class LpCertificationError(RuntimeError):
    """The solver produced an answer that failed its own exact re-check."""

    def __init__(self, message: str, lp: Optional[LinearProgram] = None):
        self.lp = lp
        super().__init__(message)


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[int, Fraction]
    relation: Relation
    rhs: Fraction


@dataclass
class LinearProgram:
    """A linear program built incrementally.

    >>> lp = LinearProgram("max")
    >>> x = lp.add_var("x", lower=0, objective=1)
    >>> lp.add_constraint({x: 1}, "<=", 1)
    >>> solve(lp).value
    Fraction(1, 1)
    """

    sense: str = "min"
    objective: list[Fraction] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    lower: list[Optional[Fraction]] = field(default_factory=list)
    upper: list[Optional[Fraction]] = field(default_factory=list)
    names: list[str] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', not {self.sense!r}")

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add_var(self, name: str = "", lower=0, upper=None, objective=0) -> int:
        """Add a variable and return its index. ``lower=None`` means unbounded below."""
        self.objective.append(as_rational(objective))
        self.lower.append(None if lower is None else as_rational(lower))
        self.upper.append(None if upper is None else as_rational(upper))
        self.names.append(name or f"x{len(self.objective) - 1}")
        return len(self.objective) - 1

    def add_constraint(self, coeffs, relation, rhs, name: str = "") -> None:
        if isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            items = enumerate(coeffs)
        clean = {}
        for j, v in items:
            if not 0 <= j < self.num_vars:
                raise IndexError(f"variable index {j} out of range")
            v = as_rational(v)
            if v:
                clean[j] = clean.get(j, 0) + v
        self.constraints.append(Constraint(clean, Relation(relation), as_rational(rhs)))
        self.row_names.append(name or f"r{len(self.constraints) - 1}")

    def dump(self) -> str:
        """Human-readable listing of the whole program."""

        def term(j, v):
            sign = "-" if v < 0 else "+"
            mag = abs(v)
            coef = "" if mag == 1 else f"{mag} "
            return f"{sign} {coef}{self.names[j]}"

        lines = [f"{'maximize' if self.sense == 'max' else 'minimize'}"]
        obj = " ".join(term(j, v) for j, v in enumerate(self.objective) if v)
        lines.append(f"  {obj or '0'}")
        lines.append("subject to")
        for name, con in zip(self.row_names, self.constraints):
            body = " ".join(term(j, v) for j, v in sorted(con.coeffs.items())) or "0"
            lines.append(f"  {name}: {body} {con.relation.value} {con.rhs}")
        lines.append("bounds")
        for j, name in enumerate(self.names):
            lo = "-inf" if self.lower[j] is None else str(self.lower[j])
            hi = "+inf" if self.upper[j] is None else str(self.upper[j])
            lines.append(f"  {lo} <= {name} <= {hi}")
        return "\n".join(lines) + "\n"

    def violations(self, x: Sequence[Fraction]) -> list[str]:
        """Every constraint or bound that ``x`` breaks, evaluated exactly."""
        out = []
        if len(x) != self.num_vars:
            return [f"point has {len(x)} entries, program has {self.num_vars} variables"]
        for j, v in enumerate(x):
            if self.lower[j] is not None and v < self.lower[j]:
                out.append(f"{self.names[j]} = {v} < lower bound {self.lower[j]}")
            if self.upper[j] is not None and v > self.upper[j]:
                out.append(f"{self.names[j]} = {v} > upper bound {self.upper[j]}")
        for name, con in zip(self.row_names, self.constraints):
            lhs = sum((a * x[j] for j, a in con.coeffs.items()), Fraction(0))
            ok = {Relation.LE: lhs <= con.rhs, Relation.EQ: lhs == con.rhs,
                  Relation.GE: lhs >= con.rhs}[con.relation]
            if not ok:
                out.append(f"{name}: {lhs} {con.relation.value} {con.rhs} fails")
        return out

    def evaluate(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x)), Fraction(0))


@dataclass(frozen=True)
class LpSolution:
    status: Status
    value: Optional[Fraction] = None
    primal: Optional[tuple[Fraction, ...]] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# --------------------------------------------------------------------------
# standard form: minimize cost.x subject to A x = b, x >= 0, b >= 0


@dataclass
class _StdResult:
    status: Status
    x: list = None
    y: list = None
    pivots: int = 0


def _standard_simplex(m: int, cols: list[dict], b: list, cost: list, unit_cols: dict) -> _StdResult:
    """Two-phase revised simplex with Bland's rule.

    ``cols[j]`` maps row -> coefficient. ``unit_cols`` maps a row to a column
    that is the unit vector of that row; remaining rows get artificials.
    Returns the primal point (structural columns only) and the simplex
    multipliers ``y`` with ``cost - A^T y >= 0`` at the optimum.
    """
    n = len(cols)
    cols = list(cols)
    basis = []
    n_art = 0
    for i in range(m):
        if i in unit_cols:
            basis.append(unit_cols[i])
        else:
            cols.append({i: _ONE})
            basis.append(n + n_art)
            n_art += 1
    ntot = n + n_art
    is_basic = [False] * ntot
    for j in basis:
        is_basic[j] = True
    binv = [[_ONE if i == k else _ZERO for k in range(m)] for i in range(m)]
    xb = list(b)
    pivots = 0

    def multipliers(c):
        y = [_ZERO] * m
        for i, j in enumerate(basis):
            cj = c[j]
            if cj:
                row = binv[i]
                for k in range(m):
                    if row[k]:
                        y[k] += cj * row[k]
        return y

    def pivot(r, q, alpha, y, dq):
        nonlocal pivots
        pivots += 1
        ar = alpha[r]
        theta = xb[r] / ar
        if theta:
            for i in range(m):
                if i != r and alpha[i]:
                    xb[i] -= theta * alpha[i]
        xb[r] = theta
        pr = [v / ar for v in binv[r]]
        binv[r] = pr
        nz = [k for k in range(m) if pr[k]]
        for i in range(m):
            a = alpha[i]
            if i != r and a:
                row = binv[i]
                for k in nz:
                    row[k] -= a * pr[k]
        if y is not None and dq:
            for k in nz:
                y[k] += dq * pr[k]
        is_basic[basis[r]] = False
        is_basic[q] = True
        basis[r] = q

    def column_image(q):
        col = cols[q]
        alpha = [_ZERO] * m
        for r, v in col.items():
            for i in range(m):
                bir = binv[i][r]
                if bir:
                    alpha[i] += bir * v
        return alpha

    def run(c, limit):
        y = multipliers(c)
        while True:
            q = None
            for j in range(limit):
                if is_basic[j]:
                    continue
                d = c[j]
                for r, v in cols[j].items():
                    if y[r]:
                        d -= y[r] * v
                if d < 0:
                    q, dq = j, d
                    break
            if q is None:
                return Status.OPTIMAL, y
            alpha = column_image(q)
            r = None
            best = None
            for i in range(m):
                if alpha[i] > 0:
                    ratio = xb[i] / alpha[i]
                    if r is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                        r, best = i, ratio
            if r is None:
                return Status.UNBOUNDED, y
            pivot(r, q, alpha, y, dq)

    if n_art:
        phase1 = [_ZERO] * n + [_ONE] * n_art
        run(phase1, ntot)
        if any(xb[i] for i in range(m) if basis[i] >= n):
            return _StdResult(Status.INFEASIBLE, pivots=pivots)
        # Drive zero-level artificials out; rows where that is impossible are
        # redundant and their artificial stays basic at zero forever.
        for r in range(m):
            if basis[r] < n:
                continue
            row = binv[r]
            for j in range(n):
                if is_basic[j]:
                    continue
                val = _ZERO
                for k, v in cols[j].items():
                    if row[k]:
                        val += row[k] * v
                if val:
                    pivot(r, j, column_image(j), None, _ZERO)
                    break
    cost_ext = list(cost) + [_ZERO] * n_art
    status, y = run(cost_ext, n)
    if status is not Status.OPTIMAL:
        return _StdResult(status, pivots=pivots)
    x = [_ZERO] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = xb[i]
    return _StdResult(Status.OPTIMAL, x, y, pivots)


# --------------------------------------------------------------------------
# canonical form


@dataclass
class _Canonical:
    """maximize c.z s.t. rows; z_k >= 0 unless free[k]."""

    c: list
    rows: list  # (dict k -> coef, Relation, rhs)
    free: list


@dataclass
class _CanonResult:
    status: Status
    z: list = None
    lam: list = None  # row duals: >= 0 on <= rows, <= 0 on >= rows
    pivots: int = 0


def _primal_route(can: _Canonical) -> _CanonResult:
    m = len(can.rows)
    cols: list[dict] = []
    cost = []
    zcols = []
    for k, ck in enumerate(can.c):
        zcols.append(len(cols))
        cols.append({})
        cost.append(-ck)
        if can.free[k]:
            cols.append({})
            cost.append(ck)
    flips = []
    b = []
    for i, (coeffs, rel, rhs) in enumerate(can.rows):
        f = -1 if rhs < 0 else 1
        flips.append(f)
        b.append(rhs * f)
        for k, a in coeffs.items():
            j = zcols[k]
            cols[j][i] = a * f
            if can.free[k]:
                cols[j + 1][i] = -a * f
    unit = {}
    for i, (_, rel, _) in enumerate(can.rows):
        if rel is Relation.EQ:
            continue
        s = (1 if rel is Relation.LE else -1) * flips[i]
        unit_candidate = len(cols)
        cols.append({i: _Q(s)})
        cost.append(_ZERO)
        if s == 1:
            unit[i] = unit_candidate
    res = _standard_simplex(m, cols, b, cost, unit)
    if res.status is not Status.OPTIMAL:
        return _CanonResult(res.status, pivots=res.pivots)
    z = []
    for k in range(len(can.c)):
        j = zcols[k]
        z.append(res.x[j] - res.x[j + 1] if can.free[k] else res.x[j])
    lam = [-res.y[i] * flips[i] for i in range(m)]
    return _CanonResult(Status.OPTIMAL, z, lam, res.pivots)


def _dual_of(can: _Canonical, zero_objective: bool = False):
    """Canonical form of the dual program, and the row-to-variable signs."""
    n = len(can.c)
    signs = []
    dual_cols: list[dict] = [dict() for _ in range(n)]
    obj = []
    free = []
    for i, (coeffs, rel, rhs) in enumerate(can.rows):
        s = -1 if rel is Relation.GE else 1
        signs.append(s)
        free.append(rel is Relation.EQ)
        obj.append(-rhs * s)
        for k, a in coeffs.items():
            dual_cols[k][i] = a * s
    rows = []
    for k in range(n):
        rel = Relation.EQ if can.free[k] else Relation.GE
        rows.append((dual_cols[k], rel, _ZERO if zero_objective else can.c[k]))
    return _Canonical(obj, rows, free), signs


def _dual_route(can: _Canonical) -> _CanonResult:
    dual, signs = _dual_of(can)
    res = _primal_route(dual)
    if res.status is Status.UNBOUNDED:
        return _CanonResult(Status.INFEASIBLE, pivots=res.pivots)
    if res.status is Status.INFEASIBLE:
        # Primal is infeasible or unbounded; the dual of the zero-objective
        # problem is always feasible and tells the two apart.
        probe, _ = _dual_of(can, zero_objective=True)
        pres = _primal_route(probe)
        status = Status.INFEASIBLE if pres.status is Status.UNBOUNDED else Status.UNBOUNDED
        return _CanonResult(status, pivots=res.pivots + pres.pivots)
    z = [-v for v in res.lam]
    lam = [s * w for s, w in zip(signs, res.z)]
    return _CanonResult(Status.OPTIMAL, z, lam, res.pivots)


def _canonicalize(lp: LinearProgram):
    """Shift/reflect bounded variables to z >= 0 and record the map back."""
    sgn = 1 if lp.sense == "max" else -1
    offset, sign, free = [], [], []
    extra_rows = []
    for j in range(lp.num_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is not None:
            offset.append(_Q(lo))
            sign.append(1)
            free.append(False)
            if hi is not None:
                extra_rows.append(({j: _ONE}, Relation.LE, _Q(hi - lo)))
        elif hi is not None:
            offset.append(_Q(hi))
            sign.append(-1)
            free.append(False)
        else:
            offset.append(_ZERO)
            sign.append(1)
            free.append(True)
    c = [_Q(lp.objective[j]) * sign[j] * sgn for j in range(lp.num_vars)]
    rows = []
    for con in lp.constraints:
        coeffs = {}
        rhs = _Q(con.rhs)
        for j, a in con.coeffs.items():
            a = _Q(a)
            rhs -= a * offset[j]
            coeffs[j] = a * sign[j]
        rows.append((coeffs, con.relation, rhs))
    rows.extend(extra_rows)
    return _Canonical(c, rows, free), offset, sign


def _certify(can: _Canonical, res: _CanonResult) -> list[str]:
    """Exact primal/dual feasibility plus equal objectives."""
    problems = []
    z, lam = res.z, res.lam
    for k, v in enumerate(z):
        if not can.free[k] and v < 0:
            problems.append(f"canonical z[{k}] = {v} < 0")
    reduced = [_ZERO] * len(z)
    dual_obj = _ZERO
    for i, (coeffs, rel, rhs) in enumerate(can.rows):
        li = lam[i]
        if (rel is Relation.LE and li < 0) or (rel is Relation.GE and li > 0):
            problems.append(f"dual value {li} of row {i} has the wrong sign")
        dual_obj += rhs * li
        lhs = _ZERO
        for k, a in coeffs.items():
            lhs += a * z[k]
            if li:
                reduced[k] += a * li
        if not {Relation.LE: lhs <= rhs, Relation.EQ: lhs == rhs,
                Relation.GE: lhs >= rhs}[rel]:
            problems.append(f"canonical row {i} violated")
    for k, ck in enumerate(can.c):
        if (can.free[k] and reduced[k] != ck) or (not can.free[k] and reduced[k] < ck):
            problems.append(f"dual constraint for variable {k} violated")
    primal_obj = sum((ck * v for ck, v in zip(can.c, z)), _ZERO)
    if primal_obj != dual_obj:
        problems.append(f"objective gap: primal {primal_obj} != dual {dual_obj}")
    return problems


def solve(lp: LinearProgram, method: str = "auto") -> LpSolution:
    """Solve ``lp`` exactly.

    ``method`` picks the simplex route: ``"primal"``, ``"dual"`` or
    ``"auto"`` (dual when the canonical form has more rows than columns).
    Raises :class:`LpCertificationError` if an optimal answer fails the
    exact re-check, which would indicate a solver bug.
    """
    if lp.num_vars == 0:
        raise ValueError("a linear program needs at least one variable")
    can, offset, sign = _canonicalize(lp)
    if method == "auto":
        method = "dual" if len(can.rows) > len(can.c) else "primal"
    if method == "primal":
        res = _primal_route(can)
    elif method == "dual":
        res = _dual_route(can)
    else:
        raise ValueError(f"unknown method {method!r}")
    if res.status is not Status.OPTIMAL:
        return LpSolution(res.status, pivots=res.pivots)
    problems = _certify(can, res)
    x = tuple(Fraction(int(o.numerator), int(o.denominator))
              + s * Fraction(int(v.numerator), int(v.denominator))
              for o, s, v in zip(offset, sign, res.z))
    problems.extend(lp.violations(x))
    if problems:
        raise LpCertificationError("; ".join(problems[:10]), lp)
    return LpSolution(Status.OPTIMAL, lp.evaluate(x), x, res.pivots)
