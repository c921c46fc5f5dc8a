"""Reading and writing instance, function, cost and result documents.

Documents are JSON objects carrying ``"format": 1``. Scalars are written as
JSON integers when integral and as ``"p/q"`` strings otherwise, so every
value survives a round trip bit for bit. Mass and function maps are keyed
by configuration labels: the point labels of each site joined with commas.
"""

from __future__ import annotations

import json
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Any

from .core import (
    CostOnPairs,
    Coupling,
    Distribution,
    FunctionOnX,
    InstanceError,
    ProductSpace,
    Violation,
    WeightVector,
    as_rational,
    format_rational,
    validate_instance,
)

FORMAT_VERSION = 1


class ParseError(ValueError):
    """The document is not well-formed (bad JSON, wrong version, bad scalar)."""


def scalar(q: Fraction):
    q = as_rational(q)
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def decimal_approx(q: Fraction, digits: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(q.numerator) / Decimal(q.denominator)
    return format(d, "g") if d else "0"


def _loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    if doc.get("format") != FORMAT_VERSION:
        raise ParseError(f"unsupported or missing format version: {doc.get('format')!r}")
    return doc


def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from None


def _scalar_in(value, where: str) -> Fraction:
    try:
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise ParseError(f"{where}: {err}") from None


# --------------------------------------------------------------------------
# instances


def space_to_list(space: ProductSpace) -> list[dict]:
    return [{"name": site.name,
             "points": list(site.points),
             "metric": [[scalar(v) for v in row] for row in site.metric]}
            for site in space.sites]


def instance_to_dict(space: ProductSpace, mu: Distribution, nu: Distribution) -> dict:
    return {
        "format": FORMAT_VERSION,
        "sites": space_to_list(space),
        "mu": {k: scalar(v) for k, v in mu.as_map().items()},
        "nu": {k: scalar(v) for k, v in nu.as_map().items()},
    }


def dumps_instance(space: ProductSpace, mu: Distribution, nu: Distribution) -> str:
    return _dumps(instance_to_dict(space, mu, nu))


def loads_instance(text: str) -> tuple[ProductSpace, Distribution, Distribution]:
    """Parse and validate an instance document.

    Raises :class:`ParseError` for malformed documents and
    :class:`~prodmetrics.core.InstanceError` for invariant violations.
    """
    doc = _loads(text)
    for key in ("sites", "mu", "nu"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    if not isinstance(doc["sites"], list):
        raise ParseError("'sites' must be a list")
    for k, site in enumerate(doc["sites"]):
        if not isinstance(site, dict) or "points" not in site or "metric" not in site:
            raise ParseError(f"site {k} must have 'points' and 'metric'")
        if not isinstance(site["metric"], list) or not all(isinstance(r, list) for r in site["metric"]):
            raise ParseError(f"site {k}: metric must be a list of rows")
        site["metric"] = [[_scalar_in(v, f"site {k} metric") for v in row] for row in site["metric"]]
    for key in ("mu", "nu"):
        if not isinstance(doc[key], dict):
            raise ParseError(f"{key!r} must be a map from configuration labels to masses")
        doc[key] = {lab: _scalar_in(v, f"{key} {lab}") for lab, v in doc[key].items()}
    return validate_instance(doc)


def load_instance(path) -> tuple[ProductSpace, Distribution, Distribution]:
    return loads_instance(_read(path))


def save_instance(path, space: ProductSpace, mu: Distribution, nu: Distribution) -> None:
    Path(path).write_text(dumps_instance(space, mu, nu))


# --------------------------------------------------------------------------
# functions and costs


def function_to_dict(f: FunctionOnX) -> dict:
    return {"format": FORMAT_VERSION, "values": {k: scalar(v) for k, v in f.as_map().items()}}


def loads_function(text: str, space: ProductSpace) -> FunctionOnX:
    doc = _loads(text)
    values = doc.get("values")
    if not isinstance(values, dict):
        raise ParseError("function document needs a 'values' map")
    vec = {}
    for label, v in values.items():
        try:
            cfg = space.parse_label(label)
        except ValueError as err:
            raise InstanceError([Violation("ShapeMismatch", f"function {label}", str(err))]) from None
        vec[cfg] = _scalar_in(v, f"function {label}")
    missing = [space.label(c) for c in space.configs if c not in vec]
    if missing:
        raise InstanceError([Violation("ShapeMismatch", "function",
                                       f"no value for configurations {missing}")])
    return FunctionOnX.from_map(space, vec)


def load_function(path, space: ProductSpace) -> FunctionOnX:
    return loads_function(_read(path), space)


def cost_to_dict(c: CostOnPairs) -> dict:
    return {"format": FORMAT_VERSION,
            "configs": [c.space.label(x) for x in c.space.configs],
            "cost": [[scalar(v) for v in row] for row in c.cost]}


def loads_cost(text: str, space: ProductSpace) -> CostOnPairs:
    """Parse a cost matrix given in configuration order."""
    doc = _loads(text)
    rows = doc.get("cost")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError("cost document needs a 'cost' matrix")
    labels = doc.get("configs")
    if labels is not None and labels != [space.label(x) for x in space.configs]:
        raise InstanceError([Violation("ShapeMismatch", "cost",
                                       "'configs' does not match the instance's configuration order")])
    return CostOnPairs(space, tuple(tuple(_scalar_in(v, "cost") for v in row) for row in rows))


def load_cost(path, space: ProductSpace) -> CostOnPairs:
    return loads_cost(_read(path), space)


def parse_weights(text: str) -> WeightVector:
    return WeightVector(tuple(_scalar_in(t, f"weight list {text!r}") for t in text.split(",")))


# --------------------------------------------------------------------------
# results


def value_entry(q: Fraction) -> dict[str, Any]:
    return {"exact": format_rational(q), "decimal": decimal_approx(q)}


def coupling_to_dict(m: Coupling) -> dict:
    space = m.space
    labels = [space.label(x) for x in space.configs]
    return {f"{labels[i]}|{labels[j]}": scalar(v)
            for i, row in enumerate(m.plan) for j, v in enumerate(row) if v}


def weights_to_dict(space: ProductSpace, e: WeightVector) -> dict:
    return {site.name: scalar(w) for site, w in zip(space.sites, e.weights)}
