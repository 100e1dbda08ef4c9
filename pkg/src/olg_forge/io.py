"""JSON reading and writing of economy specifications.

Layout::

    {
      "bundle": {"alpha_min": .., "alpha_max": .., "e_max": .., "sigma": ..,
                 "epsilon": .., "delta": ..},
      "prefix": [{"t": 0, "L": 1, "L_next": 1,
                  "households": [{"count": 1, "endow_young": [..], "endow_old": [..],
                                  "utility": {"kind": "ces", "lambda": [..],
                                              "mu": [..], "rho": 0.5}}]}],
      "tail_rule": {"kind": "stationary_repeat", "generation": {...}}
                   | {"kind": "theorem3", "k": .., "L_seam": .., "H_tail": .., "e_min": ..}
                   | {"kind": "gale", "w": ..} | null,
      "resource_related": true
    }
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .economy import (AssumptionBundle, EconomySpec, GaleTail, GenerationSpec, HouseholdSpec,
                      PriceSequence, StationaryRepeat, Theorem3Tail, UtilityParams)

BUNDLE_FIELDS = ("alpha_min", "alpha_max", "e_max", "sigma", "epsilon", "delta")


class SpecParseError(ValueError):
    """Malformed economy document; the message names the line or field."""


def _get(obj, key, path):
    if not isinstance(obj, dict):
        raise SpecParseError(f"{path}: expected an object")
    if key not in obj:
        raise SpecParseError(f"{path}.{key}: missing field" if path else f"{key}: missing field")
    return obj[key]


def _num(obj, key, path, kind=float):
    val = _get(obj, key, path)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SpecParseError(f"{path}.{key}: expected a number, got {val!r}")
    if kind is int and int(val) != val:
        raise SpecParseError(f"{path}.{key}: expected an integer, got {val!r}")
    return kind(val)


def _vec(obj, key, path):
    val = _get(obj, key, path)
    if not isinstance(val, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
        raise SpecParseError(f"{path}.{key}: expected a list of numbers")
    return [float(v) for v in val]


def _utility(obj, path) -> UtilityParams:
    kind = _get(obj, "kind", path)
    lam = _vec(obj, "lambda", path)
    mu = _vec(obj, "mu", path)
    if kind == "ces":
        return UtilityParams.ces(lam, mu, _num(obj, "rho", path))
    if kind == "loglinear":
        return UtilityParams.loglinear(lam, mu)
    raise SpecParseError(f"{path}.kind: unknown utility kind {kind!r}")


def _generation(obj, path) -> GenerationSpec:
    t = _num(obj, "t", path, int)
    L = _num(obj, "L", path, int)
    L_next = _num(obj, "L_next", path, int)
    hh = _get(obj, "households", path)
    if not isinstance(hh, list) or not hh:
        raise SpecParseError(f"{path}.households: expected a nonempty list")
    members = []
    for j, h in enumerate(hh):
        hp = f"{path}.households[{j}]"
        count = _num(h, "count", hp, int) if "count" in h else 1
        u = _utility(_get(h, "utility", hp), f"{hp}.utility")
        members.append((HouseholdSpec(_vec(h, "endow_young", hp), _vec(h, "endow_old", hp), u), count))
    return GenerationSpec(t, L, L_next, tuple(members))


def _tail(obj, path):
    if obj is None:
        return None
    kind = _get(obj, "kind", path)
    if kind == "stationary_repeat":
        return StationaryRepeat(_generation(_get(obj, "generation", path), f"{path}.generation"))
    if kind == "theorem3":
        return Theorem3Tail(_num(obj, "k", path, int), _num(obj, "L_seam", path, int),
                            _num(obj, "H_tail", path, int), _num(obj, "e_min", path))
    if kind == "gale":
        return GaleTail(_num(obj, "w", path))
    raise SpecParseError(f"{path}.kind: unknown tail kind {kind!r}")


def spec_from_dict(doc: dict) -> EconomySpec:
    b = _get(doc, "bundle", "")
    bundle = AssumptionBundle(**{k: _num(b, k, "bundle") for k in BUNDLE_FIELDS})
    prefix = _get(doc, "prefix", "")
    if not isinstance(prefix, list) or not prefix:
        raise SpecParseError("prefix: expected a nonempty list of generations")
    gens = tuple(_generation(g, f"prefix[{i}]") for i, g in enumerate(prefix))
    tail = _tail(doc.get("tail_rule"), "tail_rule")
    rr = doc.get("resource_related", True)
    if not isinstance(rr, bool):
        raise SpecParseError("resource_related: expected true or false")
    return EconomySpec(bundle, gens, tail, rr)


def loads_spec(text: str) -> EconomySpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return spec_from_dict(doc)
    except SpecParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecParseError(str(exc)) from None


def load_spec(path) -> EconomySpec:
    return loads_spec(Path(path).read_text())


def _utility_dict(u: UtilityParams) -> dict:
    d = {"kind": u.kind, "lambda": u.lam.tolist(), "mu": u.mu.tolist()}
    if u.kind == "ces":
        d["rho"] = u.rho
    return d


def generation_to_dict(g: GenerationSpec) -> dict:
    return {
        "t": g.t, "L": g.L, "L_next": g.L_next,
        "households": [{"count": c, "endow_young": h.endow_young.tolist(),
                        "endow_old": h.endow_old.tolist(), "utility": _utility_dict(h.utility)}
                       for h, c in g.members],
    }


def spec_to_dict(e: EconomySpec) -> dict:
    rule = e.tail_rule
    if rule is None:
        tail = None
    elif isinstance(rule, StationaryRepeat):
        tail = {"kind": "stationary_repeat", "generation": generation_to_dict(rule.generation)}
    elif isinstance(rule, Theorem3Tail):
        tail = {"kind": "theorem3", "k": rule.k, "L_seam": rule.L_seam,
                "H_tail": rule.H_tail, "e_min": rule.e_min}
    else:
        tail = {"kind": "gale", "w": rule.w}
    return {
        "bundle": {k: getattr(e.bundle, k) for k in BUNDLE_FIELDS},
        "prefix": [generation_to_dict(g) for g in e.prefix],
        "tail_rule": tail,
        "resource_related": e.resource_related,
    }


def dumps_spec(e: EconomySpec) -> str:
    return json.dumps(spec_to_dict(e), indent=2) + "\n"


def load_prices(path) -> PriceSequence:
    """Read ``{"prices": [[...], ...]}``, or a command output holding such a path."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    node = doc
    for key in ("result", "path"):
        if isinstance(node, dict) and key in node and "prices" not in node:
            node = node[key]
    prices = _get(node, "prices", "")
    if not isinstance(prices, list) or not all(isinstance(p, list) for p in prices):
        raise SpecParseError("prices: expected a list of price vectors")
    return PriceSequence(tuple(prices))


def data_path(name: str):
    return resources.files("olg_forge") / "data" / name


def example1_file():
    return data_path("example1.json")
