"""File formats: space JSON, graph text, metric text, interval-structure
JSON, and JSON-safe report encoding."""
from __future__ import annotations

import json
from fractions import Fraction
from dataclasses import is_dataclass, fields

import numpy as np

from .axioms import StepProfile
from .core import FiniteTernarySpace
from .errors import InputError
from .generators import graph_spec, load_genspec
from .intervals import IntervalStructure
from .metrics import MetricMatrix


def space_to_obj(space: FiniteTernarySpace) -> dict:
    if space.genspec is not None:
        out = dict(space.genspec)
        out["label"] = space.label
        return out
    return {"n": space.size, "label": space.label,
            "mu": [int(v) for v in space.table]}


def space_from_obj(obj) -> FiniteTernarySpace:
    if not isinstance(obj, dict):
        raise InputError("space file must contain a JSON object")
    if "generator" in obj:
        space = load_genspec(obj)
        if obj.get("label"):
            space.label = obj["label"]
        return space
    try:
        n = obj["n"]
        mu = obj["mu"]
    except KeyError as exc:
        raise InputError(f"space object missing key {exc}") from None
    return FiniteTernarySpace(n, obj.get("label", ""), table=mu)


def load_space(path) -> FiniteTernarySpace:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read space file {path}: {exc}") from None
    return space_from_obj(obj)


def save_space(space, path):
    with open(path, "w") as fh:
        json.dump(space_to_obj(space), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_graph(path):
    """Text graph: first line N, then one 'u v' edge per line (0-based)."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from None
    if not lines:
        raise InputError("empty graph file")
    try:
        n = int(lines[0])
        edges = []
        for ln in lines[1:]:
            u, v = ln.split()
            edges.append((int(u), int(v)))
    except ValueError:
        raise InputError(f"malformed graph file {path}") from None
    return graph_spec(n, edges)


def load_metric(path) -> MetricMatrix:
    """Text metric: first line N, then N rows of N entries (int or p/q)."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read metric file {path}: {exc}") from None
    try:
        n = int(lines[0])
        rows = [[Fraction(tok) for tok in ln.split()] for ln in lines[1:n + 1]]
    except (ValueError, ZeroDivisionError, IndexError):
        raise InputError(f"malformed metric file {path}") from None
    if len(rows) != n or any(len(r) != n for r in rows):
        raise InputError(f"metric file {path} is not an {n}x{n} table")
    den = 1
    for row in rows:
        for v in row:
            den = den * v.denominator // np.gcd(den, v.denominator)
    num = [[int(v * den) for v in row] for row in rows]
    return MetricMatrix(np.asarray(num, dtype=np.int64), int(den))


def save_metric(d: MetricMatrix, path):
    with open(path, "w") as fh:
        fh.write(f"{d.size}\n")
        for i in range(d.size):
            toks = []
            for j in range(d.size):
                v = Fraction(int(d.num[i, j]), d.den)
                toks.append(str(v.numerator) if v.denominator == 1 else
                            f"{v.numerator}/{v.denominator}")
            fh.write(" ".join(toks) + "\n")


def structure_to_obj(istruct: IntervalStructure) -> dict:
    return {"n": istruct.size, "primed": istruct.primed,
            "kappa0": jsonable(istruct.kappa0),
            "intervals": {f"{a},{b}": list(m)
                          for (a, b), m in sorted(istruct.members.items())}}


def structure_from_obj(obj) -> IntervalStructure:
    try:
        members = {}
        for key, mem in obj["intervals"].items():
            a, b = key.split(",")
            members[(int(a), int(b))] = mem
        return IntervalStructure(obj["n"], members, obj.get("primed", False),
                                 _parse_scalar(obj.get("kappa0", 0)))
    except (KeyError, ValueError) as exc:
        raise InputError(f"malformed interval structure: {exc}") from None


def load_structure(path) -> IntervalStructure:
    try:
        with open(path) as fh:
            return structure_from_obj(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read structure file {path}: {exc}") from None


def _parse_scalar(v):
    if isinstance(v, str) and "/" in v:
        return Fraction(v)
    return v


def jsonable(value):
    """Recursively convert report values to JSON-safe types; Fractions
    become 'p/q' strings, step profiles become breakpoint tables."""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else \
            f"{value.numerator}/{value.denominator}"
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, StepProfile):
        return {str(jsonable(p)): jsonable(v)
                for p, v in zip(value.points, value.values)}
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: jsonable(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, dict):
        return {str(jsonable(k)): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (np.ndarray,)):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, frozenset):
        return sorted(jsonable(v) for v in value)
    return value


def dump_report(obj, fh):
    json.dump(jsonable(obj), fh, sort_keys=True, indent=2)
    fh.write("\n")
