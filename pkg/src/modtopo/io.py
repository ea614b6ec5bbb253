"""Space files, manifold descriptions and result persistence.

Numbers are written as decimal with 17 significant digits so that a
save/load round trip reproduces every double exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .manifold import (ConformalFactor, FlatTorus, MetricField, RoundSphere,
                       SampledManifold, geodesic_space, sample)
from .metric_core import FiniteMetricSpace, validate


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, column: int = 0, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{column}: {msg}")


def _num(x) -> str:
    x = float(x)
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if math.isnan(x):
        return '"nan"'
    s = f"{x:.17g}"
    if "e" not in s and "." not in s and "inf" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats and rows of numbers on one line."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return json.dumps(obj)


def _read_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno, path) from None


def _require(doc, key, path):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"missing field {key!r}", 1, 1, path)
    return doc[key]


def space_to_dict(X: FiniteMetricSpace) -> dict:
    return {"name": X.name, "labels": list(X.labels), "dist": X.dist}


def load_space(path) -> FiniteMetricSpace:
    """Read a space file and validate it; axiom failures propagate unchanged."""
    doc = _read_json(path)
    dist = _require(doc, "dist", path)
    labels = doc.get("labels")
    try:
        matrix = np.array(dist, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("dist must be a matrix of numbers", 1, 1, path) from None
    return validate(matrix, labels=labels, name=doc.get("name", ""))


def save_space(X: FiniteMetricSpace, path) -> None:
    Path(path).write_text(dumps(space_to_dict(X)) + "\n")


def save_result(result: dict, path) -> None:
    Path(path).write_text(dumps(result) + "\n")


def load_result(path) -> dict:
    return _read_json(path)


def field_from_dict(doc: dict) -> MetricField:
    b = doc["base"]
    kind = b.get("type")
    if kind == "flat_torus":
        base = FlatTorus(float(b.get("lx", 1.0)), float(b.get("ly", 1.0)))
    elif kind == "sphere":
        base = RoundSphere(float(b.get("radius", 1.0)))
    else:
        raise ParseError(f"unknown base type {kind!r}")
    conf = doc.get("conformal") or {}
    fourier = {(int(p), int(q)): float(c) for p, q, c in conf.get("fourier", [])}
    return MetricField(base, ConformalFactor(fourier, tuple(conf.get("bumps", ()))))


def field_to_dict(field: MetricField) -> dict:
    b = field.base
    if isinstance(b, FlatTorus):
        base = {"type": "flat_torus", "lx": b.lx, "ly": b.ly}
    else:
        base = {"type": "sphere", "radius": b.radius}
    conf = {"fourier": [[p, q, c] for (p, q), c in field.conformal.fourier],
            "bumps": [{"center": list(bp.center), "height": bp.height, "width": bp.width}
                      for bp in field.conformal.bumps]}
    return {"base": base, "conformal": conf}


def load_manifold(path) -> dict:
    """Parse a manifold description into field and sampling settings."""
    doc = _read_json(path)
    _require(doc, "base", path)
    try:
        field = field_from_dict(doc)
    except ParseError as e:
        raise ParseError(str(e), 1, 1, path) from None
    mode = doc.get("mode", "grid")
    params = doc.get("params")
    if params is not None:
        params = np.array(params, dtype=float)
    return {"field": field, "n": int(doc.get("n", 64 if params is None else len(params))),
            "mode": "random" if mode in ("random", "seeded-random") else mode,
            "seed": int(doc.get("seed", 0)), "knn": int(doc.get("knn", 8)),
            "params": params}


def build_manifold(desc: dict, name: str = "") -> SampledManifold:
    """Sample and discretize; explicit ``params`` override ``n``/``mode``/``seed``."""
    params = desc.get("params")
    if params is None:
        params = sample(desc["field"], desc["n"], desc["mode"], desc["seed"])
    return geodesic_space(desc["field"], params, desc["knn"], name=name)


def save_manifold(M: SampledManifold, path) -> Path:
    """Write the space file and a ``.params.json`` sidecar; return the sidecar path."""
    path = Path(path)
    save_space(M.space, path)
    side = path.with_name(path.stem + ".params.json")
    doc = field_to_dict(M.field)
    doc.update({"knn": M.knn, "params": np.asarray(M.params)})
    save_result(doc, side)
    return side
