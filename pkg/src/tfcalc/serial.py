"""JSON encodings for tensors, metrics, curvature tensors and polynomials.

Exact scalars are written as strings ("3/4"), floats as JSON numbers.
Compressed values follow the sorted multi-index order of ``multi_indices``.
"""

import json
from fractions import Fraction

import numpy as np

from .curvalg import CurvTensor
from .polyfield import Polynomial
from .symalg import Metric, SymTensor, exact_array, is_exact, multi_indices


def scalar_out(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return float(v)


def scalar_in(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool):
        raise ValueError("boolean is not a scalar")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    raise ValueError(f"bad scalar {v!r}")


def _values_in(raw):
    vals = [scalar_in(v) for v in raw]
    if all(isinstance(v, Fraction) for v in vals):
        return exact_array(vals)
    return np.array([float(v) for v in vals])


def parse_index(key):
    """1-based index key: "112" or "1,1,12"."""
    parts = key.split(",") if "," in key else list(key)
    return tuple(int(p) - 1 for p in parts)


def tensor_to_json(t):
    return {"type": "symtensor", "dim": t.dim, "rank": t.rank,
            "index_order": "sorted multi-indices, 0-based",
            "values": [scalar_out(v) for v in t.values]}


def tensor_from_json(d):
    if d.get("type", "symtensor") != "symtensor":
        raise ValueError("expected a symtensor record")
    n, k = int(d["dim"]), int(d["rank"])
    if "components" in d:
        comps = {parse_index(key): scalar_in(v) for key, v in d["components"].items()}
        return SymTensor.from_components(n, k, comps)
    vals = _values_in(d["values"])
    if len(vals) != len(multi_indices(n, k)):
        raise ValueError("wrong number of tensor values")
    return SymTensor(n, k, vals)


def metric_to_json(h):
    return {"type": "metric", "matrix": [[scalar_out(v) for v in row] for row in h.matrix]}


def metric_from_json(d):
    if isinstance(d, str):
        if d.startswith("identity:"):
            return Metric.identity(int(d.split(":")[1]), exact=True)
        raise ValueError(f"unknown metric {d!r}")
    rows = d["matrix"] if isinstance(d, dict) else d
    flat = _values_in([v for row in rows for v in row])
    n = len(rows)
    return Metric(flat.reshape(n, n))


def curv_to_json(Y):
    return {"type": "curvtensor", "dim": Y.dim, "values": [scalar_out(v) for v in Y.values]}


def curv_from_json(d):
    vals = _values_in(d["values"])
    return CurvTensor(int(d["dim"]), vals)


def poly_to_json(P):
    return {"type": "polynomial", "dim": P.dim,
            "terms": [[list(e), scalar_out(c)] for e, c in sorted(P.terms.items(), reverse=True)]}


def poly_from_json(d):
    n = int(d["dim"])
    terms = {}
    for e, c in d["terms"]:
        e = tuple(int(v) for v in e)
        terms[e] = terms.get(e, 0) + scalar_in(c)
    return Polynomial(n, terms)


def dumps(obj):
    return json.dumps(obj, sort_keys=True)
