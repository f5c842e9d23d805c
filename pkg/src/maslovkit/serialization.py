"""JSON encoding of scalars, matrices and polynomial matrices."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .forms_core import as_array, frac, is_exact
from .polys import PolyMatrix


def scalar_to_json(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return float(x)


def matrix_to_json(M):
    M = np.asarray(M)
    if M.ndim == 1:
        return [scalar_to_json(v) for v in M]
    return [[scalar_to_json(v) for v in row] for row in M]


def _parse_scalar(v, exact_kind):
    if exact_kind:
        return frac(v)
    return float(frac(v)) if isinstance(v, str) else float(v)


def matrix_from_json(data, exact_kind=None):
    """Rows of scalars; strings "p/q" are exact, JSON floats infer the float kind."""
    if exact_kind is None:
        return as_array(data)
    return as_array(data, exact_kind)


def poly_from_json(entries) -> PolyMatrix:
    """Nested rows whose (i, j) entry is a coefficient list, low degree first."""
    return PolyMatrix.from_entries([[e if isinstance(e, list) else [e] for e in row] for row in entries])


def poly_to_json(P: PolyMatrix):
    return [[[scalar_to_json(c) for c in e] for e in row] for row in P.entries()]


def jsonable(obj):
    """Recursively convert results (Fractions, numpy values, tuples) to JSON-ready data."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return matrix_to_json(obj) if obj.ndim <= 2 else [jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return scalar_to_json(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def is_exact_matrix(M) -> bool:
    return is_exact(M)
