"""Deterministic report documents.

Exact values are written as "a/b" strings, floats as decimal strings with
a fixed number of significant digits, complex numbers as {"re", "im"}.
Keys are sorted, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import json
import math
from dataclasses import fields, is_dataclass
from fractions import Fraction

import numpy as np

from .cohomology import HCRClass
from .series import FormalSeries, ZLaurent


def fmt_float(x: float, digits: int) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return f"{x:.{digits}e}"


def fmt_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def zl_to_text(value: ZLaurent) -> dict:
    """{z exponent: {sector: [coefficients]}} with exact strings."""
    out = {}
    for e in sorted(value.terms):
        out[str(e)] = {str(s): [fmt_fraction(c) for c in vec] for s, vec in value.terms[e].parts}
    return out


def series_to_text(series: FormalSeries) -> list:
    rows = []
    for n, logpow in series.sorted_keys():
        rows.append({"y": [fmt_fraction(x) for x in n], "log": list(logpow),
                     "degree": fmt_fraction(series.degree(n)), "coeff": zl_to_text(series.terms[(n, logpow)])})
    return rows


def jsonable(obj, digits: int = 12):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return fmt_fraction(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj), digits)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": fmt_float(obj.real, digits), "im": fmt_float(obj.imag, digits)}
    if isinstance(obj, np.ndarray):
        return [jsonable(x, digits) for x in obj.tolist()]
    if isinstance(obj, ZLaurent):
        return zl_to_text(obj)
    if isinstance(obj, HCRClass):
        return {str(s): [fmt_fraction(c) for c in v] for s, v in obj.parts}
    if isinstance(obj, FormalSeries):
        return series_to_text(obj)
    if isinstance(obj, dict):
        return {_key(k): jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(x, digits) for x in items]
    if is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name), digits) for f in fields(obj) if f.repr}
    return str(obj)


def _key(k) -> str:
    if isinstance(k, str):
        return k
    if isinstance(k, Fraction):
        return fmt_fraction(k)
    if isinstance(k, tuple):
        return "(" + ",".join(_key(x) for x in k) + ")"
    if isinstance(k, complex):
        return f"{k.real:g}{k.imag:+g}j"
    return str(k)


def dumps(doc: dict, digits: int = 12) -> str:
    return json.dumps(jsonable(doc, digits), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
