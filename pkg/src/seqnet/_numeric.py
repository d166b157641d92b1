"""Helpers shared by the float and exact-rational code paths."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

import numpy as np


def is_exact(*groups) -> bool:
    """True when any value in the given sequences/arrays is a Fraction or int-only object array."""
    for g in groups:
        if isinstance(g, Fraction):
            return True
        if isinstance(g, np.ndarray):
            if g.dtype == object and any(isinstance(v, Fraction) for v in g.flat):
                return True
            continue
        if isinstance(g, Iterable) and not isinstance(g, (str, bytes)):
            if any(isinstance(v, Fraction) for v in g):
                return True
    return False


def as_array(values, exact: bool) -> np.ndarray:
    if exact:
        return np.array([to_fraction(v) for v in np.ravel(values)], dtype=object).reshape(
            np.shape(values)
        )
    return np.asarray(values, dtype=float)


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    # the exact binary value of the float
    return Fraction(float(v))


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape)


def parse_number(text: str):
    """'3006/1000' -> Fraction; '0.006' -> float; '2' -> Fraction(2)."""
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    if all(c.isdigit() or c in "+-" for c in text):
        return Fraction(int(text))
    return float(text)


def parse_vector(text: str, exact: bool | None = None) -> list:
    """Comma-separated numbers. ``exact=True`` reads decimals as exact
    fractions ('0.006' -> 3/500); ``exact=None`` keeps decimals as floats
    unless some entry is written as a fraction."""
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if exact is None:
        exact = any("/" in p for p in parts)
    if exact:
        return [Fraction(p) for p in parts]
    return [float(Fraction(p)) if "/" in p else float(p) for p in parts]


def jsonable(v):
    if isinstance(v, Fraction):
        return float(v) if v.denominator != 1 else int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.ndarray):
        return [jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return v
