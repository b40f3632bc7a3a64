"""Exact scalar helpers shared by every decision path.

Rationals are :class:`fractions.Fraction`; vectors are tuples of them.
Nothing in here ever touches a float.
"""

from __future__ import annotations

import enum
import re
from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import Any, Iterable

Rational = Fraction
RVector = tuple  # tuple[Fraction, ...]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class ExactnessError(TypeError):
    """A float (or other inexact number) reached an exact code path."""


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"num/den"`` or an integer string; decimals and floats are rejected."""
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"not a rational literal: {text!r}")
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not an exact rational literal (use 'num/den'): {text!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def fmt(q: Fraction) -> str:
    """Render as ``num/den`` (integers get ``/1`` so the format is uniform)."""
    return f"{q.numerator}/{q.denominator}"


def rvec(values: Iterable[Any]) -> tuple[Fraction, ...]:
    return tuple(to_fraction(v) for v in values)


def to_fraction(v: Any) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise ExactnessError(f"boolean is not a rational: {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return parse_rational(v)
    raise ExactnessError(f"inexact value in exact path: {v!r} ({type(v).__name__})")


class _PositiveInfinity:
    """+Infinity for rational-valued optima; compares above every Fraction."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("avcdos.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = _PositiveInfinity()


def assert_exact(obj: Any, _path: str = "value") -> None:
    """Walk ``obj`` and raise :class:`ExactnessError` on any float/complex.

    Used as a runtime guard on every verdict object.
    """
    if isinstance(obj, (float, complex)):
        raise ExactnessError(f"float leaked into {_path}: {obj!r}")
    if type(obj).__module__ == "numpy" or type(obj).__module__.startswith("numpy."):
        raise ExactnessError(f"numpy value leaked into {_path}: {obj!r}")
    if isinstance(obj, (str, bytes, int, Fraction, type(None), enum.Enum)) or obj is INF:
        return
    if is_dataclass(obj) and not isinstance(obj, type):
        for f in fields(obj):
            assert_exact(getattr(obj, f.name), f"{_path}.{f.name}")
        return
    if isinstance(obj, dict):
        for k, v in obj.items():
            assert_exact(k, f"{_path}[key]")
            assert_exact(v, f"{_path}[{k!r}]")
        return
    if isinstance(obj, (list, tuple, set, frozenset)):
        for i, v in enumerate(obj):
            assert_exact(v, f"{_path}[{i}]")
        return
