"""Sparse multivariate polynomials with rational coefficients.

A monomial is a sorted tuple of ``(var, exp)`` pairs; the empty tuple is 1.
Variables are plain integers (the compiler uses tape cell indices).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

ZERO = Fraction(0)


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


class Poly:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for m, c in (terms.items() if isinstance(terms, dict) else terms):
                if c:
                    clean[m] = clean.get(m, ZERO) + Fraction(c)
        self.terms = {m: c for m, c in clean.items() if c}
        self._hash = None

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, v: int) -> "Poly":
        return cls({((v, 1),): Fraction(1)})

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(m == () for m in self.terms)

    def const_value(self) -> Fraction:
        return self.terms.get((), ZERO)

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def evaluate(self, point) -> Fraction:
        total = ZERO
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                term *= point[v] ** e
            total += term
        return total

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: (-sum(e for _, e in mc[0]), mc[0]))

    def normalized(self) -> tuple:
        """``(key, sign)`` with self = sign * c * P_key for some c > 0.

        The key polynomial has coprime integer coefficients and a positive
        leading coefficient, so p and any nonzero rational multiple share it.
        """
        if not self.terms:
            return (), 0
        items = self.sorted_terms()
        den = lcm(*(c.denominator for _, c in items))
        ints = [(m, int(c * den)) for m, c in items]
        g = 0
        for _, c in ints:
            g = gcd(g, c)
        sign = 1 if ints[0][1] > 0 else -1
        return tuple((m, sign * c // g) for m, c in ints), sign

    def integer_multiple(self) -> "Poly":
        """Positive rational multiple with coprime integer coefficients."""
        key, sign = self.normalized()
        return Poly({m: sign * c for m, c in key})

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = _lift(other)
        d = dict(self.terms)
        for m, c in other.terms.items():
            d[m] = d.get(m, ZERO) + c
        return Poly(d)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        if not self.terms or not other.terms:
            return Poly()
        d = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                d[m] = d.get(m, ZERO) + c1 * c2
        return Poly(d)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(f"t{v}" + (f"^{e}" if e > 1 else "") for v, e in m)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _lift(x) -> Poly:
    if isinstance(x, Poly):
        return x
    return Poly.const(x)
