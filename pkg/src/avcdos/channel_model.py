"""Arbitrarily varying channels, distributions, costs and the t-vector layout.

The channel tensor is stored as ``w[x][s][y] = W(y|x,s)``.  The flat
vector used by the semialgebraic constructions is x-major, then s, then
y, i.e. ``t[(x*ns + s)*ny + y] = W(y|x,s)``.  Every downstream linear
system and the compiled BSS programs depend on this order.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence as _Seq

from .exact import parse_rational, rvec, to_fraction


class ChannelError(ValueError):
    """Base class for malformed channel-model inputs."""


class NegativeEntry(ChannelError):
    def __init__(self, x, s, y, value):
        super().__init__(f"negative entry W({y}|{x},{s}) = {value}")
        self.x, self.s, self.y, self.value = x, s, y, value


class RowSumMismatch(ChannelError):
    def __init__(self, x, s, actual_sum):
        super().__init__(f"row W(.|{x},{s}) sums to {actual_sum}, not 1")
        self.x, self.s, self.actual_sum = x, s, actual_sum


class RaggedTable(ChannelError):
    pass


class LengthMismatch(ChannelError):
    pass


class DimensionMismatch(ChannelError):
    pass


class IndexOutOfRange(ChannelError, IndexError):
    pass


class NotNormalized(ChannelError):
    pass


@dataclass(frozen=True)
class Dims:
    nx: int
    ns: int
    ny: int

    def __post_init__(self):
        for name in ("nx", "ns", "ny"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ChannelError(f"alphabet size {name} must be an integer >= 1, got {v!r}")

    @property
    def t_len(self) -> int:
        return self.nx * self.ns * self.ny

    @property
    def u_len(self) -> int:
        return self.ns * self.nx

    def t_index(self, x: int, s: int, y: int) -> int:
        return (x * self.ns + s) * self.ny + y

    def u_index(self, x: int, s: int) -> int:
        return x * self.ns + s


@dataclass(frozen=True)
class Distribution:
    p: tuple

    def __post_init__(self):
        p = rvec(self.p)
        object.__setattr__(self, "p", p)
        if not p:
            raise ChannelError("empty distribution")
        for i, v in enumerate(p):
            if v < 0:
                raise ChannelError(f"negative probability p[{i}] = {v}")
        total = sum(p, Fraction(0))
        if total != 1:
            raise ChannelError(f"distribution sums to {total}, not 1")

    @property
    def support_size(self) -> int:
        return len(self.p)

    def __len__(self):
        return len(self.p)

    def __getitem__(self, i):
        return self.p[i]

    def __iter__(self):
        return iter(self.p)

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    @classmethod
    def point(cls, n: int, k: int) -> "Distribution":
        return cls(tuple(Fraction(int(i == k)) for i in range(n)))


@dataclass(frozen=True)
class StochMatrix:
    """Row-stochastic matrix ``u[from][to]``; houses U(s|x) as ``u[x][s]``."""

    u: tuple

    def __post_init__(self):
        rows = tuple(rvec(r) for r in self.u)
        if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise RaggedTable("stochastic matrix must be rectangular and non-empty")
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                if v < 0:
                    raise ChannelError(f"negative entry u[{i}][{j}] = {v}")
            total = sum(r, Fraction(0))
            if total != 1:
                raise ChannelError(f"row {i} sums to {total}, not 1")
        object.__setattr__(self, "u", rows)

    @property
    def rows(self) -> int:
        return len(self.u)

    @property
    def cols(self) -> int:
        return len(self.u[0])

    def __getitem__(self, i):
        return self.u[i]

    def as_lists(self):
        return [list(r) for r in self.u]

    @classmethod
    def from_vector(cls, u: _Seq, rows: int, cols: int) -> "StochMatrix":
        u = rvec(u)
        if len(u) != rows * cols:
            raise LengthMismatch(f"expected {rows * cols} entries, got {len(u)}")
        return cls(tuple(u[i * cols:(i + 1) * cols] for i in range(rows)))

    def vector(self) -> tuple:
        return tuple(v for r in self.u for v in r)


@dataclass(frozen=True)
class CostFn:
    costs: tuple
    normalized: bool = True

    def __post_init__(self):
        c = rvec(self.costs)
        object.__setattr__(self, "costs", c)
        if not c:
            raise ChannelError("empty cost function")
        if any(v < 0 for v in c):
            raise ChannelError("costs must be nonnegative")
        if self.normalized and min(c) != 0:
            raise NotNormalized(f"cost function must have minimum 0, got {min(c)}")

    @property
    def alphabet_size(self) -> int:
        return len(self.costs)

    def require_normalized(self) -> None:
        if min(self.costs) != 0:
            raise NotNormalized(f"analysis requires min cost 0, got {min(self.costs)}")

    def __getitem__(self, i):
        return self.costs[i]


@dataclass(frozen=True)
class Sequence:
    symbols: tuple
    alphabet_size: int

    def __post_init__(self):
        syms = tuple(int(v) for v in self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise ChannelError("sequence length must be >= 1")
        for i, a in enumerate(syms):
            if not 0 <= a < self.alphabet_size:
                raise IndexOutOfRange(f"symbol {a} at position {i} outside alphabet of size {self.alphabet_size}")

    @property
    def n(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Avc:
    dims: Dims
    w: tuple  # w[x][s][y]

    def __getitem__(self, idx):
        return self.w[idx]

    def prob(self, y: int, x: int, s: int) -> Fraction:
        return self.w[x][s][y]

    @property
    def nx(self):
        return self.dims.nx

    @property
    def ns(self):
        return self.dims.ns

    @property
    def ny(self):
        return self.dims.ny

    def as_lists(self):
        return [[list(row) for row in block] for block in self.w]


def validate_avc(w) -> Avc:
    """Check a raw ``[x][s][y]`` table and return the immutable :class:`Avc`."""
    try:
        nx = len(w)
        if nx == 0:
            raise RaggedTable("empty channel table")
        ns = len(w[0])
        if ns == 0:
            raise RaggedTable("no states for input 0")
        ny = len(w[0][0])
    except TypeError as exc:
        raise RaggedTable(f"channel table is not a 3-level array: {exc}") from None
    if ny == 0:
        raise RaggedTable("empty output alphabet")
    rows = []
    for x in range(nx):
        if len(w[x]) != ns:
            raise RaggedTable(f"input {x} has {len(w[x])} states, expected {ns}")
        block = []
        for s in range(ns):
            if len(w[x][s]) != ny:
                raise RaggedTable(f"row ({x},{s}) has {len(w[x][s])} outputs, expected {ny}")
            row = rvec(w[x][s])
            for y, v in enumerate(row):
                if v < 0:
                    raise NegativeEntry(x, s, y, v)
            total = sum(row, Fraction(0))
            if total != 1:
                raise RowSumMismatch(x, s, total)
            block.append(row)
        rows.append(tuple(block))
    return Avc(Dims(nx, ns, ny), tuple(rows))


def vectorize(w: Avc) -> tuple:
    return tuple(v for block in w.w for row in block for v in row)


def devectorize(t, dims: Dims) -> Avc:
    t = rvec(t)
    if len(t) != dims.t_len:
        raise LengthMismatch(f"vector has length {len(t)}, dims {dims} need {dims.t_len}")
    ns, ny = dims.ns, dims.ny
    table = [[t[(x * ns + s) * ny:(x * ns + s + 1) * ny] for s in range(ns)] for x in range(dims.nx)]
    return validate_avc(table)


def averaged_channel(w: Avc, q: Distribution) -> tuple:
    """W_q(y|x) = sum_s W(y|x,s) q(s), returned as ``rows[x][y]``."""
    if q.support_size != w.ns:
        raise DimensionMismatch(f"q has support {q.support_size}, channel has {w.ns} states")
    return tuple(
        tuple(sum((w.w[x][s][y] * q.p[s] for s in range(w.ns)), Fraction(0)) for y in range(w.ny))
        for x in range(w.nx)
    )


def hull_generators(w: Avc, x: int) -> list:
    if not 0 <= x < w.nx:
        raise IndexOutOfRange(f"input symbol {x} outside 0..{w.nx - 1}")
    return [Distribution(w.w[x][s]) for s in range(w.ns)]


def empirical_type(seq: Sequence, alphabet_size: int | None = None) -> Distribution:
    k = seq.alphabet_size if alphabet_size is None else alphabet_size
    if k < seq.alphabet_size and any(a >= k for a in seq.symbols):
        raise IndexOutOfRange("sequence uses symbols outside the requested alphabet")
    counts = Counter(seq.symbols)
    return Distribution(tuple(Fraction(counts.get(a, 0), seq.n) for a in range(k)))


def sequence_cost(seq: Sequence, c: CostFn) -> Fraction:
    """Average per-letter cost (1/n) sum_i c(a_i)."""
    if c.alphabet_size != seq.alphabet_size:
        raise DimensionMismatch(
            f"cost alphabet {c.alphabet_size} differs from sequence alphabet {seq.alphabet_size}")
    return sum((c.costs[a] for a in seq.symbols), Fraction(0)) / seq.n


def input_cost(p: Distribution, g: CostFn) -> Fraction:
    """g(P) = sum_x P(x) g(x)."""
    if p.support_size != g.alphabet_size:
        raise DimensionMismatch("distribution and cost alphabets differ")
    return sum((pi * gi for pi, gi in zip(p.p, g.costs)), Fraction(0))


# -- canonical channels used across tests, docs and the CLI examples --------

def xor_channel() -> Avc:
    """Binary adder channel y = x XOR s; symmetric in (x, s)."""
    return validate_avc([[[1 if y == (x ^ s) else 0 for y in range(2)] for s in range(2)] for x in range(2)])


def identity_dmc(n: int = 2) -> Avc:
    """Noiseless n-ary channel with a single (useless) jammer state."""
    return validate_avc([[[1 if y == x else 0 for y in range(n)]] for x in range(n)])


def bsc(p) -> Avc:
    p = to_fraction(p)
    return validate_avc([[[1 - p, p]], [[p, 1 - p]]])


# -- file formats ------------------------------------------------------------

def _parse_entries(values, what):
    out = []
    for v in values:
        if isinstance(v, list):
            out.append(_parse_entries(v, what))
        elif isinstance(v, (str, int)) and not isinstance(v, bool):
            out.append(parse_rational(v))
        else:
            raise ValueError(f"{what}: entries must be 'num/den' strings or integers, got {v!r}")
    return out


def channel_from_json(doc: dict) -> Avc:
    for key in ("X", "S", "Y", "W"):
        if key not in doc:
            raise ValueError(f"channel document is missing field {key!r}")
    w = validate_avc(_parse_entries(doc["W"], "W"))
    if (w.nx, w.ns, w.ny) != (doc["X"], doc["S"], doc["Y"]):
        raise DimensionMismatch(
            f"declared dims ({doc['X']},{doc['S']},{doc['Y']}) differ from table ({w.nx},{w.ns},{w.ny})")
    return w


def channel_to_json(w: Avc) -> dict:
    return {
        "X": w.nx, "S": w.ns, "Y": w.ny,
        "W": [[[f"{v.numerator}/{v.denominator}" for v in row] for row in block] for block in w.w],
    }


def load_channel(path) -> Avc:
    return channel_from_json(json.loads(Path(path).read_text()))


def load_cost(path, normalized: bool = True) -> CostFn:
    doc = json.loads(Path(path).read_text())
    if "costs" not in doc:
        raise ValueError("cost document is missing field 'costs'")
    return CostFn(tuple(_parse_entries(doc["costs"], "costs")), normalized=normalized)


def load_distribution(path) -> Distribution:
    doc = json.loads(Path(path).read_text())
    if "p" not in doc:
        raise ValueError("distribution document is missing field 'p'")
    return Distribution(tuple(_parse_entries(doc["p"], "p")))
