"""Random exact channels and systems shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction as F

from hypothesis import strategies as st

from avcdos.channel_model import Dims, validate_avc
from avcdos.exact_linear import LinearSystem


def random_distribution(rng: random.Random, n: int, den: int | None = None) -> list:
    den = den or rng.choice([1, 2, 3, 4, 6])
    cuts = sorted(rng.randint(0, den) for _ in range(n - 1))
    pts = [0] + cuts + [den]
    return [F(pts[i + 1] - pts[i], den) for i in range(n)]


def random_avc(rng: random.Random, dims: Dims, den: int | None = None):
    return validate_avc([[random_distribution(rng, dims.ny, den) for _ in range(dims.ns)] for _ in range(dims.nx)])


def random_dims(rng: random.Random, max_x=3, max_s=3, max_y=3) -> Dims:
    return Dims(rng.randint(1, max_x), rng.randint(1, max_s), rng.randint(1, max_y))


def x_independent(rng, dims: Dims):
    v = [random_distribution(rng, dims.ny) for _ in range(dims.ns)]
    return validate_avc([[list(v[s]) for s in range(dims.ns)] for _ in range(dims.nx)])


def state_independent(rng, dims: Dims):
    rows = [random_distribution(rng, dims.ny) for _ in range(dims.nx)]
    return validate_avc([[list(rows[x]) for _ in range(dims.ns)] for x in range(dims.nx)])


def xs_symmetric(rng, n: int, ny: int):
    """W(y|x,s) = W(y|s,x), needs nx = ns."""
    table = [[None] * n for _ in range(n)]
    for x in range(n):
        for s in range(x, n):
            row = random_distribution(rng, ny)
            table[x][s] = row
            table[s][x] = list(row)
    return validate_avc(table)


def random_system(rng: random.Random, max_vars=6, max_rows=6, span=4):
    n = rng.randint(1, max_vars)

    def vec():
        return tuple(F(rng.randint(-span, span)) for _ in range(n))
    eqs = tuple((vec(), F(rng.randint(-span, span))) for _ in range(rng.randint(0, 2)))
    ineqs = tuple((vec(), F(rng.randint(-span, span))) for _ in range(rng.randint(1, max_rows)))
    nonneg = frozenset(i for i in range(n) if rng.random() < 0.6)
    return LinearSystem(n, eqs, ineqs, nonneg)


# -- hypothesis strategies -------------------------------------------------------

small_rationals = st.fractions(min_value=-4, max_value=4, max_denominator=6)


@st.composite
def distributions(draw, n: int):
    den = draw(st.sampled_from([1, 2, 3, 4, 5, 6, 8]))
    cuts = sorted(draw(st.lists(st.integers(0, den), min_size=n - 1, max_size=n - 1)))
    pts = [0] + cuts + [den]
    return [F(pts[i + 1] - pts[i], den) for i in range(n)]


@st.composite
def avcs(draw, max_x=3, max_s=3, max_y=3, dims: Dims | None = None):
    if dims is None:
        dims = Dims(draw(st.integers(1, max_x)), draw(st.integers(1, max_s)), draw(st.integers(1, max_y)))
    return validate_avc([[draw(distributions(dims.ny)) for _ in range(dims.ns)] for _ in range(dims.nx)])


def random_program_text(rng: random.Random, n_inputs: int = 2, length: int = 8) -> str:
    """A well-formed straight-line-plus-forward-branch program; always halts."""

    def lit():
        num, den = rng.randint(-5, 5), rng.randint(1, 4)
        return f"{num}/{den}" if den != 1 else str(num)

    def expr(depth=0):
        r = rng.random()
        if depth > 2 or r < 0.3:
            return f"c[{rng.randint(0, n_inputs + 1)}]"
        if r < 0.45:
            return lit()
        if r < 0.5:
            return f"-({expr(depth + 1)})"
        op = rng.choice("+-*")
        return f"({expr(depth + 1)} {op} {expr(depth + 1)})"

    lines = ["in: input -> n0"]
    for i in range(length):
        nxt = f"n{i + 1}" if i + 1 < length else "out"
        kind = rng.random()
        if kind < 0.6:
            lines.append(f"n{i}: c[{rng.randint(0, n_inputs + 1)}] := {expr()} -> {nxt}")
        elif kind < 0.85:
            other = f"n{rng.randint(i + 1, length)}" if i + 1 < length else "out"
            other = other if other != f"n{length}" else "out"
            lines.append(f"n{i}: if {expr()} >= 0 -> {nxt} else {other}")
        else:
            lines.append(f"n{i}: shift {rng.choice(['left', 'right'])} -> {nxt}")
    lines.append(f"out: output c[0]..c[{n_inputs - 1}]")
    return "\n".join(lines) + "\n"
