"""Partial-knowledge jammer: is the channel symmetrizable?

The unknown stochastic matrix U(s|x) is flattened x-major,
``u[x*ns + s]``.  Only unordered input pairs x < x' produce equalities
(the swapped equation is the same one negated).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .channel_model import Avc, Dims, LengthMismatch, StochMatrix
from .exact import assert_exact, rvec
from .exact_linear import (
    LinearSystem,
    Status,
    enumerate_basic_feasible,
    lp_feasible,
    lp_optimize,
    verify_farkas,
)

ZERO = Fraction(0)


class ShapeMismatch(ValueError):
    pass


class Verdict(enum.Enum):
    SYMMETRIZABLE = "Symmetrizable"
    NON_SYMMETRIZABLE = "NonSymmetrizable"


@dataclass(frozen=True)
class SymmetrizabilityDecision:
    verdict: Verdict
    witness_u: StochMatrix | None = None
    certificate: tuple | None = None

    def __post_init__(self):
        assert_exact(self)

    @property
    def symmetrizable(self) -> bool:
        return self.verdict is Verdict.SYMMETRIZABLE


def pair_rows(w: Avc):
    """Yield ``(x, xh, y, coeffs)`` for each symmetrizing equality.

    ``coeffs . u = 0`` encodes sum_s W(y|x,s)U(s|xh) - sum_s W(y|xh,s)U(s|x) = 0.
    """
    d = w.dims
    for x, xh in combinations(range(d.nx), 2):
        for y in range(d.ny):
            a = [ZERO] * d.u_len
            for s in range(d.ns):
                a[d.u_index(xh, s)] += w.w[x][s][y]
                a[d.u_index(x, s)] -= w.w[xh][s][y]
            yield x, xh, y, tuple(a)


def row_sum_rows(dims: Dims):
    for x in range(dims.nx):
        yield tuple(Fraction(int(k // dims.ns == x)) for k in range(dims.u_len))


def build_symmetrizing_system(w: Avc) -> LinearSystem:
    eqs = [(a, ZERO) for *_, a in pair_rows(w)]
    eqs += [(a, Fraction(1)) for a in row_sum_rows(w.dims)]
    return LinearSystem(w.dims.u_len, tuple(eqs), (), frozenset(range(w.dims.u_len)))


def is_symmetrizable(w: Avc) -> SymmetrizabilityDecision:
    sys = build_symmetrizing_system(w)
    res = lp_feasible(sys)
    if res.feasible:
        u = StochMatrix.from_vector(res.witness, w.nx, w.ns)
        return SymmetrizabilityDecision(Verdict.SYMMETRIZABLE, witness_u=u)
    return SymmetrizabilityDecision(Verdict.NON_SYMMETRIZABLE, certificate=res.farkas)


def is_symmetrizable_oracle(w: Avc) -> bool:
    """Same question answered by brute-force basic-solution enumeration."""
    return enumerate_basic_feasible(build_symmetrizing_system(w)).feasible


def verify_symmetrizer(w: Avc, u: StochMatrix) -> bool:
    if not isinstance(u, StochMatrix):
        u = StochMatrix(u)
    if (u.rows, u.cols) != (w.nx, w.ns):
        raise ShapeMismatch(f"U has shape {u.rows}x{u.cols}, expected {w.nx}x{w.ns}")
    for x, xh in combinations(range(w.nx), 2):
        for y in range(w.ny):
            lhs = sum((w.w[x][s][y] * u.u[xh][s] for s in range(w.ns)), ZERO)
            rhs = sum((w.w[xh][s][y] * u.u[x][s] for s in range(w.ns)), ZERO)
            if lhs != rhs:
                return False
    return True


def verify_certificate(w: Avc, cert) -> bool:
    return verify_farkas(build_symmetrizing_system(w), cert)


def evaluate_defect_polynomial(t, u, dims: Dims) -> Fraction:
    """Sum over ordered input pairs and outputs of the squared symmetrization defect."""
    t = rvec(t)
    u = rvec(u)
    if len(t) != dims.t_len:
        raise LengthMismatch(f"t has length {len(t)}, expected {dims.t_len}")
    if len(u) != dims.u_len:
        raise LengthMismatch(f"u has length {len(u)}, expected {dims.u_len}")
    total = ZERO
    for k1 in range(dims.nx):
        for k2 in range(dims.nx):
            for r in range(dims.ny):
                d = ZERO
                for s in range(dims.ns):
                    d += t[dims.t_index(k1, s, r)] * u[dims.u_index(k2, s)]
                    d -= t[dims.t_index(k2, s, r)] * u[dims.u_index(k1, s)]
                total += d * d
    return total


def _margin_lp(w: Avc):
    n = w.dims.u_len
    eqs = [(a + (ZERO,), Fraction(1)) for a in row_sum_rows(w.dims)]
    ineqs = []
    for *_, a in pair_rows(w):
        ineqs.append((a + (Fraction(-1),), ZERO))
        ineqs.append((tuple(-v for v in a) + (Fraction(-1),), ZERO))
    sys = LinearSystem(n + 1, tuple(eqs), tuple(ineqs), frozenset(range(n + 1)))
    return lp_optimize(sys, (ZERO,) * n + (Fraction(1),), "min")


def symmetrizability_margin(w: Avc) -> Fraction:
    """min over stochastic U of the largest absolute symmetrization defect."""
    res = _margin_lp(w)
    assert res.status is Status.OPTIMAL
    return res.value
