"""Full-knowledge jammer: positivity of the maximal-error capacity.

For a pair of inputs the reachable output sets are the convex hulls of
``{W(.|x,s)}_s``.  C_max > 0 iff some pair has disjoint hulls, so a DoS
attack is possible iff every pair of hulls meets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .channel_model import Avc, Distribution, IndexOutOfRange
from .exact import assert_exact
from .exact_linear import LinearSystem, lp_feasible

ZERO = Fraction(0)
ONE = Fraction(1)


class SameSymbol(ValueError):
    pass


class HullVerdict(enum.Enum):
    INTERSECT = "Intersect"
    DISJOINT = "Disjoint"


@dataclass(frozen=True)
class HullIntersection:
    """Outcome for one input pair.

    Disjoint normal form: with ``threshold = min_s' separator . W(.|xhat,s')``
    every generator of x satisfies ``separator . W(.|x,s) <= threshold - gap``.
    """

    x: int
    xhat: int
    verdict: HullVerdict
    q_x: Distribution | None = None
    q_xhat: Distribution | None = None
    common_point: Distribution | None = None
    separator: tuple | None = None
    threshold: Fraction | None = None
    gap: Fraction | None = None

    def __post_init__(self):
        assert_exact(self)

    @property
    def disjoint(self) -> bool:
        return self.verdict is HullVerdict.DISJOINT


@dataclass(frozen=True)
class FullKnowledgeReport:
    dos_possible: bool
    pairs: tuple = field(default_factory=tuple)
    disjoint_pair: tuple | None = None

    def __post_init__(self):
        assert_exact(self)


def _mix(w: Avc, x: int, q) -> tuple:
    return tuple(sum((w.w[x][s][y] * q[s] for s in range(w.ns)), ZERO) for y in range(w.ny))


def hull_system(w: Avc, x: int, xhat: int) -> LinearSystem:
    """Variables (q1, q2) over S x S: sum q1 = 1, sum q2 = 1, mixtures agree per y."""
    ns = w.ns
    eqs = [
        (tuple([ONE] * ns + [ZERO] * ns), ONE),
        (tuple([ZERO] * ns + [ONE] * ns), ONE),
    ]
    for y in range(w.ny):
        eqs.append((tuple(w.w[x][s][y] for s in range(ns)) + tuple(-w.w[xhat][s][y] for s in range(ns)), ZERO))
    return LinearSystem(2 * ns, tuple(eqs), (), frozenset(range(2 * ns)))


def hulls_intersect(w: Avc, x: int, xhat: int) -> HullIntersection:
    for v in (x, xhat):
        if not 0 <= v < w.nx:
            raise IndexOutOfRange(f"input symbol {v} outside 0..{w.nx - 1}")
    if x == xhat:
        raise SameSymbol(f"need two distinct input symbols, got {x} twice")
    sys = hull_system(w, x, xhat)
    res = lp_feasible(sys)
    ns = w.ns
    if res.feasible:
        q1 = Distribution(res.witness[:ns])
        q2 = Distribution(res.witness[ns:])
        p = _mix(w, x, q1.p)
        assert p == _mix(w, xhat, q2.p)
        return HullIntersection(x, xhat, HullVerdict.INTERSECT, q_x=q1, q_xhat=q2, common_point=Distribution(p))

    # Farkas multipliers (alpha, beta, lam_y): lam.W(.|x,s) >= -alpha, lam.W(.|xhat,s) <= beta,
    # alpha + beta < 0.  The negated functional separates x's hull (low) from xhat's (high).
    lam = res.farkas[2:]
    sep = tuple(-v for v in lam)
    scale = max(abs(v) for v in sep)
    sep = tuple(v / scale for v in sep)
    lo_side = [sum((a * b for a, b in zip(sep, w.w[x][s])), ZERO) for s in range(ns)]
    hi_side = [sum((a * b for a, b in zip(sep, w.w[xhat][s])), ZERO) for s in range(ns)]
    threshold = min(hi_side)
    gap = threshold - max(lo_side)
    assert gap > 0
    return HullIntersection(x, xhat, HullVerdict.DISJOINT, separator=sep, threshold=threshold, gap=gap)


def verify_separator(w: Avc, h: HullIntersection) -> bool:
    if not h.disjoint or h.gap is None or h.gap <= 0:
        return False
    for s in range(w.ns):
        lo = sum((a * b for a, b in zip(h.separator, w.w[h.x][s])), ZERO)
        hi = sum((a * b for a, b in zip(h.separator, w.w[h.xhat][s])), ZERO)
        if lo > h.threshold - h.gap or hi < h.threshold:
            return False
    return True


def verify_common_point(w: Avc, x: int, xhat: int, q_x, q_xhat, p) -> bool:
    return _mix(w, x, tuple(q_x)) == tuple(p) == _mix(w, xhat, tuple(q_xhat))


def is_dos_full_knowledge(w: Avc, full_report: bool = False) -> FullKnowledgeReport:
    """True iff no pair of inputs has disjoint output hulls (C_max = 0)."""
    pairs = []
    first = None
    for x, xh in combinations(range(w.nx), 2):
        h = hulls_intersect(w, x, xh)
        pairs.append(h)
        if h.disjoint and first is None:
            first = (x, xh)
            if not full_report:
                break
    return FullKnowledgeReport(dos_possible=first is None, pairs=tuple(pairs), disjoint_pair=first)


def common_point_from_symmetrizer(w: Avc, u, x: int, xhat: int):
    """A symmetrizer U places W(.|x, U(.|xhat)) = W(.|xhat, U(.|x)) in both hulls."""
    q_x, q_xhat = tuple(u[xhat]), tuple(u[x])
    return Distribution(q_x), Distribution(q_xhat), Distribution(_mix(w, x, q_x))
