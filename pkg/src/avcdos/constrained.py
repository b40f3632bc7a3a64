"""DoS analysis under jammer state costs and transmitter input costs.

``lambda0(P)`` is the cheapest expected jamming cost among all
symmetrizing matrices; a jammer with budget Λ can symmetrize when
``lambda0(P) < Λ``.  With an input budget Γ the transmitter picks the
worst P for the jammer, giving the max-min value ``max_{g(P)<=Γ} lambda0(P)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .channel_model import Avc, CostFn, DimensionMismatch, Distribution, StochMatrix, input_cost
from .exact import INF, assert_exact, to_fraction
from .exact_linear import LinearSystem, Status, enumerate_vertices, lp_optimize
from .symmetrizability import build_symmetrizing_system, is_symmetrizable

ZERO = Fraction(0)
ONE = Fraction(1)


class Classification(enum.Enum):
    DOS_POSSIBLE = "DoSPossible"
    NO_DOS = "NoDoS"
    BOUNDARY = "Boundary"
    NOT_SYMMETRIZABLE = "NotSymmetrizable"


@dataclass(frozen=True)
class ConstraintSpec:
    state_cost: CostFn
    lam: Fraction
    input_cost: CostFn | None = None
    gamma: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "lam", to_fraction(self.lam))
        if self.lam <= 0:
            raise ValueError("state budget lambda must be > 0")
        if self.gamma is not None:
            object.__setattr__(self, "gamma", to_fraction(self.gamma))
            if self.gamma < 0:
                raise ValueError("input budget gamma must be >= 0")
        self.state_cost.require_normalized()
        if self.input_cost is not None:
            self.input_cost.require_normalized()


@dataclass(frozen=True)
class StateConstrainedVerdict:
    lambda0: object  # Fraction or INF
    classification: Classification
    witness_u: StochMatrix | None = None

    def __post_init__(self):
        assert_exact(self)


@dataclass(frozen=True)
class ConstrainedDoSResult:
    dos_possible: bool
    max_value: object  # Fraction or INF
    optimal_p: Distribution | None = None

    def __post_init__(self):
        assert_exact(self)


def _check(w: Avc, l: CostFn, p: Distribution | None = None, g: CostFn | None = None):
    if l.alphabet_size != w.ns:
        raise DimensionMismatch(f"state cost has {l.alphabet_size} entries, channel has {w.ns} states")
    l.require_normalized()
    if p is not None and p.support_size != w.nx:
        raise DimensionMismatch(f"input distribution has {p.support_size} entries, channel has {w.nx} inputs")
    if g is not None:
        if g.alphabet_size != w.nx:
            raise DimensionMismatch(f"input cost has {g.alphabet_size} entries, channel has {w.nx} inputs")
        g.require_normalized()


def _jam_cost_vector(w: Avc, p, l: CostFn) -> tuple:
    return tuple(p[x] * l.costs[s] for x in range(w.nx) for s in range(w.ns))


def _lambda0_solve(w: Avc, p: Distribution, l: CostFn):
    _check(w, l, p)
    res = lp_optimize(build_symmetrizing_system(w), _jam_cost_vector(w, p.p, l), "min")
    if res.status is Status.INFEASIBLE:
        return INF, None
    assert res.status is Status.OPTIMAL
    return res.value, StochMatrix.from_vector(res.argmin, w.nx, w.ns)


def lambda0(w: Avc, p: Distribution, l: CostFn):
    """Minimum expected state cost over symmetrizing U; INF if none exists."""
    return _lambda0_solve(w, p, l)[0]


def classify_state_constrained(w: Avc, p: Distribution, spec: ConstraintSpec) -> StateConstrainedVerdict:
    value, u = _lambda0_solve(w, p, spec.state_cost)
    if value is INF:
        return StateConstrainedVerdict(INF, Classification.NOT_SYMMETRIZABLE)
    if value < spec.lam:
        return StateConstrainedVerdict(value, Classification.DOS_POSSIBLE, u)
    if value == spec.lam:
        return StateConstrainedVerdict(value, Classification.BOUNDARY, u)
    return StateConstrainedVerdict(value, Classification.NO_DOS)


def _joint_system(w: Avc, l: CostFn, g: CostFn, gamma: Fraction):
    """max b.y over (P, y) with A^T y <= c(P), P in the simplex, g(P) <= gamma.

    Dual of the inner minimum; its objective does not depend on P, and the
    coupling A^T y - c(P) <= 0 is linear in (P, y).
    """
    sym = build_symmetrizing_system(w)
    nx, ns = w.nx, w.ns
    m = len(sym.equalities)
    nvar = nx + m
    eqs = [(tuple([ONE] * nx + [ZERO] * m), ONE)]
    ineqs = [(tuple(g.costs) + (ZERO,) * m, gamma)]
    for x in range(nx):
        for s in range(ns):
            j = w.dims.u_index(x, s)
            row = [ZERO] * nvar
            row[x] = -l.costs[s]
            for i, (a, _) in enumerate(sym.equalities):
                row[nx + i] += a[j]
            ineqs.append((tuple(row), ZERO))
    objective = (ZERO,) * nx + tuple(b for _, b in sym.equalities)
    return LinearSystem(nvar, tuple(eqs), tuple(ineqs), frozenset(range(nx))), objective


def max_min_lambda_solve(w: Avc, l: CostFn, g: CostFn, gamma) -> tuple:
    """Return ``(value, P*)``; value is INF when no symmetrizer exists."""
    gamma = to_fraction(gamma)
    _check(w, l, g=g)
    if not is_symmetrizable(w).symmetrizable:
        return INF, None
    sys, obj = _joint_system(w, l, g, gamma)
    res = lp_optimize(sys, obj, "max")
    if res.status is Status.INFEASIBLE:
        raise ValueError(f"no input distribution satisfies g(P) <= {gamma}")
    assert res.status is Status.OPTIMAL
    p = Distribution(res.argmin[: w.nx])
    assert input_cost(p, g) <= gamma
    assert lambda0(w, p, l) == res.value
    return res.value, p


def max_min_lambda(w: Avc, l: CostFn, g: CostFn, gamma):
    return max_min_lambda_solve(w, l, g, gamma)[0]


def max_min_lambda_oracle(w: Avc, l: CostFn, g: CostFn, gamma):
    """Independent route: vertices of the symmetrizer polytope, then the
    vertices of the epigraph {(P, t): t <= cost(P, V) for every vertex V}."""
    gamma = to_fraction(gamma)
    _check(w, l, g=g)
    verts = enumerate_vertices(build_symmetrizing_system(w))
    if not verts:
        return INF
    nx, ns = w.nx, w.ns
    eqs = [(tuple([ONE] * nx + [ZERO]), ONE)]
    ineqs = [(tuple(g.costs) + (ZERO,), gamma)]
    for v in verts:
        row = [-sum((v[x * ns + s] * l.costs[s] for s in range(ns)), ZERO) for x in range(nx)]
        ineqs.append((tuple(row) + (ONE,), ZERO))
    epi = LinearSystem(nx + 1, tuple(eqs), tuple(ineqs), frozenset(range(nx)))
    points = enumerate_vertices(epi)
    if not points:
        raise ValueError(f"no input distribution satisfies g(P) <= {gamma}")
    return max(pt[-1] for pt in points)


def in_dos_constrained(w: Avc, spec: ConstraintSpec) -> ConstrainedDoSResult:
    if spec.input_cost is None or spec.gamma is None:
        raise ValueError("input-constrained analysis needs both an input cost and gamma")
    value, p = max_min_lambda_solve(w, spec.state_cost, spec.input_cost, spec.gamma)
    if value is INF:
        return ConstrainedDoSResult(False, INF)
    return ConstrainedDoSResult(value < spec.lam, value, p)
