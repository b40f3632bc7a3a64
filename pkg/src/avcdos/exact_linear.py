"""Exact rational linear programming, Farkas certificates and Fourier-Motzkin.

A :class:`LinearSystem` is ``{E x = e, G x <= h, x_j >= 0 for j in nonneg}``.
Certificates are indexed over the explicit constraints, equalities first,
then inequalities; nonnegativity bounds get implicit multipliers.  A vector
``m`` certifies infeasibility when

* ``m_i >= 0`` for every inequality row,
* ``c = E^T m_E + G^T m_G`` has ``c_j >= 0`` on nonneg variables and
  ``c_j == 0`` on free ones,
* ``e . m_E + h . m_G < 0``,

because then ``0 <= c . x <= e.m_E + h.m_G < 0`` for any feasible ``x``.
"""

from __future__ import annotations

import enum
import itertools
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .exact import fmt, rvec

log = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_FM_CAP = int(os.environ.get("AVCDOS_FM_CAP", "10000"))
ORACLE_MAX_VARS = 12


class MalformedSystem(ValueError):
    pass


class CapExceeded(RuntimeError):
    pass


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class LinearSystem:
    num_vars: int
    equalities: tuple = ()
    inequalities: tuple = ()  # (a, b) meaning a . x <= b
    nonneg: frozenset = frozenset()

    def __post_init__(self):
        if not isinstance(self.num_vars, int) or self.num_vars < 0:
            raise MalformedSystem(f"num_vars must be a nonnegative integer, got {self.num_vars!r}")
        object.__setattr__(self, "equalities", self._rows(self.equalities, "equality"))
        object.__setattr__(self, "inequalities", self._rows(self.inequalities, "inequality"))
        nn = frozenset(int(j) for j in self.nonneg)
        if any(not 0 <= j < self.num_vars for j in nn):
            raise MalformedSystem("nonnegativity index out of range")
        object.__setattr__(self, "nonneg", nn)

    def _rows(self, rows, kind):
        out = []
        for row in rows:
            try:
                a, b = row
                a = rvec(a)
                b = rvec([b])[0]
            except (TypeError, ValueError) as exc:
                raise MalformedSystem(f"bad {kind} row {row!r}: {exc}") from None
            if len(a) != self.num_vars:
                raise MalformedSystem(f"{kind} row has {len(a)} coefficients, expected {self.num_vars}")
            out.append((a, b))
        return tuple(out)

    @property
    def num_constraints(self) -> int:
        return len(self.equalities) + len(self.inequalities)

    def is_satisfied_by(self, x) -> bool:
        x = rvec(x)
        if len(x) != self.num_vars:
            return False
        if any(x[j] < 0 for j in self.nonneg):
            return False
        if any(_dot(a, x) != b for a, b in self.equalities):
            return False
        return all(_dot(a, x) <= b for a, b in self.inequalities)

    def all_nonneg(self) -> "LinearSystem":
        return LinearSystem(self.num_vars, self.equalities, self.inequalities, frozenset(range(self.num_vars)))

    def dump(self) -> str:
        """Plain-text dump for bug reports: var count, E rows, I rows, nonneg set."""
        lines = [f"vars {self.num_vars}", f"E {len(self.equalities)}"]
        lines += [" ".join(fmt(v) for v in a) + " = " + fmt(b) for a, b in self.equalities]
        lines.append(f"I {len(self.inequalities)}")
        lines += [" ".join(fmt(v) for v in a) + " <= " + fmt(b) for a, b in self.inequalities]
        lines.append("nonneg " + " ".join(str(j) for j in sorted(self.nonneg)))
        return "\n".join(lines)


class Status(enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class FeasibilityResult:
    status: Status
    witness: tuple | None = None
    farkas: tuple | None = None

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


@dataclass(frozen=True)
class OptimizationResult:
    status: Status
    value: Fraction | None = None
    argmin: tuple | None = None
    farkas: tuple | None = None


def _dot(a, x) -> Fraction:
    return sum((ai * xi for ai, xi in zip(a, x) if ai), ZERO)


# ---------------------------------------------------------------------------
# simplex


@dataclass
class _Tableau:
    rows: list  # each row: coefficients over all columns, then rhs
    basis: list
    ncols: int
    nstruct: int  # columns < nstruct are structural (original + slacks)
    signs: list = field(default_factory=list)

    def pivot(self, r: int, c: int, cost: list | None = None) -> None:
        prow = self.rows[r]
        pv = prow[c]
        if pv != 1:
            prow = [v / pv for v in prow]
            self.rows[r] = prow
        nz = [(j, v) for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[c]
                if f:
                    for j, v in nz:
                        row[j] -= f * v
        if cost is not None:
            f = cost[c]
            if f:
                for j, v in nz:
                    cost[j] -= f * v
        self.basis[r] = c


class _StdForm:
    """Map a LinearSystem to ``A z = b, z >= 0`` (rows sign-fixed so b >= 0)."""

    def __init__(self, sys: LinearSystem):
        self.sys = sys
        n = sys.num_vars
        self.col_of = []  # per original var: (plus_col, minus_col or None)
        col = 0
        for j in range(n):
            if j in sys.nonneg:
                self.col_of.append((col, None))
                col += 1
            else:
                self.col_of.append((col, col + 1))
                col += 2
        self.nvar_cols = col
        self.nslack = len(sys.inequalities)
        self.nstruct = col + self.nslack
        rows, signs = [], []
        constraints = [(a, b, None) for a, b in sys.equalities]
        constraints += [(a, b, k) for k, (a, b) in enumerate(sys.inequalities)]
        for a, b, slack in constraints:
            row = [ZERO] * self.nstruct
            for j, v in enumerate(a):
                if v:
                    p, m = self.col_of[j]
                    row[p] = v
                    if m is not None:
                        row[m] = -v
            if slack is not None:
                row[col + slack] = ONE
            sgn = -1 if b < 0 else 1
            if sgn < 0:
                row = [-v for v in row]
            rows.append((row, b * sgn))
            signs.append(sgn)
        self.rows = rows
        self.signs = signs

    def recover(self, z) -> tuple:
        x = []
        for p, m in self.col_of:
            x.append(z[p] - (z[m] if m is not None else ZERO))
        return tuple(x)

    def objective(self, c) -> list:
        out = [ZERO] * self.nstruct
        for j, v in enumerate(c):
            p, m = self.col_of[j]
            out[p] = v
            if m is not None:
                out[m] = -v
        return out


def _bland_loop(tab: _Tableau, cost: list, allowed: int) -> bool:
    """Minimize with Bland's rule; ``cost`` is the reduced-cost row (rhs slot = -z).

    Returns False when the problem is unbounded.
    """
    while True:
        enter = next((j for j in range(allowed) if cost[j] < 0), None)
        if enter is None:
            return True
        best = None
        for i, row in enumerate(tab.rows):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, tab.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            tab.pivot_col_unbounded = enter
            return False
        tab.pivot(best[1], enter, cost)


def _phase1(sysf: _StdForm):
    m = len(sysf.rows)
    ns = sysf.nstruct
    ncols = ns + m
    rows = []
    for i, (row, b) in enumerate(sysf.rows):
        full = list(row) + [ZERO] * m + [b]
        full[ns + i] = ONE
        rows.append(full)
    tab = _Tableau(rows=rows, basis=[ns + i for i in range(m)], ncols=ncols, nstruct=ns)
    cost = [ZERO] * (ncols + 1)
    for j in range(ns, ncols):
        cost[j] = ONE
    for row in rows:
        for j in range(ncols + 1):
            if row[j]:
                cost[j] -= row[j]
    _bland_loop(tab, cost, ncols)
    return tab, cost


def _farkas_from_phase1(sysf: _StdForm, cost: list) -> tuple:
    ns = sysf.nstruct
    y = [ONE - cost[ns + i] for i in range(len(sysf.rows))]
    return tuple(-yi * sg for yi, sg in zip(y, sysf.signs))


def _solution(tab: _Tableau, ncols_out: int) -> list:
    z = [ZERO] * ncols_out
    for i, b in enumerate(tab.basis):
        if b < ncols_out:
            z[b] = tab.rows[i][-1]
    return z


def lp_feasible(sys: LinearSystem) -> FeasibilityResult:
    """Exact feasibility: a witness or a Farkas certificate, both re-verified."""
    if not isinstance(sys, LinearSystem):
        raise MalformedSystem("expected a LinearSystem")
    sysf = _StdForm(sys)
    tab, cost = _phase1(sysf)
    if -cost[-1] > 0:
        cert = _farkas_from_phase1(sysf, cost)
        if not verify_farkas(sys, cert):
            raise AssertionError("internal error: phase-1 certificate failed verification")
        return FeasibilityResult(Status.INFEASIBLE, farkas=cert)
    x = sysf.recover(_solution(tab, sysf.nstruct))
    if not sys.is_satisfied_by(x):
        raise AssertionError("internal error: phase-1 witness failed verification")
    return FeasibilityResult(Status.FEASIBLE, witness=x)


def lp_optimize(sys: LinearSystem, objective, sense: str = "min") -> OptimizationResult:
    """Exact optimum of ``objective . x``; Bland's rule makes the argmin reproducible."""
    if not isinstance(sys, LinearSystem):
        raise MalformedSystem("expected a LinearSystem")
    c = rvec(objective)
    if len(c) != sys.num_vars:
        raise MalformedSystem(f"objective has length {len(c)}, system has {sys.num_vars} variables")
    if sense not in ("min", "max"):
        raise MalformedSystem(f"sense must be 'min' or 'max', got {sense!r}")
    flip = -1 if sense == "max" else 1
    sysf = _StdForm(sys)
    tab, cost = _phase1(sysf)
    if -cost[-1] > 0:
        cert = _farkas_from_phase1(sysf, cost)
        if not verify_farkas(sys, cert):
            raise AssertionError("internal error: phase-1 certificate failed verification")
        return OptimizationResult(Status.INFEASIBLE, farkas=cert)

    ns = sysf.nstruct
    # drive zero-level artificials out of the basis where a structural pivot exists
    for i in range(len(tab.rows)):
        if tab.basis[i] >= ns:
            j = next((j for j in range(ns) if tab.rows[i][j]), None)
            if j is not None:
                tab.pivot(i, j)

    cstd = sysf.objective([flip * v for v in c])
    cost2 = cstd + [ZERO] * (tab.ncols - ns) + [ZERO]
    for i, b in enumerate(tab.basis):
        cb = cstd[b] if b < ns else ZERO
        if cb:
            row = tab.rows[i]
            for j in range(tab.ncols + 1):
                if row[j]:
                    cost2[j] -= cb * row[j]
    if not _bland_loop(tab, cost2, ns):
        return OptimizationResult(Status.UNBOUNDED)
    x = sysf.recover(_solution(tab, ns))
    value = _dot(c, x)
    if not sys.is_satisfied_by(x) or value != flip * -cost2[-1]:
        raise AssertionError("internal error: simplex optimum failed re-verification")
    return OptimizationResult(Status.OPTIMAL, value=value, argmin=x)


def verify_farkas(sys: LinearSystem, cert) -> bool:
    try:
        m = rvec(cert)
    except Exception:
        return False
    ne = len(sys.equalities)
    if len(m) != sys.num_constraints:
        return False
    if any(v < 0 for v in m[ne:]):
        return False
    rows = list(sys.equalities) + list(sys.inequalities)
    for j in range(sys.num_vars):
        cj = sum((mi * a[j] for mi, (a, _) in zip(m, rows) if mi), ZERO)
        if j in sys.nonneg:
            if cj < 0:
                return False
        elif cj != 0:
            return False
    return sum((mi * b for mi, (_, b) in zip(m, rows)), ZERO) < 0


# ---------------------------------------------------------------------------
# Fourier-Motzkin


def _normalize_ineq(a, b):
    scale = max((abs(v) for v in a), default=ZERO)
    if scale == 0:
        return a, b
    return tuple(v / scale for v in a), b / scale


def _prune(ineqs: Iterable, n: int) -> list:
    """Drop tautologies and keep only the tightest row per normalized direction."""
    best: dict = {}
    contradiction = None
    for a, b in ineqs:
        a, b = _normalize_ineq(a, b)
        if not any(a):
            if b < 0 and (contradiction is None or b < contradiction):
                contradiction = b
            continue
        if a not in best or b < best[a]:
            best[a] = b
    out = [(a, b) for a, b in best.items()]
    if contradiction is not None:
        out.append((tuple(ZERO for _ in range(n)), contradiction))
    return out


def fourier_motzkin_eliminate(sys: LinearSystem, var: int, cap: int = DEFAULT_FM_CAP) -> LinearSystem:
    """Project out ``var``; the result lives on the remaining variables (re-indexed)."""
    n = sys.num_vars
    if not 0 <= var < n:
        raise MalformedSystem(f"variable {var} out of range for {n} variables")
    eqs = list(sys.equalities)
    ineqs = list(sys.inequalities)
    if var in sys.nonneg:
        ineqs.append((tuple(-ONE if j == var else ZERO for j in range(n)), ZERO))

    piv = next((k for k, (a, _) in enumerate(eqs) if a[var]), None)
    if piv is not None:
        pa, pb = eqs.pop(piv)
        pv = pa[var]

        def subst(a, b):
            f = a[var] / pv
            if not f:
                return a, b
            return tuple(ai - f * pi for ai, pi in zip(a, pa)), b - f * pb

        eqs = [subst(a, b) for a, b in eqs]
        new_ineqs = [subst(a, b) for a, b in ineqs]
    else:
        pos, neg, new_ineqs = [], [], []
        for a, b in ineqs:
            (pos if a[var] > 0 else neg if a[var] < 0 else new_ineqs).append((a, b))
        if len(new_ineqs) + len(pos) * len(neg) > cap:
            raise CapExceeded(
                f"eliminating x{var} would create {len(new_ineqs) + len(pos) * len(neg)} constraints (cap {cap})")
        for (pa, pb), (na, nb) in itertools.product(pos, neg):
            lp, ln = pa[var], -na[var]
            new_ineqs.append((tuple(ai / lp + bi / ln for ai, bi in zip(pa, na)), pb / lp + nb / ln))

    def drop(a):
        return a[:var] + a[var + 1:]

    eqs_out = []
    seen = set()
    for a, b in eqs:
        a = drop(a)
        if not any(a) and b == 0:
            continue
        key = (a, b)
        if key not in seen:
            seen.add(key)
            eqs_out.append(key)
    ineqs_out = _prune(((drop(a), b) for a, b in new_ineqs), n - 1)
    if len(ineqs_out) > cap:
        raise CapExceeded(f"{len(ineqs_out)} constraints after eliminating x{var} (cap {cap})")
    nonneg = frozenset(j if j < var else j - 1 for j in sys.nonneg if j != var)
    return LinearSystem(n - 1, tuple(eqs_out), tuple(ineqs_out), nonneg)


def constant_system_holds(sys: LinearSystem) -> bool:
    if sys.num_vars != 0:
        raise MalformedSystem("system still has variables")
    return all(b == 0 for _, b in sys.equalities) and all(b >= 0 for _, b in sys.inequalities)


def fm_feasible(sys: LinearSystem, cap: int = DEFAULT_FM_CAP) -> bool:
    """Decide feasibility by eliminating every variable.

    Equalities are pivoted out first.  The remaining inequality system is
    eliminated with Chernikov's history rules: after k eliminations a row
    built from more than k+1 original rows, or from a superset of another
    row's sources, is redundant and dropped.  The next variable is the one
    creating the fewest new rows.
    """
    cur = sys
    while cur.equalities and cur.num_vars:
        var = next((j for j in range(cur.num_vars) if any(a[j] for a, _ in cur.equalities)), None)
        if var is None:
            break
        cur = fourier_motzkin_eliminate(cur, var, cap)
    n = cur.num_vars
    if any(b != 0 for _, b in cur.equalities):
        return False
    rows = list(cur.inequalities)
    rows += [(tuple(-ONE if j == v else ZERO for j in range(n)), ZERO) for v in sorted(cur.nonneg)]
    hist = [frozenset((i,)) for i in range(len(rows))]
    live = list(range(n))
    k = 0
    while True:
        keep_r, keep_h = [], []
        for (a, b), h in zip(rows, hist):
            if not any(a[j] for j in live):
                if b < 0:
                    return False
                continue
            keep_r.append((a, b))
            keep_h.append(h)
        rows, hist = keep_r, keep_h
        if not rows:
            return True

        def cost(j):
            p = sum(1 for a, _ in rows if a[j] > 0)
            q = sum(1 for a, _ in rows if a[j] < 0)
            return p * q - p - q, j
        var = min(live, key=cost)
        live.remove(var)
        k += 1
        pos = [(r, h) for r, h in zip(rows, hist) if r[0][var] > 0]
        neg = [(r, h) for r, h in zip(rows, hist) if r[0][var] < 0]
        out = {(r[0], r[1]): h for r, h in zip(rows, hist) if r[0][var] == 0}
        for ((pa, pb), ph), ((na, nb), nh) in itertools.product(pos, neg):
            h = ph | nh
            if len(h) > k + 1:
                continue
            lp, ln = pa[var], -na[var]
            a, b = _normalize_ineq(tuple(x / lp + y / ln for x, y in zip(pa, na)), pb / lp + nb / ln)
            if (a, b) not in out or len(h) < len(out[(a, b)]):
                out[(a, b)] = h
        items = sorted(out.items(), key=lambda kv: len(kv[1]))
        rows, hist = [], []
        for r, h in items:
            if any(g < h for g in hist):
                continue
            rows.append(r)
            hist.append(h)
        if len(rows) > cap:
            raise CapExceeded(f"{len(rows)} constraints after {k} eliminations (cap {cap})")


# ---------------------------------------------------------------------------
# brute-force oracle


def _rref(rows):
    """Reduced row echelon form of an augmented matrix; returns (rows, pivot cols)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0]) - 1
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows) -> int:
    if not rows:
        return 0
    return len(_rref([list(r) + [ZERO] for r in rows])[1])


def solve_particular(rows, rhs, n: int):
    """One solution of ``rows x = rhs`` (free variables at 0), or None if inconsistent."""
    if not rows:
        return tuple(ZERO for _ in range(n))
    m, pivots = _rref([list(r) + [b] for r, b in zip(rows, rhs)])
    for i in range(len(pivots), len(m)):
        if m[i][-1]:
            return None
    x = [ZERO] * n
    for i, c in enumerate(pivots):
        x[c] = m[i][-1]
    return tuple(x)


def iter_basic_solutions(sys: LinearSystem) -> Iterator[tuple]:
    """Yield every feasible candidate basic solution (one point per minimal face).

    Each candidate makes all equalities plus a row-basis-completing subset of
    inequalities tight; feasible candidates exist iff the system is feasible.
    For pointed polyhedra these are exactly the vertices (possibly repeated).
    """
    n = sys.num_vars
    ineqs = list(sys.inequalities)
    ineqs += [(tuple(-ONE if k == j else ZERO for k in range(n)), ZERO) for j in sorted(sys.nonneg)]
    eq_rows = [a for a, _ in sys.equalities]
    eq_rhs = [b for _, b in sys.equalities]
    if solve_particular(eq_rows, eq_rhs, n) is None:
        return
    r_eq = rank(eq_rows)
    r_all = rank(eq_rows + [a for a, _ in ineqs])
    k = r_all - r_eq
    for combo in itertools.combinations(range(len(ineqs)), k):
        rows = eq_rows + [ineqs[i][0] for i in combo]
        if rank(rows) != r_all:
            continue
        x = solve_particular(rows, eq_rhs + [ineqs[i][1] for i in combo], n)
        if x is not None and sys.is_satisfied_by(x):
            yield x


def enumerate_basic_feasible(sys: LinearSystem) -> FeasibilityResult:
    """Brute-force feasibility oracle, independent of the simplex code.

    Returns a verdict and, when feasible, a basic witness.  No certificate is
    produced for infeasible systems; use :func:`lp_feasible` for that.
    """
    if sys.num_vars > ORACLE_MAX_VARS:
        raise TooLarge(f"oracle limited to {ORACLE_MAX_VARS} variables, got {sys.num_vars}")
    for x in iter_basic_solutions(sys):
        return FeasibilityResult(Status.FEASIBLE, witness=x)
    return FeasibilityResult(Status.INFEASIBLE)


def enumerate_vertices(sys: LinearSystem) -> list:
    """Distinct basic feasible points, in enumeration order."""
    if sys.num_vars > ORACLE_MAX_VARS:
        raise TooLarge(f"oracle limited to {ORACLE_MAX_VARS} variables, got {sys.num_vars}")
    seen = {}
    for x in iter_basic_solutions(sys):
        seen.setdefault(x, None)
    return list(seen)
