"""Compile the symmetrizability decision at fixed dimensions into a BSS program.

The input is the channel vector t (x-major, see ``channel_model.vectorize``).
The u-variables are eliminated by Fourier–Motzkin with t kept symbolic:
whenever a coefficient's sign matters, the compiler emits a sign test on
that polynomial and follows each outcome separately.  The result is a
:class:`SignConditionTree`, which is then lowered to a BSS graph whose
branch nodes evaluate the tested polynomials using ring operations only.

Conventions:

* The program first checks that t is a channel (entries >= 0, rows sum
  to 1).  On valid inputs this lets every polynomial be written over the
  free coordinates t[x,s,y], y < ny-1, with the last entry of each row
  replaced by one minus the others.
* Primal: u[x,0] = 1 - sum_{s>0} u[x,s]; the pair equation for the last
  output letter is implied by the others and is dropped.  Variables are
  eliminated in lexicographic order.
* Dual (Farkas alternative of ``A u = b, u >= 0``): y free with
  ``A^T y >= 0`` and ``b.y <= -1``.  It is feasible iff the channel is not
  symmetrizable.  Variables with the fewest undecided coefficient signs
  go first.
"""

from __future__ import annotations

import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd, lcm

from ..channel_model import Dims
from ..exact_linear import CapExceeded
from .interpreter import DEFAULT_STEP_CAP, Diverged, Machine
from .program import BinOp, BranchNode, BssProgram, Cell, ComputeNode, Const, InputNode, Neg, OutputNode, ShiftNode
from .poly import Poly

ALL = frozenset((-1, 0, 1))
NONNEG = frozenset((0, 1))


class CompileCapExceeded(CapExceeded):
    def __init__(self, dims: Dims, reason: str):
        super().__init__(f"cannot compile dims ({dims.nx},{dims.ns},{dims.ny}): {reason}")
        self.dims = dims


@dataclass(frozen=True)
class CompileCaps:
    max_product: int = int(os.environ.get("AVCDOS_BSS_MAX_PRODUCT", "24"))
    max_tests: int = 200_000
    max_rows: int = 2_000
    max_work: int = 300_000  # elimination sub-problems visited
    max_seconds: float = float(os.environ.get("AVCDOS_BSS_COMPILE_SECONDS", "60"))


# -- sign condition trees ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Leaf:
    feasible: bool


@dataclass(frozen=True, eq=False)
class Test:
    """Internal node: go to ``if_nonneg`` when poly(t) >= 0, else ``if_neg``."""

    poly: Poly
    if_nonneg: object
    if_neg: object


FEASIBLE = Leaf(True)
INFEASIBLE = Leaf(False)


@dataclass(frozen=True)
class SignConditionTree:
    root: object
    dims: Dims
    dual: bool
    num_tests: int

    def decide(self, t) -> bool:
        """Leaf reached on a valid channel vector t (True = system feasible)."""
        point = {i: Fraction(v) for i, v in enumerate(t)}
        node = self.root
        while isinstance(node, Test):
            node = node.if_nonneg if node.poly.evaluate(point) >= 0 else node.if_neg
        return node.feasible

    def symmetrizable(self, t) -> bool:
        return self.decide(t) != self.dual

    def polynomials(self) -> set:
        out, seen, stack = set(), set(), [self.root]
        while stack:
            n = stack.pop()
            if id(n) in seen or not isinstance(n, Test):
                continue
            seen.add(id(n))
            out.add(n.poly)
            stack.extend((n.if_nonneg, n.if_neg))
        return out


def _flip(s: frozenset) -> frozenset:
    return frozenset(-v for v in s)


def _sign(c: Fraction) -> int:
    return (c > 0) - (c < 0)


class _Builder:
    """Parametric Fourier–Motzkin with sign branching (continuation style)."""

    def __init__(self, dims: Dims, caps: CompileCaps, nvars: int, dual: bool):
        self.dims, self.caps, self.nvars, self.dual = dims, caps, nvars, dual
        self.tests = {}
        self._rule_cache = {}
        self.work = 0
        self.deadline = time.monotonic() + caps.max_seconds

    # facts map a normalized polynomial key to its possible signs
    def signs(self, facts: dict, p: Poly) -> frozenset:
        if p.is_const():
            return frozenset((_sign(p.const_value()),))
        key, sg = p.normalized()
        s = facts.get(key, ALL) & self._rule(key)
        return s if sg > 0 else _flip(s)

    def _rule(self, key) -> frozenset:
        # every variable is a nonnegative channel entry on validated input
        r = self._rule_cache.get(key)
        if r is None:
            coefs = [c for m, c in key if m != ()]
            const = next((c for m, c in key if m == ()), 0)
            if all(c >= 0 for c in coefs) and const >= 0:
                r = frozenset((1,)) if const > 0 else NONNEG
            elif all(c <= 0 for c in coefs) and const <= 0:
                r = frozenset((-1,)) if const < 0 else frozenset((-1, 0))
            else:
                r = ALL
            self._rule_cache[key] = r
        return r

    def restrict(self, facts: dict, p: Poly, s: frozenset) -> dict:
        key, sg = p.normalized()
        new = dict(facts)
        new[key] = s if sg > 0 else _flip(s)
        return new

    def test(self, p: Poly, yes, no):
        if yes is no:
            return yes
        p = p.integer_multiple()
        k = (p, id(yes), id(no))
        node = self.tests.get(k)
        if node is None:
            if len(self.tests) >= self.caps.max_tests:
                raise CompileCapExceeded(self.dims, f"more than {self.caps.max_tests} sign tests")
            node = self.tests[k] = Test(p, yes, no)
        return node

    def split(self, facts, p: Poly, k):
        """Branch on the exact sign of p; k(sign, facts) builds each subtree."""
        s = self.signs(facts, p)
        if len(s) == 1:
            return k(next(iter(s)), facts)
        if -1 in s:
            yes = self.split(self.restrict(facts, p, s - {-1}), p, k)
            return self.test(p, yes, k(-1, self.restrict(facts, p, frozenset((-1,)))))
        return self.test(-p, k(0, self.restrict(facts, p, frozenset((0,)))),
                         k(1, self.restrict(facts, p, frozenset((1,)))))

    # rows are (coefs, const): sum coefs[j] v_j + const  (= 0 | >= 0)
    def _reduce(self, facts, row):
        coefs = tuple(Poly() if not c.is_zero() and self.signs(facts, c) == {0} else c for c in row[0])
        return coefs, row[1]

    @staticmethod
    def _canon(row, eq: bool):
        polys = [p for p in row[0] + (row[1],) if not p.is_zero()]
        if not polys:
            return row
        den = lcm(*(c.denominator for p in polys for c in p.terms.values()))
        g = 0
        for p in polys:
            for c in p.terms.values():
                g = gcd(g, int(c * den))
        scale = Fraction(den, g)
        if eq:
            lead = next(p for p in polys).sorted_terms()[0][1]
            if lead < 0:
                scale = -scale
        return tuple(c * scale for c in row[0]), row[1] * scale

    def _dedupe(self, rows, eq: bool):
        seen, out = set(), []
        for r in rows:
            r = self._canon(r, eq)
            if r not in seen:
                seen.add(r)
                out.append(r)
        return out

    def solve(self, facts, eqs, ineqs, rem):
        self.work += 1
        if self.work > self.caps.max_work:
            raise CompileCapExceeded(self.dims, f"elimination visited more than {self.caps.max_work} sub-problems")
        if self.work % 64 == 0 and time.monotonic() > self.deadline:
            raise CompileCapExceeded(self.dims, f"compilation exceeded {self.caps.max_seconds:g} s")
        eqs = [self._reduce(facts, r) for r in eqs]
        ineqs = [self._reduce(facts, r) for r in ineqs]
        consts = [(True, r[1]) for r in eqs if all(c.is_zero() for c in r[0])]
        consts += [(False, r[1]) for r in ineqs if all(c.is_zero() for c in r[0])]
        eqs = self._dedupe([r for r in eqs if any(not c.is_zero() for c in r[0])], True)
        ineqs = self._dedupe([r for r in ineqs if any(not c.is_zero() for c in r[0])], False)
        return self._check_consts(facts, consts, 0, lambda f: self._step(f, eqs, ineqs, rem))

    def _check_consts(self, facts, consts, i, k):
        if i == len(consts):
            return k(facts)
        is_eq, d = consts[i]
        if is_eq:
            return self.split(facts, d, lambda s, f: self._check_consts(f, consts, i + 1, k) if s == 0 else INFEASIBLE)
        s = self.signs(facts, d)
        if s <= NONNEG:
            return self._check_consts(facts, consts, i + 1, k)
        if s == {-1}:
            return INFEASIBLE
        ok = self._check_consts(self.restrict(facts, d, s & NONNEG), consts, i + 1, k)
        return self.test(d, ok, INFEASIBLE)

    def _step(self, facts, eqs, ineqs, rem):
        live = [v for v in rem if any(not r[0][v].is_zero() for r in eqs + ineqs)]
        if not live:
            return FEASIBLE
        v = self._pick(facts, ineqs, live)
        rest = [w for w in live if w != v]
        return self._eliminate(facts, eqs, ineqs, v, rest)

    def _pick(self, facts, ineqs, live):
        if not self.dual:
            return live[0]

        def score(v):
            unknown = sum(1 for r in ineqs if len(self.signs(facts, r[0][v])) > 1)
            pos = sum(1 for r in ineqs if self.signs(facts, r[0][v]) == {1})
            neg = sum(1 for r in ineqs if self.signs(facts, r[0][v]) == {-1})
            return unknown, pos * neg, v
        return min(live, key=score)

    def _eliminate(self, facts, eqs, ineqs, v, rest):
        for i, e in enumerate(eqs):
            a = e[0][v]
            if a.is_zero() or self.signs(facts, a) == {0}:
                continue

            def branch(s, f, i=i, a=a):
                if s == 0:
                    return self._eliminate(f, eqs, ineqs, v, rest)
                return self._pivot(f, eqs, ineqs, i, a, s, v, rest)
            return self.split(facts, a, branch)
        return self._fourier_motzkin(facts, eqs, ineqs, v, rest)

    def _pivot(self, facts, eqs, ineqs, i, a, s, v, rest):
        e = eqs[i]
        sa = a if s > 0 else -a  # |a|

        def combine(row, scale_row, scale_e):
            return (tuple(scale_row * c - scale_e * d for c, d in zip(row[0], e[0])),
                    scale_row * row[1] - scale_e * e[1])
        new_eqs = []
        for j, f in enumerate(eqs):
            if j == i:
                continue
            b = f[0][v]
            new_eqs.append(f if b.is_zero() or self.signs(facts, b) == {0} else combine(f, a, b))
        new_ineqs = []
        for g in ineqs:
            b = g[0][v]
            if b.is_zero() or self.signs(facts, b) == {0}:
                new_ineqs.append(g)
            else:
                # |a| g - sign(a) b e  keeps the direction and cancels v
                new_ineqs.append(combine(g, sa, b if s > 0 else -b))
        return self.solve(facts, new_eqs, new_ineqs, rest)

    def _fourier_motzkin(self, facts, eqs, ineqs, v, rest):
        for r in ineqs:
            c = r[0][v]
            if not c.is_zero() and len(self.signs(facts, c)) > 1:
                return self.split(facts, c, lambda s, f: self._fourier_motzkin(f, eqs, ineqs, v, rest))
        pos, neg, keep = [], [], []
        for r in ineqs:
            c = r[0][v]
            s = 0 if c.is_zero() else next(iter(self.signs(facts, c)))
            (pos if s > 0 else neg if s < 0 else keep).append(r)
        for p in pos:
            for n in neg:
                a, b = p[0][v], -n[0][v]  # both positive
                keep.append((tuple(b * x + a * y for x, y in zip(p[0], n[0])), b * p[1] + a * n[1]))
        if len(keep) > self.caps.max_rows:
            raise CompileCapExceeded(self.dims, f"more than {self.caps.max_rows} intermediate constraints")
        return self.solve(facts, eqs, keep, rest)


# -- the two linear systems over symbolic t -------------------------------------


def _entry(dims: Dims, x: int, s: int, y: int) -> Poly:
    if y < dims.ny - 1:
        return Poly.var(dims.t_index(x, s, y))
    return 1 - sum((Poly.var(dims.t_index(x, s, k)) for k in range(dims.ny - 1)), Poly())


def _base_facts(dims: Dims) -> dict:
    facts = {}
    for x in range(dims.nx):
        for s in range(dims.ns):
            p = _entry(dims, x, s, dims.ny - 1)
            key, sg = p.normalized()
            if key:
                facts[key] = NONNEG if sg > 0 else _flip(NONNEG)
    return facts


def _pairs_kept(dims: Dims):
    for x, xh in combinations(range(dims.nx), 2):
        for y in range(dims.ny - 1):
            yield x, xh, y


def _primal_rows(dims: Dims):
    """Variables u[x,s], s >= 1, indexed x*(ns-1) + (s-1)."""
    m = dims.ns - 1
    n = dims.nx * m
    zero = (Poly(),) * n

    def idx(x, s):
        return x * m + (s - 1)
    eqs = []
    for x, xh, y in _pairs_kept(dims):
        # sum_s W(y|x,s) u[xh,s] - W(y|xh,s) u[x,s] = 0
        coefs = list(zero)
        for s in range(1, dims.ns):
            coefs[idx(xh, s)] += _entry(dims, x, s, y) - _entry(dims, x, 0, y)
            coefs[idx(x, s)] -= _entry(dims, xh, s, y) - _entry(dims, xh, 0, y)
        eqs.append((tuple(coefs), _entry(dims, x, 0, y) - _entry(dims, xh, 0, y)))
    ineqs = []
    for x in range(dims.nx):
        for s in range(1, dims.ns):
            coefs = list(zero)
            coefs[idx(x, s)] = Poly.const(1)
            ineqs.append((tuple(coefs), Poly()))
        if dims.ns > 1:
            coefs = list(zero)
            for s in range(1, dims.ns):
                coefs[idx(x, s)] = Poly.const(-1)
            ineqs.append((tuple(coefs), Poly.const(1)))
    return n, eqs, ineqs


def _dual_rows(dims: Dims):
    """Variables y: one per kept pair equation, then one per row sum."""
    pairs = list(_pairs_kept(dims))
    n = len(pairs) + dims.nx
    ineqs = []
    for xc in range(dims.nx):
        for s in range(dims.ns):
            coefs = [Poly()] * n
            for k, (x, xh, y) in enumerate(pairs):
                if xc == xh:
                    coefs[k] = coefs[k] + _entry(dims, x, s, y)
                if xc == x:
                    coefs[k] = coefs[k] - _entry(dims, xh, s, y)
            coefs[len(pairs) + xc] = Poly.const(1)
            ineqs.append((tuple(coefs), Poly()))
    # b.y <= -1 with b = (0 for pairs, 1 for row sums):  -sum y_rows - 1 >= 0
    coefs = [Poly()] * len(pairs) + [Poly.const(-1)] * dims.nx
    ineqs.append((tuple(coefs), Poly.const(-1)))
    return n, [], ineqs


def _check_caps(dims: Dims, caps: CompileCaps):
    if dims.t_len > caps.max_product:
        raise CompileCapExceeded(dims, f"nx*ns*ny = {dims.t_len} exceeds {caps.max_product}")


@lru_cache(maxsize=32)
def compile_sign_tree(dims: Dims, caps: CompileCaps = CompileCaps(), dual: bool = False) -> SignConditionTree:
    _check_caps(dims, caps)
    n, eqs, ineqs = (_dual_rows if dual else _primal_rows)(dims)
    b = _Builder(dims, caps, n, dual)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20_000))
    try:
        root = b.solve(_base_facts(dims), eqs, ineqs, list(range(n)))
    finally:
        sys.setrecursionlimit(old)
    return SignConditionTree(root, dims, dual, len(b.tests))


# -- lowering to a BSS graph ----------------------------------------------------


def poly_expr(p: Poly):
    """Division-free expression for a polynomial with integer coefficients."""
    expr = None
    for mono, c in p.sorted_terms():
        mag = abs(c)
        factors = [Cell(v) for v, e in mono for _ in range(e)]
        term = None
        if mag != 1 or not factors:
            term = Const(mag)
        for f in factors:
            term = f if term is None else BinOp("*", term, f)
        if expr is None:
            expr = term if c > 0 else (Const(c) if not factors else Neg(term))
        else:
            expr = BinOp("+" if c > 0 else "-", expr, term)
    return expr if expr is not None else Const(Fraction(0))


ACCEPT, REJECT, LOOP = "accept", "reject", "loop"


def lower(tree: SignConditionTree, on_feasible: str, on_infeasible: str, on_invalid: str) -> BssProgram:
    dims = tree.dims
    out_cell = dims.t_len
    nodes = [InputNode("in", "v0")]
    ids = {}
    body = []

    def leaf_id(kind):
        return {ACCEPT: "acc", REJECT: "rej", LOOP: "loop"}[kind]

    def visit(n):
        if isinstance(n, Leaf):
            return leaf_id(on_feasible if n.feasible else on_infeasible)
        if id(n) in ids:
            return ids[id(n)]
        # children first, iteratively deep trees would still fit the recursion limit
        yes, no = visit(n.if_nonneg), visit(n.if_neg)
        nid = f"n{len(ids)}"
        ids[id(n)] = nid
        body.append(BranchNode(nid, poly_expr(n.poly), yes, no))
        return nid

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20_000))
    try:
        root = visit(tree.root)
    finally:
        sys.setrecursionlimit(old)

    bad = leaf_id(on_invalid)
    checks = []
    for i in range(dims.t_len):
        checks.append(Cell(i))
    for x in range(dims.nx):
        for s in range(dims.ns):
            total = None
            for y in range(dims.ny):
                c = Cell(dims.t_index(x, s, y))
                total = c if total is None else BinOp("+", total, c)
            checks.append(BinOp("-", total, Const(Fraction(1))))
            checks.append(BinOp("-", Const(Fraction(1)), total))
    for k, e in enumerate(checks):
        nxt = f"v{k + 1}" if k + 1 < len(checks) else root
        nodes.append(BranchNode(f"v{k}", e, nxt, bad))
    nodes.extend(reversed(body))
    used = {on_feasible, on_infeasible, on_invalid}
    if ACCEPT in used:
        nodes.append(ComputeNode("acc", out_cell, Const(Fraction(1)), "out"))
    if REJECT in used:
        nodes.append(ComputeNode("rej", out_cell, Const(Fraction(0)), "out"))
    if LOOP in used:
        nodes.append(ShiftNode("loop", "right", "loop"))
    nodes.append(OutputNode("out", out_cell, out_cell))
    return BssProgram(tuple(nodes), "in")


def compile_symmetrizability(dims: Dims, caps: CompileCaps = CompileCaps(), semidecide: bool = False) -> BssProgram:
    """Decision program: outputs (1) iff the input channel is symmetrizable.

    With ``semidecide=True`` the program halts only on symmetrizable
    channels and runs forever otherwise.
    """
    tree = compile_sign_tree(dims, caps, dual=False)
    if semidecide:
        return lower(tree, ACCEPT, LOOP, LOOP)
    return lower(tree, ACCEPT, REJECT, REJECT)


def compile_nonsymmetrizability(dims: Dims, caps: CompileCaps = CompileCaps(), semidecide: bool = True) -> BssProgram:
    """Program built from the Farkas alternative; halts with (0) on
    non-symmetrizable (or invalid) inputs.  As a full decider it outputs
    (1) when the dual is infeasible."""
    tree = compile_sign_tree(dims, caps, dual=True)
    if semidecide:
        return lower(tree, REJECT, LOOP, REJECT)
    return lower(tree, REJECT, ACCEPT, REJECT)


@dataclass(frozen=True)
class InterleavedResult:
    symmetrizable: bool
    halted: str  # "B1" or "B2"
    steps: int
    output: tuple = field(default=())


def run_interleaved(b1: BssProgram, b2: BssProgram, inputs, step_cap: int = DEFAULT_STEP_CAP):
    """Step both semideciders alternately; whichever halts first decides.

    Returns :class:`InterleavedResult`, or :class:`Diverged` if neither halts
    within ``step_cap`` steps each.
    """
    m1, m2 = Machine(b1, inputs), Machine(b2, inputs)
    while m1.steps < step_cap or m2.steps < step_cap:
        if m1.steps < step_cap:
            m1.step()
            if m1.halted:
                return InterleavedResult(True, "B1", m1.steps + m2.steps, m1.output)
        if m2.steps < step_cap:
            m2.step()
            if m2.halted:
                return InterleavedResult(False, "B2", m1.steps + m2.steps, m2.output)
    return Diverged(m1.steps + m2.steps)
