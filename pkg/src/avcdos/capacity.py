"""Average-error capacity estimates (bits).

This is the only module that uses floating point.  The zero branch is
decided exactly by :func:`is_symmetrizable` and returned as
:class:`ExactZero`; nothing computed here feeds back into a DoS verdict.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .channel_model import Avc
from .symmetrizability import SymmetrizabilityDecision, is_symmetrizable

log = logging.getLogger(__name__)


class NonStochastic(ValueError):
    pass


class MaxIterExceeded(RuntimeError):
    def __init__(self, result):
        super().__init__(
            f"Blahut-Arimoto stopped after {result.iterations} iterations with gap "
            f"{result.upper_bound - result.lower_bound:.3g}")
        self.result = result


class ToleranceNotReached(RuntimeError):
    def __init__(self, estimate):
        super().__init__(
            f"capacity bracket [{estimate.lower_bound:.9f}, {estimate.upper_bound:.9f}] wider than requested")
        self.estimate = estimate


@dataclass(frozen=True)
class BAResult:
    capacity: float
    p: np.ndarray
    lower_bound: float
    upper_bound: float
    iterations: int
    lower_history: tuple = ()


@dataclass(frozen=True)
class CapacityEstimate:
    value: float
    lower_bound: float
    upper_bound: float
    argmin_q: tuple
    opt_input_p: tuple
    iterations: int
    converged: bool = True


@dataclass(frozen=True)
class ExactZero:
    """Capacity is exactly 0 because the channel is symmetrizable."""

    decision: SymmetrizabilityDecision
    value: Fraction = field(default=Fraction(0))


def _as_stochastic(w) -> np.ndarray:
    a = np.array([[float(v) for v in row] for row in w], dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise NonStochastic("channel must be a non-empty 2-index table")
    if (a < 0).any() or not np.allclose(a.sum(axis=1), 1.0, rtol=0, atol=1e-12):
        raise NonStochastic("rows must be nonnegative and sum to 1")
    return a


def _divergences(w: np.ndarray, p: np.ndarray) -> np.ndarray:
    """D(W(.|x) || pW) in bits for every input x."""
    r = p @ w
    pos = w > 0
    ratio = np.divide(w, r, out=np.ones_like(w), where=pos)
    return np.where(pos, w * np.log2(ratio), 0.0).sum(axis=1)


def blahut_arimoto(w_q, tol: float = 1e-6, max_iter: int = 100_000, strict: bool = False) -> BAResult:
    """Shannon capacity of a DMC ``w_q[x][y]``, bracketed within ``tol``.

    Bounds per iterate: I(p) <= C <= max_x D(W(.|x) || pW).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = _as_stochastic(w_q)
    nx = w.shape[0]
    p = np.full(nx, 1.0 / nx)
    history = []
    best_lower, best_upper, best_p = 0.0, np.inf, p
    it = 0
    for it in range(1, int(max_iter) + 1):
        d = _divergences(w, p)
        lower = float(p @ d)
        upper = float(d.max())
        history.append(lower)
        if lower > best_lower or it == 1:
            best_lower, best_p = lower, p
        best_upper = min(best_upper, upper)
        if best_upper - best_lower <= tol:
            break
        p = p * np.exp2(d - d.max())
        p = p / p.sum()
    res = BAResult(
        capacity=best_lower, p=best_p, lower_bound=best_lower, upper_bound=max(best_upper, best_lower),
        iterations=it, lower_history=tuple(history))
    if res.upper_bound - res.lower_bound > tol and strict:
        raise MaxIterExceeded(res)
    return res


def _mutual_info_and_grad(w3: np.ndarray, p: np.ndarray, q: np.ndarray):
    """I(p, W_q) in bits and its gradient in q (w3 indexed [x, s, y])."""
    wq = np.einsum("xsy,s->xy", w3, q)
    r = p @ wq
    pos = wq > 0
    ratio = np.divide(wq, r, out=np.ones_like(wq), where=pos)
    logr = np.where(pos, np.log2(ratio), 0.0)
    info = float(np.sum(p[:, None] * wq * logr))
    grad = np.einsum("x,xsy,xy->s", p, w3, logr)
    return info, grad


def _simplex_grid(ns: int) -> list:
    if ns == 1:
        return [np.ones(1)]
    res = 8 if ns <= 3 else 4 if ns <= 5 else 1
    pts = []
    for c in itertools.product(range(res + 1), repeat=ns - 1):
        if sum(c) <= res:
            pts.append(np.array(list(c) + [res - sum(c)], dtype=float) / res)
    if res == 1:
        pts.append(np.full(ns, 1.0 / ns))
    return pts


def avc_capacity_avg(w: Avc, tol: float = 1e-6, max_iter: int = 100_000,
                     max_rounds: int = 400, strict: bool = False):
    """Average-error capacity: ExactZero if symmetrizable, else min_q C(W_q).

    The outer minimum is seeded on a fixed simplex grid and refined with
    cutting planes; each cut is a linearization of the convex minorant
    q -> I(p, W_q), so the cutting-plane model gives a certified lower bound.
    """
    decision = is_symmetrizable(w)
    if decision.symmetrizable:
        return ExactZero(decision)

    w3 = np.array([[[float(v) for v in row] for row in block] for block in w.w], dtype=float)
    ns = w.ns
    inner_tol = tol / 4
    cuts_a, cuts_b = [], []  # cut: C(W_q) >= a . q + b
    best = {"upper": np.inf}
    total_iter = 0

    def evaluate(q):
        nonlocal total_iter
        q = np.clip(q, 0.0, None)
        q = q / q.sum()
        ba = blahut_arimoto(np.einsum("xsy,s->xy", w3, q), inner_tol, max_iter)
        total_iter += ba.iterations
        if ba.upper_bound < best["upper"]:
            best.update(upper=ba.upper_bound, q=q, p=ba.p, lower_at=ba.lower_bound)
        for eps in (1e-9, 1e-6, 1e-3):
            qh = (1 - eps) * q + eps / ns
            info, grad = _mutual_info_and_grad(w3, ba.p, qh)
            cuts_a.append(grad)
            cuts_b.append(info - grad @ qh)

    def model_min():
        if ns == 1:
            return max(a[0] + b for a, b in zip(cuts_a, cuts_b)), np.ones(1)
        # min t  s.t.  a_k . q + b_k <= t,  sum q = 1,  q >= 0
        A = np.hstack([np.array(cuts_a), -np.ones((len(cuts_a), 1))])
        sol = linprog(
            c=np.r_[np.zeros(ns), 1.0], A_ub=A, b_ub=-np.array(cuts_b),
            A_eq=np.r_[np.ones(ns), 0.0][None, :], b_eq=[1.0],
            bounds=[(0, None)] * ns + [(None, None)], method="highs")
        if sol.status != 0:
            return -np.inf, np.full(ns, 1.0 / ns)
        return float(sol.fun) - 1e-9, sol.x[:ns]

    for q in _simplex_grid(ns):
        evaluate(q)
    lower, q_next = model_min()
    rounds = 0
    while best["upper"] - lower > tol and rounds < max_rounds:
        evaluate(q_next)
        new_lower, q_next = model_min()
        lower = max(lower, new_lower)
        rounds += 1
    lower = max(0.0, min(lower, best["upper"]))
    upper = best["upper"]
    q = best["q"]
    est = CapacityEstimate(
        value=float(min(max(best["lower_at"], lower), upper)),
        lower_bound=float(lower), upper_bound=float(upper),
        argmin_q=tuple(float(v) for v in q / q.sum()), opt_input_p=tuple(float(v) for v in best["p"]),
        iterations=total_iter, converged=bool(upper - lower <= tol))
    if not est.converged:
        log.warning("capacity bracket not within tol=%g after %d rounds", tol, rounds)
        if strict:
            raise ToleranceNotReached(est)
    return est
