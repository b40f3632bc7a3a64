"""Exact interpreter for BSS programs, with replayable traces.

Tape model: an unbounded array of rational cells (unset cells read 0) and a
head.  The input vector is written to cells 0..n-1 with the head at 0;
``c[k]`` always means the cell ``head + k``.  One node execution is one step.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from ..exact import fmt, parse_rational, rvec
from .program import BranchNode, BssProgram, Cell, ComputeNode, Const, InputNode, Neg, OutputNode, ShiftNode

DEFAULT_STEP_CAP = int(os.environ.get("AVCDOS_STEP_CAP", "1000000"))
TRACE_SUMMARY_AFTER = 100_000
ZERO = Fraction(0)


class BssRuntimeError(RuntimeError):
    pass


class DivisionByZero(BssRuntimeError, ZeroDivisionError):
    def __init__(self, node_id, step):
        super().__init__(f"division by zero in node {node_id!r} at step {step}")
        self.node_id, self.step = node_id, step


@dataclass(frozen=True)
class Diverged:
    """No output node was reached within the step cap."""

    steps: int


# -- trace records -----------------------------------------------------------


@dataclass(frozen=True)
class FieldOp:
    op: str
    a: Fraction
    b: Fraction
    result: Fraction


@dataclass(frozen=True)
class SignTest:
    value: Fraction
    nonneg: bool


@dataclass(frozen=True)
class Shift:
    direction: str


@dataclass(frozen=True)
class Halt:
    start: int
    stop: int
    values: tuple


STEP_KINDS = (FieldOp, SignTest, Shift, Halt)


@dataclass(frozen=True)
class Trace:
    inputs: tuple
    constants: tuple
    steps: tuple | None  # None when summarized
    summary: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return self.steps is not None


class TraceError(ValueError):
    pass


def _apply(op: str, a: Fraction, b: Fraction) -> Fraction:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise ZeroDivisionError
        return a / b
    raise TraceError(f"not a field operation: {op!r}")


class Machine:
    """Single-stepping interpreter state for one run."""

    def __init__(self, prog: BssProgram, inputs, record: bool = False, summarize_after: int | None = None):
        self.prog = prog
        self.inputs = rvec(inputs)
        self.tape = {i: v for i, v in enumerate(self.inputs)}
        self.head = 0
        self.pc = prog.entry
        self.steps = 0
        self.output = None
        self.record = record
        self.summarize_after = summarize_after
        self.log = [] if record else None
        self.counts = Counter()

    @property
    def halted(self) -> bool:
        return self.output is not None

    def _emit(self, rec):
        self.counts[type(rec).__name__] += 1
        if self.log is not None:
            self.log.append(rec)
            if self.summarize_after is not None and len(self.log) > self.summarize_after:
                self.log = None

    def _eval(self, e):
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Cell):
            return self.tape.get(self.head + e.index, ZERO)
        if isinstance(e, Neg):
            v = self._eval(e.arg)
            r = -v
            self._emit(FieldOp("-", ZERO, v, r))
            return r
        a = self._eval(e.left)
        b = self._eval(e.right)
        try:
            r = _apply(e.op, a, b)
        except ZeroDivisionError:
            raise DivisionByZero(self.pc, self.steps) from None
        self._emit(FieldOp(e.op, a, b, r))
        return r

    def step(self) -> None:
        if self.halted:
            return
        node = self.prog.node(self.pc)
        self.steps += 1
        if isinstance(node, InputNode):
            self.pc = node.next
        elif isinstance(node, ComputeNode):
            self.tape[self.head + node.target] = self._eval(node.expr)
            self.pc = node.next
        elif isinstance(node, BranchNode):
            v = self._eval(node.expr)
            ok = v >= 0
            self._emit(SignTest(v, ok))
            self.pc = node.if_nonneg if ok else node.if_neg
        elif isinstance(node, ShiftNode):
            self.head += 1 if node.direction == "right" else -1
            self._emit(Shift(node.direction))
            self.pc = node.next
        elif isinstance(node, OutputNode):
            vals = tuple(self.tape.get(self.head + k, ZERO) for k in range(node.start, node.stop + 1))
            self._emit(Halt(node.start, node.stop, vals))
            self.output = vals
        else:  # pragma: no cover - BssProgram only admits the five kinds
            raise BssRuntimeError(f"unknown node kind {type(node).__name__}")

    def run(self, step_cap: int):
        if step_cap < 1:
            raise ValueError("step_cap must be >= 1")
        while not self.halted and self.steps < step_cap:
            self.step()
        return self.output if self.halted else Diverged(self.steps)

    def trace(self) -> Trace:
        steps = tuple(self.log) if self.log is not None else None
        return Trace(self.inputs, tuple(self.prog.constants), steps, dict(self.counts))


def run_program(prog: BssProgram, inputs, step_cap: int = DEFAULT_STEP_CAP):
    """Output vector, or :class:`Diverged` when the cap is hit first."""
    return Machine(prog, inputs).run(step_cap)


def trace_program(prog: BssProgram, inputs, step_cap: int = DEFAULT_STEP_CAP, full_trace: bool = False):
    m = Machine(prog, inputs, record=True, summarize_after=None if full_trace else TRACE_SUMMARY_AFTER)
    out = m.run(step_cap)
    return out, m.trace()


def replay_trace(trace: Trace):
    """Recompute a trace from its inputs and constants.

    Every operand must be an input, a program constant, 0, or an earlier
    result; every FieldOp result is recomputed exactly; a Halt may only be
    the last step.  Returns the halted output (None if the run diverged).
    """
    if not trace.complete:
        raise TraceError("summarized trace cannot be replayed")
    known = {ZERO, *trace.inputs, *trace.constants}
    output = None
    for i, st in enumerate(trace.steps):
        if output is not None:
            raise TraceError(f"step {i} after HALT")
        if type(st) is FieldOp:
            if st.op not in ("+", "-", "*", "/"):
                raise TraceError(f"step {i}: {st.op!r} is not a field operation")
            if st.a not in known or st.b not in known:
                raise TraceError(f"step {i}: operand not derived from earlier values")
            try:
                r = _apply(st.op, st.a, st.b)
            except ZeroDivisionError:
                raise TraceError(f"step {i}: division by zero") from None
            if r != st.result:
                raise TraceError(f"step {i}: {st.a} {st.op} {st.b} is {r}, trace says {st.result}")
            known.add(r)
        elif type(st) is SignTest:
            if st.value not in known:
                raise TraceError(f"step {i}: tested value not derived from earlier values")
            if (st.value >= 0) != st.nonneg:
                raise TraceError(f"step {i}: sign test outcome does not match value {st.value}")
        elif type(st) is Shift:
            if st.direction not in ("left", "right"):
                raise TraceError(f"step {i}: bad shift direction {st.direction!r}")
        elif type(st) is Halt:
            if len(st.values) != st.stop - st.start + 1 or any(v not in known for v in st.values):
                raise TraceError(f"step {i}: halt values not derived from earlier values")
            output = tuple(st.values)
        else:
            raise TraceError(f"step {i}: record kind {type(st).__name__} is not a BSS operation")
    return output


def verify_trace(trace) -> bool:
    if isinstance(trace, str):
        try:
            trace = decode_trace(trace)
        except TraceError:
            return False
    if not isinstance(trace, Trace):
        return False
    try:
        replay_trace(trace)
    except (TraceError, TypeError, AttributeError):
        return False
    return True


# -- text form ---------------------------------------------------------------

_SHIFT_CODE = {"left": "L", "right": "R"}


def encode_trace(trace: Trace) -> str:
    lines = ["INPUT " + " ".join(fmt(v) for v in trace.inputs),
             "CONST " + " ".join(fmt(v) for v in trace.constants)]
    if not trace.complete:
        lines.append("SUMMARY " + " ".join(f"{k}={v}" for k, v in sorted(trace.summary.items())))
        return "\n".join(lines) + "\n"
    for st in trace.steps:
        if type(st) is FieldOp:
            lines.append(f"OP {st.op} {fmt(st.a)} {fmt(st.b)} -> {fmt(st.result)}")
        elif type(st) is SignTest:
            lines.append(f"TEST {fmt(st.value)} {'>=0' if st.nonneg else '<0'}")
        elif type(st) is Shift:
            lines.append(f"SHIFT {_SHIFT_CODE[st.direction]}")
        elif type(st) is Halt:
            lines.append(f"HALT c_{st.start}..c_{st.stop} " + " ".join(fmt(v) for v in st.values))
        else:
            raise TraceError(f"cannot encode record {st!r}")
    return "\n".join(lines) + "\n"


def decode_trace(text: str) -> Trace:
    inputs = constants = None
    steps = []
    summary = None
    for n, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        kw, args = parts[0], parts[1:]
        try:
            if kw == "INPUT":
                inputs = tuple(parse_rational(a) for a in args)
            elif kw == "CONST":
                constants = tuple(parse_rational(a) for a in args)
            elif kw == "SUMMARY":
                summary = {k: int(v) for k, v in (a.split("=", 1) for a in args)}
            elif kw == "OP":
                if len(args) != 5 or args[3] != "->":
                    raise ValueError("expected 'OP <op> a b -> c'")
                steps.append(FieldOp(args[0], parse_rational(args[1]), parse_rational(args[2]),
                                     parse_rational(args[4])))
            elif kw == "TEST":
                if len(args) != 2 or args[1] not in (">=0", "<0"):
                    raise ValueError("expected 'TEST v >=0|<0'")
                steps.append(SignTest(parse_rational(args[0]), args[1] == ">=0"))
            elif kw == "SHIFT":
                if args not in (["L"], ["R"]):
                    raise ValueError("expected 'SHIFT L|R'")
                steps.append(Shift("left" if args[0] == "L" else "right"))
            elif kw == "HALT":
                lo, hi = args[0].split("..")
                if not (lo.startswith("c_") and hi.startswith("c_")):
                    raise ValueError("expected 'HALT c_i..c_j values'")
                steps.append(Halt(int(lo[2:]), int(hi[2:]), tuple(parse_rational(a) for a in args[1:])))
            else:
                raise ValueError(f"unknown record kind {kw!r}")
        except (ValueError, IndexError) as exc:
            raise TraceError(f"line {n}: {exc}") from None
    if inputs is None or constants is None:
        raise TraceError("trace is missing its INPUT/CONST header")
    if summary is not None:
        return Trace(inputs, constants, None, summary)
    counts = Counter(type(s).__name__ for s in steps)
    return Trace(inputs, constants, tuple(steps), dict(counts))
