"""BSS program graphs and their line-oriented text form (``.bss``).

Grammar, one node per line (``#`` starts a comment)::

    <id>: input [-> <id>]
    <id>: c[<k>] := <expr> -> <id>
    <id>: if <expr> >= 0 -> <id> else <id>
    <id>: shift left|right -> <id>
    <id>: output c[<i>][..c[<j>]]

Cell references are relative to the head.  Rational literals are written
``a/b`` with no spaces; ``a / b`` is a division.  When the input line has
no explicit successor it falls through to the next line, and a program
without an input line gets an implicit one (id ``in``) in front of its
first node.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction


class ParseError(ValueError):
    pass


class BssSyntaxError(ParseError):
    def __init__(self, line: int, col: int, expected: str, got: str = ""):
        msg = f"line {line}, col {col}: expected {expected}"
        if got:
            msg += f", got {got!r}"
        super().__init__(msg)
        self.line, self.col, self.expected = line, col, expected


class DanglingSuccessor(ParseError):
    pass


class MultipleInputs(ParseError):
    pass


class MalformedProgram(ParseError):
    pass


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Cell:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: object
    right: object


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def fmt_expr(e, prec: int = 0) -> str:
    if isinstance(e, Const):
        v = e.value
        s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return f"({s})" if v < 0 and prec > 0 else s
    if isinstance(e, Cell):
        return f"c[{e.index}]"
    if isinstance(e, Neg):
        inner = fmt_expr(e.arg, 3)
        if isinstance(e.arg, Const) and not inner.startswith("("):
            inner = f"({inner})"
        return f"(-{inner})" if prec > 0 else f"-{inner}"
    p = _PREC[e.op]
    left = fmt_expr(e.left, p)
    right = fmt_expr(e.right, p + 1)
    s = f"{left} {e.op} {right}"
    return f"({s})" if p < prec else s


def expr_constants(e, out: list) -> None:
    if isinstance(e, Const):
        if e.value not in out:
            out.append(e.value)
    elif isinstance(e, Neg):
        expr_constants(e.arg, out)
    elif isinstance(e, BinOp):
        expr_constants(e.left, out)
        expr_constants(e.right, out)


def expr_cells(e) -> set:
    if isinstance(e, Cell):
        return {e.index}
    if isinstance(e, Neg):
        return expr_cells(e.arg)
    if isinstance(e, BinOp):
        return expr_cells(e.left) | expr_cells(e.right)
    return set()


# -- nodes -------------------------------------------------------------------


@dataclass(frozen=True)
class InputNode:
    id: str
    next: str
    kind = "input"

    def successors(self):
        return (self.next,)


@dataclass(frozen=True)
class ComputeNode:
    id: str
    target: int
    expr: object
    next: str
    kind = "computation"

    def successors(self):
        return (self.next,)


@dataclass(frozen=True)
class BranchNode:
    """Goes to ``if_nonneg`` when expr >= 0, else to ``if_neg``."""

    id: str
    expr: object
    if_nonneg: str
    if_neg: str
    kind = "branch"

    def successors(self):
        return (self.if_nonneg, self.if_neg)


@dataclass(frozen=True)
class ShiftNode:
    id: str
    direction: str  # "left" | "right"
    next: str
    kind = "shift"

    def successors(self):
        return (self.next,)


@dataclass(frozen=True)
class OutputNode:
    id: str
    start: int
    stop: int  # inclusive
    kind = "output"

    def successors(self):
        return ()


@dataclass(frozen=True)
class BssProgram:
    nodes: tuple
    entry: str
    constants: tuple = ()

    def __post_init__(self):
        by_id = {}
        for n in self.nodes:
            if n.id in by_id:
                raise MalformedProgram(f"duplicate node id {n.id!r}")
            by_id[n.id] = n
        object.__setattr__(self, "_by_id", by_id)
        inputs = [n for n in self.nodes if isinstance(n, InputNode)]
        if len(inputs) != 1:
            raise MultipleInputs(f"program needs exactly one input node, found {len(inputs)}")
        if self.entry != inputs[0].id:
            raise MalformedProgram("entry must be the input node")
        for n in self.nodes:
            for succ in n.successors():
                if succ not in by_id:
                    raise DanglingSuccessor(f"node {n.id!r} points to undefined node {succ!r}")
        if not any(isinstance(by_id[i], OutputNode) for i in self.reachable()):
            raise MalformedProgram("no output node is reachable from the input node")
        if not self.constants:
            consts = []
            for n in self.nodes:
                if isinstance(n, (ComputeNode, BranchNode)):
                    expr_constants(n.expr, consts)
            object.__setattr__(self, "constants", tuple(consts))

    def node(self, node_id: str):
        return self._by_id[node_id]

    def reachable(self) -> set:
        seen, stack = set(), [self.entry]
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            stack.extend(self._by_id[i].successors())
        return seen

    def __eq__(self, other):
        return isinstance(other, BssProgram) and self.nodes == other.nodes and self.entry == other.entry

    def __hash__(self):
        return hash((self.nodes, self.entry))


def format_program(prog: BssProgram) -> str:
    lines = []
    for n in prog.nodes:
        if isinstance(n, InputNode):
            lines.append(f"{n.id}: input -> {n.next}")
        elif isinstance(n, ComputeNode):
            lines.append(f"{n.id}: c[{n.target}] := {fmt_expr(n.expr)} -> {n.next}")
        elif isinstance(n, BranchNode):
            lines.append(f"{n.id}: if {fmt_expr(n.expr)} >= 0 -> {n.if_nonneg} else {n.if_neg}")
        elif isinstance(n, ShiftNode):
            lines.append(f"{n.id}: shift {n.direction} -> {n.next}")
        elif isinstance(n, OutputNode):
            rng = f"c[{n.start}]" if n.start == n.stop else f"c[{n.start}]..c[{n.stop}]"
            lines.append(f"{n.id}: output {rng}")
    return "\n".join(lines) + "\n"


# -- parser ------------------------------------------------------------------

_ID = r"[A-Za-z0-9_]+"
_TOKEN = re.compile(
    r"\s*(?:(?P<rat>\d+/\d+)|(?P<int>\d+)|(?P<cell>c\[(?P<ci>\d+)\])|(?P<op>[-+*/()]))")


class _ExprParser:
    def __init__(self, text: str, line: int, col0: int):
        self.text, self.line, self.col0 = text, line, col0
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None:
                rest = text[pos:].lstrip()
                col = pos + (len(text[pos:]) - len(rest))
                raise BssSyntaxError(line, col0 + col + 1, "expression token", rest[:1])
            start = m.start(m.lastgroup if m.lastgroup != "ci" else "cell")
            self.toks.append((m.lastgroup if m.lastgroup != "ci" else "cell", m, col0 + start + 1))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def err(self, expected):
        t = self.peek()
        if t is None:
            raise BssSyntaxError(self.line, self.col0 + len(self.text) + 1, expected, "end of expression")
        raise BssSyntaxError(self.line, t[2], expected, t[1].group(0).strip())

    def is_op(self, ch):
        t = self.peek()
        return t is not None and t[0] == "op" and t[1].group("op") == ch

    def parse(self):
        if not self.toks:
            self.err("expression")
        e = self.sum()
        if self.peek() is not None:
            self.err("operator or end of expression")
        return e

    def sum(self):
        e = self.product()
        while self.is_op("+") or self.is_op("-"):
            op = self.peek()[1].group("op")
            self.i += 1
            e = BinOp(op, e, self.product())
        return e

    def product(self):
        e = self.unary()
        while self.is_op("*") or self.is_op("/"):
            op = self.peek()[1].group("op")
            self.i += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        if self.is_op("-"):
            self.i += 1
            t = self.peek()
            if t is not None and t[0] in ("rat", "int"):
                c = self.atom()
                return Const(-c.value)
            return Neg(self.unary())
        return self.atom()

    def atom(self):
        t = self.peek()
        if t is None:
            self.err("number, cell or '('")
        kind, m, col = t
        if kind == "rat":
            num, den = m.group("rat").split("/")
            if int(den) == 0:
                raise BssSyntaxError(self.line, col, "nonzero denominator", m.group("rat"))
            self.i += 1
            return Const(Fraction(int(num), int(den)))
        if kind == "int":
            self.i += 1
            return Const(Fraction(int(m.group("int"))))
        if kind == "cell":
            self.i += 1
            return Cell(int(m.group("ci")))
        if self.is_op("("):
            self.i += 1
            e = self.sum()
            if not self.is_op(")"):
                self.err("')'")
            self.i += 1
            return e
        self.err("number, cell or '('")


_LINE = re.compile(rf"^\s*(?P<id>{_ID})\s*:\s*(?P<body>.*?)\s*$")
_ARROW = re.compile(rf"->\s*(?P<succ>{_ID})\s*$")
_CELLREF = re.compile(r"c\[(\d+)\]")


def _parse_body(node_id, body, lineno, col0, fallthrough):
    if body.startswith("input"):
        rest = body[len("input"):].strip()
        if not rest:
            return ("input", node_id, None)
        m = re.fullmatch(rf"->\s*({_ID})", rest)
        if m is None:
            raise BssSyntaxError(lineno, col0 + len("input") + 2, "'-> <id>' or end of line", rest)
        return ("input", node_id, m.group(1))
    if body.startswith("shift"):
        m = re.fullmatch(rf"shift\s+(left|right)\s*->\s*({_ID})", body)
        if m is None:
            raise BssSyntaxError(lineno, col0 + 6, "'left|right -> <id>'", body[5:].strip())
        return ShiftNode(node_id, m.group(1), m.group(2))
    if body.startswith("output"):
        rest = body[len("output"):].strip()
        m = re.fullmatch(r"c\[(\d+)\](?:\s*\.\.\s*c\[(\d+)\])?", rest)
        if m is None:
            raise BssSyntaxError(lineno, col0 + 8, "'c[i]' or 'c[i]..c[j]'", rest)
        start = int(m.group(1))
        stop = int(m.group(2)) if m.group(2) is not None else start
        if stop < start:
            raise BssSyntaxError(lineno, col0 + 8, "non-empty cell range", rest)
        return OutputNode(node_id, start, stop)
    if body.startswith("if"):
        m = re.fullmatch(rf"if\s+(?P<expr>.+?)\s*>=\s*0\s*->\s*(?P<a>{_ID})\s+else\s+(?P<b>{_ID})", body)
        if m is None:
            raise BssSyntaxError(lineno, col0 + 1, "'if <expr> >= 0 -> <id> else <id>'", body)
        expr = _ExprParser(m.group("expr"), lineno, col0 + m.start("expr")).parse()
        return BranchNode(node_id, expr, m.group("a"), m.group("b"))
    m = re.fullmatch(r"c\[(?P<k>\d+)\]\s*:=\s*(?P<expr>.+?)\s*->\s*(?P<succ>" + _ID + ")", body)
    if m is not None:
        expr = _ExprParser(m.group("expr"), lineno, col0 + m.start("expr")).parse()
        return ComputeNode(node_id, int(m.group("k")), expr, m.group("succ"))
    raise BssSyntaxError(lineno, col0 + 1, "input, c[k] := ..., if, shift or output", body[:16])


def parse_program(text) -> BssProgram:
    """Parse ``.bss`` source; never raises anything but :class:`ParseError`."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BssSyntaxError(1, exc.start + 1, "UTF-8 text") from None
    if not isinstance(text, str):
        raise ParseError(f"expected program text, got {type(text).__name__}")
    try:
        return _parse(text)
    except ParseError:
        raise
    except (ValueError, RecursionError, OverflowError, ZeroDivisionError) as exc:
        raise ParseError(f"unparseable program: {exc}") from None


def _parse(text: str) -> BssProgram:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if m is None:
            col = len(line) - len(line.lstrip()) + 1
            raise BssSyntaxError(lineno, col, "'<id>: <node>'", line.strip()[:16])
        entries.append((lineno, m.group("id"), m.group("body"), m.start("body")))
    if not entries:
        raise BssSyntaxError(1, 1, "at least one node")
    nodes = []
    pending_input = []
    for k, (lineno, node_id, body, col0) in enumerate(entries):
        parsed = _parse_body(node_id, body, lineno, col0, None)
        if isinstance(parsed, tuple):
            _, nid, succ = parsed
            if succ is None:
                if k + 1 >= len(entries):
                    raise DanglingSuccessor(f"input node {nid!r} on line {lineno} has no following node")
                succ = entries[k + 1][1]
            pending_input.append(InputNode(nid, succ))
            nodes.append(pending_input[-1])
        else:
            nodes.append(parsed)
    if len(pending_input) > 1:
        raise MultipleInputs(f"{len(pending_input)} input nodes; exactly one allowed")
    if not pending_input:
        ids = {n.id for n in nodes}
        iid = "in"
        while iid in ids:
            iid = "_" + iid
        entry = InputNode(iid, nodes[0].id)
        nodes.insert(0, entry)
    else:
        entry = pending_input[0]
    return BssProgram(tuple(nodes), entry.id)
