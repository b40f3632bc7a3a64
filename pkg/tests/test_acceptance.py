"""Acceptance criteria 1-10, each at its stated size and tolerance."""

import ast
import json
import math
import random
import time
from fractions import Fraction as F
from itertools import combinations
from pathlib import Path

import pytest

from avcdos.bss.compiler import (
    InterleavedResult, compile_nonsymmetrizability, compile_symmetrizability, run_interleaved)
from avcdos.bss.interpreter import replay_trace, trace_program, verify_trace
from avcdos.capacity import ExactZero, avc_capacity_avg
from avcdos.channel_model import CostFn, Dims, Distribution, StochMatrix, channel_to_json, validate_avc, vectorize, \
    xor_channel
from avcdos.cli import main, validate_report
from avcdos.constrained import (
    Classification, ConstraintSpec, classify_state_constrained, in_dos_constrained, lambda0, max_min_lambda,
    max_min_lambda_oracle)
from avcdos.exact import ExactnessError, assert_exact
from avcdos.exact_linear import enumerate_basic_feasible, fm_feasible, lp_feasible, verify_farkas
from avcdos.max_error import common_point_from_symmetrizer, is_dos_full_knowledge, verify_common_point
from avcdos.symmetrizability import (
    SymmetrizabilityDecision, Verdict, build_symmetrizing_system, is_symmetrizable, verify_symmetrizer)

from helpers import random_avc, random_system, state_independent, x_independent, xs_symmetric

SRC = Path(__file__).resolve().parents[1] / "src" / "avcdos"


def corpus(seed, n, max_dim=3):
    rng = random.Random(seed)
    out = []
    makers = (random_avc, random_avc, x_independent, state_independent)
    while len(out) < n:
        d = Dims(rng.randint(1, max_dim), rng.randint(1, max_dim), rng.randint(1, max_dim))
        if len(out) % 5 == 4 and d.nx >= 2:
            out.append(xs_symmetric(rng, d.nx, d.ny))
        else:
            out.append(rng.choice(makers)(rng, d))
    return out


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_c1_symmetrizability_oracle_equivalence(criterion):
    criterion(1, "symmetrizability agrees with vertex oracle on 200+ channels, certificates verify, < 60 s")
    t0 = time.perf_counter()
    channels = corpus(101, 220)
    for w in channels:
        d = is_symmetrizable(w)
        system = build_symmetrizing_system(w)
        assert d.symmetrizable == enumerate_basic_feasible(system).feasible
        if d.symmetrizable:
            assert verify_symmetrizer(w, d.witness_u)
        else:
            assert verify_farkas(system, d.certificate)
    assert time.perf_counter() - t0 < 60


def test_c2_trivial_families(criterion):
    criterion(2, "state-independent, (x,s)-symmetric and x-independent families, 100%")
    rng = random.Random(102)
    for _ in range(100):
        d = Dims(rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3))
        w = state_independent(rng, d)
        rows_differ = len({w.w[x][0] for x in range(d.nx)}) > 1
        assert is_symmetrizable(w).verdict is (Verdict.NON_SYMMETRIZABLE if rows_differ else Verdict.SYMMETRIZABLE)

        n = rng.randint(2, 3)
        ws = xs_symmetric(rng, n, rng.randint(1, 3))
        assert is_symmetrizable(ws).symmetrizable
        assert verify_symmetrizer(ws, StochMatrix(tuple(tuple(F(int(s == x)) for s in range(n)) for x in range(n))))

        assert is_symmetrizable(x_independent(rng, d)).symmetrizable


def test_c3_capacity_dichotomy(criterion):
    criterion(3, "ExactZero iff symmetrizable; BSC(0.1), BSC(0.25) within 1e-6, < 30 s")
    t0 = time.perf_counter()
    for w in corpus(103, 80):
        assert isinstance(avc_capacity_avg(w), ExactZero) == is_symmetrizable(w).symmetrizable
    for p in (F(1, 10), F(1, 4)):
        w = validate_avc([[[1 - p, p]], [[p, 1 - p]]])
        est = avc_capacity_avg(w, tol=1e-6)
        assert abs(est.value - (1 - h2(float(p)))) <= 1e-6
    assert round(1 - h2(0.1), 6) == 0.531004 and round(1 - h2(0.25), 6) == 0.188722
    assert time.perf_counter() - t0 < 30


def test_c4_containment(criterion):
    criterion(4, "symmetrizable implies full-knowledge DoS, U-derived common points verify")
    seen = 0
    for w in corpus(104, 200):
        d = is_symmetrizable(w)
        if not d.symmetrizable:
            continue
        seen += 1
        assert is_dos_full_knowledge(w).dos_possible
        for x, xh in combinations(range(w.nx), 2):
            assert verify_common_point(w, x, xh, *common_point_from_symmetrizer(w, d.witness_u, x, xh))
    assert seen >= 50


def test_c5_constrained_xor_family(criterion):
    criterion(5, "XOR constrained values exact; duality equals vertex oracle on 50+ instances")
    w, l = xor_channel(), CostFn((0, 1))
    uni = Distribution.uniform(2)
    assert lambda0(w, uni, l) == F(1, 2)
    assert lambda0(w, Distribution((1, 0)), l) == 0
    got = [classify_state_constrained(w, uni, ConstraintSpec(l, lam)).classification
           for lam in (F(1, 4), F(1, 2), F(3, 4))]
    assert got == [Classification.NO_DOS, Classification.BOUNDARY, Classification.DOS_POSSIBLE]
    assert max_min_lambda(w, l, l, 1) == F(1, 2)
    assert max_min_lambda(w, l, l, 0) == 0

    rng = random.Random(105)
    for k in range(60):
        d = Dims(rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3))
        v = random_avc(rng, d) if k % 2 else x_independent(rng, d)
        lc = CostFn(tuple(F(rng.randint(0, 3)) for _ in range(d.ns - 1)) + (F(0),))
        gc = CostFn(tuple(F(rng.randint(0, 3)) for _ in range(d.nx - 1)) + (F(0),))
        gamma = F(rng.randint(0, 6), 2)
        assert max_min_lambda(v, lc, gc, gamma) == max_min_lambda_oracle(v, lc, gc, gamma)


def test_c6_monotonicity_sweep(criterion):
    criterion(6, "max-min nondecreasing in gamma over 10-point grid, 20 channels; DoS antitone/monotone")
    rng = random.Random(106)
    channels = [w for w in corpus(106, 200) if is_symmetrizable(w).symmetrizable][:20]
    assert len(channels) == 20
    grid = [F(k, 3) for k in range(10)]
    lams = [F(1, 4), F(1, 2), F(1), F(2)]
    for w in channels:
        l = CostFn(tuple(F(rng.randint(0, 3)) for _ in range(w.ns - 1)) + (F(0),))
        g = CostFn((F(0),) + tuple(F(rng.randint(0, 3)) for _ in range(w.nx - 1)))
        values = [max_min_lambda(w, l, g, gm) for gm in grid]
        assert all(a <= b for a, b in zip(values, values[1:]))
        for lam in lams:
            dos = [in_dos_constrained(w, ConstraintSpec(l, lam, g, gm)).dos_possible for gm in grid]
            assert all(a >= b for a, b in zip(dos, dos[1:]))
        for gm in (grid[0], grid[-1]):
            dos = [in_dos_constrained(w, ConstraintSpec(l, lam, g, gm)).dos_possible for lam in lams]
            assert all(a <= b for a, b in zip(dos, dos[1:]))


def test_c7_fm_lp_cross_validation(criterion):
    criterion(7, "Fourier-Motzkin verdict equals LP on 100 systems with <= 6 variables")
    rng = random.Random(107)
    for _ in range(100):
        s = random_system(rng, max_vars=6)
        assert fm_feasible(s) == lp_feasible(s).feasible


def test_c8_bss_end_to_end(criterion):
    criterion(8, "compiled BSS decider agrees at (2,2,2),(2,1,2); traces verify and replay; interleaved halts")
    t0 = time.perf_counter()
    rng = random.Random(108)
    for dims in (Dims(2, 2, 2), Dims(2, 1, 2)):
        prog = compile_symmetrizability(dims)
        b1, b2 = compile_symmetrizability(dims, semidecide=True), compile_nonsymmetrizability(dims)
        for k in range(100):
            w = (random_avc, x_independent, state_independent, random_avc)[k % 4](rng, dims)
            if k % 5 == 0 and dims.ns == dims.nx:
                w = xs_symmetric(rng, 2, 2)
            sym = is_symmetrizable(w).symmetrizable
            t = vectorize(w)
            out, tr = trace_program(prog, t)
            assert out == ((1,) if sym else (0,))
            assert verify_trace(tr) and replay_trace(tr) == out
            r = run_interleaved(b1, b2, t, step_cap=100_000)
            assert isinstance(r, InterleavedResult) and r.symmetrizable == sym
    assert time.perf_counter() - t0 < 120


DECISION_MODULES = ("channel_model.py", "exact.py", "exact_linear.py", "symmetrizability.py", "max_error.py",
                    "constrained.py", "bss/program.py", "bss/interpreter.py", "bss/poly.py", "bss/compiler.py")
INTEGER_MATH = {"gcd", "lcm", "comb", "factorial", "isqrt", "prod"}
# a wall-clock compile budget is the one float allowed in a decision module; it never touches a value
ALLOWED_FLOAT_LINES = {("bss/compiler.py", "max_seconds: float = float(")}


def _float_audit(rel):
    text = (SRC / rel).read_text()
    lines = text.splitlines()
    problems = []
    for node in ast.walk(ast.parse(text)):
        where = f"{rel}:{getattr(node, 'lineno', 0)}"
        if isinstance(node, ast.Constant) and isinstance(node.value, (float, complex)):
            problems.append(f"{where} float literal")
        elif isinstance(node, ast.Import):
            bad = [a.name for a in node.names if a.name.split(".")[0] in ("math", "numpy", "scipy", "cmath", "decimal")]
            if bad:
                problems.append(f"{where} imports {bad}")
        elif isinstance(node, ast.ImportFrom) and node.module:
            root = node.module.split(".")[0]
            if root in ("numpy", "scipy", "cmath", "decimal"):
                problems.append(f"{where} imports from {node.module}")
            if root == "math" and {a.name for a in node.names} - INTEGER_MATH:
                problems.append(f"{where} imports non-integer math functions")
        elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in ("float", "complex"):
            line = lines[node.lineno - 1]
            if not any(rel == r and snippet in line for r, snippet in ALLOWED_FLOAT_LINES):
                problems.append(f"{where} calls {node.func.id}()")
    return problems


def test_c9_exactness(criterion):
    criterion(9, "no float in decision modules (audit) and runtime guards reject floats")
    problems = [p for rel in DECISION_MODULES for p in _float_audit(rel)]
    assert problems == []

    for w in corpus(109, 60):
        d = is_symmetrizable(w)
        assert_exact(d)
        assert_exact(is_dos_full_knowledge(w, full_report=True))
        l = CostFn((F(0),) * w.ns)
        assert_exact(classify_state_constrained(w, Distribution.uniform(w.nx), ConstraintSpec(l, 1)))
    with pytest.raises(ExactnessError):
        SymmetrizabilityDecision(Verdict.NON_SYMMETRIZABLE, certificate=(0.5,))
    with pytest.raises(ExactnessError):
        ConstraintSpec(CostFn((0, 1)), 0.75)
    with pytest.raises((ExactnessError, TypeError, ValueError)):
        validate_avc([[[0.25, 0.75]]])


def test_c10_cli_round_trips(criterion, tmp_path, capsys):
    criterion(10, "every CLI witness/certificate re-verifies; schema passes on all report modes")

    def dump(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    cost2 = dump("c2.json", {"costs": ["0", "1"]})
    cost = {n: dump(f"c{n}.json", {"costs": ["0"] + ["1"] * (n - 1)}) for n in (1, 2, 3)}
    runs = 0
    for i, w in enumerate(corpus(110, 24, max_dim=2) + [xor_channel()]):
        chan = dump(f"w{i}.json", channel_to_json(w))
        flag_sets = [
            ["--mode", "partial", "--witness", "--certificate"],
            ["--mode", "full", "--witness", "--certificate", "--full-report"],
            ["--mode", "state", "--input-dist", "uniform", "--state-cost", cost[w.ns], "--lambda", "1/2", "--witness"],
            ["--mode", "input-state", "--state-cost", cost[w.ns], "--input-cost", cost[w.nx], "--lambda", "1/2",
             "--gamma", "1", "--witness"],
        ]
        if i % 6 == 0:
            flag_sets.append(["--mode", "capacity", "--witness", "--tol", "1e-4"])
        for flags in flag_sets:
            assert main(["analyze", chan, *flags, "--report", "json"]) == 0
            doc = json.loads(capsys.readouterr().out)
            validate_report(doc)
            rep = dump(f"r{runs}.json", doc)
            assert main(["analyze", "--verify", rep, "--report", "json"]) == 0
            ver = json.loads(capsys.readouterr().out)
            assert ver["verified"], (flags, ver)
            runs += 1
    assert cost2 and runs >= 100
