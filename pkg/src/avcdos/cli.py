"""Command-line front end: ``avcdos analyze`` and ``avcdos bss ...``.

Exit codes: 0 the command ran (whatever the verdict), 2 bad input,
3 a resource cap was hit.  Verdicts only ever appear in the report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .capacity import ExactZero, avc_capacity_avg
from .channel_model import (
    ChannelError, CostFn, Dims, Distribution, StochMatrix, channel_from_json, channel_to_json, input_cost,
    load_channel, load_cost, load_distribution)
from .constrained import ConstraintSpec, classify_state_constrained, in_dos_constrained, lambda0
from .exact import INF, ExactnessError, parse_rational
from .exact_linear import CapExceeded, TooLarge
from .max_error import HullIntersection, HullVerdict, is_dos_full_knowledge, verify_common_point, verify_separator
from .symmetrizability import is_symmetrizable, verify_certificate, verify_symmetrizer
from .bss.compiler import compile_symmetrizability
from .bss.interpreter import DEFAULT_STEP_CAP, Diverged, TraceError, decode_trace, encode_trace, replay_trace, \
    trace_program
from .bss.program import ParseError, format_program, parse_program

EXIT_OK, EXIT_INPUT, EXIT_CAP = 0, 2, 3
MODES = ("partial", "full", "state", "input-state", "capacity")
DECISION_MARKER = "# avcdos: compiled symmetrizability decision; output 1 = accept, 0 = reject"

INPUT_ERRORS = (ChannelError, ParseError, TraceError, ExactnessError, ValueError, KeyError, TypeError, OSError)
CAP_ERRORS = (CapExceeded, TooLarge)


class CapHit(RuntimeError):
    pass


def _q(v) -> str:
    return "inf" if v is INF else f"{v.numerator}/{v.denominator}"


def _qs(vs) -> list:
    return [_q(Fraction(v)) for v in vs]


def _unq(s):
    return INF if s == "inf" else parse_rational(s)


def load_schema() -> dict:
    return json.loads(resources.files("avcdos").joinpath("schema/report.schema.json").read_text())


def validate_report(doc) -> None:
    import jsonschema
    jsonschema.validate(doc, load_schema())


# -- analyze -------------------------------------------------------------------


def _load_dist(spec: str, n: int) -> Distribution:
    if spec == "uniform":
        return Distribution.uniform(n)
    return load_distribution(spec)


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise ValueError(f"mode {args.mode} needs {', '.join(missing)}")


def _partial(w, args) -> dict:
    d = is_symmetrizable(w)
    out = {
        "verdict": d.verdict.value,
        "dos_possible": d.symmetrizable,
        "summary": "DoS possible (C_avg = 0)" if d.symmetrizable else "DoS impossible (C_avg > 0)",
    }
    if args.witness and d.symmetrizable:
        out["witness_u"] = [_qs(r) for r in d.witness_u.u]
    if args.certificate and not d.symmetrizable:
        out["certificate"] = _qs(d.certificate)
    return out


def _hull_json(h: HullIntersection, args) -> dict:
    o = {"x": h.x, "xhat": h.xhat, "verdict": h.verdict.value}
    if h.disjoint and args.certificate:
        o.update(separator=_qs(h.separator), threshold=_q(h.threshold), gap=_q(h.gap))
    if not h.disjoint and args.witness:
        o.update(q_x=_qs(h.q_x.p), q_xhat=_qs(h.q_xhat.p), common_point=_qs(h.common_point.p))
    return o


def _full(w, args) -> dict:
    rep = is_dos_full_knowledge(w, full_report=args.full_report)
    out = {
        "verdict": "DoS possible (C_max = 0)" if rep.dos_possible else "DoS impossible (C_max > 0)",
        "dos_possible": rep.dos_possible,
        "disjoint_pair": list(rep.disjoint_pair) if rep.disjoint_pair else None,
    }
    if args.full_report or args.witness or args.certificate:
        out["pairs"] = [_hull_json(h, args) for h in rep.pairs]
    return out


def _state(w, args):
    _need(args, "input_dist", "state_cost", "lam")
    p = _load_dist(args.input_dist, w.nx)
    l = load_cost(args.state_cost)
    spec = ConstraintSpec(l, parse_rational(args.lam))
    v = classify_state_constrained(w, p, spec)
    params = {"input_dist": _qs(p.p), "state_cost": _qs(l.costs), "lambda": _q(spec.lam)}
    out = {"verdict": v.classification.value, "lambda0": _q(v.lambda0),
           "dos_possible": v.classification.value == "DoSPossible"}
    if args.witness and v.witness_u is not None:
        out["witness_u"] = [_qs(r) for r in v.witness_u.u]
    return out, params


def _input_state(w, args):
    _need(args, "state_cost", "input_cost", "lam", "gamma")
    l, g = load_cost(args.state_cost), load_cost(args.input_cost)
    spec = ConstraintSpec(l, parse_rational(args.lam), g, parse_rational(args.gamma))
    r = in_dos_constrained(w, spec)
    params = {"state_cost": _qs(l.costs), "input_cost": _qs(g.costs), "lambda": _q(spec.lam),
              "gamma": _q(spec.gamma)}
    out = {"verdict": "DoS possible" if r.dos_possible else "DoS impossible",
           "dos_possible": r.dos_possible, "max_min_lambda": _q(r.max_value)}
    if r.optimal_p is not None and args.witness:
        out["optimal_p"] = _qs(r.optimal_p.p)
    return out, params


def _capacity(w, args):
    tol = float(args.tol)
    res = avc_capacity_avg(w, tol=tol, max_iter=args.max_iter)
    params = {"tol": tol, "max_iter": args.max_iter}
    if isinstance(res, ExactZero):
        out = {"verdict": "Symmetrizable", "kind": "exact_zero", "value": _q(res.value), "dos_possible": True}
        if args.witness:
            out["witness_u"] = [_qs(r) for r in res.decision.witness_u.u]
        return out, params
    return {"verdict": "NonSymmetrizable", "kind": "estimate", "dos_possible": False, "value": res.value,
            "lower_bound": res.lower_bound, "upper_bound": res.upper_bound, "argmin_q": list(res.argmin_q),
            "opt_input_p": list(res.opt_input_p), "iterations": res.iterations,
            "converged": res.converged}, params


def analyze_channel(path, args) -> dict:
    t0 = time.perf_counter()
    w = load_channel(path)
    params = {}
    if args.mode == "partial":
        result = _partial(w, args)
    elif args.mode == "full":
        result = _full(w, args)
    elif args.mode == "state":
        result, params = _state(w, args)
    elif args.mode == "input-state":
        result, params = _input_state(w, args)
    else:
        result, params = _capacity(w, args)
    return {
        "tool": "avcdos",
        "version": __version__,
        "query": {"mode": args.mode, "channel_file": str(path), "channel": channel_to_json(w),
                  "parameters": params},
        "result": result,
        "timing": {"seconds": time.perf_counter() - t0},
    }


# -- verify ----------------------------------------------------------------------


def verify_report(doc: dict) -> dict:
    """Re-check every witness and certificate carried by a report."""
    w = channel_from_json(doc["query"]["channel"])
    mode, res, par = doc["query"]["mode"], doc["result"], doc["query"].get("parameters", {})
    checks = []

    def add(name, ok):
        checks.append({"check": name, "ok": bool(ok)})

    if "witness_u" in res:
        u = StochMatrix(tuple(tuple(parse_rational(v) for v in row) for row in res["witness_u"]))
        add("witness_u symmetrizes W", verify_symmetrizer(w, u))
        if mode == "state":
            p = tuple(parse_rational(v) for v in par["input_dist"])
            l = tuple(parse_rational(v) for v in par["state_cost"])
            cost = sum((p[x] * l[s] * u.u[x][s] for x in range(w.nx) for s in range(w.ns)), Fraction(0))
            add("witness_u attains lambda0", cost == _unq(res["lambda0"]))
    if "certificate" in res:
        add("Farkas certificate", verify_certificate(w, tuple(parse_rational(v) for v in res["certificate"])))
    for pr in res.get("pairs", []):
        if "separator" in pr:
            h = HullIntersection(pr["x"], pr["xhat"], HullVerdict.DISJOINT,
                                 separator=tuple(parse_rational(v) for v in pr["separator"]),
                                 threshold=parse_rational(pr["threshold"]), gap=parse_rational(pr["gap"]))
            add(f"separator ({pr['x']},{pr['xhat']})", verify_separator(w, h))
        if "common_point" in pr:
            qa, qb, pt = ([parse_rational(v) for v in pr[k]] for k in ("q_x", "q_xhat", "common_point"))
            add(f"common point ({pr['x']},{pr['xhat']})", verify_common_point(w, pr["x"], pr["xhat"], qa, qb, pt))
    if "optimal_p" in res:
        p = Distribution(tuple(parse_rational(v) for v in res["optimal_p"]))
        g = CostFn(tuple(parse_rational(v) for v in par["input_cost"]))
        l = CostFn(tuple(parse_rational(v) for v in par["state_cost"]))
        add("optimal_p within input budget", input_cost(p, g) <= parse_rational(par["gamma"]))
        add("optimal_p attains max-min value", lambda0(w, p, l) == _unq(res["max_min_lambda"]))
    return {"verified": all(c["ok"] for c in checks), "checks": checks, "report_mode": mode}


# -- output helpers -------------------------------------------------------------


def _text(report: dict) -> str:
    if "verified" in report:
        lines = [f"verified: {'OK' if report['verified'] else 'FAILED'}"]
        lines += [f"  [{'ok' if c['ok'] else 'FAIL'}] {c['check']}" for c in report["checks"]]
        return "\n".join(lines)
    q, r = report["query"], report["result"]
    lines = [f"channel: {q['channel_file']}  mode: {q['mode']}", f"verdict: {r['verdict']}"]
    for k, v in r.items():
        if k in ("verdict", "pairs"):
            continue
        lines.append(f"{k}: {v}")
    for pr in r.get("pairs", []):
        lines.append(f"pair ({pr['x']},{pr['xhat']}): {pr['verdict']}")
    return "\n".join(lines)


def _emit(obj, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
    elif isinstance(obj, list):
        out.write("\n\n".join(_text(o) for o in obj) + "\n")
    else:
        out.write(_text(obj) + "\n")


def _error(exc, code: int, fmt: str) -> int:
    if fmt == "json":
        sys.stdout.write(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc),
                                               "exit_code": code}}) + "\n")
    else:
        sys.stderr.write(f"error ({type(exc).__name__}): {exc}\n")
    return code


def _guard(fn, args) -> int:
    fmt = getattr(args, "report", "text")
    try:
        return fn(args)
    except CAP_ERRORS as exc:
        return _error(exc, EXIT_CAP, fmt)
    except CapHit as exc:
        return _error(exc, EXIT_CAP, fmt)
    except json.JSONDecodeError as exc:
        return _error(exc, EXIT_INPUT, fmt)
    except INPUT_ERRORS as exc:
        return _error(exc, EXIT_INPUT, fmt)


def cmd_analyze(args) -> int:
    if args.verify:
        doc = json.loads(Path(args.verify).read_text())
        _emit(verify_report(doc), args.report)
        return EXIT_OK
    if args.mode is None:
        raise ValueError("--mode is required")
    if args.batch:
        files = sorted(Path(args.batch).glob("*.json"))
        with ThreadPoolExecutor(max_workers=min(8, os.cpu_count() or 1)) as pool:
            reports = list(pool.map(lambda f: analyze_channel(f, args), files))
        if args.report == "json":
            for r in reports:
                validate_report(r)
        _emit(reports, args.report)
        return EXIT_OK
    if args.channel is None:
        raise ValueError("a channel file (or --batch DIR, or --verify REPORT) is required")
    report = analyze_channel(args.channel, args)
    if args.report == "json":
        validate_report(report)
    _emit(report, args.report)
    return EXIT_OK


# -- bss -----------------------------------------------------------------------------


def _read_inputs(spec: str):
    p = Path(spec)
    text = p.read_text() if p.is_file() else spec
    return tuple(parse_rational(v.strip()) for v in text.replace("\n", ",").split(",") if v.strip())


def _fmt_out(values) -> str:
    return ",".join(str(v) for v in values)


def cmd_bss_run(args) -> int:
    text = Path(args.program).read_text()
    prog = parse_program(text)
    inputs = _read_inputs(args.input)
    out, trace = trace_program(prog, inputs, args.step_cap, full_trace=args.full_trace)
    if args.trace:
        Path(args.trace).write_text(encode_trace(trace))
    if isinstance(out, Diverged):
        raise CapHit(f"no output node reached within {args.step_cap} steps")
    print(_fmt_out(out))
    if text.startswith(DECISION_MARKER):
        print("accept" if out == (1,) else "reject")
    return EXIT_OK


def cmd_bss_compile(args) -> int:
    parts = [int(v) for v in args.dims.split(",")]
    if len(parts) != 3:
        raise ValueError("--dims expects NX,NS,NY")
    prog = compile_symmetrizability(Dims(*parts))
    text = DECISION_MARKER + "\n" + format_program(prog)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bss_verify(args) -> int:
    try:
        trace = decode_trace(Path(args.trace_file).read_text())
        replay_trace(trace)
    except TraceError as exc:
        print(f"FAIL: {exc}")
        return EXIT_OK
    print("OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="avcdos", description="Exact jamming (DoS) analysis for AVCs.")
    ap.add_argument("--version", action="version", version=f"avcdos {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="analyze a channel file")
    an.add_argument("channel", nargs="?")
    an.add_argument("--mode", choices=MODES)
    an.add_argument("--state-cost")
    an.add_argument("--input-cost")
    an.add_argument("--lambda", dest="lam")
    an.add_argument("--gamma")
    an.add_argument("--input-dist", help="distribution file or the word 'uniform'")
    an.add_argument("--witness", action="store_true")
    an.add_argument("--certificate", action="store_true")
    an.add_argument("--full-report", action="store_true")
    an.add_argument("--tol", default="1e-6")
    an.add_argument("--max-iter", type=int, default=100_000)
    an.add_argument("--report", choices=("json", "text"), default="text")
    an.add_argument("--verify", metavar="REPORT")
    an.add_argument("--batch", metavar="DIR")
    an.set_defaults(func=cmd_analyze)

    bss = sub.add_parser("bss", help="BSS machine tools").add_subparsers(dest="bss_command", required=True)
    run = bss.add_parser("run")
    run.add_argument("program")
    run.add_argument("--input", required=True, help="comma-separated rationals or a file holding them")
    run.add_argument("--trace")
    run.add_argument("--full-trace", action="store_true")
    run.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP)
    run.set_defaults(func=cmd_bss_run)
    comp = bss.add_parser("compile-sym")
    comp.add_argument("--dims", required=True)
    comp.add_argument("-o", "--output")
    comp.set_defaults(func=cmd_bss_compile)
    ver = bss.add_parser("verify-trace")
    ver.add_argument("trace_file")
    ver.set_defaults(func=cmd_bss_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _guard(args.func, args)


if __name__ == "__main__":
    sys.exit(main())
