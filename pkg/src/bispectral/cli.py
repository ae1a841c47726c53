"""Command-line entry point: ``bispectral <subcommand> ...``.

Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 on a usage
or input error.  Reports are JSON documents readable by ``load_report``;
apart from timing fields their content is deterministic.

``BISPECTRAL_THREADS`` caps the thread pools of numba and BLAS.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_DEGREES = {"ex1": 5, "ex2": 5, "ex3": 3}
SCOPE = "degree-bounded: only truncations up to the stated degree are verified, not all degrees"


class UsageError(Exception):
    pass


def _cap_threads():
    n = os.environ.get("BISPECTRAL_THREADS")
    if n:
        for var in ("NUMBA_NUM_THREADS", "OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _nonneg(value: int, what: str = "degree") -> int:
    if value < 0:
        raise UsageError(f"{what} must be nonnegative")
    return value


def _resolve(path: str) -> Path:
    """Use the path if it exists, else a bundled problem file with the same basename."""
    p = Path(path)
    if p.exists():
        return p
    from .theorems import bundled_path

    bundled = bundled_path(p.name)
    if bundled.is_file():
        return Path(str(bundled))
    raise UsageError(f"{path}: no such file")


def _load(path: str):
    from .exprio import SchemaError, load_problem

    p = _resolve(path)
    try:
        return load_problem(p), p
    except (SchemaError, ValueError) as exc:
        raise UsageError(f"{p}: {exc}") from None


def _psi(prob):
    from .operators import WaveFunction

    return WaveFunction(prob.psi, prob.convention)


# -- subcommands -----------------------------------------------------------------

def cmd_verify_triple(args) -> tuple[bool, dict]:
    from .operators import LeftOperator, RightOperator, check_triple

    prob, path = _load(args.problem)
    missing = [k for k in ("left_op", "right_op", "f", "theta") if getattr(prob, k) is None]
    if missing:
        raise UsageError(f"{path}: missing {', '.join(missing)}")
    v = check_triple(LeftOperator(prob.left_op), _psi(prob), RightOperator(prob.right_op), prob.f, prob.theta)
    return v.ok, {"verdict": "triple verified" if v.ok else "triple fails",
                  "inputs": {"problem": str(path)}, "details": v.to_dict(),
                  "residuals": {"left": v.left.to_dict(), "right": v.right.to_dict()}}


def cmd_solve_algebra(args) -> tuple[bool, dict]:
    from .ansatz import AnsatzBounds, stabilize, truncated_slice

    d = _nonneg(args.degree)
    if args.example:
        from .theorems import load_example

        entry = load_example(args.example)
        psi, side, src = entry.psi, entry.side, args.example
    elif args.problem:
        prob, path = _load(args.problem)
        psi, side, src = _psi(prob), prob.side or "theta", str(path)
    else:
        raise UsageError("give a problem file or --example")
    side = args.side or side
    overrides = [args.op_order, args.pole_order, args.num_deg]
    if any(v is not None for v in overrides):
        for v, what in zip(overrides, ("operator order", "pole order", "numerator degree")):
            if v is not None:
                _nonneg(v, what)
        b = AnsatzBounds.make(d, args.op_order, args.pole_order, args.num_deg)
        S, rep = stabilize(psi, d, schedule=[b], side=side)
        kind = "subspace, single bound"
    elif args.mode == "subspace":
        S, rep = stabilize(psi, d, side=side)
        kind = "subspace"
    else:
        S, rep = truncated_slice(psi, d, side=side)
        kind = "truncation"
    return True, {"verdict": f"dimension {S.dim}", "inputs": {"source": src, "degree": d, "side": side,
                                                               "kind": kind},
                  "bases": {"slice": S.to_dict()}, "dimensions": {str(d): S.dim},
                  "details": {"convergence": rep.to_dict(), "scope": SCOPE}}


def cmd_check_theorem(args) -> tuple[bool, dict]:
    from .theorems import GAMMA, validate_theorem

    ex = args.example
    if ex not in DEFAULT_DEGREES:
        raise UsageError(f"unknown example {ex!r}; expected one of {sorted(DEFAULT_DEGREES)}")
    d = _nonneg(DEFAULT_DEGREES[ex] if args.degree is None else args.degree)
    r = validate_theorem(ex, d)
    fb = r.get("fallback")
    ok = r["ok"] or (not args.strict and fb is not None and fb["ok"])
    dims = r.get("dimensions", {})
    return ok, {"verdict": r["verdict"], "inputs": {"example": ex, "degree": d, "strict": args.strict},
                "dimensions": dims, "details": r,
                "residuals": {"literal_differs_at": r.get("literal", {}).get("differ_at"),
                              "fallback": None if fb is None else {"gamma": fb["gamma"], "note": GAMMA[fb["gamma"]].note,
                                                                   "differs_at": fb["differ_at"]}}}


def _assignment(args):
    from .presentations import PRESENTATIONS

    prob, path = _load(args.assignment)
    if not prob.assignment:
        raise UsageError(f"{path}: no assignment")
    gens = PRESENTATIONS[args.example].generators
    missing = [g for g in gens if g not in prob.assignment]
    if missing:
        raise UsageError(f"{path}: unassigned generator(s) {missing}")
    return prob.assignment, path


def cmd_check_presentation(args) -> tuple[bool, dict]:
    from .presentations import PRESENTATIONS, check_relations, surjectivity_check
    from .theorems import GAMMA

    if args.example not in PRESENTATIONS:
        raise UsageError(f"unknown example {args.example!r}; expected one of {sorted(PRESENTATIONS)}")
    a, path = _assignment(args)
    d = _nonneg(GAMMA[args.example].threshold + 2 if args.degree is None else args.degree)
    rel = check_relations(args.example, a)
    surj = surjectivity_check(args.example, a, d)
    surj_ok = surj["ok"] or (not args.strict and surj.get("fallback", {}).get("ok", False))
    ok = rel.ok and surj_ok
    verdict = ("relations vanish and degree-bounded surjectivity holds" if ok else
               f"{len(rel.failing)} relation(s) nonzero" if not rel.ok else "not surjective up to the degree")
    return ok, {"verdict": verdict, "inputs": {"example": args.example, "assignment": str(path), "degree": d},
                "details": {"relations": rel.to_dict(), "surjectivity": surj, "scope": SCOPE},
                "residuals": {r["relation"]: r.get("residual") for r in rel.results}}


def cmd_find_generators(args) -> tuple[bool, dict]:
    from .presentations import PRESENTATIONS, find_generators
    from .theorems import GAMMA

    if args.example not in PRESENTATIONS:
        raise UsageError(f"unknown example {args.example!r}; expected one of {sorted(PRESENTATIONS)}")
    ds = _nonneg(args.search_degree, "search degree")
    surj = _nonneg(GAMMA[args.example].threshold + 2 if args.surj_degree is None else args.surj_degree)
    res = find_generators(args.example, ds, surj, max_terms=args.max_terms, limit=args.limit,
                          node_budget=args.budget, diagnose_budget=args.diagnose_budget)
    doc = res.to_dict()
    if res.ok:
        verdict = f"{len(res.survivors)} surjective assignment(s)"
    elif res.closest:
        verdict = f"no candidate found; closest assignment leaves {res.closest['failing']} relation(s) nonzero"
        if res.obstruction and res.obstruction["obstructed"]:
            verdict += "; no surjective assignment exists (character obstruction)"
    else:
        verdict = "no candidate found"
    residuals = {}
    if res.closest:
        residuals = {r["relation"]: r.get("residual") for r in res.closest["relations"]}
    return res.ok, {"verdict": verdict, "inputs": {"example": args.example, "search_degree": ds,
                                                   "surj_degree": surj, "max_terms": args.max_terms},
                    "details": dict(doc, scope=SCOPE), "residuals": residuals}


def cmd_synth_kdv(args) -> tuple[bool, dict]:
    from .exact.scalar import GaussianRational
    from .exprio import ParseError, make_basis, parse_expr
    from .kdv import NonRationalAntiderivative, NoTermination, schrodinger, synth_wavefunction, verify_kdv_example

    try:
        s = None if args.s is None else GaussianRational.parse(args.s)
        if args.potential:
            basis = make_basis(args.factors or [])
            V = parse_expr(args.potential, basis)
        else:
            t3 = GaussianRational.parse(args.t3)
    except (ParseError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    _nonneg(args.kmax, "K_max")
    if args.potential:
        s = s if s is not None else GaussianRational(1)
        try:
            tail = synth_wavefunction(schrodinger(V), args.kmax, s)
        except (NonRationalAntiderivative, NoTermination) as exc:
            return False, {"verdict": str(exc), "inputs": {"potential": args.potential, "s": str(s)}}
        return True, {"verdict": f"terminates at K = {tail.K}", "inputs": {"potential": args.potential, "s": str(s)},
                      "details": tail.to_dict()}
    r = verify_kdv_example(t3, s, args.kmax)
    ok = r["ok"] or (not args.strict and r["readings"].get("log-derivative", {}).get("ok", False))
    return ok, {"verdict": r["verdict"], "inputs": {"t3": args.t3, "s": args.s, "K_max": args.kmax},
                "details": r}


def cmd_prolate(args) -> tuple[bool, dict]:
    from .prolate import ProlateConfig, prolate_eigs, prolate_report, write_csv

    try:
        cfg = ProlateConfig(args.T, args.W, args.modes, args.quad)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    r = prolate_report(cfg, quad_check=args.quad_check)
    lead_ok = r["max_cross_residual_leading"] <= args.cross_tol
    comm_ok = r["commutator_residual"] <= args.comm_tol
    ok = lead_ok and comm_ok
    if args.csv:
        write_csv(args.csv, prolate_eigs(cfg))
    return ok, {"verdict": "commutes" if ok else "tolerance exceeded",
                "inputs": cfg.to_dict(),
                "residuals": {"commutator": r["commutator_residual"],
                              "max_cross_leading": r["max_cross_residual_leading"],
                              "tolerances": {"commutator": args.comm_tol, "cross": args.cross_tol}},
                "dimensions": {"shannon_count": r["shannon_count"], "shannon_number": r["shannon_number"]},
                "details": r}


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bispectral", description="Exact checks for matrix bispectral triples.")
    ap.add_argument("--out", help="write the report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-triple", help="exact check of L psi = psi F and psi B = theta psi")
    p.add_argument("problem")
    p.set_defaults(func=cmd_verify_triple)

    p = sub.add_parser("solve-algebra", help="degree-bounded slice of the eigenvalue algebra")
    p.add_argument("problem", nargs="?")
    p.add_argument("--example", choices=sorted(DEFAULT_DEGREES))
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--side", choices=("theta", "f"))
    p.add_argument("--mode", choices=("truncation", "subspace"), default="truncation")
    p.add_argument("--op-order", type=int)
    p.add_argument("--pole-order", type=int)
    p.add_argument("--num-deg", type=int)
    p.set_defaults(func=cmd_solve_algebra)

    p = sub.add_parser("check-theorem", help="compare solver slices with the closed-form algebra")
    p.add_argument("--example", required=True)
    p.add_argument("--degree", type=int)
    p.add_argument("--strict", action="store_true", help="require the displayed form (no alternative reading)")
    p.set_defaults(func=cmd_check_theorem)

    p = sub.add_parser("check-presentation", help="evaluate relations and surjectivity for an assignment")
    p.add_argument("--example", required=True)
    p.add_argument("--assignment", required=True, help="problem file with an assignment map")
    p.add_argument("--degree", type=int)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_check_presentation)

    p = sub.add_parser("find-generators", help="search generator assignments satisfying the relations")
    p.add_argument("--example", required=True)
    p.add_argument("--search-degree", type=int, default=2)
    p.add_argument("--surj-degree", type=int)
    p.add_argument("--max-terms", type=int, default=3)
    p.add_argument("--limit", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--diagnose-budget", type=int, default=200000)
    p.set_defaults(func=cmd_find_generators)

    p = sub.add_parser("synth-kdv", help="tail wavefunction synthesis and the quartic example")
    p.add_argument("--t3", default="1")
    p.add_argument("--s", help="convention 1 or i (default: both)")
    p.add_argument("--potential", help="synthesize for this potential instead")
    p.add_argument("--factors", nargs="*", help="factor basis for --potential")
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--strict", action="store_true", help="require the displayed potential")
    p.set_defaults(func=cmd_synth_kdv)

    p = sub.add_parser("prolate", help="sinc kernel versus prolate operator in a Legendre basis")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--W", type=float, default=5 * 3.141592653589793 / 2)
    p.add_argument("--modes", type=int, default=40)
    p.add_argument("--quad", type=int, default=200)
    p.add_argument("--csv", help="write eigenvector Legendre coefficients here")
    p.add_argument("--quad-check", action="store_true", help="also report the change when n_quad doubles")
    p.add_argument("--comm-tol", type=float, default=1e-8)
    p.add_argument("--cross-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_prolate)
    return ap


def run(argv=None) -> tuple[int, str, argparse.Namespace]:
    """Execute one invocation; returns (exit code, report text, parsed arguments)."""
    from .exprio import dump_report

    _cap_threads()
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        ok, doc = args.func(args)
    except UsageError as exc:
        return EXIT_USAGE, f"error: {exc}\n", args
    except KeyError as exc:
        return EXIT_USAGE, f"error: {exc.args[0] if exc.args else exc}\n", args
    doc.setdefault("details", {})
    doc["command"] = args.command
    doc["ok"] = ok
    doc["seconds"] = round(time.perf_counter() - t0, 3)
    return (EXIT_OK if ok else EXIT_FAIL), dump_report(doc), args


def main(argv=None) -> int:
    # argparse itself exits with code 2 on malformed command lines
    code, text, args = run(argv)
    if code == EXIT_USAGE:
        sys.stderr.write(text)
        return code
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            sys.stderr.write(f"error: {args.out}: {exc.strerror}\n")
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
