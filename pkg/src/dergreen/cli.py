"""Command-line interface: reduce | factor | decompose | green | solve |
verify | bench on a problem file.

Exit codes: 0 success, 2 parse/dimension error, 3 degenerate reduction,
4 non-unique boundary problem, 5 not decomposable (or complex factors
skipped), 6 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .boundary import decompose_conditions, extend_conditions
from .errors import (ComplexFactorizationSkipped, DegenerateReduction,
                     DergreenError, NonUniqueBVP, NotDecomposable,
                     ParseError)
from .factorization import EvenPoly, descartes_no_negative_roots, factor_even
from .operators import companion, reduce_operator
from .pipeline import bench, solve_der
from .problemfile import parse_problem

EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_NONUNIQUE = 4
EXIT_NOTDECOMPOSABLE = 5
EXIT_VERIFYFAIL = 6


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _load(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_problem(text)


def _coeff_line(label, coeffs):
    return f"{label} = [" + ", ".join(_fmt(float(c.real if
                                       isinstance(c, complex) else c))
                                      for c in coeffs) + "]"


def _cplx_line(label, coeffs):
    bits = []
    for c in coeffs:
        c = complex(c)
        bits.append(f"({_fmt(c.real)}, {_fmt(c.imag)})")
    return f"{label} = [" + ", ".join(bits) + "]"


def cmd_reduce(args):
    pf = _load(args.problem)
    P = pf.to_der_problem()
    R = companion(P.L)
    S = reduce_operator(P.L)
    print(_coeff_line("R.a", R.a))
    print(_coeff_line("R.b", R.b))
    print(_coeff_line("S", S.c))
    return 0


def cmd_factor(args):
    pf = _load(args.problem)
    P = pf.to_der_problem()
    S = reduce_operator(P.L)
    even = EvenPoly.from_diffpoly(S)
    fact = factor_even(even)
    print(_cplx_line("q", fact.q))
    print(_cplx_line("q_minus", fact.q_minus))
    print(f"leading = {_fmt(fact.leading)}")
    print(f"all_real = {fact.all_real}")
    print(f"descartes = {descartes_no_negative_roots(even.halved())}")
    return 0


def cmd_decompose(args):
    pf = _load(args.problem)
    P = pf.to_der_problem()
    R = companion(P.L)
    S = reduce_operator(P.L)
    E = extend_conditions(P.B, R)
    fact = factor_even(EvenPoly.from_diffpoly(S))
    if not fact.all_real:
        raise ComplexFactorizationSkipped(
            "factors are complex; decomposition over the reals unavailable")
    q, qm = fact.as_real_pair()
    try:
        dec = decompose_conditions(E, q)
        l1 = q
    except NotDecomposable:
        dec = decompose_conditions(E, qm)
        l1 = qm
    print(_coeff_line("L1", l1))
    print(f"lemma = {dec.lemma}")
    with np.printoptions(precision=17):
        print("Gamma =")
        print(np.asarray(E.Gamma))
        print("Theta =")
        print(np.asarray(E.Theta))
        print("Phi =")
        print(np.asarray(dec.PhiPsi[0]))
        print("Psi =")
        print(np.asarray(dec.PhiPsi[1]))
    return 0


def _kernel_json(K):
    pieces = []
    for region, expr in K.pieces:
        pieces.append({
            "region": [{"a": h.a, "b": h.b, "c": h.c, "strict": h.strict}
                       for h in region.constraints],
            "terms": [{
                "exp_t": [mut.real, mut.imag],
                "exp_s": [mus.real, mus.imag],
                "coeffs": [[[v.real, v.imag] for v in row] for row in C],
            } for mut, mus, C in expr.terms],
        })
    return {"T": K.T, "pieces": pieces}


def _write_kernel(K, grid_n, stem):
    csv_path = Path(f"{stem}.csv")
    json_path = Path(f"{stem}.json")
    xs = np.linspace(-K.T, K.T, grid_n)
    with csv_path.open("w") as fh:
        fh.write("t,s,re,im\n")
        for t in xs:
            for s in xs:
                v = K.eval(float(t), float(s))
                fh.write(f"{_fmt(t)},{_fmt(s)},{_fmt(v.real)},"
                         f"{_fmt(v.imag)}\n")
    json_path.write_text(json.dumps(_kernel_json(K), indent=1))
    return csv_path, json_path


def cmd_green(args):
    pf = _load(args.problem)
    P = pf.to_der_problem()
    bundle = solve_der(P, route_preference=args.route)
    stem = args.out or Path(args.problem).with_suffix("").name + "_kernel"
    csv_path, json_path = _write_kernel(bundle.G_der, args.grid, stem)
    print(f"route = {bundle.route}")
    print(f"kernel csv = {csv_path}")
    print(f"kernel json = {json_path}")
    return 0


def cmd_solve(args):
    pf = _load(args.problem)
    P = pf.to_der_problem()
    bundle = solve_der(P, route_preference=args.route)
    print(f"route = {bundle.route}")
    print(f"equation residual = "
          f"{_fmt(bundle.diagnostics['equation_residual'])}")
    print(f"boundary residual = "
          f"{_fmt(bundle.diagnostics['boundary_residual'])}")
    if args.at is not None:
        v = bundle.u.eval(args.at)
        print(f"u({_fmt(args.at)}) = {_fmt(v.real)}"
              + (f" + {_fmt(v.imag)}i" if abs(v.imag) > 1e-12 else ""))
    stem = args.out or Path(args.problem).with_suffix("").name + "_solution"
    path = Path(f"{stem}.csv")
    xs = np.linspace(-P.T, P.T, args.grid)
    with path.open("w") as fh:
        fh.write("t,re,im\n")
        for t in xs:
            v = bundle.u.eval(float(t))
            fh.write(f"{_fmt(t)},{_fmt(v.real)},{_fmt(v.imag)}\n")
    print(f"solution csv = {path}")
    return 0


def cmd_verify(args):
    pf = _load(args.problem)
    P = pf.to_der_problem()
    bundle = solve_der(P, route_preference="both")
    report = bundle.diagnostics["reduced_verify"]
    print(report)
    agreement = bundle.diagnostics.get("route_agreement")
    if agreement is not None:
        print(f"route agreement: pass (max discrepancy {agreement:.3e})")
    else:
        print("route agreement: n/a "
              f"({bundle.diagnostics.get('factored_error', 'single route')})")
    print(f"equation residual: {bundle.diagnostics['equation_residual']:.3e}")
    print(f"boundary residual: {bundle.diagnostics['boundary_residual']:.3e}")
    return 0 if report.passed else EXIT_VERIFYFAIL


def cmd_bench(args):
    pf = _load(args.problem)
    P = pf.to_der_problem()
    print(bench(P, repetitions=args.repetitions))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dergreen",
        description="Green's functions for differential equations with "
                    "reflection")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "reduce": (cmd_reduce, "print the companion and reduced operators"),
        "factor": (cmd_factor, "factor the reduced operator"),
        "decompose": (cmd_decompose, "decompose the boundary conditions"),
        "green": (cmd_green, "build and export the Green's function"),
        "solve": (cmd_solve, "solve the problem"),
        "verify": (cmd_verify, "run kernel property and route checks"),
        "bench": (cmd_bench, "time the direct vs factored routes"),
    }
    for name, (fn, help_) in specs.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("problem", help="problem file path")
        p.set_defaults(fn=fn)
        if name in ("green", "solve"):
            p.add_argument("--grid", type=int, default=41,
                           help="sampling grid size (default 41)")
            p.add_argument("--route", default="auto",
                           choices=["auto", "direct", "factored", "both"])
            p.add_argument("--out", default=None,
                           help="output file stem")
        if name == "solve":
            p.add_argument("--at", type=float, default=None,
                           help="print the solution at this point")
        if name == "bench":
            p.add_argument("--repetitions", type=int, default=3)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateReduction as exc:
        print(f"error: degenerate reduction: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NonUniqueBVP as exc:
        print(f"error: non-unique boundary problem: {exc}", file=sys.stderr)
        return EXIT_NONUNIQUE
    except (NotDecomposable, ComplexFactorizationSkipped) as exc:
        print(f"error: not decomposable: {exc}", file=sys.stderr)
        return EXIT_NOTDECOMPOSABLE
    except DergreenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
