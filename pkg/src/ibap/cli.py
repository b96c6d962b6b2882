"""Command line interface: ``ibap <subcommand> ...``.

Exit status is 0 on success, 2 when a requested construction is refused
(the system or collection lacks the property; the diagnostic report is still
written) and 1 on malformed input or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import os
import sys
import warnings

import numpy as np

from . import io
from .analysis import check_conditions
from .errors import InputError, RefusalError
from .fixtures import random_ibap_system, random_system
from .prob import (
    DiscreteProbabilitySpace,
    MeasureFamily,
    PartitionSigmaAlgebra,
    alternating_sets,
    bickel_alpha,
    bickel_solve,
    imp_check,
    imp_solve,
    imp_sweep,
    interval_reduction,
    joint_space,
    part_from_starting_points,
    tail_report,
    weighted_shift_check,
)
from .riesz import VectorFamily, ibap_from_families, riesz_bounds
from .solver import TargetTuple, solve_approx, solve_exact, solve_via_cond10
from .spectral import SpectralSpec, delta_lower_bounds, eigenspace_system, root_subspace_system
from .subspace import DEFAULT_TOL, Tolerance

ENV_TOL = "IBAP_TOL"


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- input helpers -------------------------------------------------------------

def _read(path: str, stdin) -> dict:
    if path == "-":
        data = stdin.buffer.read() if hasattr(stdin, "buffer") else stdin.read()
    else:
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return io.loads(data)


def _tolerance(args) -> Tolerance:
    raw = args.tol if args.tol is not None else os.environ.get(ENV_TOL)
    if raw is None:
        return DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"tolerance must be a number, got {raw!r}") from None
    if not value > 0:
        raise InputError(f"tolerance must be positive, got {raw!r}")
    return Tolerance(rel=value)


def _measure(doc) -> DiscreteProbabilitySpace:
    if "p" in doc:
        return DiscreteProbabilitySpace(io.parse_vector(doc["p"], "p"))
    m = io._require(doc, "measure")
    fam = MeasureFamily(str(io._require(m, "kind", "measure")), dict(m.get("params", {})),
                        m.get("truncation", "lump"))
    if fam.kind == "explicit":
        return fam.space()
    return fam.space(int(io._require(m, "N", "measure")))


def _algebras(doc, N: int) -> list[PartitionSigmaAlgebra]:
    if "partitions" in doc:
        return [PartitionSigmaAlgebra(b, N) for b in doc["partitions"]]
    if "labels" in doc:
        algs = [PartitionSigmaAlgebra.from_labels(lab) for lab in doc["labels"]]
        for k, a in enumerate(algs):
            if a.N != N:
                raise InputError(f"labels[{k}]: {a.N} entries for {N} atoms")
        return algs
    if "starting_points" in doc:
        return [part_from_starting_points(A, N) for A in doc["starting_points"]]
    if "alternating" in doc:
        return [part_from_starting_points(A, N) for A in alternating_sets(int(doc["alternating"]), N)]
    raise InputError("document: give one of 'partitions', 'labels', 'starting_points', 'alternating'")


def _xis(doc, N):
    xis = io._require(doc, "xis")
    out = [io.parse_vector(x, f"xis[{k}]") for k, x in enumerate(xis)]
    for k, x in enumerate(out):
        if x.shape[0] != N:
            raise InputError(f"xis[{k}]: {x.shape[0]} values for {N} atoms")
    return out


def _family_from_args(args) -> MeasureFamily:
    params = {}
    if args.kind == "geometric":
        params["q"] = args.q
    elif args.kind == "power":
        params["s"] = args.s
    else:
        raise InputError("--kind must be geometric or power")
    return MeasureFamily(args.kind, params, args.truncation)


# -- subcommands -----------------------------------------------------------------

def cmd_analyze(args, stdin):
    system = io.parse_system(_read(args.system, stdin), args.tolerance)
    report = check_conditions(system, args.tolerance)
    return 0, io.emit_report(report, witnesses=args.witnesses)


def cmd_solve(args, stdin):
    tol = args.tolerance
    system = io.parse_system(_read(args.system, stdin), tol)
    targets = TargetTuple(io.parse_targets(_read(args.targets, stdin)))
    try:
        if args.method == "exact":
            sol = solve_exact(system, targets, tol)
        elif args.method == "cond10":
            sol = solve_via_cond10(system, targets, tol)
        else:
            sol = solve_approx(system, targets, args.eps, tol)
    except RefusalError as exc:
        return 2, _refusal(exc, check_conditions(system, tol, witnesses=False))
    return 0, io.emit_solution(sol)


def _refusal(exc: RefusalError, report=None) -> dict:
    doc = {"format_version": io.FORMAT_VERSION, "status": "refused", "message": str(exc)}
    details = {k: io.emit_scalar(v) for k, v in exc.details.items()
               if isinstance(v, (int, float, np.floating, np.integer)) or v.__class__.__name__ == "Unbounded"}
    if details:
        doc["details"] = details
    if report is not None:
        doc["report"] = io.emit_report(report)
    return doc


def cmd_spectral(args, stdin):
    tol = args.tolerance
    doc = _read(args.spec, stdin)
    a = io.parse_matrix_rows(io._require(doc, "A"), "A")
    lambdas = [io.parse_scalar(l, "lambdas") for l in io._require(doc, "lambdas")]
    space = io.parse_space({"dim": a.shape[1], **({"weights": doc["weights"]} if "weights" in doc else {})})
    spec = SpectralSpec(a, lambdas, doc.get("mults"), space)
    decomp = root_subspace_system(spec, tol)
    system = decomp.system if any(m > 1 for m in spec.mults) else eigenspace_system(spec, tol)
    report = check_conditions(system, tol)
    cert = decomp.certificate
    out = {
        "format_version": io.FORMAT_VERSION,
        "system": io.emit_system(system),
        "report": io.emit_report(report),
        "delta_lower_bounds": [float(b) for b in delta_lower_bounds(spec)],
        "bezout": {
            "polys": [[io.emit_scalar(c) for c in p] for p in cert.polys],
            "residual": cert.residual,
            "exact": cert.exact,
        },
    }
    return 0, out


def cmd_riesz(args, stdin):
    tol = args.tolerance
    doc = _read(args.family, stdin)
    space = io.parse_space(doc)
    if "families" in doc:
        system = io.parse_system(doc, tol)
        fams = [VectorFamily(space, io.parse_columns(f, space.dim, f"families[{k}]"))
                for k, f in enumerate(doc["families"])]
        try:
            verdict = ibap_from_families(system, fams, tol)
        except RefusalError as exc:
            return 2, _refusal(exc)
        return 0, {
            "format_version": io.FORMAT_VERSION,
            "ibap": verdict.ibap,
            "epsilon": verdict.epsilon,
            "C": verdict.C,
            "c_lower_bound": verdict.lower_bound,
        }
    fam = VectorFamily(space, io.parse_columns(io._require(doc, "vectors"), space.dim, "vectors"))
    eps, cc = riesz_bounds(fam)
    return 0, {
        "format_version": io.FORMAT_VERSION,
        "epsilon": eps,
        "C": cc,
        "riesz": bool(eps > tol.threshold(cc)),
    }


def cmd_generate(args, stdin):
    rng = np.random.default_rng(args.seed)
    kw = {"dim": args.dim, "n": args.n}
    if args.ibap:
        system = random_ibap_system(rng, **kw)
    else:
        system = random_system(rng, **kw)
    doc = io.emit_system(system)
    doc["seed"] = args.seed
    return 0, doc


def cmd_prob_tails(args, stdin):
    space = _family_from_args(args).space(args.N)
    rep = tail_report(space, args.step)
    out = {
        "format_version": io.FORMAT_VERSION,
        "kind": args.kind,
        "N": rep.N,
        "truncation": args.truncation,
        "sup_ratio": rep.sup_ratio,
        "r": io.emit_vector(rep.r),
        "ratio_series": io.emit_vector(rep.ratio_series),
        "rk_over_pk": io.emit_vector(rep.rk_over_pk),
        "pk_ratio": io.emit_vector(rep.pk_ratio),
        "note": rep.note,
    }
    if rep.step is not None:
        out["step"] = rep.step
        out["step_sup"] = rep.step_sup
    return 0, out


def cmd_prob_shift(args, stdin):
    space = _family_from_args(args).space(args.N)
    d = weighted_shift_check(space, args.m)
    return 0, {"format_version": io.FORMAT_VERSION, **{k: getattr(d, k) for k in d.__dataclass_fields__}}


def cmd_prob_imp_check(args, stdin):
    doc = _read(args.input, stdin)
    space = _measure(doc)
    report = imp_check(space, _algebras(doc, space.N), args.tolerance)
    out = io.emit_report(report)
    out["imp"] = out["ibap"]
    out["N"] = space.N
    return 0, out


def cmd_prob_imp_solve(args, stdin):
    doc = _read(args.input, stdin)
    space = _measure(doc)
    algs = _algebras(doc, space.N)
    try:
        xi = imp_solve(space, algs, _xis(doc, space.N), args.tolerance)
    except RefusalError as exc:
        return 2, _refusal(exc, exc.details.get("report"))
    return 0, {"format_version": io.FORMAT_VERSION, "xi": io.emit_vector(xi)}


def cmd_prob_interval(args, stdin):
    doc = _read(args.input, stdin)
    pis = io._require(doc, "pis")
    masses = io.parse_vector(io._require(doc, "masses"), "masses")
    red = interval_reduction(pis, masses, float(doc.get("a", 0.0)), args.tolerance)
    out = {
        "format_version": io.FORMAT_VERSION,
        "points": list(red.points),
        "sets": red.sets,
        "imp": red.imp,
        "sup_ratio": tail_report(red.space).sup_ratio if red.space.N >= 2 else None,
    }
    if red.overlap is not None:
        i, j, c = red.overlap
        out["overlap"] = {"i": i, "j": j, "point": c}
        out["witness"] = io.emit_vector(red.witness)
    else:
        out["report"] = io.emit_report(red.report)
    return 0, out


def cmd_prob_bickel(args, stdin):
    doc = _read(args.input, stdin)
    if "joint" in doc:
        space, algs = joint_space(np.asarray(doc["joint"], dtype=float))
    else:
        space = _measure(doc)
        algs = _algebras(doc, space.N)
    alpha = bickel_alpha(space, algs)
    out = {"format_version": io.FORMAT_VERSION, "alpha": alpha, "N": space.N}
    if "xis" in doc:
        try:
            out["xi"] = io.emit_vector(bickel_solve(space, algs, _xis(doc, space.N)))
        except RefusalError as exc:
            ref = _refusal(exc)
            ref["alpha"] = alpha
            return 2, ref
    return 0, out


def cmd_prob_sweep(args, stdin):
    try:
        Ns = [int(x) for x in args.Ns.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--Ns must be a comma separated list of integers, got {args.Ns!r}") from None
    rows = imp_sweep(_family_from_args(args), Ns, args.n, args.tolerance)
    return 0, {
        "format_version": io.FORMAT_VERSION,
        "kind": args.kind,
        "truncation": args.truncation,
        "note": "truncated IBAP constants of the zero-mean marginal system; diagnostics only",
        "rows": [{"N": r.N, "c_N": r.c_N, "sup_ratio": r.sup_ratio, "imp": r.imp} for r in rows],
    }


# -- rendering ---------------------------------------------------------------

def _render_text(doc) -> str:
    lines = []

    def walk(prefix, value):
        if isinstance(value, dict):
            for k, v in value.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
            for k, v in enumerate(value):
                walk(f"{prefix}[{k}]", v)
        else:
            lines.append(f"{prefix}: {value}")

    walk("", doc)
    return "\n".join(lines) + "\n"


def _render_csv(doc) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "rows" in doc:
        w.writerow(["N", "c_N", "sup_ratio", "imp"])
        for r in doc["rows"]:
            w.writerow([r["N"], repr(r["c_N"]), repr(r["sup_ratio"]), r["imp"]])
    elif "ratio_series" in doc:
        w.writerow(["k", "r_k", "ratio", "rk_over_pk", "pk_ratio"])
        n = len(doc["r"])
        col = lambda name, k: repr(doc[name][k]) if k < len(doc[name]) else ""
        for k in range(n):
            w.writerow([k + 1, col("r", k), col("ratio_series", k), col("rk_over_pk", k), col("pk_ratio", k)])
    else:
        raise InputError("csv output is available for 'prob sweep' and 'prob tails' only")
    return buf.getvalue()


def render(doc, fmt: str) -> str:
    if fmt == "json":
        return io.dumps(doc)
    if fmt == "text":
        return _render_text(doc)
    return _render_csv(doc)


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", help=f"relative rank tolerance (default 1e-10, or ${ENV_TOL})")
    common.add_argument("--format", choices=("json", "text", "csv"), default="json")

    p = _Parser(prog="ibap", description="Inverse best approximation property toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common], help="evaluate the ten IBAP conditions")
    a.add_argument("system", help="system JSON file ('-' for stdin)")
    a.add_argument("--witnesses", action="store_true", help="include E_k, W0 and phi in the report")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("solve", parents=[common], help="solve P_k x = x_k")
    s.add_argument("system")
    s.add_argument("targets")
    s.add_argument("--method", choices=("exact", "approx", "cond10"), default="exact")
    s.add_argument("--eps", type=float, default=1e-8, help="residual target for --method approx")
    s.set_defaults(func=cmd_solve)

    sp = sub.add_parser("spectral", parents=[common], help="eigenspace / root subspace systems")
    sp.add_argument("spec", help="JSON {A (rows), lambdas, mults?, weights?}")
    sp.set_defaults(func=cmd_spectral)

    r = sub.add_parser("riesz", parents=[common], help="Riesz bounds of a vector family")
    r.add_argument("family", help="JSON {dim, weights?, vectors} or a system with 'families'")
    r.set_defaults(func=cmd_riesz)

    g = sub.add_parser("generate", parents=[common], help="seeded random system")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--dim", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--ibap", action="store_true", help="keep the sum of ranks within dim")
    g.set_defaults(func=cmd_generate)

    pr = sub.add_parser("prob", help="inverse marginal problems")
    psub = pr.add_subparsers(dest="prob_command", required=True, parser_class=_Parser)

    measure = _Parser(add_help=False)
    measure.add_argument("--kind", choices=("geometric", "power"), required=True)
    measure.add_argument("--q", type=float, default=0.5, help="geometric ratio")
    measure.add_argument("--s", type=float, default=2.0, help="power-law exponent")
    measure.add_argument("--truncation", choices=("lump", "renormalize"), default="lump")

    t = psub.add_parser("tails", parents=[common, measure], help="tail sums and ratios")
    t.add_argument("--N", type=int, required=True)
    t.add_argument("--step", type=int)
    t.set_defaults(func=cmd_prob_tails)

    sh = psub.add_parser("shift", parents=[common, measure], help="weighted shift identity and Riesz bounds")
    sh.add_argument("--N", type=int, required=True)
    sh.add_argument("--m", type=int, default=1, help="power of the shift whose norm is reported")
    sh.set_defaults(func=cmd_prob_shift)

    for name, func, helptext in (
        ("imp-check", cmd_prob_imp_check, "IMP verdict for partition algebras"),
        ("imp-solve", cmd_prob_imp_solve, "solve E(xi | F_k) = xi_k"),
        ("interval", cmd_prob_interval, "interval partitions reduced to starting points"),
        ("bickel", cmd_prob_bickel, "product-density constant alpha and explicit solution"),
    ):
        c = psub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("input", help="JSON input file ('-' for stdin)")
        c.set_defaults(func=func)

    sw = psub.add_parser("sweep", parents=[common, measure], help="c_N over truncations")
    sw.add_argument("--Ns", default="25,50,100,200")
    sw.add_argument("--n", type=int, default=2, help="number of alternating starting-point sets")
    sw.set_defaults(func=cmd_prob_sweep)
    return p


def run(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.tolerance = _tolerance(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            status, doc = args.func(args, stdin)
        text = render(doc, args.format)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return 1
    except InputError as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    stdout.write(text)
    if status == 2:
        stderr.write(f"refused: {doc.get('message', '')}\n")
    return status


def main(argv=None) -> int:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
