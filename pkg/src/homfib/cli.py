"""``homfib`` command line.

Exit codes: 0 exists / valid / exact, 1 does not exist / invalid,
2 unknown (search bound or budget reached), 3 capacity exceeded,
64 unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from math import ceil

from . import __version__
from .engine import (DiskCaseError, Exists, NotExists, ObstructionInapplicable, ReductionError,
                     attainable_residues, decide, disk_case, modular_obstruction, problem_from_decomposition,
                     problem_from_diagram, square_block_obstruction, stabilization_reduce)
from .hc import hc_compute
from .linalg import AbelianGroupData
from .linking import (E0, E1, CapacityError, HeegaardGluingData, LinkingDecomposition, LinkingGram,
                      LinkingValidationError, gram_of_decomposition, homology_of, linking_form_from_heegaard,
                      match_generator)
from .problem import FiberType, ProblemValidationError, evaluate
from .serialize import (DocumentError, StaleCertificate, certificate_document, certificate_path, dumps,
                        group_to_document, load_spec, read_certificate, record, verdict_to_document,
                        write_atomic, Stopwatch)
from .surgery import SurgeryDiagram, connected_sum, first_homology, representative_diagram, unknot

EXIT = {"exists": 0, "not-exists": 1, "unknown": 2}
EXIT_CAPACITY = 3
EXIT_USAGE = 64

log = logging.getLogger("homfib")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# ----------------------------------------------------------------------
# helpers

def _fiber(text: str) -> FiberType:
    try:
        g, n = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected g,n (two integers), got {text!r}") from None
    try:
        return FiberType(g, n)
    except ProblemValidationError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _homology(spec) -> AbelianGroupData:
    if isinstance(spec, SurgeryDiagram):
        return first_homology(spec)
    if isinstance(spec, HeegaardGluingData):
        return spec.homology()
    return homology_of(spec)


def _as_manifold(spec, order_bound: int):
    """Decomposition or diagram; Heegaard data is matched to a generator decomposition first."""
    if not isinstance(spec, HeegaardGluingData):
        return spec
    H = spec.homology()
    if H.free_rank:
        raise UsageError("Heegaard input must describe a rational homology sphere (det B != 0)")
    d = match_generator(linking_form_from_heegaard(spec), 0, order_bound)
    if d is None:
        raise UsageError("no generator decomposition matched the Heegaard linking form")
    return d


def _problem(spec, fiber: FiberType):
    if isinstance(spec, SurgeryDiagram):
        return problem_from_diagram(spec, fiber)
    return problem_from_decomposition(spec, fiber)


def _fmt_matrix(M) -> str:
    rows = M.rows()
    if not rows:
        return "[]"
    return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in rows) + "]"


def _fmt_gram(g: LinkingGram) -> list[list[str]]:
    return [[str(x) for x in row] for row in g.gram]


def _emit(args, doc: dict, human: str):
    if args.format == "records":
        print(record(doc))
    else:
        print(human)


def _verdict_text(v) -> str:
    if isinstance(v, Exists):
        return f"Exists (det {v.det})\n  X = {_fmt_matrix(v.solution.X)}\n  Y = {_fmt_matrix(v.solution.Y)}"
    if isinstance(v, NotExists):
        c = v.certificate
        return (f"NotExists: {c.kind} obstruction mod {c.modulus}; attainable residues {list(c.attainable)}"
                + (f" (det W = {c.det_w} mod {c.modulus})" if c.det_w is not None else ""))
    tail = "budget exhausted" if v.budget_exhausted else f"all entries up to {v.entry_bound} tried"
    return f"Unknown: no solution found ({v.examined} candidates examined, {tail}, pruning moduli {list(v.moduli)})"


def _write_cert(args, problem, verdict, watch, source):
    if args.cert_dir in (None, "-"):
        return None
    path = certificate_path(args.cert_dir, problem, verdict)
    write_atomic(path, dumps(certificate_document(problem, verdict, elapsed_ms=watch.ms, source=source)))
    return path


# ----------------------------------------------------------------------
# commands

def cmd_homology(args) -> int:
    spec = load_spec(args.spec)
    H = _homology(spec)
    _emit(args, {"command": "homology", "homology": group_to_document(H), "text": str(H)}, str(H))
    return 0


def cmd_linking_form(args) -> int:
    spec = load_spec(args.spec)
    if isinstance(spec, HeegaardGluingData):
        gram = linking_form_from_heegaard(spec)
        free = spec.homology().free_rank
    elif isinstance(spec, LinkingDecomposition):
        gram = gram_of_decomposition(spec)
        free = spec.free_rank
    else:
        raise UsageError("linking-form reads heegaard or decomposition documents")
    match = match_generator(gram, free, args.order_bound)
    doc = {"command": "linking-form", "orders": list(gram.orders), "gram": _fmt_gram(gram),
           "match": None if match is None else str(match)}
    lines = [f"generator orders: {list(gram.orders)}", "gram (mod 1):"]
    lines += ["  " + "  ".join(row) for row in _fmt_gram(gram)] or ["  (empty)"]
    lines.append(f"equivalent to: {match}" if match is not None else "no generator match found")
    _emit(args, doc, "\n".join(lines))
    return 0


def cmd_decide(args) -> int:
    watch = Stopwatch()
    spec = load_spec(args.spec)
    if args.fiber.is_disk:
        if not args.disk:
            raise UsageError("fiber (0,0) is the disk case; pass --disk to decide it")
        H = _homology(spec)
        ok = disk_case(H)
        text = "yes: integral homology sphere" if ok else f"no: H1 = {H} is not trivial"
        _emit(args, {"command": "decide", "fiber": [0, 0], "disk": True, "holds": ok,
                     "homology": group_to_document(H)}, text)
        return 0 if ok else 1
    manifold = _as_manifold(spec, args.order_bound)
    problem = _problem(manifold, args.fiber)
    verdict = decide(problem, args.bound, args.budget, enumeration_budget=args.enumeration_budget,
                     workers=args.workers)
    path = _write_cert(args, problem, verdict, watch, spec)
    doc = {"command": "decide", "fingerprint": problem.fingerprint(), "fiber": [args.fiber.g, args.fiber.n],
           "verdict": verdict_to_document(verdict), "certificate": None if path is None else str(path)}
    text = _verdict_text(verdict) + (f"\ncertificate: {path}" if path else "")
    _emit(args, doc, text)
    return EXIT[verdict.kind]


def cmd_hc(args) -> int:
    spec = _as_manifold(load_spec(args.spec), args.order_bound)
    b = hc_compute(spec, args.bound, args.budget, max_genus=args.max_genus,
                   enumeration_budget=args.enumeration_budget, workers=args.workers)
    evidence = [{"kind": e.kind, "genus": e.genus, "detail": e.detail} for e in b.evidence]
    doc = {"command": "hc", "lower": b.lower, "upper": b.upper, "exact": b.exact, "evidence": evidence}
    lines = [str(b)] + [f"  [{e['kind']}] g={e['genus']}: {e['detail']}" for e in evidence]
    _emit(args, doc, "\n".join(lines))
    return 0 if b.exact is not None else 2


def cmd_obstruct(args) -> int:
    watch = Stopwatch()
    spec = load_spec(args.spec)
    problem = _problem(_as_manifold(spec, args.order_bound), args.fiber)
    q = args.modulus
    out = {"command": "obstruct", "modulus": q, "rule": args.rule, "fingerprint": problem.fingerprint()}
    if args.rule == "square":
        try:
            cert = square_block_obstruction(problem, q)
        except ObstructionInapplicable as e:
            _emit(args, dict(out, applicable=False, reason=str(e)), f"square-block rule inapplicable: {e}")
            return 2
        att = None
    else:
        att = sorted(attainable_residues(problem, q, args.enumeration_budget))
        cert = modular_obstruction(problem, q, args.enumeration_budget)
        out["attainable"] = att
    if cert is None:
        text = f"no obstruction mod {q}" + (f": attainable residues {att}" if att is not None else "")
        _emit(args, dict(out, certificate=None), text)
        return 2
    verdict = NotExists(cert)
    path = _write_cert(args, problem, verdict, watch, spec)
    _emit(args, dict(out, verdict=verdict_to_document(verdict), certificate=None if path is None else str(path)),
          _verdict_text(verdict) + (f"\ncertificate: {path}" if path else ""))
    return 1


def cmd_verify(args) -> int:
    try:
        doc = json.loads(Path(args.certificate).read_text())
    except json.JSONDecodeError as e:
        raise DocumentError(f"line {e.lineno} column {e.colno}", e.msg) from None
    try:
        problem, verdict = read_certificate(doc)
    except StaleCertificate as e:
        _emit(args, {"command": "verify", "valid": False, "reason": "stale"}, str(e))
        return 1
    except DocumentError as e:
        # a tampered payload can break the certificate's own invariants
        _emit(args, {"command": "verify", "valid": False, "reason": str(e)}, f"invalid: {e}")
        return 1
    ok = verdict.recheck(problem, args.enumeration_budget) if isinstance(verdict, NotExists) else verdict.recheck(problem)
    _emit(args, {"command": "verify", "valid": ok, "kind": verdict.kind, "fingerprint": problem.fingerprint()},
          f"{'valid' if ok else 'invalid'}: {verdict.kind} certificate for {problem.fingerprint()[:16]}")
    return 0 if ok else 1


def cmd_reduce(args) -> int:
    watch = Stopwatch()
    spec = load_spec(args.spec)
    m = _as_manifold(spec, args.order_bound)
    D = m if isinstance(m, SurgeryDiagram) else representative_diagram(m)
    stabilized = connected_sum(unknot(0, 1), D)
    big = problem_from_diagram(stabilized, args.fiber)
    verdict = decide(big, args.bound, args.budget, workers=args.workers)
    if not isinstance(verdict, Exists):
        _emit(args, {"command": "reduce", "stabilized": verdict_to_document(verdict)},
              "no solution for the stabilized diagram:\n" + _verdict_text(verdict))
        return EXIT[verdict.kind]
    reduced, sol = stabilization_reduce(big, verdict.solution)
    rv = Exists(sol, evaluate(reduced, sol))
    path = _write_cert(args, reduced, rv, watch, spec)
    doc = {"command": "reduce", "stabilized": verdict_to_document(verdict),
           "reduced_fiber": [reduced.fiber.g, reduced.fiber.n], "reduced": verdict_to_document(rv),
           "certificate": None if path is None else str(path)}
    text = (f"(S2xS1)#M, fiber ({args.fiber.g},{args.fiber.n}): " + _verdict_text(verdict)
            + f"\nM, fiber ({reduced.fiber.g},{reduced.fiber.n}): " + _verdict_text(rv)
            + (f"\ncertificate: {path}" if path else ""))
    _emit(args, doc, text)
    return 0 if abs(rv.det) == 1 else 1


def expected_hc(term, r: int) -> int:
    """Closed forms for the grid (E0(k), E1(k) with r copies of S2xS1)."""
    if isinstance(term, E0) and term.k == 2 and r == 0:
        return 2
    if isinstance(term, E1) and term.k >= 3:
        return r // 2 + 2
    return ceil(r / 2) + 1


def cmd_table(args) -> int:
    terms = [E0(k) for k in args.e0] + [E1(k) for k in args.e1]
    rows, ok = [], True
    for t in terms:
        for r in range(args.max_r + 1):
            b = hc_compute(LinkingDecomposition(r, (t,)), args.bound, args.budget, workers=args.workers)
            exp = expected_hc(t, r)
            good = b.exact == exp
            ok &= good
            witnessed = any(e.kind == "exists" for e in b.evidence)
            rows.append({"command": "table", "term": f"{t.kind}({t.k})", "r": r, "hc": b.exact,
                         "lower": b.lower, "upper": b.upper, "expected": exp, "match": good,
                         "witnessed": witnessed})
    if args.format == "records":
        for row in rows:
            print(record(row))
    else:
        print(f"{'summand':<8} {'r':>2} {'hc':>4} {'expected':>8}  witness  match")
        for row in rows:
            hc = row["hc"] if row["hc"] is not None else f"{row['lower']}..{row['upper']}"
            print(f"{row['term']:<8} {row['r']:>2} {hc!s:>4} {row['expected']:>8}  "
                  f"{'yes' if row['witnessed'] else 'no':<7}  {'ok' if row['match'] else 'MISMATCH'}")
    return 0 if ok else 2


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="homfib", description="Decide existence of homologically fibered links/knots.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("human", "records"), default="human")
    common.add_argument("--order-bound", type=_nonneg, default=4096,
                        help="largest group order for linking-form matching")
    search = _Parser(add_help=False)
    search.add_argument("--bound", type=_nonneg, default=4, help="entry bound for the search")
    search.add_argument("--budget", type=_nonneg, default=10_000_000, help="candidate budget for the search")
    search.add_argument("--enumeration-budget", type=_nonneg, default=10**8,
                        help="largest q^v for full modular enumeration")
    search.add_argument("--workers", type=_nonneg, default=1)
    certs = _Parser(add_help=False)
    certs.add_argument("--cert-dir", default="certificates", help="directory for certificate files, or - for none (default: %(default)s)")

    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("homology", parents=[common], help="first homology of a specification")
    s.add_argument("spec")
    s.set_defaults(func=cmd_homology)

    s = sub.add_parser("linking-form", parents=[common], help="linking form and matching generator")
    s.add_argument("spec")
    s.set_defaults(func=cmd_linking_form)

    s = sub.add_parser("decide", parents=[common, search, certs], help="decide one fiber type")
    s.add_argument("spec")
    s.add_argument("--fiber", type=_fiber, required=True, help="g,n for the fiber of genus g with n+1 boundaries")
    s.add_argument("--disk", action="store_true", help="allow fiber 0,0 (integral homology sphere test)")
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("hc", parents=[common, search], help="bounds or exact value of hc")
    s.add_argument("spec")
    s.add_argument("--max-genus", type=_nonneg, default=None)
    s.set_defaults(func=cmd_hc)

    s = sub.add_parser("obstruct", parents=[common, search, certs], help="modular obstruction for one modulus")
    s.add_argument("spec")
    s.add_argument("--fiber", type=_fiber, required=True)
    s.add_argument("--modulus", type=_nonneg, default=8)
    s.add_argument("--rule", choices=("full", "square"), default="full")
    s.set_defaults(func=cmd_obstruct)

    s = sub.add_parser("verify", parents=[common, search], help="re-check a certificate file")
    s.add_argument("certificate")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("reduce", parents=[common, search, certs],
                       help="solve (S2xS1)#M, then remove the S2xS1 summand from the solution")
    s.add_argument("spec")
    s.add_argument("--fiber", type=_fiber, default=FiberType(1, 0), help="fiber for (S2xS1)#M")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("table", parents=[common, search], help="reproduce the hc grid")
    s.add_argument("--max-r", type=_nonneg, default=3)
    s.add_argument("--e0", type=int, nargs="*", default=[1, 2, 3, 4])
    s.add_argument("--e1", type=int, nargs="*", default=[2, 3])
    s.set_defaults(func=cmd_table)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "modulus", 8) < 2:
        print("homfib: error: --modulus must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (DocumentError, UsageError, DiskCaseError, LinkingValidationError, ProblemValidationError,
            ReductionError) as e:
        print(f"homfib: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"homfib: error: {e.filename}: no such file", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as e:
        print(f"homfib: capacity exceeded: {e}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
