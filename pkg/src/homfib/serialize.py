"""JSON documents: manifold specifications in, certificates out.

Field names are fixed in ``docs/formats.md``.  Every number is a JSON
integer; floats and booleans in numeric positions are rejected, and each
error names the offending position (``$.diagram.lk[1][0]``).
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .engine import Exists, NotExists, ObstructionCertificate, Unknown, Verdict
from .linalg import AbelianGroupData, IntMatrix
from .linking import A, E0, E1, HeegaardGluingData, LinkingDecomposition, normalize
from .problem import BlockProblem, CandidateSolution, FiberType
from .surgery import SurgeryComponent, SurgeryDiagram

SCHEMA_VERSION = 1

Spec = LinkingDecomposition | SurgeryDiagram | HeegaardGluingData


class DocumentError(ValueError):
    """Malformed document; the message starts with the JSON path of the problem."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# ----------------------------------------------------------------------
# strict field readers

def _obj(x, path, required=(), optional=()):
    if not isinstance(x, dict):
        raise DocumentError(path, f"expected an object, got {type(x).__name__}")
    unknown = set(x) - set(required) - set(optional)
    if unknown:
        raise DocumentError(path, f"unknown field(s) {sorted(unknown)}")
    for k in required:
        if k not in x:
            raise DocumentError(path, f"missing field {k!r}")
    return x


def _int(x, path, lo=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise DocumentError(path, f"expected an integer, got {json.dumps(x)}")
    if lo is not None and x < lo:
        raise DocumentError(path, f"expected an integer >= {lo}, got {x}")
    return x


def _list(x, path):
    if not isinstance(x, list):
        raise DocumentError(path, f"expected a list, got {type(x).__name__}")
    return x


def _matrix(x, path, ncols=None) -> IntMatrix:
    rows = _list(x, path)
    out = []
    for i, r in enumerate(rows):
        r = _list(r, f"{path}[{i}]")
        out.append([_int(v, f"{path}[{i}][{j}]") for j, v in enumerate(r)])
        if ncols is None:
            ncols = len(r)
        elif len(r) != ncols:
            raise DocumentError(f"{path}[{i}]", f"row has {len(r)} entries, expected {ncols}")
    return IntMatrix.from_rows(out, ncols=ncols or 0)


def _wrap(path, fn, *args):
    """Run a constructor, re-raising its validation error at ``path``."""
    try:
        return fn(*args)
    except DocumentError:
        raise
    except ValueError as e:
        raise DocumentError(path, str(e)) from None


def _rows(M: IntMatrix) -> list[list[int]]:
    return [list(r) for r in M.rows()]


# ----------------------------------------------------------------------
# specification documents

def _term_from(x, path):
    x = _obj(x, path, required=("kind",), optional=("p", "q", "k"))
    kind = x["kind"]
    if kind == "A":
        _obj(x, path, required=("kind", "p", "q"))
        t = A(_int(x["p"], f"{path}.p", 1), _int(x["q"], f"{path}.q"))
    elif kind in ("E0", "E1"):
        _obj(x, path, required=("kind", "k"))
        t = (E0 if kind == "E0" else E1)(_int(x["k"], f"{path}.k", 0))
    else:
        raise DocumentError(f"{path}.kind", f"expected 'A', 'E0' or 'E1', got {json.dumps(kind)}")
    _wrap(path, t.validate)
    return t


def spec_from_document(doc) -> Spec:
    root = _obj(doc, "$", required=("schema_version",), optional=("decomposition", "diagram", "heegaard"))
    if _int(root["schema_version"], "$.schema_version") != SCHEMA_VERSION:
        raise DocumentError("$.schema_version", f"unsupported version {root['schema_version']}, expected {SCHEMA_VERSION}")
    present = [k for k in ("decomposition", "diagram", "heegaard") if k in root]
    if len(present) != 1:
        raise DocumentError("$", f"exactly one of decomposition, diagram, heegaard is required, got {present}")
    kind = present[0]
    body = root[kind]
    path = f"$.{kind}"
    if kind == "decomposition":
        body = _obj(body, path, required=("free_rank", "terms"))
        r = _int(body["free_rank"], f"{path}.free_rank", 0)
        terms = [_term_from(t, f"{path}.terms[{i}]") for i, t in enumerate(_list(body["terms"], f"{path}.terms"))]
        return normalize(LinkingDecomposition(r, tuple(terms)))
    if kind == "diagram":
        body = _obj(body, path, required=("components",), optional=("lk",))
        comps = []
        for i, c in enumerate(_list(body["components"], f"{path}.components")):
            cp = f"{path}.components[{i}]"
            c = _obj(c, cp, required=("p", "q"))
            comps.append(_wrap(cp, SurgeryComponent, _int(c["p"], f"{cp}.p"), _int(c["q"], f"{cp}.q")))
        m = len(comps)
        lk = _matrix(body["lk"], f"{path}.lk", m) if "lk" in body else IntMatrix.zeros(m)
        if lk.nrows != m:
            raise DocumentError(f"{path}.lk", f"expected {m} rows, got {lk.nrows}")
        return _wrap(path, SurgeryDiagram, tuple(comps), tuple(map(tuple, lk.rows())))
    body = _obj(body, path, required=("A", "B"))
    Am, Bm = _matrix(body["A"], f"{path}.A"), _matrix(body["B"], f"{path}.B")
    return _wrap(path, HeegaardGluingData, Am, Bm)


def spec_to_document(spec: Spec) -> dict:
    if isinstance(spec, LinkingDecomposition):
        d = normalize(spec)
        terms = [{"kind": "A", "p": t.p, "q": t.q} if isinstance(t, A) else {"kind": t.kind, "k": t.k}
                 for t in d.terms]
        return {"schema_version": SCHEMA_VERSION, "decomposition": {"free_rank": d.free_rank, "terms": terms}}
    if isinstance(spec, SurgeryDiagram):
        return {"schema_version": SCHEMA_VERSION,
                "diagram": {"components": [{"p": c.p, "q": c.q} for c in spec.components],
                            "lk": [list(r) for r in spec.lk]}}
    if isinstance(spec, HeegaardGluingData):
        return {"schema_version": SCHEMA_VERSION, "heegaard": {"A": _rows(spec.A), "B": _rows(spec.B)}}
    raise TypeError(f"cannot serialise {type(spec).__name__}")


def load_spec(path) -> Spec:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"line {e.lineno} column {e.colno}", e.msg) from None
    return spec_from_document(doc)


def dumps(doc) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def record(doc) -> str:
    """One line-delimited record."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# ----------------------------------------------------------------------
# problems, verdicts, certificates

def group_to_document(H: AbelianGroupData) -> dict:
    return {"free_rank": H.free_rank, "invariant_factors": list(H.invariant_factors)}


def problem_to_document(p: BlockProblem) -> dict:
    return {"M0": _rows(p.M0), "W": _rows(p.W), "fiber": {"g": p.fiber.g, "n": p.fiber.n},
            "provenance": p.provenance, "m": p.m}


def problem_from_document(x, path="$.problem") -> BlockProblem:
    x = _obj(x, path, required=("M0", "W", "fiber", "provenance", "m"))
    m = _int(x["m"], f"{path}.m", 0)
    M0 = _matrix(x["M0"], f"{path}.M0", m)
    W = _matrix(x["W"], f"{path}.W", m)
    if M0.nrows != m or W.nrows != m:
        raise DocumentError(path, f"M0 and W must be {m}x{m}")
    f = _obj(x["fiber"], f"{path}.fiber", required=("g", "n"))
    fiber = _wrap(f"{path}.fiber", FiberType, _int(f["g"], f"{path}.fiber.g", 0), _int(f["n"], f"{path}.fiber.n", 0))
    return _wrap(path, BlockProblem, M0, W, fiber, x["provenance"])


def verdict_to_document(v: Verdict) -> dict:
    if isinstance(v, Exists):
        return {"kind": "exists", "det": v.det, "X": _rows(v.solution.X), "Y": _rows(v.solution.Y)}
    if isinstance(v, NotExists):
        c = v.certificate
        return {"kind": "not-exists", "certificate": {"kind": c.kind, "modulus": c.modulus,
                                                     "attainable": list(c.attainable), "det_w": c.det_w}}
    if isinstance(v, Unknown):
        return {"kind": "unknown", "entry_bound": v.entry_bound, "moduli": list(v.moduli),
                "examined": v.examined, "budget_exhausted": v.budget_exhausted, "shell": v.shell}
    raise TypeError(f"not a verdict: {v!r}")


def verdict_from_document(x, problem: BlockProblem, path="$.verdict") -> Verdict:
    x = _obj(x, path, required=("kind",), optional=("det", "X", "Y", "certificate", "entry_bound", "moduli",
                                                  "examined", "budget_exhausted", "shell"))
    kind = x["kind"]
    if kind == "exists":
        _obj(x, path, required=("kind", "det", "X", "Y"))
        X = _matrix(x["X"], f"{path}.X", problem.d)
        Y = _matrix(x["Y"], f"{path}.Y", problem.d)
        if X.nrows == 0:
            X = IntMatrix.zeros(0, problem.d)
        sol = _wrap(path, CandidateSolution, X, Y)
        return Exists(sol, _int(x["det"], f"{path}.det"))
    if kind == "not-exists":
        _obj(x, path, required=("kind", "certificate"))
        cp = f"{path}.certificate"
        c = _obj(x["certificate"], cp, required=("kind", "modulus", "attainable", "det_w"))
        att = [_int(r, f"{cp}.attainable[{i}]", 0) for i, r in enumerate(_list(c["attainable"], f"{cp}.attainable"))]
        dw = None if c["det_w"] is None else _int(c["det_w"], f"{cp}.det_w")
        return NotExists(_wrap(cp, ObstructionCertificate, c["kind"], _int(c["modulus"], f"{cp}.modulus", 2),
                               tuple(att), dw))
    if kind == "unknown":
        _obj(x, path, required=("kind", "entry_bound", "moduli", "examined", "budget_exhausted", "shell"))
        if not isinstance(x["budget_exhausted"], bool):
            raise DocumentError(f"{path}.budget_exhausted", "expected true or false")
        shell = None if x["shell"] is None else _int(x["shell"], f"{path}.shell")
        return Unknown(_int(x["entry_bound"], f"{path}.entry_bound", 0),
                       tuple(_int(q, f"{path}.moduli[{i}]", 2) for i, q in enumerate(_list(x["moduli"], f"{path}.moduli"))),
                       _int(x["examined"], f"{path}.examined", 0), x["budget_exhausted"], shell)
    raise DocumentError(f"{path}.kind", f"unknown verdict kind {json.dumps(kind)}")


def certificate_document(problem: BlockProblem, verdict: Verdict, *, elapsed_ms: int = 0,
                         source: Spec | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "fingerprint": problem.fingerprint(),
        "problem": problem_to_document(problem),
        "verdict": verdict_to_document(verdict),
        "tool_version": __version__,
        "timing": {"created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
                   "elapsed_ms": int(elapsed_ms)},
    }
    if source is not None:
        doc["source"] = spec_to_document(source)
    return doc


class StaleCertificate(ValueError):
    pass


def read_certificate(doc) -> tuple[BlockProblem, Verdict]:
    """Parse a certificate; raises :class:`StaleCertificate` if the fingerprint does not match."""
    root = _obj(doc, "$", required=("schema_version", "fingerprint", "problem", "verdict", "tool_version", "timing"),
                optional=("source",))
    if _int(root["schema_version"], "$.schema_version") != SCHEMA_VERSION:
        raise DocumentError("$.schema_version", f"unsupported version {root['schema_version']}")
    problem = problem_from_document(root["problem"])
    if problem.fingerprint() != root["fingerprint"]:
        raise StaleCertificate(
            f"stale certificate: fingerprint {root['fingerprint'][:16]}... does not match the embedded problem "
            f"({problem.fingerprint()[:16]}...)")
    return problem, verdict_from_document(root["verdict"], problem)


def write_atomic(path, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def certificate_path(cert_dir, problem: BlockProblem, verdict: Verdict) -> Path:
    return Path(cert_dir) / f"{problem.fingerprint()[:16]}-{verdict.kind}.json"


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    @property
    def ms(self) -> int:
        return int((time.perf_counter() - self.start) * 1000)
