"""JSON interchange for systems, targets, solutions and reports.

Vectors are lists of scalars; a matrix is a list of its *columns*.  Real
scalars may be JSON numbers or decimal strings; complex scalars are strings
such as ``"1.5-2j"``.  The value ``+inf`` (for example the inclination of a
zero subspace) is written as the string ``"inf"``.  Every document carries a
``format_version``.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .analysis import ConditionReport, SubspaceSystem
from .errors import InputError
from .subspace import INF, InnerProduct, Subspace, orthonormalize

FORMAT_VERSION = 1


def loads(text: str | bytes):
    """Parse JSON, reporting syntax errors with their byte offset."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"input is not UTF-8 (byte offset {exc.start})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise InputError(f"malformed JSON at byte offset {offset}: {exc.msg}") from None


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


# -- scalars -----------------------------------------------------------------

def parse_scalar(v, where: str = "value"):
    if isinstance(v, bool) or v is None:
        raise InputError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        x = float(v)
    elif isinstance(v, str):
        s = v.strip()
        if s in ("inf", "+inf"):
            return INF
        try:
            x = float(s)
        except ValueError:
            try:
                z = complex(s.replace("i", "j") if "j" not in s else s)
            except ValueError:
                raise InputError(f"{where}: cannot parse {v!r} as a number") from None
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise InputError(f"{where}: non-finite value {v!r}")
            return z
    else:
        raise InputError(f"{where}: expected a number, got {type(v).__name__}")
    if not math.isfinite(x):
        raise InputError(f"{where}: non-finite value {v!r}")
    return x


def emit_scalar(x):
    if x is INF or (isinstance(x, float) and math.isinf(x) and x > 0):
        return "inf"
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    z = complex(x)
    if z.imag == 0 and not isinstance(x, (complex, np.complexfloating)):
        return float(z.real)
    return repr(z).strip("()")


def parse_vector(v, where: str = "vector") -> np.ndarray:
    if not isinstance(v, list):
        raise InputError(f"{where}: expected a list")
    vals = [parse_scalar(x, f"{where}[{k}]") for k, x in enumerate(v)]
    if any(x is INF for x in vals):
        raise InputError(f"{where}: infinite entries are not allowed")
    if any(isinstance(x, complex) for x in vals):
        return np.array(vals, dtype=complex)
    return np.array(vals, dtype=float)


def emit_vector(v) -> list:
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return [repr(complex(z)).strip("()") for z in v]
    return [float(x) for x in v]


def parse_columns(cols, rows: int, where: str) -> np.ndarray:
    if isinstance(cols, dict):
        cols = cols.get("columns")
    if not isinstance(cols, list):
        raise InputError(f"{where}: expected a list of columns")
    vecs = [parse_vector(c, f"{where}[{k}]") for k, c in enumerate(cols)]
    for k, c in enumerate(vecs):
        if c.shape[0] != rows:
            raise InputError(f"{where}[{k}]: column has {c.shape[0]} entries, dim is {rows}")
    if not vecs:
        return np.zeros((rows, 0))
    dtype = complex if any(np.iscomplexobj(c) for c in vecs) else float
    return np.column_stack(vecs).astype(dtype)


def emit_columns(m) -> list:
    m = np.asarray(m)
    return [emit_vector(m[:, k]) for k in range(m.shape[1])]


def parse_matrix_rows(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise InputError(f"{where}: expected a nonempty list of rows")
    vecs = [parse_vector(r, f"{where}[{k}]") for k, r in enumerate(rows)]
    if len({v.shape[0] for v in vecs}) != 1:
        raise InputError(f"{where}: rows have different lengths")
    dtype = complex if any(np.iscomplexobj(v) for v in vecs) else float
    return np.vstack(vecs).astype(dtype)


def emit_matrix_rows(m) -> list:
    return [emit_vector(r) for r in np.asarray(m)]


# -- composite documents -----------------------------------------------------

def _require(doc, key, where="document"):
    if not isinstance(doc, dict):
        raise InputError(f"{where}: expected a JSON object")
    if key not in doc:
        raise InputError(f"{where}: missing field '{key}'")
    return doc[key]


def parse_space(doc) -> InnerProduct:
    dim = _require(doc, "dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise InputError(f"dim: expected a positive integer, got {dim!r}")
    weights = doc.get("weights")
    if weights is not None:
        w = parse_vector(weights, "weights")
        if np.iscomplexobj(w):
            raise InputError("weights: must be real")
        if w.shape[0] != dim:
            raise InputError(f"weights: expected {dim} entries, got {w.shape[0]}")
        if np.any(w <= 0):
            raise InputError("weights: must be strictly positive")
        return InnerProduct(dim, w)
    return InnerProduct(dim)


def emit_space(space: InnerProduct) -> dict:
    out = {"dim": space.dim}
    if not space.is_identity:
        out["weights"] = emit_vector(space.weights)
    return out


def parse_system(doc, tol=None) -> SubspaceSystem:
    space = parse_space(doc)
    subs = _require(doc, "subspaces")
    if not isinstance(subs, list) or not subs:
        raise InputError("subspaces: expected a nonempty list")
    out = []
    for k, s in enumerate(subs):
        cols = parse_columns(s, space.dim, f"subspaces[{k}]")
        out.append(orthonormalize(cols, space) if tol is None else orthonormalize(cols, space, tol))
    return SubspaceSystem(out, space)


def emit_system(system: SubspaceSystem) -> dict:
    doc = {"format_version": FORMAT_VERSION}
    doc.update(emit_space(system.space))
    doc["subspaces"] = [emit_columns(s.basis) for s in system]
    return doc


def parse_targets(doc) -> list:
    coords = _require(doc, "coords", "targets")
    if not isinstance(coords, list):
        raise InputError("coords: expected a list of vectors")
    return [parse_vector(c, f"coords[{k}]") for k, c in enumerate(coords)]


def emit_solution(sol) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "x": emit_vector(sol.x),
        "residuals": [float(r) for r in sol.residuals],
        "norm": float(sol.norm),
    }
    for key in ("lam", "iterations", "c", "lambda_min_G"):
        if key in sol.info:
            doc[key] = emit_scalar(sol.info[key])
    return doc


def emit_report(report: ConditionReport, witnesses: bool = False) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "dim": report.dim,
        "n": report.n,
        "ranks": list(report.ranks),
        "ibap": bool(report.ibap),
        "agree": bool(report.agree),
        "c": emit_scalar(report.c),
        "lambda_min_G": emit_scalar(report.lambda_min_G),
        "li_dim_gap": int(report.li_dim_gap),
        "inclinations": [emit_scalar(d) for d in report.inclinations],
        "cond9_dim": int(report.cond9_dim),
        "cond10_dims": [int(d) for d in report.cond10_dims],
        "verdicts": {str(k): bool(v) for k, v in zip(range(1, 11), report.verdicts)},
        "margins": {
            str(k): None if m is None else {"value": emit_scalar(m[0]), "threshold": emit_scalar(m[1])}
            for k, m in sorted(report.margins.items())
        },
        "band": list(report.band),
        "notes": list(report.notes),
    }
    if witnesses and report.witnesses is not None:
        w = report.witnesses
        doc["witnesses"] = {
            "oblique_projections": [emit_matrix_rows(e) for e in w.oblique_projections],
            "metric": emit_matrix_rows(w.metric),
            "phi": emit_matrix_rows(w.phi),
            "block_ranks": list(w.block_ranks),
            "lower": w.lower,
            "upper": w.upper,
            "residuals": dict(w.residuals),
        }
    return doc


def parse_report(doc) -> ConditionReport:
    """Inverse of :func:`emit_report` (witnesses are not restored)."""
    num = lambda v, where: parse_scalar(v, where)
    try:
        margins = {}
        for k, m in doc["margins"].items():
            margins[int(k)] = None if m is None else (num(m["value"], "margin"), num(m["threshold"], "margin"))
        verdicts = tuple(bool(doc["verdicts"][str(k)]) for k in range(1, 11))
        return ConditionReport(
            dim=int(doc["dim"]),
            n=int(doc["n"]),
            ranks=tuple(int(r) for r in doc["ranks"]),
            c=num(doc["c"], "c"),
            lambda_min_G=num(doc["lambda_min_G"], "lambda_min_G"),
            li_dim_gap=int(doc["li_dim_gap"]),
            inclinations=tuple(num(d, "inclinations") for d in doc["inclinations"]),
            cond9_dim=int(doc["cond9_dim"]),
            cond10_dims=tuple(int(d) for d in doc["cond10_dims"]),
            verdicts=verdicts,
            margins=margins,
            band=tuple(int(b) for b in doc["band"]),
            notes=tuple(doc["notes"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"report: malformed field ({exc})") from None
