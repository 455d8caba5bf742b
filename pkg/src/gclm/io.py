"""File formats: numeric CSV matrices and JSON graphs, fits, paths and reports.

All indices in files are 1-based.  A directed edge is written ``[from, to]``
and corresponds to a nonzero ``B[to - 1, from - 1]``.
"""
import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graph import MixedGraph

__all__ = [
    "read_matrix",
    "write_matrix",
    "graph_to_dict",
    "graph_from_dict",
    "read_graph",
    "write_graph",
    "support_to_edges",
    "edges_to_support",
    "fit_record",
    "path_records",
    "read_path_supports",
    "write_json",
    "read_json",
]


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_matrix(path):
    """Numeric CSV as a 2-d float array; a non-numeric first row is treated as a header."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read ({exc.strerror})") from None
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ValidationError(f"{path}: no numeric rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValidationError(f"{path}: rows have differing numbers of columns")
    try:
        out = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise ValidationError(f"{path}: non-finite entries")
    return out


def write_matrix(path, A, header=None):
    """Write ``A`` as CSV with 17 significant digits, so values round-trip exactly."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with Path(path).open("w", newline="") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        np.savetxt(fh, A, delimiter=",", fmt="%.17g")


def support_to_edges(mask):
    """``mask[i, j]`` (edge ``j -> i``) as a sorted list of 1-based ``[from, to]`` pairs."""
    rows, cols = np.nonzero(np.asarray(mask, dtype=bool))
    return sorted([int(j) + 1, int(i) + 1] for i, j in zip(rows, cols) if i != j)


def edges_to_support(edges, p):
    mask = np.zeros((p, p), dtype=bool)
    for e in edges:
        a, b = _edge(e, p)
        mask[b, a] = True
    return mask


def _edge(e, p):
    if len(e) != 2:
        raise ValidationError(f"edge {e!r} must have two endpoints")
    a, b = int(e[0]) - 1, int(e[1]) - 1
    if not (0 <= a < p and 0 <= b < p):
        raise ValidationError(f"edge {list(e)} has an endpoint outside 1..{p}")
    return a, b


def graph_to_dict(G):
    return {
        "p": G.p,
        "directed": sorted([i + 1, j + 1] for i, j in G.directed),
        "bidirected": sorted([i + 1, j + 1] for i, j in G.bidirected),
    }


def graph_from_dict(d):
    try:
        p = int(d["p"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("graph JSON needs an integer field 'p'") from None
    directed = [_edge(e, p) for e in d.get("directed", [])]
    bidirected = [_edge(e, p) for e in d.get("bidirected", [])]
    return MixedGraph(p, frozenset(directed), frozenset(bidirected))


def read_json(path):
    path = Path(path)
    try:
        with path.open() as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def write_json(path, obj):
    text = json.dumps(_jsonable(obj), indent=2)
    if path is None or str(path) == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")


def read_graph(path):
    return graph_from_dict(read_json(path))


def write_graph(path, G):
    write_json(path, graph_to_dict(G))


def fit_record(fit):
    """JSON-ready record of one :class:`FitResult`."""
    return {
        "lambda": fit.lam,
        "B": fit.B,
        "C_diag": fit.C_diag,
        "objective": fit.objective,
        "loss": fit.loss,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "status": fit.status,
        "support": support_to_edges(fit.support),
    }


def path_records(params, supports, fits=None):
    """Records for a support path from any method (``fits`` optional)."""
    out = []
    for k, (lam, mask) in enumerate(zip(params, supports)):
        fit = fits[k] if fits else None
        if fit is not None and hasattr(fit, "C_diag"):
            rec = fit_record(fit)
        else:
            rec = {"lambda": float(lam), "support": support_to_edges(mask)}
            if fit is not None:
                rec.update(B=fit.B, objective=fit.objective, converged=fit.converged)
        out.append(rec)
    return out


def read_path_supports(path):
    """``(p, supports)`` from a path JSON file written by this package."""
    d = read_json(path)
    try:
        p = int(d["p"])
        records = d["records"]
    except (KeyError, TypeError, ValueError):
        raise ValidationError(f"{path}: path JSON needs fields 'p' and 'records'") from None
    if not records:
        raise ValidationError(f"{path}: path has no records")
    return p, [edges_to_support(r.get("support", []), p) for r in records]
