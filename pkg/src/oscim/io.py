"""Readers for Gset / BiqMac problem files and writers for run results.

Both problem formats are whitespace separated: a header line ``n m`` followed
by exactly ``m`` entry lines ``i j v`` with 1-based indices. Blank lines and
lines starting with ``#`` or ``%`` are skipped.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .problems import IsingInstance, SourceKind, from_maxcut, from_qubo

SCHEMA_VERSION = 1
TRACE_HEADER = ("t_seconds", "objective", "n_flips_since_last")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ProblemFile:
    format: str
    n: int
    m: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.m:
            raise ValueError(f"{len(self.entries)} entries but m={self.m}")
        for i, j, _ in self.entries:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"entry ({i}, {j}) out of range for n={self.n}")


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#%":
            continue
        yield lineno, s.split()


def _parse(text: str, fmt: str, integer_values: bool) -> ProblemFile:
    lines = _content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty problem file") from None
    if len(header) != 2:
        raise ParseError(f"expected header 'n m', got {' '.join(header)!r}", lineno)
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"non-integer header {' '.join(header)!r}", lineno) from None
    if n < 1 or m < 0:
        raise ParseError(f"invalid header n={n} m={m}", lineno)
    entries = []
    last = lineno
    for lineno, tok in lines:
        last = lineno
        if len(entries) == m:
            raise ParseError(f"more than the declared {m} entries", lineno)
        if len(tok) != 3:
            raise ParseError(f"expected 'i j value', got {' '.join(tok)!r}", lineno)
        try:
            i, j = int(tok[0]), int(tok[1])
            v = int(tok[2]) if integer_values else float(tok[2])
        except ValueError:
            raise ParseError(f"malformed entry {' '.join(tok)!r}", lineno) from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"index out of range 1..{n}: ({i}, {j})", lineno)
        if fmt == "gset" and i == j:
            raise ParseError(f"self-loop on vertex {i}", lineno)
        entries.append((i, j, v))
    if len(entries) != m:
        raise ParseError(f"declared {m} entries, found {len(entries)}", last)
    return ProblemFile(fmt, n, m, tuple(entries))


def parse_gset(text: str) -> ProblemFile:
    """Parse a Gset edge list (``i j w`` with integer weights)."""
    return _parse(text, "gset", integer_values=True)


def parse_biqmac(text: str) -> ProblemFile:
    """Parse a BiqMac sparse QUBO listing (``i j q``; mirrored off the diagonal)."""
    return _parse(text, "biqmac", integer_values=False)


def format_problem(pf: ProblemFile) -> str:
    """Canonical text form; ``parse(format_problem(pf))`` reproduces ``pf``."""
    out = [f"{pf.n} {pf.m}"]
    for i, j, v in pf.entries:
        out.append(f"{i} {j} {v!r}" if isinstance(v, float) else f"{i} {j} {v}")
    return "\n".join(out) + "\n"


def qubo_matrix(pf: ProblemFile) -> sp.csr_matrix:
    """Symmetric Q from a BiqMac listing; off-diagonal entries are mirrored."""
    rows, cols, vals = [], [], []
    for i, j, v in pf.entries:
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)
    return sp.coo_matrix((vals, (rows, cols)), shape=(pf.n, pf.n)).tocsr()


def to_instance(pf: ProblemFile) -> IsingInstance:
    if pf.format == "gset":
        return from_maxcut(pf.n, pf.entries)
    if pf.format == "biqmac":
        return from_qubo(qubo_matrix(pf))
    raise ValueError(f"unknown problem format {pf.format!r}")


def sniff_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".json",):
        return "ising-json"
    if suffix in (".sparse", ".bq", ".biqmac", ".qubo") or Path(path).name.startswith("bqp"):
        return "biqmac"
    return "gset"


def load_instance(path, fmt: str | None = None) -> IsingInstance:
    fmt = fmt or sniff_format(path)
    text = Path(path).read_text(encoding="utf-8")
    if fmt == "gset":
        return to_instance(parse_gset(text))
    if fmt == "biqmac":
        return to_instance(parse_biqmac(text))
    if fmt == "ising-json":
        return instance_from_dict(json.loads(text))
    raise ValueError(f"unknown format {fmt!r}")


def instance_to_dict(inst: IsingInstance) -> dict:
    upper = sp.triu(inst.J, k=1).tocoo()
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "ising_instance",
        "n": inst.n,
        "source_kind": inst.source_kind.value,
        "K": inst.K,
        "h": inst.h.tolist(),
        "J_upper": [[int(i) + 1, int(j) + 1, float(v)] for i, j, v in zip(upper.row, upper.col, upper.data)],
    }


def instance_from_dict(d: dict) -> IsingInstance:
    n = int(d["n"])
    rows, cols, vals = [], [], []
    for i, j, v in d["J_upper"]:
        rows += [i - 1, j - 1]
        cols += [j - 1, i - 1]
        vals += [v, v]
    J = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return IsingInstance(J, d["h"], d["K"], SourceKind(d["source_kind"]))


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, np.generic):
        return _jsonable(v.item())
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def result_to_dict(result) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "run_result",
        "seed": result.seed,
        "run_index": getattr(result, "run_index", 0),
        "mode": result.mode,
        "method": result.method,
        "t_end": result.t_end,
        "best_objective": result.best_objective,
        "best_time": result.best_time,
        "best_config": [int(v) for v in result.best_config],
        "first_cross_time": result.first_cross_time,
        "threshold": result.threshold,
        "params": result.params,
        "n_samples": len(result.trace_t),
    }


def write_result(result, path, format: str = "json") -> None:
    """Write a run result as JSON metadata or as a CSV objective trace."""
    path = Path(path)
    if format == "json":
        path.write_text(json.dumps(_jsonable(result_to_dict(result)), indent=2) + "\n", encoding="utf-8")
    elif format == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_HEADER)
            for t, obj, flips in zip(result.trace_t, result.trace_objective, result.trace_flips):
                w.writerow([repr(float(t)), repr(float(obj)), int(flips)])
    else:
        raise ValueError(f"unknown result format {format!r}")


def read_result_json(path) -> dict:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')}")
    return d


def read_trace_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header}")
        rows = [(float(a), float(b), int(c)) for a, b, c in r]
    return rows


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2) + "\n", encoding="utf-8")
