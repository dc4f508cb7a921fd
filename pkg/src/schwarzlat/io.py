"""Tab-separated text format for finitely supported lattice functions.

One point per line, ``x1<TAB>...<TAB>xd<TAB>value``; ``#`` starts a comment.
Values are written with ``repr`` so a write/read round trip is exact.
"""

from __future__ import annotations

import math
from pathlib import Path

from .lattice import SparseFunction


class FormatError(ValueError):
    pass


def parse_sparse_text(text: str, source: str = "<text>") -> SparseFunction:
    data: dict[tuple[int, ...], float] = {}
    dim = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split("\t")
        where = f"{source}:{lineno}"
        if len(fields) < 2:
            raise FormatError(f"{where}: expected coordinates and a value")
        if dim is None:
            dim = len(fields) - 1
        elif len(fields) - 1 != dim:
            raise FormatError(f"{where}: expected {dim} coordinates, got {len(fields) - 1}")
        try:
            point = tuple(int(f) for f in fields[:-1])
            value = float(fields[-1])
        except ValueError:
            raise FormatError(f"{where}: malformed line {raw!r}") from None
        if not (value > 0 and math.isfinite(value)):
            raise FormatError(f"{where}: value must be positive and finite, got {fields[-1]}")
        if point in data:
            raise FormatError(f"{where}: duplicate point {point}")
        data[point] = value
    if dim is None:
        raise FormatError(f"{source}: no data lines, dimension unknown")
    return SparseFunction(data, dim=dim)


def parse_sparse_function(path: str | Path) -> SparseFunction:
    path = Path(path)
    return parse_sparse_text(path.read_text(encoding="utf-8"), str(path))


def format_sparse_function(u: SparseFunction) -> str:
    lines = [f"# dim={u.dim} points={len(u)}"]
    for x in sorted(u):
        lines.append("\t".join([*(str(c) for c in x), repr(u[x])]))
    return "\n".join(lines) + "\n"


def write_sparse_function(u: SparseFunction, path: str | Path) -> None:
    Path(path).write_text(format_sparse_function(u), encoding="utf-8")
