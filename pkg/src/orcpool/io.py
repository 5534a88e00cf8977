"""Reading and writing graphs, partitions and pipeline outputs.

Reals are written with ``repr`` (shortest round-trip form), so every float
reloads bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .curvature import EdgeCurvatures
from .errors import ValidationError
from .graph import Graph, build_graph

PathLike = Union[str, Path]
GRAPH_KEYS = {"n", "edges", "attributes", "labels", "edge_types", "provenance", "intra_mass"}


def _num(x):
    """Plain Python scalar for JSON/CSV output."""
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def _fmt(x) -> str:
    x = _num(x)
    return repr(x) if isinstance(x, float) else str(x)


def _attr_list(attrs: np.ndarray) -> list:
    return [[_num(v) for v in row] for row in attrs]


def graph_to_dict(g: Graph, **extra) -> dict:
    d = {
        "n": g.n,
        "edges": [[int(u), int(v), float(w)] for (u, v), w in zip(g.edges, g.weights)],
    }
    if g.attributes is not None:
        d["attributes"] = _attr_list(g.attributes)
    if g.labels is not None:
        d["labels"] = g.labels.tolist()
    d.update({k: v for k, v in extra.items() if v is not None})
    return d


def graph_from_dict(d: dict) -> Graph:
    if not isinstance(d, dict):
        raise ValidationError("graph JSON must be an object")
    unknown = set(d) - GRAPH_KEYS
    if unknown:
        raise ValidationError(f"unknown graph fields {sorted(unknown)}")
    if "n" not in d or "edges" not in d:
        raise ValidationError("graph JSON needs fields 'n' and 'edges'")
    n = d["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValidationError(f"'n' must be an integer, got {n!r}")
    edges = d["edges"]
    if not isinstance(edges, list) or not all(isinstance(e, list) for e in edges):
        raise ValidationError("'edges' must be a list of [u, v] or [u, v, w] lists")
    for e in edges:
        if any(not isinstance(x, (int, float)) or isinstance(x, bool) for x in e):
            raise ValidationError(f"edge {e} has a non-numeric entry")
        if len(e) >= 2 and (e[0] != int(e[0]) or e[1] != int(e[1])):
            raise ValidationError(f"edge {e} has a non-integer endpoint")
    attrs = d.get("attributes")
    if attrs is not None:
        try:
            attrs = np.asarray(attrs)
        except ValueError:
            attrs = np.empty(0, dtype=object)
        if attrs.dtype == object:
            raise ValidationError("attribute rows must all have the same length")
    return build_graph(edges, n, attrs, d.get("labels"))


def save_json(obj, path: PathLike, compact: bool = False) -> None:
    text = json.dumps(obj) if compact else json.dumps(obj, indent=1)
    Path(path).write_text(text + "\n")


def load_json(path: PathLike):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def save_graph(g: Graph, path: PathLike, **extra) -> None:
    save_json(graph_to_dict(g, **extra), path, compact=True)


def load_graph(path: PathLike) -> Graph:
    """Load a graph from JSON, or from a CSV edge list if the suffix is ``.csv``."""
    if str(path).endswith(".csv"):
        return read_edge_csv(path)
    return graph_from_dict(load_json(path))


def read_rows(path: PathLike) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            return [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except FileNotFoundError:
        raise ValidationError(f"file not found: {path}") from None


def _is_header(row: Sequence[str]) -> bool:
    """A header row has no numeric cell; a partly numeric row is bad data."""
    for c in row:
        try:
            float(c)
            return False
        except ValueError:
            pass
    return True


def read_edge_csv(path: PathLike, n: Optional[int] = None) -> Graph:
    """CSV edge list ``u,v[,w]`` with an optional header; ``n`` defaults to
    one more than the largest endpoint."""
    rows = read_rows(path)
    if rows and _is_header(rows[0]):
        rows = rows[1:]
    edges = []
    for lineno, row in enumerate(rows, 1):
        if len(row) not in (2, 3):
            raise ValidationError(f"{path}: row {lineno} has {len(row)} columns, expected 2 or 3")
        try:
            u, v = int(row[0]), int(row[1])
            w = float(row[2]) if len(row) == 3 else 1.0
        except ValueError:
            raise ValidationError(f"{path}: row {lineno} is not numeric: {row}") from None
        edges.append((u, v, w))
    if n is None:
        n = 1 + max((max(u, v) for u, v, _ in edges), default=-1)
    return build_graph(edges, n)


def write_edge_csv(g: Graph, path: PathLike) -> None:
    _write_csv(path, ["u", "v", "w"],
               ([int(u), int(v), float(w)] for (u, v), w in zip(g.edges, g.weights)))


def _write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def read_attributes_csv(path: PathLike) -> np.ndarray:
    rows = read_rows(path)
    if rows and _is_header(rows[0]):
        rows = rows[1:]
    try:
        vals = [[float(c) for c in row] for row in rows]
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric attribute ({exc})") from None
    if len({len(r) for r in vals}) > 1:
        raise ValidationError(f"{path}: attribute rows have different lengths")
    arr = np.array(vals)
    if arr.size and np.all(arr == np.round(arr)):
        arr = arr.astype(np.int64)
    return arr


def write_attributes_csv(attrs: np.ndarray, path: PathLike) -> None:
    attrs = np.asarray(attrs)
    _write_csv(path, [f"x{k}" for k in range(attrs.shape[1])], attrs.tolist())


def write_partition_csv(labels: Sequence[int], path: PathLike, column: str = "label") -> None:
    _write_csv(path, ["node", column], ((i, int(c)) for i, c in enumerate(labels)))


def read_partition_csv(path: PathLike) -> np.ndarray:
    rows = read_rows(path)
    if rows and _is_header(rows[0]):
        rows = rows[1:]
    try:
        pairs = sorted((int(r[0]), int(r[1])) for r in rows)
    except (ValueError, IndexError):
        raise ValidationError(f"{path}: partition rows must be 'node,label' integers") from None
    nodes = [p[0] for p in pairs]
    if nodes != list(range(len(nodes))):
        raise ValidationError(f"{path}: partition must list nodes 0..N-1 exactly once")
    labels = np.array([p[1] for p in pairs], dtype=np.int64)
    if labels.size and labels.min() < 0:
        raise ValidationError(f"{path}: labels must be nonnegative")
    return labels


def write_curvature_csv(curv: EdgeCurvatures, path: PathLike) -> None:
    header = ["u", "v", "kappa"]
    if curv.bounds is not None:
        header += ["kappa_low", "kappa_up"]
    rows = []
    for i, (u, v) in enumerate(curv.edges):
        row = [int(u), int(v), float(curv.values[i])]
        if curv.bounds is not None:
            row += [float(curv.bounds[i, 0]), float(curv.bounds[i, 1])]
        rows.append(row)
    _write_csv(path, header, rows)


def write_history_csv(g: Graph, history: Sequence[np.ndarray], path: PathLike) -> None:
    rows = ([t, int(u), int(v), float(w)]
            for t, ws in enumerate(history) for (u, v), w in zip(g.edges, ws))
    _write_csv(path, ["t", "u", "v", "w"], rows)


def read_history_csv(path: PathLike) -> list[tuple[int, int, int, float]]:
    rows = read_rows(path)
    if rows and _is_header(rows[0]):
        rows = rows[1:]
    try:
        return [(int(t), int(u), int(v), float(w)) for t, u, v, w in rows]
    except ValueError:
        raise ValidationError(f"{path}: history rows must be t,u,v,w") from None


def write_series_csv(values: Sequence[float], path: PathLike, name: str = "Q") -> None:
    _write_csv(path, ["t", name], ((t, float(q)) for t, q in enumerate(values)))


def write_tidy_csv(rows: Iterable[tuple[int, str, float]], path: PathLike) -> int:
    """Write ``t,key,value`` rows and return how many were written."""
    rows = list(rows)
    _write_csv(path, ["t", "key", "value"], rows)
    return len(rows)
