"""Loaders for friendship edge lists with per-user genre labels.

The expected inputs are the Deezer friendship datasets as distributed by
SNAP: an edge CSV with a ``node_1,node_2`` header and a JSON object mapping
each node id (as a string) to its list of genre names.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .core import Instance

__all__ = [
    "UndirectedGraph",
    "build_instance",
    "genre_prevalence",
    "graph_stats",
    "load_aliases",
    "load_edges",
    "load_genres",
    "resolve_genre",
]


@dataclass(frozen=True, eq=False)
class UndirectedGraph:
    """Edges stored once each, with ``u < v``; nodes are ``0..n-1``."""

    n: int
    u: np.ndarray
    v: np.ndarray

    @property
    def num_edges(self) -> int:
        return int(self.u.size)

    def degree(self) -> np.ndarray:
        return np.bincount(self.u, minlength=self.n) + np.bincount(self.v, minlength=self.n)


def load_edges(path) -> UndirectedGraph:
    """Read a two-column integer CSV; the node universe is ``0..max id``."""
    path = Path(path)
    us, vs, lines = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if lineno == 1 and parts == ["node_1", "node_2"]:
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two comma-separated ids, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer id in {line!r}") from None
            if a < 0 or b < 0:
                raise ValueError(f"{path}:{lineno}: negative node id")
            if a == b:
                raise ValueError(f"{path}:{lineno}: self-loop on node {a}")
            us.append(a)
            vs.append(b)
            lines.append(lineno)
    if not us:
        raise ValueError(f"{path}: no edges")
    a = np.asarray(us, dtype=np.int64)
    b = np.asarray(vs, dtype=np.int64)
    u, v = np.minimum(a, b), np.maximum(a, b)
    n = int(v.max()) + 1
    keys = u * n + v
    order = np.argsort(keys, kind="stable")
    dup = np.flatnonzero(keys[order][1:] == keys[order][:-1])
    if dup.size:
        first, second = order[dup[0]], order[dup[0] + 1]
        raise ValueError(
            f"{path}:{lines[second]}: duplicate edge {u[second]}-{v[second]} (first seen on line {lines[first]})"
        )
    return UndirectedGraph(n, u[order], v[order])


def load_genres(path, n: int | None = None) -> dict[str, frozenset[int]]:
    """Invert ``{node: [genre, ...]}`` into ``{genre: node ids}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object of node -> genres")
    index: dict[str, set[int]] = {}
    for key, genres in data.items():
        try:
            node = int(key)
        except ValueError:
            raise ValueError(f"{path}: node id {key!r} is not an integer") from None
        if node < 0 or (n is not None and node >= n):
            raise ValueError(f"{path}: node {node} outside 0..{n - 1 if n else '?'}")
        if not isinstance(genres, list):
            raise ValueError(f"{path}: genres of node {key} must be a list")
        for g in genres:
            index.setdefault(str(g).strip(), set()).add(node)
    return {g: frozenset(s) for g, s in index.items()}


def load_aliases(path) -> dict[str, str]:
    """Alias file: JSON object mapping display labels to dataset genre names."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise ValueError(f"{path}: expected a JSON object of label -> genre name")
    return {k.strip(): v.strip() for k, v in data.items()}


def resolve_genre(index: Mapping[str, frozenset[int]], name: str, aliases: Mapping[str, str] | None = None) -> frozenset[int]:
    """Case-sensitive lookup after trimming, going through ``aliases`` first."""
    name = name.strip()
    key = (aliases or {}).get(name, name)
    if key not in index:
        raise ValueError(f"unknown genre {name!r}")
    return index[key]


def genre_prevalence(index: Mapping[str, frozenset[int]], n: int, name: str, aliases=None) -> float:
    return len(resolve_genre(index, name, aliases)) / n


def build_instance(graph: UndirectedGraph, hidden: Iterable[int] = ()) -> Instance:
    """Bidirectional instance: every undirected edge becomes two directed ones."""
    src = np.concatenate([graph.u, graph.v])
    dst = np.concatenate([graph.v, graph.u])
    hidden = np.asarray(sorted(hidden), dtype=np.int64)
    if hidden.size and (hidden[0] < 0 or hidden[-1] >= graph.n):
        raise ValueError(f"hidden ids must lie in 0..{graph.n - 1}")
    return Instance.from_directed_edges(graph.n, src, dst, hidden)


def graph_stats(graph: UndirectedGraph) -> dict:
    return {
        "nodes": graph.n,
        "edges": graph.num_edges,
        "avg_degree": 2 * graph.num_edges / graph.n,
        "isolated": int(np.count_nonzero(graph.degree() == 0)),
    }
