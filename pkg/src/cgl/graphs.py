"""Environment graphs: construction, validation, and edge-list serialization.

Node ids are 1-based throughout, matching the node labels used in run
outputs (node 1 start, node 64 target, and so on). Graphs are immutable
once built and safe to share across concurrent trial workers.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field

Edge = tuple[int, int]

KIND_PATH = "path"
KIND_LATTICE = "lattice"
KIND_WATTS_STROGATZ = "watts_strogatz"
KIND_CUSTOM = "custom"

TEXT_HEADER = "cgl-graph v1"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class EnvironmentGraph:
    """Unweighted, undirected, connected graph with 1-based node ids.

    Equality compares topology only (node count and edge set); the kind
    tag, lattice shape, and generator retry count are bookkeeping.
    """

    node_count: int
    edges: frozenset[Edge]
    kind: str = field(default=KIND_CUSTOM, compare=False)
    shape: tuple[int, int] | None = field(default=None, compare=False)
    ws_retries: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError(f"node_count must be >= 1, got {self.node_count}")
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.node_count + 1)}
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (1 <= u <= self.node_count) or not (1 <= v <= self.node_count):
                raise ValueError(f"edge {e} references node outside 1..{self.node_count}")
            if u > v:
                raise ValueError(f"edge {e} not in canonical (u < v) order")
            adj[u].append(v)
            adj[v].append(u)
        for v in adj:
            adj[v].sort()
        object.__setattr__(self, "_adj", {v: tuple(ns) for v, ns in adj.items()})
        if not self._connected():
            raise ValueError("graph is not connected")

    def _connected(self) -> bool:
        if self.node_count == 1:
            return True
        seen = {1}
        queue = deque([1])
        while queue:
            v = queue.popleft()
            for u in self.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return len(seen) == self.node_count

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Sorted neighbor ids of node v."""
        self._check_node(v)
        return self._adj[v]  # type: ignore[attr-defined]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edges

    def distances_from(self, source: int) -> dict[int, int]:
        """BFS hop distances from source to every node."""
        self._check_node(source)
        dist = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for u in self.neighbors(v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return dist

    def _check_node(self, v: int) -> None:
        if not (1 <= v <= self.node_count):
            raise ValueError(f"node {v} outside 1..{self.node_count}")

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


def _make(node_count: int, edges, kind: str, shape=None, ws_retries: int = 0) -> EnvironmentGraph:
    canon = frozenset((u, v) if u < v else (v, u) for u, v in edges)
    return EnvironmentGraph(node_count, canon, kind=kind, shape=shape, ws_retries=ws_retries)


def generate_path(n: int) -> EnvironmentGraph:
    """Linear chain 1-2-...-n."""
    if n < 2:
        raise ValueError(f"path needs at least 2 nodes, got {n}")
    return _make(n, [(i, i + 1) for i in range(1, n)], KIND_PATH)


def generate_lattice(rows: int, cols: int) -> EnvironmentGraph:
    """4-neighbor grid; cell (r, c) gets node id (r-1)*cols + c."""
    if rows < 2 or cols < 2:
        raise ValueError(f"lattice needs rows, cols >= 2, got {rows}x{cols}")
    edges = []
    for r in range(1, rows + 1):
        for c in range(1, cols + 1):
            v = (r - 1) * cols + c
            if c < cols:
                edges.append((v, v + 1))
            if r < rows:
                edges.append((v, v + cols))
    return _make(rows * cols, edges, KIND_LATTICE, shape=(rows, cols))


def lattice_coords(node: int, cols: int) -> tuple[int, int]:
    """Inverse of the lattice id map: node -> (row, col), 1-based."""
    return (node - 1) // cols + 1, (node - 1) % cols + 1


def generate_watts_strogatz(n: int, k: int = 4, beta: float = 0.0,
                            seed: int = 0) -> EnvironmentGraph:
    """Watts-Strogatz small world: ring lattice, then random rewiring.

    Each node starts joined to k/2 neighbors per side; every ring edge is
    rewired with probability beta to a uniformly drawn non-duplicate
    endpoint. A disconnected outcome is regenerated with seed+1 (the retry
    count is kept on the graph for run manifests). Pure function of
    (n, k, beta, seed).
    """
    if k % 2 != 0:
        raise ValueError(f"k must be even, got {k}")
    if not (2 <= k < n):
        raise ValueError(f"need 2 <= k < n, got k={k}, n={n}")
    if not (0.0 <= beta <= 1.0):
        raise ValueError(f"beta must be in [0, 1], got {beta}")

    for retry in range(100):
        rng = random.Random(seed + retry)
        edges: set[Edge] = set()
        for off in range(1, k // 2 + 1):
            for i in range(1, n + 1):
                j = (i - 1 + off) % n + 1
                edges.add((i, j) if i < j else (j, i))
        if beta > 0.0:
            for off in range(1, k // 2 + 1):
                for i in range(1, n + 1):
                    j = (i - 1 + off) % n + 1
                    e = (i, j) if i < j else (j, i)
                    if e not in edges:
                        continue  # already rewired away by an earlier draw
                    if rng.random() < beta:
                        # retry draws until a fresh endpoint turns up
                        for _ in range(4 * n):
                            w = rng.randrange(1, n + 1)
                            e2 = (i, w) if i < w else (w, i)
                            if w != i and e2 not in edges:
                                edges.remove(e)
                                edges.add(e2)
                                break
        try:
            return _make(n, edges, KIND_WATTS_STROGATZ, ws_retries=retry)
        except ValueError:
            continue  # disconnected; regenerate with the next seed
    raise ValueError(f"could not generate a connected graph for n={n}, k={k}, beta={beta}")


def save_graph(g: EnvironmentGraph, path, fmt: str = "text") -> None:
    """Write an edge list, either the text format or the JSON object form."""
    if fmt == "text":
        lines = [f"{TEXT_HEADER} {g.node_count}"]
        lines.extend(f"{u} {v}" for u, v in g.sorted_edges())
        data = "\n".join(lines) + "\n"
    elif fmt == "json":
        obj = {
            "version": FORMAT_VERSION,
            "node_count": g.node_count,
            "edges": [[u, v] for u, v in g.sorted_edges()],
        }
        data = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError(f"unknown graph format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(data)


def load_graph(path) -> EnvironmentGraph:
    """Read either serialized form back; validation errors name the line."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _load_json(text)
    return _load_text(text)


def _load_json(text: str) -> EnvironmentGraph:
    obj = json.loads(text)
    if obj.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported graph format version {obj.get('version')!r}")
    return _make(int(obj["node_count"]), [tuple(e) for e in obj["edges"]], KIND_CUSTOM)


def _load_text(text: str) -> EnvironmentGraph:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(TEXT_HEADER):
        raise ValueError(f"line 1: expected header '{TEXT_HEADER} <node_count>'")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError(f"line 1: malformed header {lines[0]!r}")
    try:
        node_count = int(header[2])
    except ValueError:
        raise ValueError(f"line 1: node count {header[2]!r} is not an integer") from None
    edges = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id in {raw!r}") from None
        if u == v:
            raise ValueError(f"line {lineno}: self-loop on node {u}")
        if not (1 <= u <= node_count) or not (1 <= v <= node_count):
            raise ValueError(f"line {lineno}: node id outside 1..{node_count} in {raw!r}")
        edges.append((u, v))
    return _make(node_count, edges, KIND_CUSTOM)
