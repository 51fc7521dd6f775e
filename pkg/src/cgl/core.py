"""Coincident matrix and the propagation / plasticity operations.

The agent's internal state is a symmetric nonnegative conductance matrix C
over sensory nodes (1..sensory_count, mirroring environment nodes) plus
auxiliary reward/penalty nodes appended after them. One propagation step is

    cell_update(x) = 0.5 * x @ (D^-1 C + I)

with D the diagonal matrix of weighted degrees (row sums of C); rows with
degree zero keep their value unchanged. The matrix P = 0.5 * (D^-1 C + I)
is row-stochastic wherever degrees are nonzero, so propagation conserves
total activation and is exactly the one-step evolution of a lazy random
walk weighted by conductance.

State vectors are plain float64 numpy arrays of length ``matrix.size``;
entry i holds the activation of node i+1.

Dense and sparse storage backends share one propagation kernel built from a
canonical (source, destination, weight) edge expansion, so both produce
bit-identical floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

DENSE_LIMIT = 512

REWARD = "reward"
PENALTY = "penalty"

FLOOR_CLAMP = "clamp"      # de-inforced value never drops below the floor
FLOOR_LITERAL = "literal"  # one multiplicative step may land below the floor

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class AuxiliaryNode:
    """A reward or penalty node appended after the sensory block."""

    node: int
    kind: str


class CoincidentMatrix:
    """Symmetric conductance matrix over sensory + auxiliary nodes.

    Node ids are 1-based. Mutation happens through ``matrix_update`` /
    ``wire_reward`` / ``wire_penalty``; the matrix is a value type owned by
    a single run (clone with ``copy()`` to share across workers).
    """

    def __init__(self, sensory_count: int, *, deinforce: float = 0.5,
                 floor: float = 0.25, floor_mode: str = FLOOR_CLAMP,
                 backend: str | None = None):
        if sensory_count < 1:
            raise ValueError(f"sensory_count must be >= 1, got {sensory_count}")
        if not (0.0 < deinforce < 1.0):
            raise ValueError(f"de-inforcement factor must be in (0, 1), got {deinforce}")
        if floor < 0.0:
            raise ValueError(f"floor must be >= 0, got {floor}")
        if floor_mode not in (FLOOR_CLAMP, FLOOR_LITERAL):
            raise ValueError(f"unknown floor_mode {floor_mode!r}")
        self.sensory_count = sensory_count
        self.size = sensory_count
        self.deinforce = float(deinforce)
        self.floor = float(floor)
        self.floor_mode = floor_mode
        self.auxiliaries: tuple[AuxiliaryNode, ...] = ()
        self._locked = False
        if backend is None:
            backend = "dense" if sensory_count <= DENSE_LIMIT else "sparse"
        if backend == "dense":
            self._dense: np.ndarray | None = np.zeros((self.size, self.size))
            self._adj: list[dict[int, float]] | None = None
        elif backend == "sparse":
            self._dense = None
            self._adj = [dict() for _ in range(self.size)]
        else:
            raise ValueError(f"unknown backend {backend!r}")
        self._model: tuple | None = None

    # -- storage ---------------------------------------------------------

    @property
    def backend(self) -> str:
        return "dense" if self._dense is not None else "sparse"

    def get(self, i: int, j: int) -> float:
        self._check_node(i)
        self._check_node(j)
        if self._dense is not None:
            return float(self._dense[i - 1, j - 1])
        return self._adj[i - 1].get(j - 1, 0.0)

    def _set(self, i: int, j: int, w: float) -> None:
        if i == j:
            raise ValueError("diagonal entries stay zero")
        if w < 0.0:
            raise ValueError(f"conductance must be >= 0, got {w}")
        a, b = i - 1, j - 1
        if self._dense is not None:
            self._dense[a, b] = w
            self._dense[b, a] = w
        elif w == 0.0:
            self._adj[a].pop(b, None)
            self._adj[b].pop(a, None)
        else:
            self._adj[a][b] = w
            self._adj[b][a] = w
        self._model = None

    def _check_node(self, v: int) -> None:
        if not (1 <= v <= self.size):
            raise ValueError(f"node {v} outside 1..{self.size}")

    def is_sensory(self, v: int) -> bool:
        self._check_node(v)
        return v <= self.sensory_count

    def aux_nodes(self, kind: str | None = None) -> tuple[int, ...]:
        return tuple(a.node for a in self.auxiliaries if kind is None or a.kind == kind)

    def lock_size(self) -> None:
        """Freeze the node set; called when a run starts."""
        self._locked = True

    def _append_aux(self, kind: str) -> int:
        if self._locked:
            raise RuntimeError("cannot append auxiliary nodes after a run has started")
        self.size += 1
        if self._dense is not None:
            if self.size > DENSE_LIMIT:
                self._adj = [
                    {j: float(w) for j, w in enumerate(row) if w != 0.0}
                    for row in self._dense
                ]
                self._adj.append(dict())
                self._dense = None
            else:
                grown = np.zeros((self.size, self.size))
                grown[: self.size - 1, : self.size - 1] = self._dense
                self._dense = grown
        else:
            self._adj.append(dict())
        self.auxiliaries = self.auxiliaries + (AuxiliaryNode(self.size, kind),)
        self._model = None
        return self.size

    def copy(self) -> "CoincidentMatrix":
        dup = CoincidentMatrix(
            self.sensory_count, deinforce=self.deinforce, floor=self.floor,
            floor_mode=self.floor_mode, backend=self.backend,
        )
        dup.size = self.size
        dup.auxiliaries = self.auxiliaries
        if self._dense is not None:
            dup._dense = self._dense.copy()
        else:
            dup._adj = [dict(row) for row in self._adj]
        return dup

    # -- canonical edge expansion -----------------------------------------

    def _directed_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All nonzero entries as (src, dst, w), sorted by (src, dst), 0-based.

        Both backends must emit identical arrays; the shared propagation
        kernel below then yields bit-identical results regardless of storage.
        """
        if self._dense is not None:
            src, dst = np.nonzero(self._dense)
            return src, dst, self._dense[src, dst]
        srcs: list[int] = []
        dsts: list[int] = []
        ws: list[float] = []
        for i, row in enumerate(self._adj):
            for j in sorted(row):
                srcs.append(i)
                dsts.append(j)
                ws.append(row[j])
        return (
            np.asarray(srcs, dtype=np.intp),
            np.asarray(dsts, dtype=np.intp),
            np.asarray(ws, dtype=np.float64),
        )

    def _propagation_model(self) -> tuple:
        """Cached (src, dst, coeff, keep): y = keep*x + scatter(coeff * x[src])."""
        if self._model is None:
            src, dst, w = self._directed_arrays()
            deg = np.bincount(src, weights=w, minlength=self.size)
            keep = np.where(deg > 0.0, 0.5, 1.0)
            coeff = 0.5 * w / deg[src] if len(src) else w
            self._model = (src, dst, coeff, keep)
        return self._model

    def weighted_degree_vector(self) -> np.ndarray:
        src, _, w = self._directed_arrays()
        return np.bincount(src, weights=w, minlength=self.size)

    def entries(self) -> list[tuple[int, int, float]]:
        """Each undirected edge once, (i, j, w) with i < j, 1-based, sorted."""
        src, dst, w = self._directed_arrays()
        return [
            (int(i) + 1, int(j) + 1, float(x))
            for i, j, x in zip(src, dst, w)
            if i < j
        ]

    def to_dense(self) -> np.ndarray:
        """Full conductance matrix as a fresh array (oracle / display use)."""
        out = np.zeros((self.size, self.size))
        src, dst, w = self._directed_arrays()
        out[src, dst] = w
        return out


# -- propagation -----------------------------------------------------------


def weighted_degrees(matrix: CoincidentMatrix) -> np.ndarray:
    """Row sums of C: entry i is the weighted degree of node i+1."""
    return matrix.weighted_degree_vector()


def _check_state(x: np.ndarray, matrix: CoincidentMatrix) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (matrix.size,):
        raise ValueError(f"state vector has shape {x.shape}, expected ({matrix.size},)")
    return x


def cell_update(x: np.ndarray, matrix: CoincidentMatrix) -> np.ndarray:
    """One lazy-walk step: 0.5 * x @ (D^-1 C + I), zero-degree rows identity."""
    x = _check_state(x, matrix)
    src, dst, coeff, keep = matrix._propagation_model()
    y = keep * x
    if len(src):
        y += np.bincount(dst, weights=coeff * x[src], minlength=matrix.size)
    return y


def recurse(x: np.ndarray, x_prev: np.ndarray | None, matrix: CoincidentMatrix,
            r: int, latent: float = 0.0) -> np.ndarray:
    """r-fold propagation plus the optional latent carry of the previous input.

    Returns cell_update^r(x) + latent * cell_update(x_prev); r = 0 leaves x
    as is (plus the latent term).
    """
    if r < 0:
        raise ValueError(f"recursion count must be >= 0, got {r}")
    if latent < 0.0:
        raise ValueError(f"latent weight must be >= 0, got {latent}")
    y = _check_state(x, matrix).copy()
    for _ in range(r):
        y = cell_update(y, matrix)
    if latent != 0.0:
        if x_prev is None:
            raise ValueError("latent weight is nonzero but no previous input given")
        y = y + latent * cell_update(x_prev, matrix)
    return y


def signal_gradient(x: np.ndarray, matrix: CoincidentMatrix, r: int,
                    latent: float = 0.0, x_prev: np.ndarray | None = None) -> np.ndarray:
    """Value field the agent reads for navigation.

    Same recursion as ``recurse``, but with the reward/penalty circuits held
    active throughout: reward nodes are intrinsic sources pinned at
    activation 1 and penalty nodes absorb (pinned at 0) before every
    propagation step. The wired conductance gates how strongly each circuit
    pushes into or drains its sensory target, which is what bends the value
    landscape toward rewards and away from penalties.
    """
    if r < 0:
        raise ValueError(f"recursion count must be >= 0, got {r}")
    y = _check_state(x, matrix).copy()
    rewards = [a - 1 for a in matrix.aux_nodes(REWARD)]
    penalties = [a - 1 for a in matrix.aux_nodes(PENALTY)]

    def clamp(v: np.ndarray) -> np.ndarray:
        for a in rewards:
            v[a] = 1.0
        for a in penalties:
            v[a] = 0.0
        return v

    y = clamp(y)
    for _ in range(r):
        y = clamp(cell_update(y, matrix))
    if latent != 0.0:
        if x_prev is None:
            raise ValueError("latent weight is nonzero but no previous input given")
        y = y + latent * cell_update(clamp(_check_state(x_prev, matrix).copy()), matrix)
    return y


# -- plasticity -------------------------------------------------------------


def matrix_update(matrix: CoincidentMatrix, active: np.ndarray,
                  pairs) -> CoincidentMatrix:
    """Apply the coincidence rule to each listed unordered pair, in place.

    A first-seen pair (zero conductance) is created at the product of its
    activations; an existing edge above the floor is de-inforced by the
    matrix's factor (clamped at the floor unless floor_mode is "literal");
    anything else is left alone. Auxiliary reward/penalty edges are never
    listed by perception, so they are protected by construction.
    """
    active = _check_state(active, matrix)
    d, b = matrix.deinforce, matrix.floor
    for i, j in pairs:
        matrix._check_node(i)
        matrix._check_node(j)
        if i == j:
            raise ValueError(f"pair ({i}, {j}) is degenerate")
        product = active[i - 1] * active[j - 1]
        if product == 0.0:
            raise ValueError(f"pair ({i}, {j}) listed but not coincidentally active")
        w = matrix.get(i, j)
        if w == 0.0:
            matrix._set(i, j, product)
        elif w > b:
            new = d * w
            if matrix.floor_mode == FLOOR_CLAMP:
                new = max(new, b)
            matrix._set(i, j, new)
    return matrix


def wire_reward(matrix: CoincidentMatrix, target: int, weight: float) -> int:
    """Append a reward node tied to a sensory target; returns the new node id.

    Reward conductances sit above one; they amplify the pull of the target
    in the signal gradient.
    """
    if not matrix.is_sensory(target):
        raise ValueError(f"reward target {target} is not a sensory node")
    if weight <= 1.0:
        raise ValueError(f"reward weight must be > 1, got {weight}")
    node = matrix._append_aux(REWARD)
    matrix._set(target, node, weight)
    return node


def wire_penalty(matrix: CoincidentMatrix, target: int, edge_count: int,
                 weight: float) -> tuple[int, ...]:
    """Append edge_count penalty nodes, each tied to the target.

    Penalty conductances lie strictly between zero and one. C is a simple
    symmetric matrix, so each penalty edge gets its own auxiliary node
    rather than a parallel edge. Returns the new node ids.
    """
    if not matrix.is_sensory(target):
        raise ValueError(f"penalty target {target} is not a sensory node")
    if not (0.0 < weight < 1.0):
        raise ValueError(f"penalty weight must be in (0, 1), got {weight}")
    if edge_count < 1:
        raise ValueError(f"edge_count must be >= 1, got {edge_count}")
    nodes = []
    for _ in range(edge_count):
        node = matrix._append_aux(PENALTY)
        matrix._set(target, node, weight)
        nodes.append(node)
    return tuple(nodes)


# -- derived quantities ------------------------------------------------------


def memory_vector(output: np.ndarray, input_vector: np.ndarray) -> np.ndarray:
    """Regenerated (non-stimulus) part of the experience: output - input."""
    output = np.asarray(output, dtype=np.float64)
    input_vector = np.asarray(input_vector, dtype=np.float64)
    if output.shape != input_vector.shape:
        raise ValueError(f"shape mismatch: {output.shape} vs {input_vector.shape}")
    return output - input_vector


def normalize_display(x: np.ndarray) -> np.ndarray:
    """Scale so the max is 1 (display only; never used inside the dynamics)."""
    x = np.asarray(x, dtype=np.float64)
    peak = x.max() if x.size else 0.0
    if peak > 0.0:
        return x / peak
    return x.copy()


# -- snapshots ----------------------------------------------------------------


def snapshot_to_dict(matrix: CoincidentMatrix) -> dict:
    return {
        "version": SNAPSHOT_VERSION,
        "m": matrix.size,
        "sensory_count": matrix.sensory_count,
        "auxiliaries": [{"id": a.node, "kind": a.kind} for a in matrix.auxiliaries],
        "entries": [[i, j, w] for i, j, w in matrix.entries()],
        "deinforce": matrix.deinforce,
        "floor": matrix.floor,
        "floor_mode": matrix.floor_mode,
    }


def snapshot_from_dict(obj: dict) -> CoincidentMatrix:
    if obj.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {obj.get('version')!r}")
    matrix = CoincidentMatrix(
        int(obj["sensory_count"]),
        deinforce=float(obj.get("deinforce", 0.5)),
        floor=float(obj.get("floor", 0.25)),
        floor_mode=obj.get("floor_mode", FLOOR_CLAMP),
    )
    aux = sorted(obj.get("auxiliaries", []), key=lambda a: int(a["id"]))
    for a in aux:
        node = matrix._append_aux(a["kind"])
        if node != int(a["id"]):
            raise ValueError(f"auxiliary ids not contiguous: expected {node}, got {a['id']}")
    for i, j, w in obj["entries"]:
        matrix._set(int(i), int(j), float(w))
    return matrix


def save_snapshot(matrix: CoincidentMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(snapshot_to_dict(matrix), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_snapshot(path) -> CoincidentMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return snapshot_from_dict(json.load(fh))
