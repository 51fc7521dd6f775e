"""The behavioral loop: perception, single-pass training, and navigation.

Training is a scripted complete pass through the environment; at every
visited node the agent perceives its immediate neighborhood and applies the
coincidence rule, building the internal matrix. Navigation then repeats
perceive/update -> propagate -> move-to-best-neighbor, so the path is
emergent rather than precomputed. The agent carries no coordinates; all it
ever sees is the current node and its adjacent inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from cgl.graphs import EnvironmentGraph, KIND_LATTICE
from cgl.core import (
    CoincidentMatrix,
    FLOOR_CLAMP,
    matrix_update,
    signal_gradient,
)

PERCEPTION_STAR = "star"      # pairs: current node with each neighbor
PERCEPTION_CLIQUE = "clique"  # pairs: all pairs within the active set

INPUT_NEIGHBORHOOD = "neighborhood"  # propagate the whole perceived set
INPUT_NODE = "node"                  # propagate only the current node

WALK_AUTO = "auto"
WALK_DFS = "dfs"
WALK_BOUSTROPHEDON = "boustrophedon"
WALK_SWEEP = "sweep"


@dataclass
class AgentConfig:
    """Knobs for one training + navigation run; serialized into manifests."""

    recursions: int = 6
    latent: float = 0.0
    deinforce: float = 0.5
    floor: float = 0.25
    floor_mode: str = FLOOR_CLAMP
    perception: str = PERCEPTION_STAR
    input_mode: str = INPUT_NEIGHBORHOOD
    walk: str | list[int] = WALK_AUTO
    training_start: int = 1
    max_steps: int | None = None  # defaults to the environment node count
    stay_required: int = 3
    seed: int = 0
    trace: bool = False

    def __post_init__(self) -> None:
        if self.recursions < 0:
            raise ValueError("recursions must be >= 0")
        if not (0.0 < self.deinforce < 1.0):
            raise ValueError("de-inforcement factor must be in (0, 1)")
        if self.floor < 0.0:
            raise ValueError("floor must be >= 0")
        if self.stay_required < 1:
            raise ValueError("stay_required must be >= 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.perception not in (PERCEPTION_STAR, PERCEPTION_CLIQUE):
            raise ValueError(f"unknown perception mode {self.perception!r}")
        if self.input_mode not in (INPUT_NEIGHBORHOOD, INPUT_NODE):
            raise ValueError(f"unknown input mode {self.input_mode!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(d["walk"], list):
            d["walk"] = list(d["walk"])
        return d

    def replace(self, **kw) -> "AgentConfig":
        d = self.to_dict()
        d.update(kw)
        return AgentConfig(**d)


def new_matrix(env: EnvironmentGraph, cfg: AgentConfig) -> CoincidentMatrix:
    """Empty coincident matrix sized to the environment, pre-training."""
    return CoincidentMatrix(
        env.node_count, deinforce=cfg.deinforce, floor=cfg.floor,
        floor_mode=cfg.floor_mode,
    )


def perceive(env: EnvironmentGraph, v: int,
             mode: str = PERCEPTION_STAR) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...]]:
    """Active set {v} + neighbors, and the coincident pairs formed there."""
    nbrs = env.neighbors(v)
    active = tuple(sorted((v,) + nbrs))
    if mode == PERCEPTION_STAR:
        pairs = tuple((v, u) if v < u else (u, v) for u in nbrs)
    elif mode == PERCEPTION_CLIQUE:
        pairs = tuple(
            (a, b) for idx, a in enumerate(active) for b in active[idx + 1:]
        )
    else:
        raise ValueError(f"unknown perception mode {mode!r}")
    return active, pairs


def active_vector(matrix: CoincidentMatrix, active: tuple[int, ...]) -> np.ndarray:
    """Unit activations on the active sensory set, zeros elsewhere."""
    x = np.zeros(matrix.size)
    for v in active:
        x[v - 1] = 1.0
    return x


def propagation_input(matrix: CoincidentMatrix, v: int, active: tuple[int, ...],
                      mode: str) -> np.ndarray:
    if mode == INPUT_NEIGHBORHOOD:
        return active_vector(matrix, active)
    return active_vector(matrix, (v,))


# -- training walks ----------------------------------------------------------


def dfs_walk(env: EnvironmentGraph, start: int) -> list[int]:
    """Depth-first covering walk with explicit backtrack moves.

    Neighbors are explored in ascending id order; the walk stops as soon as
    every node has been visited (no trailing unwind).
    """
    seq = [start]
    visited = {start}
    stack = [start]
    while len(visited) < env.node_count:
        v = stack[-1]
        nxt = None
        for u in env.neighbors(v):
            if u not in visited:
                nxt = u
                break
        if nxt is None:
            stack.pop()
            seq.append(stack[-1])
        else:
            visited.add(nxt)
            stack.append(nxt)
            seq.append(nxt)
    return seq


def boustrophedon_walk(env: EnvironmentGraph) -> list[int]:
    """Row sweep over a lattice, alternating direction each row."""
    if env.kind != KIND_LATTICE or env.shape is None:
        raise ValueError("boustrophedon walk needs a lattice environment")
    rows, cols = env.shape
    seq = []
    for r in range(1, rows + 1):
        cs = range(1, cols + 1) if r % 2 == 1 else range(cols, 0, -1)
        seq.extend((r - 1) * cols + c for c in cs)
    return seq


def sweep_walk(env: EnvironmentGraph) -> list[int]:
    """Visit nodes in id order; valid when consecutive ids are adjacent."""
    seq = list(range(1, env.node_count + 1))
    validate_walk(env, seq)
    return seq


def validate_walk(env: EnvironmentGraph, seq) -> list[int]:
    """Check a walk is edge-contiguous and covers every node."""
    seq = [int(v) for v in seq]
    if not seq:
        raise ValueError("walk is empty")
    for v in seq:
        if not (1 <= v <= env.node_count):
            raise ValueError(f"walk visits node {v} outside 1..{env.node_count}")
    for a, b in zip(seq, seq[1:]):
        if not env.has_edge(a, b):
            raise ValueError(f"walk step {a} -> {b} is not an environment edge")
    missing = set(range(1, env.node_count + 1)) - set(seq)
    if missing:
        raise ValueError(f"walk does not cover nodes {sorted(missing)[:5]}")
    return seq


def _sweep_valid(env: EnvironmentGraph) -> bool:
    return all(env.has_edge(v, v + 1) for v in range(1, env.node_count))


def resolve_walk(env: EnvironmentGraph, cfg: AgentConfig) -> tuple[str, list[int]]:
    """Pick the training walk; returns (name, node sequence) for manifests."""
    walk = cfg.walk
    if isinstance(walk, (list, tuple)):
        return "explicit", validate_walk(env, walk)
    if walk == WALK_AUTO:
        if env.kind == KIND_LATTICE:
            walk = WALK_BOUSTROPHEDON
        elif _sweep_valid(env):
            walk = WALK_SWEEP
        else:
            walk = WALK_DFS
    if walk == WALK_DFS:
        return WALK_DFS, dfs_walk(env, cfg.training_start)
    if walk == WALK_BOUSTROPHEDON:
        return WALK_BOUSTROPHEDON, boustrophedon_walk(env)
    if walk == WALK_SWEEP:
        return WALK_SWEEP, sweep_walk(env)
    raise ValueError(f"unknown training walk {walk!r}")


def train(env: EnvironmentGraph, matrix: CoincidentMatrix,
          cfg: AgentConfig) -> CoincidentMatrix:
    """Single complete pass: perceive and update at every walk step.

    Rewards and penalties must already be wired. Propagation during
    training would not touch the matrix and its outputs are discarded, so
    it is skipped; navigation during training is scripted by the walk.
    """
    _, seq = resolve_walk(env, cfg)
    matrix.lock_size()
    for v in seq:
        active, pairs = perceive(env, v, cfg.perception)
        matrix_update(matrix, active_vector(matrix, active), pairs)
    return matrix


# -- navigation ---------------------------------------------------------------


def choose_next(values: np.ndarray, env: EnvironmentGraph, v: int, rng) -> int:
    """Highest-value node among {v} + neighbors; ties drawn uniformly."""
    candidates = (v,) + env.neighbors(v)
    vals = [values[c - 1] for c in candidates]
    best = max(vals)
    ties = [c for c, val in zip(candidates, vals) if val == best]
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


@dataclass
class RunResult:
    """Outcome of one navigation run."""

    start: int
    target: int
    success: bool
    outcome: str
    path: list[int]
    path_length: int | None          # moves to first arrival; stay excluded
    first_arrival: int | None
    steps: int                       # moves actually executed
    seed: int
    walk: str
    config: dict = field(default_factory=dict)
    chosen_values: list[float] = field(default_factory=list)
    values_trace: list[list[float]] | None = None

    def to_dict(self) -> dict:
        d = {
            "start": self.start,
            "target": self.target,
            "success": self.success,
            "outcome": self.outcome,
            "path": list(self.path),
            "path_length": self.path_length,
            "first_arrival": self.first_arrival,
            "steps": self.steps,
            "seed": self.seed,
            "walk": self.walk,
            "config": self.config,
        }
        if self.values_trace is not None:
            d["values_trace"] = self.values_trace
        return d

    def csv_rows(self) -> list[tuple[int, int, float]]:
        """(step, node, chosen_value) per executed move."""
        return [
            (i + 1, node, value)
            for i, (node, value) in enumerate(zip(self.path[1:], self.chosen_values))
        ]


def navigate(env: EnvironmentGraph, matrix: CoincidentMatrix, start: int,
             target: int, cfg: AgentConfig, walk_name: str = "") -> RunResult:
    """Step the agent from start until it holds the target or runs out.

    Each step: perceive and de-inforce at the current node, propagate the
    perceived input through the matrix (reward/penalty circuits active),
    then move to the highest-value accessible node. Success requires
    reaching the target within max_steps moves and occupying it for
    stay_required consecutive steps.
    """
    for node in (start, target):
        if not (1 <= node <= env.node_count):
            raise ValueError(f"node {node} outside 1..{env.node_count}")
    max_steps = cfg.max_steps if cfg.max_steps is not None else env.node_count
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    matrix.lock_size()

    pos = start
    path = [pos]
    chosen_values: list[float] = []
    trace: list[list[float]] | None = [] if cfg.trace else None
    prev_x: np.ndarray | None = None
    first_arrival = 0 if pos == target else None
    consecutive = 1 if pos == target else 0
    success = consecutive >= cfg.stay_required
    steps_taken = 0

    # The loop bound allows the stay to finish for an arrival at exactly
    # max_steps; any stay completed inside it implies a timely arrival.
    while not success and steps_taken < max_steps + cfg.stay_required - 1:
        steps_taken += 1
        active, pairs = perceive(env, pos, cfg.perception)
        matrix_update(matrix, active_vector(matrix, active), pairs)
        x = propagation_input(matrix, pos, active, cfg.input_mode)
        values = signal_gradient(x, matrix, cfg.recursions, cfg.latent, prev_x)
        if trace is not None:
            trace.append([float(t) for t in values])
        nxt = choose_next(values, env, pos, rng)
        prev_x = x
        pos = nxt
        path.append(pos)
        chosen_values.append(float(values[pos - 1]))
        if pos == target:
            consecutive += 1
            if first_arrival is None:
                first_arrival = steps_taken
        else:
            consecutive = 0
        if consecutive >= cfg.stay_required:
            success = True

    outcome = "success" if success else "failure"
    return RunResult(
        start=start,
        target=target,
        success=success,
        outcome=outcome,
        path=path,
        path_length=first_arrival,
        first_arrival=first_arrival,
        steps=steps_taken,
        seed=cfg.seed,
        walk=walk_name,
        config=cfg.to_dict(),
        chosen_values=chosen_values,
        values_trace=trace,
    )
