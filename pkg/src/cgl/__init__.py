"""Coincident graph learning: a structurally dynamic graph automaton.

An agent walks an environment graph once, building an internal weighted
graph (the coincident matrix) from locally perceived coincidences. Reward
and penalty nodes wired into that matrix shape a signal gradient that the
agent follows step by step; de-inforcement of revisited edges supplies the
exploratory drift.
"""

from cgl.graphs import (
    EnvironmentGraph,
    generate_lattice,
    generate_path,
    generate_watts_strogatz,
    load_graph,
    save_graph,
)
from cgl.core import (
    CoincidentMatrix,
    cell_update,
    matrix_update,
    memory_vector,
    normalize_display,
    recurse,
    signal_gradient,
    weighted_degrees,
    wire_penalty,
    wire_reward,
)
from cgl.agent import AgentConfig, RunResult, choose_next, navigate, perceive, train
from cgl.harness import TrialBatch, TrialStats, oracle_walk, run_trials, sample_pairs, summarize
from cgl.scenarios import run_scenario

__version__ = "0.1.0"

__all__ = [
    "AgentConfig",
    "CoincidentMatrix",
    "EnvironmentGraph",
    "RunResult",
    "TrialBatch",
    "TrialStats",
    "cell_update",
    "choose_next",
    "generate_lattice",
    "generate_path",
    "generate_watts_strogatz",
    "load_graph",
    "matrix_update",
    "memory_vector",
    "navigate",
    "normalize_display",
    "oracle_walk",
    "perceive",
    "recurse",
    "run_scenario",
    "run_trials",
    "sample_pairs",
    "save_graph",
    "signal_gradient",
    "summarize",
    "train",
    "weighted_degrees",
    "wire_penalty",
    "wire_reward",
    "__version__",
]
