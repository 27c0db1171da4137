"""State preparation circuits synthesized from LIM decision diagrams."""

from .circuit import Circuit, Gate, GateCounts, counts, from_json, inverse, to_json, to_qasm
from .dd import LimTDD, Node, build_from_statevector, find_iso, norm_table, semantics_to_statevector, stats
from .iso import GroupKind
from .lim import LIM, LimFactor
from .simulator import fidelity_up_to_phase, random_cliffordT_state, run, run_main
from .synth import (
    baseline_ucr,
    disentangle,
    prepare_state,
    state_pre_1,
    state_pre_2,
    state_pre_3,
    state_pre_4,
)
from .transpile import transpile

__all__ = [
    "Circuit", "Gate", "GateCounts", "counts", "from_json", "inverse", "to_json", "to_qasm",
    "LimTDD", "Node", "build_from_statevector", "find_iso", "norm_table", "semantics_to_statevector", "stats",
    "GroupKind", "LIM", "LimFactor",
    "fidelity_up_to_phase", "random_cliffordT_state", "run", "run_main",
    "baseline_ucr", "disentangle", "prepare_state",
    "state_pre_1", "state_pre_2", "state_pre_3", "state_pre_4",
    "transpile",
]
