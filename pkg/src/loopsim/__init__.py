"""Progressive simulation of loop-based time-bin boson samplers.

The package has two halves. The simulation half (:mod:`loopsim.fock`,
:mod:`loopsim.circuit`, :mod:`loopsim.progressive`) samples photon-number
outcomes by evolving a sparse Fock-basis wavefunction through small causal-cone
components and measuring one mode after each. The accounting half
(:mod:`loopsim.lattice`, :mod:`loopsim.complexity`) tracks the reachable state
space of the same run as lattice-path downsets and estimates memory cost.
"""

from loopsim.circuit import LoopArchitecture, expand_circuit, progressive_schedule, relevant_modes
from loopsim.complexity import (
    ComplexityStats,
    MemoryTrace,
    batch_stats,
    heuristic_sample,
    memory_of_outcome,
    theoretical_bounds,
)
from loopsim.errors import (
    ContractError,
    ImpossibleOutcomeError,
    LoopsimError,
    SupportLimitExceeded,
    UnsupportedArchitectureError,
)
from loopsim.fock import BeamsplitterGate, SparseState, fock_dimension
from loopsim.lattice import PCS, LatticeTracker, SkewDiagram, count_interval
from loopsim.progressive import SampleRecord, outcome_probability, run_batch, sample_once

__version__ = "0.1.0"

__all__ = [
    "BeamsplitterGate",
    "ComplexityStats",
    "ContractError",
    "ImpossibleOutcomeError",
    "LatticeTracker",
    "LoopArchitecture",
    "LoopsimError",
    "MemoryTrace",
    "PCS",
    "SampleRecord",
    "SkewDiagram",
    "SparseState",
    "SupportLimitExceeded",
    "UnsupportedArchitectureError",
    "batch_stats",
    "count_interval",
    "expand_circuit",
    "fock_dimension",
    "heuristic_sample",
    "memory_of_outcome",
    "outcome_probability",
    "progressive_schedule",
    "relevant_modes",
    "run_batch",
    "sample_once",
    "theoretical_bounds",
]
