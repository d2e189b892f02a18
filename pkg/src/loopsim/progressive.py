"""Progressive sampling: strong simulation of each causal-cone component, then one measurement."""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from loopsim.circuit import (
    Gate,
    GateSchedule,
    LoopArchitecture,
    expand_circuit,
    loop_index_of_gates,
    progressive_schedule,
)
from loopsim.errors import ContractError, ImpossibleOutcomeError, SupportLimitExceeded
from loopsim.fock import (
    SparseState,
    apply_loss,
    apply_rotation,
    collapse_and_drop,
    measurement_marginals,
    sample_ascending,
)


def derive_rng(master_seed: int, index: int) -> random.Random:
    """Independent stream for run ``index`` of a batch seeded with ``master_seed``."""
    words = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)).generate_state(4, dtype=np.uint64)
    return random.Random(int.from_bytes(words.tobytes(), "little"))


@dataclass(frozen=True)
class SampleRecord:
    outcome: tuple[int, ...]
    support_trace: tuple[int, ...]
    peak_support: int
    chained_probability: float
    lost: int = 0

    def to_dict(self) -> dict:
        return {"outcome": list(self.outcome), "peak_support": self.peak_support,
                "chained_probability": self.chained_probability, "lost": self.lost}


def loss_points(arch: LoopArchitecture) -> dict[int, tuple[int, ...]]:
    """Gate index -> modes that suffer loss right after that gate.

    One loss location per (loop, mode) pair, placed after the last gate of the
    loop that touches the mode.
    """
    last: dict[tuple[int, int], int] = {}
    for i, (g, j) in enumerate(zip(expand_circuit(arch), loop_index_of_gates(arch))):
        last[(j, g.mode_a)] = i
        last[(j, g.mode_b)] = i
    points: dict[int, list[int]] = {}
    for (_, mode), i in sorted(last.items(), key=lambda kv: (kv[1], kv[0][1])):
        points.setdefault(i, []).append(mode)
    return {i: tuple(modes) for i, modes in points.items()}


class ProgressiveRun:
    """Mutable walker over a :class:`GateSchedule` holding the live wavefunction.

    The state's keys cover ``window``, the physical modes that have been
    activated and not yet measured.  Mode 0 starts active; any other mode is
    activated with its input occupation when a gate first touches it.
    """

    def __init__(self, arch: LoopArchitecture, schedule: GateSchedule | None = None,
                 prune: float | None = None):
        self.arch = arch
        self.schedule = schedule if schedule is not None else progressive_schedule(arch)
        self.prune = prune
        self.window: list[int] = [0]
        self.state = SparseState.basis((arch.input[0],))
        self.activated = {0}
        self.lost = 0
        self._loss = loss_points(arch) if arch.loss > 0 else {}

    def position(self, mode: int) -> int:
        return self.window.index(mode)

    def activate(self, mode: int) -> None:
        if mode in self.activated:
            return
        self.activated.add(mode)
        self.window.append(mode)
        self.state = self.state.with_mode(self.arch.input[mode])

    def apply_gate(self, event: Gate, rng=None) -> None:
        g = event.gate
        self.activate(g.mode_a)
        self.activate(g.mode_b)
        self.state = apply_rotation(self.state, self.position(g.mode_a), self.position(g.mode_b),
                                    g.theta, self.prune)
        for mode in self._loss.get(event.index, ()):
            if rng is None:
                raise ContractError("a lossy architecture needs an rng")
            self.state, lost = apply_loss(self.state, self.position(mode), self.arch.loss, rng)
            self.lost += lost

    def marginals(self, mode: int) -> dict[int, float]:
        self.activate(mode)
        return measurement_marginals(self.state, self.position(mode))

    def collapse(self, mode: int, outcome: int) -> None:
        pos = self.position(mode)
        self.state = collapse_and_drop(self.state, pos, outcome)
        del self.window[pos]

    def physical_support(self, threshold: float = 0.0) -> set[tuple[tuple[int, int], ...]]:
        """Support as sets of ``(physical mode, photons)`` pairs, sorted by mode."""
        order = sorted(range(len(self.window)), key=self.window.__getitem__)
        return {tuple((self.window[i], key[i]) for i in order)
                for key, amp in self.state.terms.items() if abs(amp) > threshold}


def sample_once(arch: LoopArchitecture, rng: random.Random, *, schedule: GateSchedule | None = None,
                max_support: int | None = None, prune: float | None = None) -> SampleRecord:
    """Draw one outcome, measuring each mode right after its causal-cone component.

    Each measurement draws ``u = rng.random()`` and takes the inverse CDF over
    ascending photon counts.  Loss, when configured, consumes extra draws.
    """
    run = ProgressiveRun(arch, schedule, prune)
    outcome = [0] * arch.mode_count
    trace: list[int] = []
    probability = 1.0
    for step, event in enumerate(run.schedule.events):
        if isinstance(event, Gate):
            run.apply_gate(event, rng)
        else:
            marg = run.marginals(event.mode)
            x = sample_ascending(marg, rng.random())
            probability *= marg[x]
            run.collapse(event.mode, x)
            outcome[event.mode] = x
        size = len(run.state)
        trace.append(size)
        if max_support is not None and size > max_support:
            raise SupportLimitExceeded(step, size, max_support)
    return SampleRecord(tuple(outcome), tuple(trace), max(trace), probability, run.lost)


def outcome_probability(arch: LoopArchitecture, outcome: Sequence[int],
                        schedule: GateSchedule | None = None) -> float:
    """Exact probability of ``outcome`` as a product of conditional marginals."""
    if arch.loss > 0:
        raise ContractError("exact outcome probabilities are only defined for lossless architectures")
    outcome = tuple(int(x) for x in outcome)
    if len(outcome) != arch.mode_count or any(x < 0 for x in outcome):
        raise ContractError(f"outcome must be {arch.mode_count} non-negative integers")
    if sum(outcome) != arch.photon_count:
        return 0.0
    run = ProgressiveRun(arch, schedule)
    probability = 1.0
    for event in run.schedule.events:
        if isinstance(event, Gate):
            run.apply_gate(event)
            continue
        p = run.marginals(event.mode).get(outcome[event.mode], 0.0)
        if p <= 0.0:
            return 0.0
        probability *= p
        try:
            run.collapse(event.mode, outcome[event.mode])
        except ImpossibleOutcomeError:
            return 0.0
    return probability


def _batch_chunk(args) -> list[SampleRecord]:
    arch, master_seed, indices, max_support = args
    schedule = progressive_schedule(arch)
    return [sample_once(arch, derive_rng(master_seed, i), schedule=schedule, max_support=max_support)
            for i in indices]


def _chunks(n: int, workers: int) -> list[range]:
    size = max(1, math.ceil(n / (workers * 4)))
    return [range(s, min(n, s + size)) for s in range(0, n, size)]


def run_batch(arch: LoopArchitecture, n: int, master_seed: int, *, workers: int = 1,
              max_support: int | None = None) -> list[SampleRecord]:
    """``n`` independent samples; run ``i`` uses ``derive_rng(master_seed, i)``.

    Output is ordered by run index, so it does not depend on ``workers``.
    """
    if n < 1:
        raise ContractError(f"sample count must be positive, got {n}")
    if workers <= 1:
        return _batch_chunk((arch, master_seed, range(n), max_support))
    jobs = [(arch, master_seed, r, max_support) for r in _chunks(n, workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [rec for chunk in pool.map(_batch_chunk, jobs) for rec in chunk]
