"""Memory complexity of progressive simulation, and the uniform heuristic used to estimate it."""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Sequence

from loopsim.circuit import Gate, GateSchedule, LoopArchitecture, RandomAngles, progressive_schedule, relevant_modes
from loopsim.errors import ContractError, ImpossibleOutcomeError, UnsupportedArchitectureError
from loopsim.lattice import PCS, LatticeTracker, final_space, measure, step_counts
from loopsim.progressive import derive_rng, run_batch


@dataclass(frozen=True)
class MemoryTrace:
    """Downset size after every schedule event (gates and measurements)."""

    per_step_counts: tuple[int, ...]

    def __post_init__(self):
        if not self.per_step_counts:
            raise ContractError("a memory trace needs at least one step")

    @property
    def peak(self) -> int:
        return max(self.per_step_counts)


def memory_of_outcome(arch: LoopArchitecture, outcome: Sequence[int],
                      schedule: GateSchedule | None = None, *, prefix: bool = False) -> MemoryTrace:
    """Replay the schedule on the lattice tracker with fixed measurement results.

    With ``prefix=True`` the outcome may be shorter than the mode count, and
    the replay stops just before the first measurement it does not cover.
    """
    outcome = tuple(int(x) for x in outcome)
    if not prefix:
        if len(outcome) != arch.mode_count:
            raise ContractError(f"outcome must have {arch.mode_count} entries")
        if sum(outcome) != arch.photon_count:
            raise ImpossibleOutcomeError(
                f"outcome holds {sum(outcome)} photons but the input has {arch.photon_count}")
    tracker = LatticeTracker(arch, schedule)
    counts = [tracker.count()]
    for event in tracker.schedule.events:
        if isinstance(event, Gate):
            tracker.apply_gate(event)
        else:
            if event.mode >= len(outcome):
                break
            x = outcome[event.mode]
            if x not in tracker.marginal_counts(event.mode):
                raise ImpossibleOutcomeError(f"{x} photons in mode {event.mode} are not reachable")
            tracker.measure(event.mode, x)
        counts.append(tracker.count())
    return MemoryTrace(tuple(counts))


def heuristic_marginals(p: PCS, physical_mode: int) -> dict[int, Fraction]:
    """Uniform-heuristic marginal of one mode: fraction of reachable states with each photon count."""
    counts = step_counts(p.heights, p.column(physical_mode))
    total = sum(counts.values())
    return {x: Fraction(c, total) for x, c in counts.items()}


def draw_weighted(counts: dict[int, int], rng: random.Random) -> int:
    """Exact draw from integer weights: a uniform integer below the total, scanned in ascending order."""
    r = rng.randrange(sum(counts.values()))
    for x in sorted(counts):
        r -= counts[x]
        if r < 0:
            return x
    raise AssertionError("unreachable")


def heuristic_sample(arch: LoopArchitecture, rng: random.Random,
                     schedule: GateSchedule | None = None) -> tuple[tuple[int, ...], MemoryTrace]:
    """Sample an outcome uniformly from the feasible set, with its memory trace.

    Marginals come from the reachable space of the whole circuit, conditioned
    on the modes already drawn; only then do they telescope to a uniform
    outcome.  The space mid-schedule is too small for that, since modes not yet
    coupled add completions it cannot see.
    """
    pcs = final_space(arch)
    outcome = []
    for mode in range(arch.mode_count):
        x = draw_weighted(step_counts(pcs.heights, pcs.column(mode)), rng)
        outcome.append(x)
        pcs = measure(pcs, mode, x)
    return tuple(outcome), memory_of_outcome(arch, outcome, schedule)


def heuristic_outcome_probability(arch: LoopArchitecture, outcome: Sequence[int]) -> Fraction:
    """Exact chained heuristic probability of ``outcome``; zero when it is not feasible."""
    outcome = tuple(int(x) for x in outcome)
    if len(outcome) != arch.mode_count:
        raise ContractError(f"outcome must have {arch.mode_count} entries")
    pcs = final_space(arch)
    prob = Fraction(1)
    for mode, x in enumerate(outcome):
        p = heuristic_marginals(pcs, mode).get(x)
        if p is None:
            return Fraction(0)
        prob *= p
        pcs = measure(pcs, mode, x)
    return prob


def local_heuristic_sample(arch: LoopArchitecture, rng: random.Random,
                           schedule: GateSchedule | None = None) -> tuple[tuple[int, ...], MemoryTrace]:
    """Cheaper variant drawing each mode from the space reached so far along the schedule.

    Not uniform over outcomes: modes coupled later are invisible when earlier
    modes are drawn.  Its memory statistics track those of physical sampling
    closely, so it is kept as an alternative predictor.
    """
    tracker = LatticeTracker(arch, schedule)
    outcome = [0] * arch.mode_count
    counts = [tracker.count()]
    for event in tracker.schedule.events:
        if isinstance(event, Gate):
            tracker.apply_gate(event)
        else:
            x = draw_weighted(tracker.marginal_counts(event.mode), rng)
            outcome[event.mode] = x
            tracker.measure(event.mode, x)
        counts.append(tracker.count())
    return tuple(outcome), MemoryTrace(tuple(counts))


SAMPLERS = {"uniform": heuristic_sample, "local": local_heuristic_sample}
DISTRIBUTION_TAGS = {"uniform": "p_H", "local": "p_H-local"}


def nearest_rank(sorted_values: Sequence[int], pct: float) -> int:
    """Nearest-rank percentile of an ascending sequence."""
    if not sorted_values:
        raise ContractError("percentile of an empty sample")
    rank = max(1, math.ceil(pct / 100 * len(sorted_values)))
    return sorted_values[rank - 1]


@dataclass(frozen=True)
class ComplexityStats:
    samples: tuple[int, ...]
    mean: Fraction
    p25: int
    p50: int
    p75: int
    p95: int
    distribution: str = "p_H"

    @property
    def n(self) -> int:
        return len(self.samples)

    def quantiles(self) -> dict[str, int]:
        return {"p25": self.p25, "p50": self.p50, "p75": self.p75, "p95": self.p95}

    def to_dict(self) -> dict:
        """JSON-ready form; memory values become decimal strings."""
        return {"distribution": self.distribution, "mean": format_fraction(self.mean),
                **{k: str(v) for k, v in self.quantiles().items()}, "N": self.n}


def format_fraction(value: Fraction, places: int = 6) -> str:
    with localcontext() as ctx:
        ctx.prec = max(50, len(str(value.numerator)) + places + 5)
        return f"{Decimal(value.numerator) / Decimal(value.denominator):.{places}f}"


def batch_stats(samples: Iterable[int | MemoryTrace], distribution: str = "p_H") -> ComplexityStats:
    peaks = tuple(s.peak if isinstance(s, MemoryTrace) else int(s) for s in samples)
    if not peaks:
        raise ContractError("statistics need at least one sample")
    ordered = sorted(peaks)
    return ComplexityStats(
        samples=peaks,
        mean=Fraction(sum(peaks), len(peaks)),
        p25=nearest_rank(ordered, 25),
        p50=nearest_rank(ordered, 50),
        p75=nearest_rank(ordered, 75),
        p95=nearest_rank(ordered, 95),
        distribution=distribution,
    )


def _heuristic_chunk(args) -> list[tuple[tuple[int, ...], MemoryTrace]]:
    arch, master_seed, indices, sampler = args
    schedule = progressive_schedule(arch)
    draw = SAMPLERS[sampler]
    return [draw(arch, derive_rng(master_seed, i), schedule) for i in indices]


def heuristic_batch(arch: LoopArchitecture, n: int, master_seed: int, workers: int = 1,
                    sampler: str = "uniform") -> list[tuple[tuple[int, ...], MemoryTrace]]:
    """``n`` heuristic draws; draw ``i`` uses the stream ``(master_seed, i)``."""
    if n < 1:
        raise ContractError(f"sample count must be positive, got {n}")
    if sampler not in SAMPLERS:
        raise ContractError(f"unknown heuristic {sampler!r}; choose from {sorted(SAMPLERS)}")
    if workers <= 1:
        return _heuristic_chunk((arch, master_seed, range(n), sampler))
    size = max(1, math.ceil(n / (workers * 4)))
    jobs = [(arch, master_seed, range(s, min(n, s + size)), sampler) for s in range(0, n, size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [item for chunk in pool.map(_heuristic_chunk, jobs) for item in chunk]


def _true_group(args) -> list[int]:
    arch, master_seed, group, take = args
    angle_seed = derive_rng(master_seed, group).getrandbits(63)
    grouped = arch.with_angles(RandomAngles(angle_seed))
    schedule = progressive_schedule(grouped)
    return [memory_of_outcome(grouped, rec.outcome, schedule).peak
            for rec in run_batch(grouped, take, angle_seed)]


def true_memory_samples(arch: LoopArchitecture, n: int, master_seed: int, group_size: int = 10,
                        workers: int = 1) -> list[int]:
    """Peak memory of ``n`` outcomes drawn from the physical distribution, averaged over angles.

    Samples come in groups; every group draws fresh uniform angles seeded by
    ``(master_seed, group)`` and reuses them for ``group_size`` samples.
    """
    if n < 1 or group_size < 1:
        raise ContractError("sample count and group size must be positive")
    jobs = [(arch, master_seed, g, min(group_size, n - start))
            for g, start in enumerate(range(0, n, group_size))]
    if workers <= 1:
        chunks = map(_true_group, jobs)
        return [peak for chunk in chunks for peak in chunk]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [peak for chunk in pool.map(_true_group, jobs) for peak in chunk]


@dataclass(frozen=True)
class RuntimeClass:
    """Asymptotic runtime ``O(m * loops * base^(2(loops-1)) * 2.6^exponent)`` of a power-law composite.

    For base 1 the polynomial factor is ``loops^3`` and the exponent is the loop count.
    """

    base: int
    loops: int
    mode_count: int | None
    poly_factors: dict = field(default_factory=dict)
    exponential_base: float = 2.6
    exponent: int = 0

    def expression(self) -> str:
        if self.base == 1:
            return "O(m * L^3 * 2.6^L)"
        return "O(m * L * l^(2(L-1)) * 2.6^(l^(L-1)))"

    def to_dict(self) -> dict:
        return {"expression": self.expression(), "base": self.base, "loops": self.loops,
                "m": self.mode_count, "factors": self.poly_factors,
                "exponential_base": self.exponential_base, "exponent": self.exponent}


@dataclass(frozen=True)
class Bounds:
    relevant_modes: int
    runtime: RuntimeClass | None

    def to_dict(self) -> dict:
        return {"R": self.relevant_modes, "runtime_class": None if self.runtime is None else self.runtime.to_dict()}


def power_law_base(loops: Sequence[int]) -> int | None:
    """Base ``l`` when ``loops == (1, l, l^2, ...)``, else ``None``."""
    loops = tuple(loops)
    if not loops or loops[0] != 1:
        return None
    if len(loops) == 1:
        return 1
    base = loops[1]
    return base if all(ell == base ** i for i, ell in enumerate(loops)) else None


def theoretical_bounds(loops: Sequence[int], m: int | None = None, *, require_runtime: bool = False) -> Bounds:
    """Relevant-mode count and, for power-law composites, the runtime class."""
    loops = tuple(int(x) for x in loops)
    R = relevant_modes(loops)
    base = power_law_base(loops)
    if base is None:
        if require_runtime:
            raise UnsupportedArchitectureError(f"runtime class is only known for power-law loops, got {loops}")
        return Bounds(R, None)
    L = len(loops)
    if base == 1:
        runtime = RuntimeClass(1, L, m, {"m": 1, "L^3": L ** 3}, exponent=L)
    else:
        runtime = RuntimeClass(base, L, m, {"m": 1, "L": L, "l^(2(L-1))": base ** (2 * (L - 1))},
                               exponent=base ** (L - 1))
    return Bounds(R, runtime)
