import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopsim.circuit import LoopArchitecture, RandomAngles, alternating_input, expand_circuit
from loopsim.complexity import (
    MemoryTrace,
    batch_stats,
    draw_weighted,
    heuristic_batch,
    heuristic_marginals,
    heuristic_outcome_probability,
    heuristic_sample,
    memory_of_outcome,
    nearest_rank,
    theoretical_bounds,
    true_memory_samples,
)
from loopsim.errors import ContractError, ImpossibleOutcomeError, UnsupportedArchitectureError
from loopsim.lattice import PCS, LatticeTracker, final_space, measure, step_counts
from oracles import dense_probabilities


def heuristic_tree(arch):
    """Every feasible outcome with its exact chained heuristic probability."""
    out = {}

    def walk(pcs, mode, outcome, prob):
        if mode == arch.mode_count:
            out[outcome] = prob
            return
        for x, p in heuristic_marginals(pcs, mode).items():
            walk(measure(pcs, mode, x), mode + 1, outcome + (x,), prob * p)

    walk(final_space(arch), 0, (), Fraction(1))
    return out


def test_memory_single_photon_two_modes():
    arch = LoopArchitecture(2, (1,), (1, 0))
    trace = memory_of_outcome(arch, (1, 0))
    assert trace.per_step_counts == (1, 2, 1, 1)
    assert trace.peak == 2


def test_memory_two_photons_two_modes():
    trace = memory_of_outcome(LoopArchitecture(2, (1,), (1, 1)), (1, 1))
    assert trace.peak == 3  # the downset of (2, 2)


def test_memory_errors():
    arch = LoopArchitecture(3, (1,), (1, 1, 1))
    with pytest.raises(ImpossibleOutcomeError):
        memory_of_outcome(arch, (1, 1, 0))
    with pytest.raises(ContractError):
        memory_of_outcome(arch, (1, 1))
    with pytest.raises(UnsupportedArchitectureError):
        memory_of_outcome(LoopArchitecture(3, (2,), (1, 0, 1)), (1, 0, 1))


def test_memory_rejects_unreachable_outcome():
    # photons entering at bin 2 arrive after gate (0, 1) has fired, so they never reach bin 0
    arch = LoopArchitecture(3, (1,), (1, 0, 1))
    assert memory_of_outcome(arch, (0, 0, 2)).peak >= 1
    with pytest.raises(ImpossibleOutcomeError):
        memory_of_outcome(LoopArchitecture(3, (1,), (0, 0, 2)), (2, 0, 0))


def test_prefix_trace_is_outcome_independent():
    arch = LoopArchitecture(3, (1,), (1, 1, 1))
    prefixes = {memory_of_outcome(arch, (x,), prefix=True).per_step_counts[:2] for x in range(3)}
    assert len(prefixes) == 1


def test_memory_trace_invariants():
    with pytest.raises(ContractError):
        MemoryTrace(())
    assert MemoryTrace((1, 5, 2)).peak == 5


def test_heuristic_marginals_examples():
    assert heuristic_marginals(PCS((1, 1), (0, 1)), 0) == {0: Fraction(1, 2), 1: Fraction(1, 2)}
    assert heuristic_marginals(PCS((0, 0, 2), (0, 1, 2)), 2) == {2: Fraction(1)}


@settings(max_examples=500, deadline=None)
@given(width=st.integers(0, 6), h=st.integers(0, 6), data=st.data())
def test_heuristic_marginals_sum_to_one(width, h, data):
    mu = tuple(sorted(data.draw(st.lists(st.integers(0, h), min_size=width, max_size=width)))) + (h,)
    mode = data.draw(st.integers(0, width))
    assert sum(heuristic_marginals(PCS(mu, tuple(range(len(mu)))), mode).values()) == 1


@pytest.mark.parametrize("m,loops,occ", [
    (3, (1,), (1, 1, 0)),
    (4, (1, 2), (1, 0, 1, 0)),
    (5, (1, 3), (1, 1, 0, 1, 0)),
])
def test_heuristic_is_uniform_and_matches_physical_support(m, loops, occ):
    arch = LoopArchitecture(m, loops, occ, RandomAngles(3))
    tree = heuristic_tree(arch)
    assert set(tree.values()) == {Fraction(1, len(tree))}
    dense = dense_probabilities(m, expand_circuit(arch), occ)
    assert set(tree) == {o for o, p in dense.items() if p > 1e-12}


def test_mid_schedule_counts_miss_future_completions():
    arch = LoopArchitecture(3, (1,), (1, 1, 0))
    tracker = LatticeTracker(arch)
    tracker.apply_gate(tracker.schedule.events[0])
    assert tracker.marginal_counts(0) == {0: 1, 1: 1, 2: 1}
    pcs = final_space(arch)
    assert step_counts(pcs.heights, pcs.column(0)) == {0: 3, 1: 2, 2: 1}


def test_heuristic_sample_replay_and_photons():
    arch = LoopArchitecture(7, (1, 2, 3), alternating_input(7))
    rng = random.Random(4)
    for _ in range(30):
        outcome, trace = heuristic_sample(arch, rng)
        assert sum(outcome) == arch.photon_count
        assert trace == memory_of_outcome(arch, outcome)


def test_heuristic_sample_uniform_chi_square():
    arch = LoopArchitecture(3, (1,), (1, 1, 0))
    feasible = heuristic_tree(arch)
    n = 50000
    counts = dict.fromkeys(feasible, 0)
    for outcome, _ in heuristic_batch(arch, n, 21):
        counts[outcome] += 1
    expected = n / len(feasible)
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    # 1% critical value of chi-square with 5 degrees of freedom
    assert len(feasible) == 6 and chi2 < 15.086


def test_draw_weighted_big_integers():
    rng = random.Random(0)
    huge = 10**40
    draws = {draw_weighted({0: huge, 7: huge}, rng) for _ in range(50)}
    assert draws == {0, 7}
    assert draw_weighted({3: 1}, rng) == 3


def test_batch_stats():
    s = batch_stats([7])
    assert (s.p25, s.p50, s.p75, s.p95, s.mean, s.n) == (7, 7, 7, 7, 7, 1)
    s = batch_stats([4, 4, 4])
    assert s.mean == 4
    s = batch_stats(range(1, 101))
    assert (s.p25, s.p50, s.p75, s.p95) == (25, 50, 75, 95)
    assert s.mean == Fraction(101, 2)
    with pytest.raises(ContractError):
        batch_stats([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 10**30), min_size=1, max_size=40))
def test_batch_stats_invariants(values):
    s = batch_stats(values)
    assert s.p25 <= s.p50 <= s.p75 <= s.p95
    assert min(values) <= s.mean <= max(values)
    assert s.p95 == nearest_rank(sorted(values), 95)


def test_heuristic_batch_reproducible_and_worker_independent():
    arch = LoopArchitecture(9, (1, 3), alternating_input(9))
    a = heuristic_batch(arch, 40, 5)
    assert a == heuristic_batch(arch, 40, 5, workers=2)
    assert a != heuristic_batch(arch, 40, 6)


def test_true_memory_samples_groups():
    arch = LoopArchitecture(6, (1, 2), alternating_input(6))
    peaks = true_memory_samples(arch, 25, 3, group_size=10)
    assert len(peaks) == 25
    assert peaks == true_memory_samples(arch, 25, 3, group_size=10, workers=2)


def test_bounds():
    b = theoretical_bounds((1, 6, 36))
    assert b.relevant_modes == 44
    assert b.runtime.base == 6 and b.runtime.exponent == 36
    b = theoretical_bounds((1, 1, 1))
    assert b.relevant_modes == 4
    assert b.runtime.expression() == "O(m * L^3 * 2.6^L)" and b.runtime.exponent == 3
    b = theoretical_bounds((1, 5, 25), 80)
    assert b.runtime.exponent == 25 and b.runtime.mode_count == 80
    assert theoretical_bounds((1, 14)).relevant_modes == 16
    assert theoretical_bounds((1, 2, 3)).runtime is None
    with pytest.raises(UnsupportedArchitectureError):
        theoretical_bounds((1, 2, 3), require_runtime=True)


def test_local_variant_replays_and_is_not_uniform():
    arch = LoopArchitecture(7, (1, 2, 3), alternating_input(7))
    for outcome, trace in heuristic_batch(arch, 20, 2, sampler="local"):
        assert trace == memory_of_outcome(arch, outcome)
    small = LoopArchitecture(3, (1,), (1, 1, 0))
    n = 30000
    hits = sum(o == (2, 0, 0) for o, _ in heuristic_batch(small, n, 1, sampler="local"))
    # the first mode sees three equally weighted states, so (2, 0, 0) gets 1/3 instead of 1/6
    assert abs(hits / n - 1 / 3) < 0.02
    with pytest.raises(ContractError):
        heuristic_batch(small, 2, 1, sampler="nope")


def test_heuristic_outcome_probability():
    arch = LoopArchitecture(3, (1,), (1, 1, 0))
    assert heuristic_outcome_probability(arch, (2, 0, 0)) == Fraction(1, 6)
    assert heuristic_outcome_probability(arch, (0, 0, 3)) == 0
    assert all(heuristic_outcome_probability(arch, o) == p for o, p in heuristic_tree(arch).items())
    with pytest.raises(ContractError):
        heuristic_outcome_probability(arch, (1, 1))
