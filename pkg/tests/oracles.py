"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np

from loopsim.circuit import Gate
from loopsim.fock import sample_ascending
from loopsim.lattice import LatticeTracker
from loopsim.progressive import ProgressiveRun


def poly_amplitude(n_a, n_b, N_a, N_b, theta):
    """Expand ``(c x - s y)^n_a (s x + c y)^n_b / sqrt(n_a! n_b!)`` and read off the ``x^N_a y^N_b`` term."""
    c, s = math.cos(theta), math.sin(theta)
    coeffs: dict[tuple[int, int], float] = {(0, 0): 1.0}
    factors = [(c, -s)] * n_a + [(s, c)] * n_b
    for fx, fy in factors:
        nxt: dict[tuple[int, int], float] = {}
        for (px, py), v in coeffs.items():
            nxt[(px + 1, py)] = nxt.get((px + 1, py), 0.0) + v * fx
            nxt[(px, py + 1)] = nxt.get((px, py + 1), 0.0) + v * fy
        coeffs = nxt
    coef = coeffs.get((N_a, N_b), 0.0)
    return coef * math.sqrt(math.factorial(N_a) * math.factorial(N_b) / (math.factorial(n_a) * math.factorial(n_b)))


def dense_unitary(m, gates):
    """Single-particle ``m x m`` unitary of a gate list; gate matrix ``[[c, s], [-s, c]]`` on ``(a, b)``."""
    U = np.eye(m)
    for g in gates:
        G = np.eye(m)
        c, s = math.cos(g.theta), math.sin(g.theta)
        G[g.mode_a, g.mode_a] = c
        G[g.mode_a, g.mode_b] = s
        G[g.mode_b, g.mode_a] = -s
        G[g.mode_b, g.mode_b] = c
        U = G @ U
    return U


def permanent(M):
    n = M.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    for perm in itertools.permutations(range(n)):
        total += math.prod(M[i, perm[i]] for i in range(n))
    return total


def compositions(n, m):
    """All occupation tuples of ``n`` photons in ``m`` modes."""
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, m - 1):
            yield (first,) + rest


def dense_probabilities(m, gates, input_occ):
    """Output distribution via permanents of the full unitary."""
    U = dense_unitary(m, gates)
    cols = [j for j, k in enumerate(input_occ) for _ in range(k)]
    denom_in = math.prod(math.factorial(k) for k in input_occ)
    out = {}
    for occ in compositions(sum(input_occ), m):
        rows = [i for i, k in enumerate(occ) for _ in range(k)]
        sub = U[np.ix_(rows, cols)]
        out[occ] = permanent(sub) ** 2 / (denom_in * math.prod(math.factorial(k) for k in occ))
    return out


def brute_paths(width, height):
    """Every nondecreasing height tuple of length ``width`` ending at ``height``."""
    if width == 0:
        return [()]
    return [p for p in itertools.combinations_with_replacement(range(height + 1), width) if p[-1] == height]


def brute_interval(top, bottom):
    return [p for p in brute_paths(len(top), top[-1] if top else 0)
            if all(b <= x <= t for b, x, t in zip(bottom, p, top))]


def steps(path):
    return tuple(h - (path[i - 1] if i else 0) for i, h in enumerate(path))


def lockstep(arch, rng):
    """Walk simulator and lattice tracker together; yield (support, downset image) after every event."""
    run = ProgressiveRun(arch)
    tracker = LatticeTracker(arch, run.schedule)
    for event in run.schedule.events:
        if isinstance(event, Gate):
            run.apply_gate(event)
            tracker.apply_gate(event)
        else:
            x = sample_ascending(run.marginals(event.mode), rng.random())
            run.collapse(event.mode, x)
            tracker.measure(event.mode, x)
        yield run.physical_support(1e-12), set(tracker.pcs.physical_states())
