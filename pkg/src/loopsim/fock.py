"""Sparse Fock-basis states and the operations the progressive sampler needs.

Amplitude convention: a beamsplitter ``B(theta) = [[cos, sin], [-sin, cos]]``
acts on creation operators as ``a_c^dag -> sum_d B[d, c] a_d^dag``.  With this
convention ``|1, 0> -> cos|1, 0> - sin|0, 1>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from loopsim.errors import ContractError, ImpossibleOutcomeError

FockBasisState = tuple[int, ...]


def fock_dimension(m: int, n: int) -> int:
    """Dimension of the Fock space of ``n`` photons in ``m`` modes."""
    if m < 1 or n < 0:
        raise ContractError(f"need m >= 1 and n >= 0, got m={m}, n={n}")
    return math.comb(m - 1 + n, n)


@dataclass(frozen=True)
class BeamsplitterGate:
    """A two-mode rotation ``B_{a,b}(theta)``; ``mode_a`` plays the first row/column."""

    mode_a: int
    mode_b: int
    theta: float = 0.0

    def __post_init__(self):
        if not 0 <= self.mode_a < self.mode_b:
            raise ContractError(f"beamsplitter needs 0 <= mode_a < mode_b, got ({self.mode_a}, {self.mode_b})")


def bs_amplitude(n_a: int, n_b: int, N_a: int, N_b: int, theta: float) -> float:
    """Transition amplitude ``<N_a, N_b| B(theta) |n_a, n_b>``.

    Sums over ``k``, the photons that start and end in mode ``a``; the
    remaining ``l = N_a - k`` photons in output ``a`` came from mode ``b``.
    The result is real because the gate carries no phases.
    """
    if min(n_a, n_b, N_a, N_b) < 0:
        raise ContractError("photon numbers must be non-negative")
    if n_a + n_b != N_a + N_b:
        raise ContractError(f"photon number not conserved: {n_a}+{n_b} -> {N_a}+{N_b}")
    c, s = math.cos(theta), math.sin(theta)
    norm = math.sqrt(float(Fraction(math.factorial(N_a) * math.factorial(N_b),
                                    math.factorial(n_a) * math.factorial(n_b))))
    total = 0.0
    for k in range(max(0, N_a - n_b), min(n_a, N_a) + 1):
        l = N_a - k
        sign = -1.0 if (n_a - k) % 2 else 1.0
        total += (sign * math.comb(n_a, k) * math.comb(n_b, l)
                  * c ** (k + n_b - l) * s ** (n_a - k + l))
    return norm * total


@lru_cache(maxsize=4096)
def _block(total: int, theta: float) -> np.ndarray:
    out = np.empty((total + 1, total + 1))
    for n_a in range(total + 1):
        for N_a in range(total + 1):
            out[N_a, n_a] = bs_amplitude(n_a, total - n_a, N_a, total - N_a, theta)
    out.setflags(write=False)
    return out


def bs_block(total: int, theta: float) -> np.ndarray:
    """The ``(total+1) x (total+1)`` matrix ``U[N_a, n_a]`` on the fixed-photon-number block."""
    return _block(int(total), float(theta))


class SparseState:
    """A wavefunction stored as a map from occupation tuples to complex amplitudes.

    Keys cover only the active window of modes; which physical modes those are
    is the caller's business.  Operations return new states.
    """

    __slots__ = ("terms", "mode_count")

    def __init__(self, terms: Mapping[FockBasisState, complex], mode_count: int):
        self.terms = dict(terms)
        self.mode_count = mode_count

    @classmethod
    def basis(cls, occupations: Iterable[int]) -> "SparseState":
        occ = tuple(int(v) for v in occupations)
        if any(v < 0 for v in occ):
            raise ContractError(f"negative occupation in {occ}")
        return cls({occ: 1.0 + 0.0j}, len(occ))

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"SparseState(mode_count={self.mode_count}, support={len(self.terms)})"

    @property
    def photon_number(self) -> int:
        for key in self.terms:
            return sum(key)
        return 0

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.terms.values())

    def normalized(self) -> "SparseState":
        scale = 1.0 / math.sqrt(self.norm_squared())
        return SparseState({k: a * scale for k, a in self.terms.items()}, self.mode_count)

    def pruned(self, threshold: float) -> "SparseState":
        return SparseState({k: a for k, a in self.terms.items() if abs(a) > threshold}, self.mode_count)

    def with_mode(self, occupation: int) -> "SparseState":
        """Tensor on one extra mode, appended last, holding ``occupation`` photons."""
        return SparseState({k + (occupation,): a for k, a in self.terms.items()}, self.mode_count + 1)

    def probabilities(self) -> dict[FockBasisState, float]:
        return {k: abs(a) ** 2 for k, a in self.terms.items()}


def _rotate(terms: Mapping[FockBasisState, complex], pa: int, pb: int, theta: float,
            prune: float | None) -> dict[FockBasisState, complex]:
    out: dict[FockBasisState, complex] = {}
    for key, amp in terms.items():
        n_a, n_b = key[pa], key[pb]
        total = n_a + n_b
        if total == 0:
            out[key] = out.get(key, 0.0) + amp
            continue
        column = bs_block(total, theta)[:, n_a]
        base = list(key)
        for N_a in range(total + 1):
            u = column[N_a]
            if u == 0.0:
                continue
            base[pa] = N_a
            base[pb] = total - N_a
            new = tuple(base)
            out[new] = out.get(new, 0.0) + u * amp
    if prune is not None:
        out = {k: a for k, a in out.items() if abs(a) > prune}
    return out


def apply_beamsplitter(state: SparseState, gate: BeamsplitterGate, prune: float | None = None) -> SparseState:
    """Evolve ``state`` through ``gate``; gate indices address positions in the state's keys.

    Exact zeros from the block matrix are skipped, but no amplitude is pruned
    unless ``prune`` is given.
    """
    if gate.mode_b >= state.mode_count:
        raise ContractError(f"gate on modes ({gate.mode_a}, {gate.mode_b}) but state has {state.mode_count}")
    return SparseState(_rotate(state.terms, gate.mode_a, gate.mode_b, gate.theta, prune), state.mode_count)


def apply_rotation(state: SparseState, pos_a: int, pos_b: int, theta: float,
                   prune: float | None = None) -> SparseState:
    """Like :func:`apply_beamsplitter` but with arbitrary key positions (``pos_a`` may exceed ``pos_b``)."""
    if pos_a == pos_b or max(pos_a, pos_b) >= state.mode_count or min(pos_a, pos_b) < 0:
        raise ContractError(f"bad positions ({pos_a}, {pos_b}) for {state.mode_count} modes")
    return SparseState(_rotate(state.terms, pos_a, pos_b, theta, prune), state.mode_count)


def measurement_marginals(state: SparseState, mode: int) -> dict[int, float]:
    """Photon-number distribution of one mode, keyed in ascending photon count."""
    if not 0 <= mode < state.mode_count:
        raise ContractError(f"mode {mode} out of range for {state.mode_count} modes")
    acc: dict[int, list[float]] = {}
    for key, amp in state.terms.items():
        acc.setdefault(key[mode], []).append(abs(amp) ** 2)
    return {x: math.fsum(acc[x]) for x in sorted(acc)}


def collapse_and_drop(state: SparseState, mode: int, outcome: int) -> SparseState:
    """Project onto ``outcome`` photons in ``mode``, delete that mode and renormalize."""
    if not 0 <= mode < state.mode_count:
        raise ContractError(f"mode {mode} out of range for {state.mode_count} modes")
    kept = {k[:mode] + k[mode + 1:]: a for k, a in state.terms.items() if k[mode] == outcome}
    weight = math.fsum(abs(a) ** 2 for a in kept.values())
    if weight <= 0.0:
        raise ImpossibleOutcomeError(f"outcome {outcome} on mode {mode} has probability 0")
    scale = 1.0 / math.sqrt(weight)
    return SparseState({k: a * scale for k, a in kept.items()}, state.mode_count - 1)


def sample_ascending(probabilities: Mapping[int, float], u: float) -> int:
    """Inverse-CDF draw: the smallest outcome whose cumulative probability exceeds ``u``."""
    keys = sorted(probabilities)
    total = math.fsum(probabilities.values())
    threshold = u * total
    acc = 0.0
    for x in keys:
        acc += probabilities[x]
        if threshold < acc:
            return x
    # u * total can round to the full sum; fall back on the last supported outcome
    for x in reversed(keys):
        if probabilities[x] > 0.0:
            return x
    raise ImpossibleOutcomeError("empty distribution")


def loss_angle(gamma: float) -> float:
    """Beamsplitter angle whose transmission ``cos^2`` equals ``1 - gamma``."""
    return math.acos(math.sqrt(1.0 - gamma))


def apply_loss(state: SparseState, mode: int, gamma: float, rng) -> tuple[SparseState, int]:
    """Couple ``mode`` to a vacuum environment, measure the environment, and drop it.

    ``rng`` needs a ``random()`` method returning floats in ``[0, 1)``.
    Returns the post-loss state and the number of photons lost.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ContractError(f"loss probability must lie in [0, 1], got {gamma}")
    if gamma == 0.0:
        return state, 0
    env = state.mode_count
    widened = apply_rotation(state.with_mode(0), mode, env, loss_angle(gamma))
    marg = measurement_marginals(widened, env)
    lost = sample_ascending(marg, rng.random())
    return collapse_and_drop(widened, env, lost), lost
