"""Lattice paths under the Young order, and the state-space tracker built on them.

A path in the ``(W, H)`` rectangle is stored in height representation: a
nondecreasing tuple ``(l_0, ..., l_W)`` ending at ``H``.  Its step
representation is the occupation vector of a Fock basis state, so a downset
``{l : l <= mu}`` spans a subspace of the ``H``-photon, ``W+1``-mode Fock space.

A :class:`PCS` pairs a maximal path with the physical mode carried by each
lattice column, which is how long loops are handled: columns are kept sorted by
maximal photon count instead of by time bin.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import accumulate
from typing import Iterator, Sequence

from loopsim.circuit import Gate, GateSchedule, LoopArchitecture, expand_circuit, progressive_schedule
from loopsim.errors import ContractError, ImpossibleOutcomeError, UnsupportedArchitectureError

Path = tuple[int, ...]


def height_from_steps(steps: Sequence[int]) -> Path:
    if any(s < 0 for s in steps):
        raise ContractError(f"steps must be non-negative, got {tuple(steps)}")
    return tuple(accumulate(int(s) for s in steps))


def steps_from_height(heights: Sequence[int]) -> tuple[int, ...]:
    prev = 0
    out = []
    for h in heights:
        if h < prev:
            raise ContractError(f"heights must be nondecreasing and non-negative, got {tuple(heights)}")
        out.append(h - prev)
        prev = h
    return tuple(out)


def is_path(heights: Sequence[int]) -> bool:
    return len(heights) > 0 and heights[0] >= 0 and all(a <= b for a, b in zip(heights, heights[1:]))


def _check_pair(lam: Sequence[int], kappa: Sequence[int]) -> None:
    if len(lam) != len(kappa) or (lam and lam[-1] != kappa[-1]):
        raise ContractError(f"paths {tuple(lam)} and {tuple(kappa)} live in different rectangles")


def young_leq(lam: Sequence[int], kappa: Sequence[int]) -> bool:
    _check_pair(lam, kappa)
    return all(a <= b for a, b in zip(lam, kappa))


def meet(lam: Sequence[int], kappa: Sequence[int]) -> Path:
    """Greatest lower bound: componentwise minimum."""
    _check_pair(lam, kappa)
    return tuple(min(a, b) for a, b in zip(lam, kappa))


def join(lam: Sequence[int], kappa: Sequence[int]) -> Path:
    """Least upper bound: componentwise maximum."""
    _check_pair(lam, kappa)
    return tuple(max(a, b) for a, b in zip(lam, kappa))


def bottom(width: int, photons: int) -> Path:
    """The least path ``(0, ..., 0, photons)`` with ``width + 1`` columns."""
    return (0,) * width + (photons,)


@dataclass(frozen=True)
class SkewDiagram:
    """The interval ``{l : bottom <= l <= top}`` in the Young order."""

    top: Path
    bottom: Path

    def __post_init__(self):
        object.__setattr__(self, "top", tuple(self.top))
        object.__setattr__(self, "bottom", tuple(self.bottom))
        if not (is_path(self.top) and is_path(self.bottom)):
            raise ContractError(f"not lattice paths: {self.top} / {self.bottom}")
        if not young_leq(self.bottom, self.top):
            raise ContractError(f"bottom {self.bottom} is not below top {self.top}")

    @classmethod
    def downset(cls, mu: Sequence[int]) -> "SkewDiagram":
        mu = tuple(mu)
        return cls(mu, bottom(len(mu) - 1, mu[-1]))

    @property
    def width(self) -> int:
        return len(self.top) - 1

    @property
    def height(self) -> int:
        return self.top[-1]

    def __contains__(self, lam) -> bool:
        lam = tuple(lam)
        return len(lam) == len(self.top) and all(b <= x <= t for b, x, t in zip(self.bottom, lam, self.top))

    def paths(self) -> Iterator[Path]:
        """Enumerate every path of the interval (exponentially many; for small diagrams)."""
        top, low = self.top, self.bottom
        last = len(top) - 1

        def rec(prefix: list[int], prev: int) -> Iterator[Path]:
            i = len(prefix)
            if i == last:
                yield tuple(prefix) + (top[last],)
                return
            for h in range(max(prev, low[i]), top[i] + 1):
                prefix.append(h)
                yield from rec(prefix, h)
                prefix.pop()

        yield from rec([], 0)

    def __len__(self) -> int:
        return count_interval(self)


def intersect(a: SkewDiagram, b: SkewDiagram) -> SkewDiagram | None:
    """Intersection of two intervals, or ``None`` when it is empty."""
    top = meet(a.top, b.top)
    low = join(a.bottom, b.bottom)
    if not all(x <= y for x, y in zip(low, top)):
        return None
    return SkewDiagram(top, low)


def count_interval(d: SkewDiagram) -> int:
    """Number of lattice paths in ``d``, by dynamic programming over lattice points.

    ``A[y]`` for column ``x`` counts paths from ``(x, y)`` to the top-right
    corner that stay inside the diagram.  Points in column ``x`` lie between
    ``bottom[x-1]`` and ``top[x]``.
    """
    top, low = d.top, d.bottom
    W, H = len(top) - 1, top[-1]
    nxt: list[int] = []
    for x in range(W, -1, -1):
        cur = [0] * (H + 2)
        y_min = low[x - 1] if x > 0 else 0
        for y in range(top[x], y_min - 1, -1):
            cur[y] = (nxt[y] if x < W else int(y == H)) + cur[y + 1]
        nxt = cur
    return nxt[0]


def count_downset(mu: Sequence[int]) -> int:
    """``|{l : l <= mu}|``; the empty path (no modes left) counts once."""
    if len(mu) == 0:
        return 1
    return count_interval(SkewDiagram.downset(mu))


def _prefix_counts(mu: Path, upto: int) -> list[int]:
    """``P[q]``: nondecreasing ``(l_0..l_upto) <= mu`` with ``l_upto = q``."""
    H = mu[-1]
    row = [1 if q <= mu[0] else 0 for q in range(H + 1)]
    for i in range(1, upto + 1):
        acc = 0
        new = [0] * (H + 1)
        for q in range(H + 1):
            acc += row[q]
            new[q] = acc if q <= mu[i] else 0
        row = new
    return row


def _suffix_counts(mu: Path, start: int) -> list[int]:
    """``S[y]``: nondecreasing ``(l_start+1..l_W) <= mu`` ending at ``H``, all ``>= y``."""
    H, W = mu[-1], len(mu) - 1
    row = [1] * (H + 1)  # nothing after column W
    for i in range(W, start, -1):
        new = [0] * (H + 1)
        acc = 0
        for y in range(H, -1, -1):
            if y <= mu[i] and (i < W or y == H):
                acc += row[y]
            new[y] = acc
        row = new
    return row


def step_counts(mu: Sequence[int], a: int) -> dict[int, int]:
    """Number of paths in the downset of ``mu`` with step ``x`` at column ``a``, for every ``x``.

    Splits each path at column ``a`` into a prefix ending at height ``q`` and a
    suffix starting at ``q + x``, so all values come out of two linear sweeps.
    """
    mu = tuple(mu)
    W, H = len(mu) - 1, mu[-1]
    if not 0 <= a <= W:
        raise ContractError(f"column {a} outside a path of {W + 1} columns")
    pre = _prefix_counts(mu, a - 1) if a > 0 else [1] + [0] * H
    suf = _suffix_counts(mu, a)
    out: dict[int, int] = {}
    for x in range(0, mu[a] + 1):
        total = 0
        for q in range(0, mu[a] - x + 1):
            y = q + x
            if a == W and y != H:
                continue
            total += pre[q] * suf[y]
        if total:
            out[x] = total
    return out


def helper_diagram(width: int, photons: int, a: int, x: int, q: int) -> SkewDiagram:
    """Interval of all paths with ``q`` photons left of column ``a`` and ``x`` in column ``a``."""
    m = width + 1
    if not (0 <= a < m and 0 <= x and 0 <= q and q + x <= photons):
        raise ContractError(f"no helper diagram for a={a}, x={x}, q={q} in ({width}, {photons})")
    if a == 0 and q != 0:
        raise ContractError("column 0 has nothing to its left, so only q = 0 exists")
    top = (q,) * a + (q + x,) + (photons,) * (m - a - 1)
    if a > 0:
        low = (0,) * (a - 1) + (q,) + (q + x,) * (m - a - 1) + (photons,)
    else:
        low = (q + x,) * (m - 1) + (photons,)
    # at the last column the path is pinned to the corner; q + x < photons gives an empty helper
    if top[-1] != photons:
        raise ContractError(f"helper q={q} is empty at the last column")
    return SkewDiagram(top, low)


def q_max(mu: Sequence[int], a: int, x: int) -> int:
    return min(mu[a - 1] if a > 0 else 0, mu[a] - x)


def project_helpers(mu: Sequence[int], a: int, x: int) -> list[tuple[int, SkewDiagram]]:
    """Split ``{l <= mu : step at a == x}`` into disjoint intervals indexed by ``q = l_{a-1}``."""
    mu = tuple(mu)
    W, H = len(mu) - 1, mu[-1]
    if not 0 <= a <= W:
        raise ContractError(f"column {a} outside a path of {W + 1} columns")
    if x < 0 or x > mu[a]:
        raise ContractError(f"x={x} exceeds the column maximum {mu[a]}")
    d = SkewDiagram.downset(mu)
    out = []
    for q in range(0, q_max(mu, a, x) + 1):
        if q + x > H or (a == W and q + x != H):
            continue
        piece = intersect(d, helper_diagram(W, H, a, x, q))
        if piece is not None:
            out.append((q, piece))
    return out


def contract_path(lam: Sequence[int], a: int, x: int) -> Path:
    """Delete column ``a`` holding ``x`` photons: heights after ``a`` drop by ``x``."""
    lam = tuple(lam)
    return lam[:a] + tuple(h - x for h in lam[a + 1:])


def contract_diagram(d: SkewDiagram, a: int, x: int) -> SkewDiagram:
    """Apply the contraction to both boundaries; requires every path to have step ``x`` at ``a``."""
    if d.width == 0:
        raise ContractError("cannot contract the only column of a diagram")
    left_t = d.top[a - 1] if a > 0 else 0
    left_b = d.bottom[a - 1] if a > 0 else 0
    if not (left_t == left_b and d.top[a] == d.bottom[a] == left_t + x):
        raise ContractError(f"not every path of {d.top}/{d.bottom} has step {x} at column {a}")
    return SkewDiagram(contract_path(d.top, a, x), contract_path(d.bottom, a, x))


def measure_path(mu: Sequence[int], a: int, x: int) -> Path:
    """Maximal path left after finding ``x`` photons in lattice column ``a``.

    Contraction of ``mu`` met with the top helper path at ``q_max``; an empty
    tuple when the last column is measured.
    """
    mu = tuple(mu)
    W, H = len(mu) - 1, mu[-1]
    if not 0 <= a <= W:
        raise ContractError(f"column {a} outside a path of {W + 1} columns")
    if x < 0 or x > mu[a]:
        raise ImpossibleOutcomeError(f"{x} photons cannot appear in a column with maximum {mu[a]}")
    q = q_max(mu, a, x)
    if W == 0:
        if x != H:
            raise ImpossibleOutcomeError(f"a single column holds all {H} photons, not {x}")
        return ()
    if a == W and q + x != H:
        raise ImpossibleOutcomeError(f"at most {mu[a - 1]} photons fit left of the last column, need {H - x}")
    top = (q,) * a + (q + x,) + (H,) * (W - a)
    return contract_path(meet(mu, top), a, x)


def enumerate_downset(mu: Sequence[int]) -> Iterator[Path]:
    if len(mu) == 0:
        yield ()
        return
    yield from SkewDiagram.downset(mu).paths()


@dataclass(frozen=True)
class PCS:
    """Permuted cumulative space: a downset plus the physical mode of each lattice column.

    ``modes[i]`` is the physical (global) mode described by column ``i``, so a
    path's step ``i`` is the photon count of physical mode ``modes[i]``.
    """

    heights: Path
    modes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "heights", tuple(self.heights))
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.heights) != len(self.modes):
            raise ContractError("heights and modes must have equal length")
        if self.heights and not is_path(self.heights):
            raise ContractError(f"maximal path must be nondecreasing, got {self.heights}")
        if len(set(self.modes)) != len(self.modes):
            raise ContractError(f"modes must be distinct, got {self.modes}")

    @property
    def photons(self) -> int:
        return self.heights[-1] if self.heights else 0

    @property
    def sigma(self) -> dict[int, int]:
        """Physical mode -> lattice column."""
        return {p: i for i, p in enumerate(self.modes)}

    def column(self, physical_mode: int) -> int:
        try:
            return self.modes.index(physical_mode)
        except ValueError:
            raise ContractError(f"physical mode {physical_mode} is not in this space {self.modes}") from None

    def max_vector(self) -> dict[int, int]:
        """Largest photon count each physical mode can hold."""
        return dict(zip(self.modes, self.heights))

    def count(self) -> int:
        return count_downset(self.heights)

    def physical_states(self) -> Iterator[tuple[tuple[int, int], ...]]:
        """Basis states of the space as ``(physical mode, photons)`` pairs sorted by mode."""
        order = sorted(range(len(self.modes)), key=self.modes.__getitem__)
        for lam in enumerate_downset(self.heights):
            steps = steps_from_height(lam)
            yield tuple((self.modes[i], steps[i]) for i in order)


def initial_pcs(n0: int, mode: int = 0) -> PCS:
    if n0 < 0:
        raise ContractError(f"photon number must be non-negative, got {n0}")
    return PCS((n0,), (mode,))


def couple_new_mode(p: PCS, x: int, new_mode: int, partner: int | None = None) -> PCS:
    """Append physical ``new_mode`` with ``x`` photons, coupled by a beamsplitter to the last column.

    Only the physical mode in the last column (which carries the full photon
    count) can be coupled this way; ``partner`` names the existing mode the
    gate touches and is checked against it.
    """
    if x < 0:
        raise ContractError(f"photon number must be non-negative, got {x}")
    if not p.modes:
        raise UnsupportedArchitectureError("no mode to couple the new mode to")
    if partner is not None and partner != p.modes[-1]:
        raise UnsupportedArchitectureError(
            f"new mode {new_mode} is coupled to mode {partner}, but only the last column "
            f"(mode {p.modes[-1]}) supports coupling")
    if new_mode in p.modes:
        raise ContractError(f"mode {new_mode} is already part of the space")
    total = p.photons + x
    return PCS(p.heights[:-1] + (total, total), p.modes + (new_mode,))


def evolve_beamsplitter(p: PCS, a: int, b: int) -> PCS:
    """Beamsplitter between physical modes ``a`` and ``b``: both take the larger maximum.

    The columns are then stable-sorted by maximum, which keeps equal entries in
    their previous lattice order.
    """
    if a == b:
        raise ContractError("a beamsplitter needs two distinct modes")
    ca, cb = p.column(a), p.column(b)
    w = list(p.heights)
    w[ca] = w[cb] = max(w[ca], w[cb])
    order = sorted(range(len(w)), key=w.__getitem__)
    return PCS(tuple(w[i] for i in order), tuple(p.modes[i] for i in order))


def measure(p: PCS, physical_mode: int, x: int) -> PCS:
    """Space left after finding ``x`` photons in ``physical_mode``; that mode is removed."""
    a = p.column(physical_mode)
    heights = measure_path(p.heights, a, x)
    return PCS(heights, p.modes[:a] + p.modes[a + 1:])


def physical_max_vector(p: PCS) -> list[int]:
    """Maxima listed by ascending physical mode."""
    return [h for _, h in sorted(zip(p.modes, p.heights))]


class LatticeTracker:
    """Follows a schedule on the lattice alone, mirroring :class:`loopsim.progressive.ProgressiveRun`.

    Mode 0 starts in the space.  A gate that touches a mode for the first time
    must pair it with the mode in the last column (the first loop's staircase
    guarantees this when its length is 1).
    """

    def __init__(self, arch: LoopArchitecture, schedule: GateSchedule | None = None):
        require_unit_first_loop(arch)
        self.arch = arch
        self.schedule = schedule if schedule is not None else progressive_schedule(arch)
        self.pcs = initial_pcs(arch.input[0], 0)
        self.activated = {0}

    def apply_gate(self, event: Gate) -> None:
        self.apply_pair(event.gate.mode_a, event.gate.mode_b)

    def apply_pair(self, a: int, b: int) -> None:
        new_a, new_b = a not in self.activated, b not in self.activated
        if new_a and new_b:
            raise UnsupportedArchitectureError(f"gate ({a}, {b}) touches two modes outside the space")
        if new_a or new_b:
            fresh, old = (a, b) if new_a else (b, a)
            self.pcs = couple_new_mode(self.pcs, self.arch.input[fresh], fresh, partner=old)
            self.activated.add(fresh)
        else:
            self.pcs = evolve_beamsplitter(self.pcs, a, b)

    def marginal_counts(self, mode: int) -> dict[int, int]:
        self._ensure(mode)
        return step_counts(self.pcs.heights, self.pcs.column(mode))

    def measure(self, mode: int, x: int) -> None:
        self._ensure(mode)
        self.pcs = measure(self.pcs, mode, x)

    def count(self) -> int:
        return self.pcs.count()

    def _ensure(self, mode: int) -> None:
        if mode not in self.activated:
            raise UnsupportedArchitectureError(f"mode {mode} is measured before any gate couples it")


def require_unit_first_loop(arch: LoopArchitecture) -> None:
    if arch.loops[0] != 1:
        raise UnsupportedArchitectureError(
            f"lattice tracking needs the first loop to have length 1, got {arch.loops}")


def final_space(arch: LoopArchitecture) -> PCS:
    """Reachable output space of the full circuit (no measurements), gates in circuit order."""
    tracker = LatticeTracker(arch, schedule=GateSchedule((), arch.mode_count))
    for g in expand_circuit(arch):
        tracker.apply_pair(g.mode_a, g.mode_b)
    return tracker.pcs


__all__ = [
    "LatticeTracker",
    "PCS",
    "SkewDiagram",
    "bottom",
    "contract_diagram",
    "contract_path",
    "count_downset",
    "count_interval",
    "couple_new_mode",
    "enumerate_downset",
    "evolve_beamsplitter",
    "final_space",
    "height_from_steps",
    "helper_diagram",
    "initial_pcs",
    "intersect",
    "join",
    "measure",
    "measure_path",
    "meet",
    "physical_max_vector",
    "project_helpers",
    "q_max",
    "step_counts",
    "steps_from_height",
    "young_leq",
]
