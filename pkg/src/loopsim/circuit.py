"""Loop architectures, their beamsplitter expansion, and the progressive schedule."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np

from loopsim.errors import ContractError
from loopsim.fock import BeamsplitterGate


@dataclass(frozen=True)
class RandomAngles:
    """Angles drawn uniformly from ``[0, 2*pi)`` in circuit order from a seeded generator."""

    seed: int

    def draw(self, count: int) -> tuple[float, ...]:
        rng = np.random.default_rng(self.seed)
        return tuple(float(t) for t in rng.uniform(0.0, 2.0 * math.pi, size=count))


ThetaSpec = Union[tuple, RandomAngles]


def alternating_input(m: int) -> tuple[int, ...]:
    """``|1, 0, 1, 0, ...>`` on ``m`` modes, i.e. ``ceil(m / 2)`` photons."""
    return tuple(1 - a % 2 for a in range(m))


def gate_count(m: int, loops: Sequence[int]) -> int:
    return sum(max(0, m - ell) for ell in loops)


@dataclass(frozen=True)
class LoopArchitecture:
    """A sequential composite of loops ``L_{l1} ; L_{l2} ; ...`` on ``mode_count`` time bins.

    ``thetas`` is either an explicit tuple in circuit order or a :class:`RandomAngles`.
    ``loss`` is the per-(loop, mode) loss probability applied by the sampler.
    """

    mode_count: int
    loops: tuple[int, ...]
    input: tuple[int, ...]
    thetas: ThetaSpec = RandomAngles(0)
    loss: float = 0.0
    _resolved: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "loops", tuple(int(x) for x in self.loops))
        object.__setattr__(self, "input", tuple(int(x) for x in self.input))
        if self.mode_count < 1:
            raise ContractError(f"need at least one mode, got {self.mode_count}")
        if not self.loops or any(ell < 1 for ell in self.loops):
            raise ContractError(f"loop lengths must be positive, got {self.loops}")
        if len(self.input) != self.mode_count or any(v < 0 for v in self.input):
            raise ContractError(f"input must be {self.mode_count} non-negative integers, got {self.input}")
        if not 0.0 <= self.loss <= 1.0:
            raise ContractError(f"loss must lie in [0, 1], got {self.loss}")
        count = gate_count(self.mode_count, self.loops)
        if isinstance(self.thetas, RandomAngles):
            resolved = self.thetas.draw(count)
        else:
            resolved = tuple(float(t) for t in self.thetas)
            object.__setattr__(self, "thetas", resolved)
            if len(resolved) != count:
                raise ContractError(f"expected {count} angles, got {len(resolved)}")
        object.__setattr__(self, "_resolved", resolved)

    @property
    def photon_count(self) -> int:
        return sum(self.input)

    @property
    def gate_count(self) -> int:
        return gate_count(self.mode_count, self.loops)

    @property
    def angles(self) -> tuple[float, ...]:
        return self._resolved

    def with_angles(self, thetas: ThetaSpec) -> "LoopArchitecture":
        return LoopArchitecture(self.mode_count, self.loops, self.input, thetas, self.loss)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "LoopArchitecture":
        try:
            m = int(doc["m"])
            loops = tuple(int(x) for x in doc["loops"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"architecture needs integer 'm' and list 'loops': {exc}") from None
        raw_input = doc.get("input", "alternating")
        if raw_input == "alternating":
            occ = alternating_input(m)
        elif isinstance(raw_input, list):
            occ = tuple(raw_input)
        else:
            raise ContractError(f"'input' must be a list or \"alternating\", got {raw_input!r}")
        raw_thetas = doc.get("thetas", {"random_seed": 0})
        if isinstance(raw_thetas, dict):
            if "random_seed" not in raw_thetas:
                raise ContractError("'thetas' object needs a 'random_seed'")
            thetas: ThetaSpec = RandomAngles(int(raw_thetas["random_seed"]))
        elif isinstance(raw_thetas, list):
            thetas = tuple(float(t) for t in raw_thetas)
        else:
            raise ContractError("'thetas' must be a list of floats or {\"random_seed\": int}")
        return cls(m, loops, occ, thetas, float(doc.get("loss", 0.0)))

    @classmethod
    def from_json(cls, path: str | Path) -> "LoopArchitecture":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ContractError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ContractError(f"{path}: expected a JSON object")
        return cls.from_dict(doc)

    def to_dict(self) -> dict[str, Any]:
        thetas: Any = (
            {"random_seed": self.thetas.seed} if isinstance(self.thetas, RandomAngles) else list(self.thetas)
        )
        return {"m": self.mode_count, "loops": list(self.loops), "input": list(self.input),
                "thetas": thetas, "loss": self.loss}


def expand_circuit(arch: LoopArchitecture) -> list[BeamsplitterGate]:
    """Gates of the composite in circuit order, loops preloaded (no extra vacuum modes)."""
    gates = []
    thetas = iter(arch.angles)
    for ell in arch.loops:
        for a in range(arch.mode_count - ell):
            gates.append(BeamsplitterGate(a, a + ell, next(thetas)))
    return gates


def loop_index_of_gates(arch: LoopArchitecture) -> list[int]:
    return [j for j, ell in enumerate(arch.loops) for _ in range(max(0, arch.mode_count - ell))]


def relevant_modes(loops: Sequence[int]) -> int:
    """Upper bound on the unmeasured modes any progressive component touches."""
    if not loops or any(ell < 1 for ell in loops):
        raise ContractError(f"loop lengths must be positive, got {tuple(loops)}")
    return 1 + sum(loops)


@dataclass(frozen=True)
class Gate:
    """Scheduled gate: ``index`` is its position in :func:`expand_circuit` order."""

    gate: BeamsplitterGate
    index: int
    component: int


@dataclass(frozen=True)
class Measure:
    mode: int


Event = Union[Gate, Measure]


@dataclass(frozen=True)
class GateSchedule:
    events: tuple[Event, ...]
    mode_count: int

    @property
    def component_of(self) -> dict[int, int]:
        return {e.index: e.component for e in self.events if isinstance(e, Gate)}

    def gates(self) -> list[Gate]:
        return [e for e in self.events if isinstance(e, Gate)]

    def component(self, a: int) -> list[Gate]:
        return [e for e in self.events if isinstance(e, Gate) and e.component == a]


def component_labels(m: int, gates: Sequence[BeamsplitterGate]) -> list[int]:
    """Smallest output mode whose causal cone contains each gate.

    Walks the circuit backwards.  Each wire carries the smallest output index
    reachable from it; a gate joins its two wires, so both inherit the minimum.
    """
    label = list(range(m))
    out = [0] * len(gates)
    for i in range(len(gates) - 1, -1, -1):
        g = gates[i]
        low = min(label[g.mode_a], label[g.mode_b])
        label[g.mode_a] = label[g.mode_b] = low
        out[i] = low
    return out


def progressive_schedule(arch: LoopArchitecture) -> GateSchedule:
    """Reorder the circuit into components ``P_0, Measure(0), P_1, Measure(1), ...``.

    Within a component the original circuit order is kept.
    """
    gates = expand_circuit(arch)
    labels = component_labels(arch.mode_count, gates)
    buckets: list[list[Gate]] = [[] for _ in range(arch.mode_count)]
    for i, (g, a) in enumerate(zip(gates, labels)):
        buckets[a].append(Gate(g, i, a))
    events: list[Event] = []
    for a, bucket in enumerate(buckets):
        events.extend(bucket)
        events.append(Measure(a))
    return GateSchedule(tuple(events), arch.mode_count)
