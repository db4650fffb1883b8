"""Optical netlists and their exact evaluation.

A :class:`Netlist` is a temporally ordered tuple of primitive elements. Larger
structures (an interferometer chain sitting in the arm of another chain) are
embedded with :class:`Unit`, which evaluates a sub-netlist in its own mode
namespace. Every instance of a unit therefore gets fresh internal modes even
though the sub-netlist object is shared.

Transmission-channel segments are :class:`Channel` elements. Whether a segment
is blocked is decided at evaluation time from the set of blocking parties, so
one netlist serves all inputs of a gate.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from .errors import ConfigurationError
from .state import ModeId, PhotonState, SinkId


# Splitter coefficients are evaluated in extended precision where the platform
# has it: rounding cos(pi/2N) to double biases every splitter's norm by ~1e-17,
# which compounds linearly over the 10^5-10^6 splitters of a large gate.
REAL = np.longdouble


def trig(theta: float) -> tuple:
    t = REAL(theta)
    return np.cos(t), np.sin(t)


def sw_sink(party: str) -> SinkId:
    return f"SW[{party}]"


@dataclass(frozen=True, slots=True)
class BeamSplitter:
    theta: float
    left: ModeId
    right: ModeId
    c: Any = field(init=False, repr=False, compare=False)
    s: Any = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c, s = trig(self.theta)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "s", s)

    def apply(self, state: PhotonState, run: _Run) -> None:
        state.rotate(self.c, self.s, self.left, self.right)

    def modes(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True)
class PhaseShift:
    mode: ModeId
    phase: float

    def apply(self, state: PhotonState, run: _Run) -> None:
        state.phase_shift(self.mode, self.phase)

    def modes(self):
        return (self.mode,)


@dataclass(frozen=True, slots=True)
class Absorber:
    mode: ModeId
    sink: SinkId

    def apply(self, state: PhotonState, run: _Run) -> None:
        state.absorb(self.mode, self.sink)

    def modes(self):
        return (self.mode,)


@dataclass(frozen=True, slots=True)
class Attenuator:
    """Beam splitter whose reflected port ends in a detector.

    The photon enters the splitter's left port and continues on the
    transmitted port with amplitude ``sin(theta)``; the reflected share
    ``cos(theta)`` is recorded in ``sink``.
    """

    mode: ModeId
    theta: float
    sink: SinkId
    c: Any = field(init=False, repr=False, compare=False)
    s: Any = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c, s = trig(self.theta)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "s", s)

    def apply(self, state: PhotonState, run: _Run) -> None:
        amp = state.amplitudes.get(self.mode)
        if amp is None:
            return
        reflected = amp * self.c
        state.amplitudes[self.mode] = amp * self.s
        state.add_to_sink(self.sink, abs(reflected) ** 2)

    def modes(self):
        return (self.mode,)


@dataclass(frozen=True, slots=True)
class Move:
    """Free propagation (mirrors, fibre) from one mode label to another."""

    src: ModeId
    dst: ModeId

    def apply(self, state: PhotonState, run: _Run) -> None:
        state.move(self.src, self.dst)

    def modes(self):
        return (self.src, self.dst)


@dataclass(frozen=True, slots=True)
class Channel:
    """One transmission-channel segment guarded by switchable detectors.

    The segment is blocked when any owner blocks; the first blocking owner's
    detector records the photon. An unblocked segment is a mirror.
    """

    mode: ModeId
    owners: tuple[str, ...]

    def apply(self, state: PhotonState, run: _Run) -> None:
        for owner in self.owners:
            if owner in run.blockers:
                state.absorb(self.mode, sw_sink(owner))
                return
        if run.noise is not None:
            run.noise.on_open_segment(self, state)

    def modes(self):
        return (self.mode,)


@dataclass(frozen=True, slots=True)
class Probe:
    """Records the amplitude of ``mode`` into the run trace; no optical action."""

    label: str
    mode: ModeId

    def apply(self, state: PhotonState, run: _Run) -> None:
        if run.trace is not None:
            run.trace.append((self.label, state.amplitudes.get(self.mode, 0.0)))

    def modes(self):
        return (self.mode,)


@dataclass(frozen=True, slots=True)
class Unit:
    """Embeds ``netlist``; ``bind`` maps its local port modes to parent modes."""

    netlist: Netlist
    bind: tuple[tuple[ModeId, ModeId], ...]
    role: str = ""

    def __post_init__(self):
        ports = set(self.netlist.ports.values())
        for local, _ in self.bind:
            if local not in ports:
                raise ConfigurationError(f"{local!r} is not a port of unit {self.netlist.name!r}")

    def modes(self):
        return tuple(parent for _, parent in self.bind)

    def apply(self, state: PhotonState, run: _Run) -> None:
        amps = state.amplitudes
        inputs = {}
        for local, parent in self.bind:
            amp = amps.pop(parent, None)
            if amp is not None and not _zero(amp):
                inputs[local] = amp

        if not inputs:
            return

        if self.role and self.role in run.absorb_roles and self.netlist.has_open_channel(run.blockers):
            sink = f"audit[{self.role}]"
            for amp in inputs.values():
                state.add_to_sink(sink, abs(amp) ** 2)
            return

        if run.memo and run.noise is None and len(inputs) == 1:
            ((local, amp),) = inputs.items()
            outputs, sinks = run.transfer(self, local)
            for parent_local, parent in self.bind:
                t = outputs.get(parent_local)
                if t is not None and t != 0:
                    amps[parent] = amps.get(parent, 0.0) + amp * t
            weight = abs(amp) ** 2
            for sink, prob in sinks.items():
                state.add_to_sink(sink, weight * prob)
            return

        sub = PhotonState(inputs)
        self.netlist.run_elements(sub, run)
        self._collect(sub, state)

    def _collect(self, sub: PhotonState, state: PhotonState) -> None:
        bound = set()
        for local, parent in self.bind:
            bound.add(local)
            amp = sub.amplitudes.get(local)
            if amp is not None:
                state.amplitudes[parent] = state.amplitudes.get(parent, 0.0) + amp
        for local, amp in sub.amplitudes.items():
            if local not in bound and not _zero(amp):
                raise ConfigurationError(
                    f"unit {self.netlist.name!r} left amplitude on unbound mode {local!r}"
                )
        for sink, prob in sub.sinks.items():
            state.add_to_sink(sink, prob)


Element = BeamSplitter | PhaseShift | Absorber | Attenuator | Move | Channel | Probe | Unit


def _zero(value: Any) -> bool:
    if isinstance(value, np.ndarray):
        return not value.any()
    return value == 0


@dataclass(frozen=True, eq=False)
class Netlist:
    """Ordered optical elements plus named ports (``entrance``, ``exit1`` ...)."""

    name: str
    elements: tuple[Element, ...]
    ports: dict[str, ModeId] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.elements)

    def __hash__(self) -> int:
        return id(self)

    def run_elements(self, state: PhotonState, run: _Run) -> None:
        observer = run.observer
        if observer is None:
            for element in self.elements:
                element.apply(state, run)
        else:
            for element in self.elements:
                element.apply(state, run)
                observer(element, state)

    def walk(self) -> Iterator[Element]:
        """Every element, descending into embedded units (shared units repeat)."""
        for element in self.elements:
            yield element
            if isinstance(element, Unit):
                yield from element.netlist.walk()

    @cached_property
    def owner_groups(self) -> frozenset[tuple[str, ...]]:
        groups = set()
        for element in self.elements:
            if isinstance(element, Channel):
                groups.add(element.owners)
            elif isinstance(element, Unit):
                groups |= element.netlist.owner_groups
        return frozenset(groups)

    def has_open_channel(self, blockers: frozenset[str]) -> bool:
        return any(not any(o in blockers for o in group) for group in self.owner_groups)

    @cached_property
    def modes(self) -> frozenset[ModeId]:
        found = set(self.ports.values())
        for element in self.elements:
            found.update(element.modes())
        return frozenset(found)

    @cached_property
    def element_count(self) -> int:
        """Primitive element applications for one full (unmemoized) pass."""
        total = 0
        for element in self.elements:
            total += element.netlist.element_count if isinstance(element, Unit) else 1
        return total

    def count(self, kind: type) -> int:
        total = 0
        for element in self.elements:
            if isinstance(element, Unit):
                total += element.netlist.count(kind)
            elif isinstance(element, kind):
                total += 1
        return total


class _Run:
    __slots__ = ("blockers", "noise", "memo", "absorb_roles", "trace", "observer", "_cache")

    def __init__(self, blockers, noise, memo, absorb_roles, trace, observer):
        self.blockers = frozenset(blockers)
        self.noise = noise
        self.memo = memo
        self.absorb_roles = frozenset(absorb_roles)
        self.trace = trace
        self.observer = observer
        self._cache: dict = {}

    def transfer(self, unit: Unit, local: ModeId):
        """Response of ``unit`` to unit amplitude on ``local`` (cached per run)."""
        key = (id(unit.netlist), local)
        hit = self._cache.get(key)
        if hit is None:
            sub = PhotonState({local: REAL(1)})
            saved, self.trace = self.trace, None
            try:
                unit.netlist.run_elements(sub, self)
            finally:
                self.trace = saved
            bound = {loc for loc, _ in unit.bind}
            for mode, amp in sub.amplitudes.items():
                if mode not in bound and amp != 0:
                    raise ConfigurationError(
                        f"unit {unit.netlist.name!r} left amplitude on unbound mode {mode!r}"
                    )
            outputs = {loc: sub.amplitudes[loc] for loc in bound if loc in sub.amplitudes}
            hit = (outputs, dict(sub.sinks))
            self._cache[key] = hit
        return hit


def simulate(
    netlist: Netlist,
    state: PhotonState | None = None,
    blockers: Iterable[str] = (),
    *,
    noise=None,
    memo: bool = True,
    absorb_roles: Iterable[str] = (),
    trace: list | None = None,
    observer: Callable[[Element, PhotonState], None] | None = None,
) -> PhotonState:
    """Propagate a photon through ``netlist``.

    ``blockers`` are the parties whose switchable detectors are on. With
    ``memo`` (the default, ignored under noise) each embedded unit is
    evaluated once per run and reused through linearity. ``absorb_roles``
    replaces every unit with one of those roles that contains an unblocked
    channel by a perfect absorber. ``trace`` collects :class:`Probe` records;
    memoized units do not emit probes.
    """
    if state is None:
        state = PhotonState({netlist.ports["entrance"]: REAL(1)})
    else:
        state = state.copy()
    run = _Run(blockers, noise, memo, absorb_roles, trace, observer)
    netlist.run_elements(state, run)
    return state
