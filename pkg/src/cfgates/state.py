"""Single-photon state over named spatial modes.

Amplitudes are kept unnormalized: probability removed by detectors and
absorbers is booked into named sinks, so that at every step the live norm plus
the absorbed total is one.

Amplitudes and sink values are usually Python scalars. They may also be
1-d numpy arrays, in which case the state describes a batch of independent
photons evolving through the same optics (used by the Monte Carlo harness).
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Hashable, Iterable
from typing import Any

import numpy as np

from .errors import ConfigurationError

ModeId = Hashable
SinkId = str


def _is_zero(value: Any) -> bool:
    if isinstance(value, np.ndarray):
        return not value.any()
    return value == 0


class PhotonState:
    """Unnormalized amplitudes on modes plus probability accumulated in sinks.

    ``modes`` optionally restricts which labels may be touched; with no
    restriction any hashable label is a valid mode and absent labels carry
    zero amplitude.
    """

    __slots__ = ("amplitudes", "sinks", "modes")

    def __init__(
        self,
        amplitudes: dict | None = None,
        sinks: dict | None = None,
        modes: Iterable[ModeId] | None = None,
    ):
        self.amplitudes: dict[ModeId, Any] = dict(amplitudes or {})
        self.sinks: dict[SinkId, Any] = dict(sinks or {})
        self.modes = frozenset(modes) if modes is not None else None
        if self.modes is not None:
            for mode in self.amplitudes:
                self._check(mode)

    def _check(self, mode: ModeId) -> None:
        if self.modes is not None and mode not in self.modes:
            raise ConfigurationError(f"unknown mode {mode!r}")

    def copy(self) -> PhotonState:
        new = PhotonState.__new__(PhotonState)
        new.amplitudes = dict(self.amplitudes)
        new.sinks = dict(self.sinks)
        new.modes = self.modes
        return new

    def __repr__(self) -> str:
        live = {k: v for k, v in self.amplitudes.items() if not _is_zero(v)}
        return f"PhotonState(amplitudes={live!r}, sinks={self.sinks!r})"

    # -- in-place primitives used by the network evaluator ------------------

    def amplitude(self, mode: ModeId):
        return self.amplitudes.get(mode, 0.0)

    def beam_splitter(self, theta: float, left: ModeId, right: ModeId) -> PhotonState:
        """(a_L, a_R) -> (a_L cos - a_R sin, a_L sin + a_R cos)."""
        return self.rotate(math.cos(theta), math.sin(theta), left, right)

    def rotate(self, c, s, left: ModeId, right: ModeId) -> PhotonState:
        """Beam splitter given its precomputed cosine and sine."""
        if left == right:
            raise ConfigurationError(f"beam splitter needs two distinct modes, got {left!r} twice")
        if self.modes is not None:
            self._check(left)
            self._check(right)
        amps = self.amplitudes
        a_l = amps.get(left, 0.0)
        a_r = amps.get(right, 0.0)
        amps[left] = a_l * c - a_r * s
        amps[right] = a_l * s + a_r * c
        return self

    def phase_shift(self, mode: ModeId, phase: float) -> PhotonState:
        self._check(mode)
        if phase == 0:
            return self
        if phase == math.pi:
            factor: complex | float = -1.0
        else:
            factor = cmath.exp(1j * phase)
        if mode in self.amplitudes:
            self.amplitudes[mode] = self.amplitudes[mode] * factor
        return self

    def absorb(self, mode: ModeId, sink: SinkId, where=None) -> PhotonState:
        """Move |amplitude|^2 of ``mode`` into ``sink``.

        ``where`` is an optional boolean mask for batched states; only the
        masked entries are absorbed.
        """
        self._check(mode)
        amp = self.amplitudes.get(mode)
        if amp is None:
            return self
        prob = abs(amp) ** 2
        if where is None:
            self.amplitudes[mode] = 0.0
        else:
            prob = np.where(where, prob, 0.0)
            self.amplitudes[mode] = np.where(where, 0.0, amp)
        self.sinks[sink] = self.sinks.get(sink, 0.0) + prob
        return self

    def move(self, src: ModeId, dst: ModeId) -> PhotonState:
        """Free propagation: the amplitude on ``src`` continues on ``dst``.

        Merging into a mode that already carries amplitude is not a lossless
        optical operation, so ``dst`` must be empty.
        """
        if self.modes is not None:
            self._check(src)
            self._check(dst)
        amp = self.amplitudes.pop(src, None)
        if amp is not None:
            held = self.amplitudes.get(dst)
            if held is not None and not _is_zero(held):
                self.amplitudes[src] = amp
                raise ConfigurationError(f"cannot move {src!r} onto occupied mode {dst!r}")
            self.amplitudes[dst] = amp
        return self

    def scale(self, mode: ModeId, factor) -> PhotonState:
        self._check(mode)
        if mode in self.amplitudes:
            self.amplitudes[mode] = self.amplitudes[mode] * factor
        return self

    def add_to_sink(self, sink: SinkId, prob) -> None:
        self.sinks[sink] = self.sinks.get(sink, 0.0) + prob

    # -- read-outs -----------------------------------------------------------

    def live_norm(self):
        return sum((abs(a) ** 2 for a in self.amplitudes.values()), 0.0)

    def sink_total(self):
        return sum(self.sinks.values(), 0.0)

    def mode_probability(self, mode: ModeId):
        self._check(mode)
        return abs(self.amplitudes.get(mode, 0.0)) ** 2

    def sink_probability(self, sink: SinkId):
        return self.sinks.get(sink, 0.0)

    def total(self):
        return self.live_norm() + self.sink_total()

    def live_modes(self) -> list[ModeId]:
        return [k for k, v in self.amplitudes.items() if not _is_zero(v)]


# -- functional API: each call returns a fresh state ---------------------------


def new_state(initial_mode: ModeId, modes: Iterable[ModeId] | None = None) -> PhotonState:
    if initial_mode is None:
        raise ConfigurationError("initial mode must be given")
    if modes is not None:
        modes = frozenset(modes)
        if initial_mode not in modes:
            raise ConfigurationError(f"unknown mode {initial_mode!r}")
    return PhotonState({initial_mode: 1 + 0j}, modes=modes)


def apply_beam_splitter(state: PhotonState, theta: float, left: ModeId, right: ModeId) -> PhotonState:
    return state.copy().beam_splitter(theta, left, right)


def apply_phase_shift(state: PhotonState, mode: ModeId, phase: float) -> PhotonState:
    return state.copy().phase_shift(mode, phase)


def absorb_mode(state: PhotonState, mode: ModeId, sink: SinkId) -> PhotonState:
    return state.copy().absorb(mode, sink)


def live_norm(state: PhotonState):
    return state.live_norm()


def sink_total(state: PhotonState):
    return state.sink_total()


def mode_probability(state: PhotonState, mode: ModeId):
    return state.mode_probability(mode)
