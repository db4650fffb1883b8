"""Beam-splitter kinds, interferometer chains and CGUs.

Also holds the closed-form working-mode amplitudes of a chain, which the test
suite uses as oracles for the exact simulation.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

from .errors import ConfigurationError, ParameterError
from .netlist import Absorber, Attenuator, BeamSplitter, Channel, Element, Move, Netlist
from .state import ModeId

BOB, CHARLIE, DAVID = "bob", "charlie", "david"


class BsKind(enum.Enum):
    HALF = "2"
    OUTER_M = "M"
    INNER_N = "N"
    ATT1 = "A1"
    ATT2 = "A2"


def _check_mn(M: int, N: int) -> None:
    if M < 2 or N < 2:
        raise ParameterError(f"M and N must be at least 2 (got M={M}, N={N})")


def bs_angle(kind: BsKind, M: int = 2, N: int = 2) -> float:
    _check_mn(M, N)
    if kind is BsKind.HALF:
        return math.pi / 4
    if kind is BsKind.OUTER_M:
        return math.pi / (2 * M)
    if kind is BsKind.INNER_N:
        return math.pi / (2 * N)
    if kind is BsKind.ATT1:
        return math.asin(math.cos(math.pi / (2 * N)) ** (2 * N))
    if kind is BsKind.ATT2:
        return math.asin(math.cos(math.pi / (2 * N)) ** (6 * N))
    raise ParameterError(f"unknown beam-splitter kind {kind!r}")


# -- working modes ---------------------------------------------------------------


def predict_mode1(k: int, K: int) -> float:
    """Left-rail amplitude after ``k`` splitters of a blocked chain."""
    if k < 0:
        raise ParameterError("k must be non-negative")
    return math.cos(math.pi / (2 * K)) ** k


def predict_mode2(K: int) -> tuple[float, float]:
    """(left residual, right amplitude) after K splitters of an open chain: (0, 1)."""
    if K < 1:
        raise ParameterError("K must be positive")
    return 0.0, 1.0


def predict_mode3(M: int) -> float:
    """Open chain of 2M splitters, no attenuator: the photon returns with a pi shift."""
    if M < 1:
        raise ParameterError("M must be positive")
    return -1.0


def predict_mode4(N: int) -> float:
    """Open chain of 2N splitters with Attenuator 1 after the N-th: -cos^2N(pi/2N)."""
    if N < 1:
        raise ParameterError("N must be positive")
    return -(math.cos(math.pi / (2 * N)) ** (2 * N))


# -- builders ------------------------------------------------------------------


def chain_elements(
    theta: float,
    n_bs: int,
    rail: ModeId,
    arm_tag: str,
    arm_body: Callable[[int, ModeId], list[Element]],
    right_exit: Callable[[ModeId], list[Element]],
) -> list[Element]:
    """Elements of a chain of ``n_bs`` identical splitters along ``rail``.

    Interferometer ``k`` (between splitters k and k+1) has its own right-arm
    mode ``(arm_tag, k)``, filled by ``arm_body(k, mode)``. The right output of
    the last splitter is handed to ``right_exit``.
    """
    elements: list[Element] = []
    arm_in: ModeId = (arm_tag, 0)
    for k in range(1, n_bs + 1):
        arm_out = (arm_tag, k)
        elements.append(BeamSplitter(theta, rail, arm_in))
        elements.append(Move(arm_in, arm_out))
        if k < n_bs:
            elements.extend(arm_body(k, arm_out))
        arm_in = arm_out
    elements.extend(right_exit(arm_in))
    return elements


@dataclass(frozen=True)
class ChainSpec:
    """A chain of ``bs_count`` splitters BS(K) whose right arms are channels.

    ``owners`` control every channel arm; an empty tuple means plain mirrors.
    ``attenuator_after`` puts Attenuator 1 (built for ``K``) in the right arm
    of that interferometer.
    """

    K: int
    bs_count: int
    owners: tuple[str, ...] = ()
    attenuator_after: int | None = None

    def validate(self) -> None:
        if self.K < 2:
            raise ConfigurationError(f"chain order K must be at least 2, got {self.K}")
        if self.bs_count < 1:
            raise ConfigurationError("a chain needs at least one beam splitter")
        if self.attenuator_after is not None and not 1 <= self.attenuator_after < self.bs_count:
            raise ConfigurationError(
                f"attenuator position {self.attenuator_after} is not inside a {self.bs_count}-splitter chain"
            )
        if len(set(self.owners)) != len(self.owners):
            raise ConfigurationError(f"duplicate channel owner in {self.owners}")


@lru_cache(maxsize=None)
def build_chain(spec: ChainSpec, exit2_sink: str | None = None) -> Netlist:
    """Ports: ``entrance``/``exit1`` are the left rail, ``exit2`` the last right output.

    With ``exit2_sink`` the right output is detected inside the chain instead
    of being exposed.
    """
    spec.validate()
    theta = math.pi / (2 * spec.K)
    att_theta = bs_angle(BsKind.ATT1, N=spec.K) if spec.attenuator_after is not None else None

    def arm_body(k: int, arm: ModeId) -> list[Element]:
        body: list[Element] = []
        if spec.owners:
            body.append(Channel(arm, spec.owners))
        if k == spec.attenuator_after:
            body.append(Attenuator(arm, att_theta, "D_A1"))
        return body

    def right_exit(arm: ModeId) -> list[Element]:
        if exit2_sink is None:
            return [Move(arm, "R")]
        return [Absorber(arm, exit2_sink)]

    elements = chain_elements(theta, spec.bs_count, "L", "arm", arm_body, right_exit)
    ports = {"entrance": "L", "exit1": "L"}
    if exit2_sink is None:
        ports["exit2"] = "R"
    name = f"chain(K={spec.K}, n={spec.bs_count}, owners={','.join(spec.owners) or '-'})"
    return Netlist(name, tuple(elements), ports)


@dataclass(frozen=True)
class CguSpec:
    """Counterfactual gate unit: ``variant`` is ``"N"`` or ``"2N"``."""

    N: int
    variant: str = "N"
    owners: tuple[str, ...] = (BOB, CHARLIE)

    def chain_spec(self) -> ChainSpec:
        if self.variant == "N":
            return ChainSpec(K=self.N, bs_count=self.N, owners=self.owners)
        if self.variant == "2N":
            return ChainSpec(K=self.N, bs_count=2 * self.N, owners=self.owners, attenuator_after=self.N)
        raise ConfigurationError(f"unknown CGU variant {self.variant!r}")


def build_cgu(spec: CguSpec, exit2_sink: str | None = "D2") -> Netlist:
    if spec.N < 2:
        raise ConfigurationError(f"CGU needs N >= 2, got {spec.N}")
    if not spec.owners:
        raise ConfigurationError("a CGU must be controlled by at least one party")
    return build_chain(spec.chain_spec(), exit2_sink)
