"""Counterfactual NAND, M-type NAND, NOR and XOR gates.

Each gate is a fixed optical network at Alice's station. Inputs are given per
party: 0 blocks that party's channel segments, 1 leaves them open. A gate run
returns the detector distribution; :func:`gate_state` exposes the unabsorbed
output amplitudes for cascading gates.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

from .components import BOB, CHARLIE, BsKind, CguSpec, ChainSpec, bs_angle, build_cgu, build_chain, chain_elements
from .errors import ParameterError, UsageError
from .netlist import Absorber, Attenuator, BeamSplitter, Move, Netlist, PhaseShift, Probe, Unit, simulate
from .state import PhotonState

OUT0, OUT1 = "out0", "out1"


class GateKind(enum.Enum):
    NAND2 = "nand"
    NAND_MULTI = "nand_multi"
    NOR = "nor"
    XOR = "xor"


@dataclass(frozen=True)
class GateConfig:
    kind: GateKind
    M: int
    N: int
    parties: tuple[str, ...] = (BOB, CHARLIE)

    def __post_init__(self):
        if self.M < 2 or self.N < 2:
            raise ParameterError(f"M and N must be at least 2 (got M={self.M}, N={self.N})")
        if len(set(self.parties)) != len(self.parties):
            raise UsageError(f"duplicate party in {self.parties}")
        if self.kind is GateKind.NAND_MULTI:
            if len(self.parties) < 2:
                raise UsageError("an M-type NAND gate needs at least two parties")
        elif len(self.parties) != 2:
            raise UsageError(f"{self.kind.value} gate takes exactly two parties, got {len(self.parties)}")

    @classmethod
    def nand(cls, M: int, N: int, parties: Sequence[str] = (BOB, CHARLIE)) -> GateConfig:
        parties = tuple(parties)
        kind = GateKind.NAND2 if len(parties) == 2 else GateKind.NAND_MULTI
        return cls(kind, M, N, parties)

    @property
    def fidelity_regime(self) -> bool:
        """True when N >> M, the regime where the gates approach their truth tables."""
        return self.N >= 10 * self.M**2

    def blockers(self, inputs: Mapping[str, int] | Sequence[int]) -> frozenset[str]:
        return frozenset(p for p, bit in self.normalize_inputs(inputs).items() if bit == 0)

    def normalize_inputs(self, inputs: Mapping[str, int] | Sequence[int]) -> dict[str, int]:
        if not isinstance(inputs, Mapping):
            inputs = list(inputs)
            if len(inputs) != len(self.parties):
                raise UsageError(f"expected {len(self.parties)} inputs, got {len(inputs)}")
            inputs = dict(zip(self.parties, inputs))
        if set(inputs) != set(self.parties):
            raise UsageError(f"inputs {sorted(inputs)} do not match gate parties {list(self.parties)}")
        out = {}
        for party in self.parties:
            bit = inputs[party]
            if bit not in (0, 1):
                raise UsageError(f"input for {party} must be 0 or 1, got {bit!r}")
            out[party] = int(bit)
        return out

    def ideal_output(self, inputs) -> int:
        bits = list(self.normalize_inputs(inputs).values())
        if self.kind in (GateKind.NAND2, GateKind.NAND_MULTI):
            return 0 if all(bits) else 1
        if self.kind is GateKind.NOR:
            return 1 if not any(bits) else 0
        return bits[0] ^ bits[1]


@dataclass
class OutcomeDistribution:
    """Detector probabilities of one gate run (D0, D1 and every loss sink)."""

    probabilities: dict[str, float]
    amplitudes: dict[str, complex] = field(default_factory=dict)

    @property
    def p_d0(self) -> float:
        return self.probabilities.get("D0", 0.0)

    @property
    def p_d1(self) -> float:
        return self.probabilities.get("D1", 0.0)

    @property
    def total(self) -> float:
        return sum(self.probabilities.values())

    def effective(self, detector: int) -> float | None:
        denom = self.p_d0 + self.p_d1
        if denom <= 0:
            return None
        return (self.p_d0 if detector == 0 else self.p_d1) / denom

    def argmax_output(self) -> int:
        return 0 if self.p_d0 >= self.p_d1 else 1


# -- network construction -----------------------------------------------------


def _outer_chain(M: int, arm_unit: Netlist, role: str) -> list:
    port = arm_unit.ports["entrance"]

    def body(k, arm):
        return [Unit(arm_unit, ((port, arm),), role=role)]

    elements = chain_elements(bs_angle(BsKind.OUTER_M, M=M), M, "zone1", "zone2", body, lambda arm: [Move(arm, OUT1)])
    elements.append(Move("zone1", OUT0))
    return elements


@lru_cache(maxsize=32)
def build_nand(M: int, N: int, parties: tuple[str, ...] = (BOB, CHARLIE)) -> Netlist:
    """Outer chain of M BS(M); every outer right arm holds an inner chain of N BS(N)
    whose arms are the shared channel. Inner right exits go to D2."""
    inner = build_chain(ChainSpec(K=N, bs_count=N, owners=tuple(parties)), exit2_sink="D2")
    elements = _outer_chain(M, inner, "inner")
    return Netlist(f"nand(M={M}, N={N})", tuple(elements), {"entrance": "zone1", "output0": OUT0, "output1": OUT1})


@lru_cache(maxsize=32)
def build_nor_middle(N: int, parties: tuple[str, str] = (BOB, CHARLIE)) -> Netlist:
    """Middle interferometer: Attenuator 2 on the left arm; three CGU_2N
    (first party, second party, both) and a pi phase shifter on the right arm."""
    p1, p2 = parties
    half = bs_angle(BsKind.HALF)
    cgus = [build_cgu(CguSpec(N, "2N", owners)) for owners in ((p1,), (p2,), (p1, p2))]
    elements = [
        BeamSplitter(half, "zone2", "zone3"),
        Attenuator("zone2", bs_angle(BsKind.ATT2, N=N), "D_A2"),
        *(Unit(cgu, (("L", "zone3"),), role="cgu") for cgu in cgus),
        PhaseShift("zone3", math.pi),
        BeamSplitter(half, "zone2", "zone3"),
        Probe("recombined", "zone2"),
        Absorber("zone3", "D3"),
    ]
    return Netlist(f"nor-middle(N={N})", tuple(elements), {"entrance": "zone2", "exit1": "zone2"})


@lru_cache(maxsize=32)
def build_nor(M: int, N: int, parties: tuple[str, str] = (BOB, CHARLIE)) -> Netlist:
    elements = _outer_chain(M, build_nor_middle(N, tuple(parties)), "middle")
    return Netlist(f"nor(M={M}, N={N})", tuple(elements), {"entrance": "zone1", "output0": OUT0, "output1": OUT1})


@lru_cache(maxsize=32)
def build_xor_half(M: int, N: int, party: str, index: int) -> Netlist:
    """Half of the XOR middle chain: 2M BS(M) with a CGU_N in each right arm."""
    cgu = build_cgu(CguSpec(N, "N", (party,)))

    def body(k, arm):
        return [Unit(cgu, (("L", arm),), role="cgu")]

    elements = chain_elements(
        bs_angle(BsKind.OUTER_M, M=M), 2 * M, "L", "arm", body, lambda arm: [Absorber(arm, f"D_half[{index}]")]
    )
    return Netlist(f"xor-half(M={M}, N={N}, {party})", tuple(elements), {"entrance": "L", "exit1": "L"})


@lru_cache(maxsize=32)
def build_xor(M: int, N: int, parties: tuple[str, str] = (BOB, CHARLIE)) -> Netlist:
    """Outer interferometer of two BS(2); its right arm is the middle chain
    (upper half for the first party, pi shifter, lower half for the second)."""
    p1, p2 = parties
    half = bs_angle(BsKind.HALF)
    elements = (
        BeamSplitter(half, "zone1", "zone2"),
        Unit(build_xor_half(M, N, p1, 1), (("L", "zone2"),), role="half"),
        PhaseShift("zone2", math.pi),
        Unit(build_xor_half(M, N, p2, 2), (("L", "zone2"),), role="half"),
        BeamSplitter(half, "zone1", "zone2"),
        Move("zone1", OUT0),
        Move("zone2", OUT1),
    )
    return Netlist(f"xor(M={M}, N={N})", elements, {"entrance": "zone1", "output0": OUT0, "output1": OUT1})


def build_gate(cfg: GateConfig) -> Netlist:
    if cfg.kind in (GateKind.NAND2, GateKind.NAND_MULTI):
        return build_nand(cfg.M, cfg.N, cfg.parties)
    if cfg.kind is GateKind.NOR:
        return build_nor(cfg.M, cfg.N, cfg.parties)
    return build_xor(cfg.M, cfg.N, cfg.parties)


_AUDIT_ROLE = {
    GateKind.NAND2: "inner",
    GateKind.NAND_MULTI: "inner",
    GateKind.NOR: "middle",
    GateKind.XOR: "cgu",
}


# -- runs ---------------------------------------------------------------------


def gate_state(cfg: GateConfig, inputs, *, memo: bool = True, **kwargs) -> PhotonState:
    """Final photon state; ``out0``/``out1`` are left live for cascading."""
    blockers = cfg.blockers(inputs)
    return simulate(build_gate(cfg), blockers=blockers, memo=memo, **kwargs)


def gate_state_for_blockers(cfg: GateConfig, blockers, **kwargs) -> PhotonState:
    return simulate(build_gate(cfg), blockers=frozenset(blockers), **kwargs)


def distribution(state: PhotonState) -> OutcomeDistribution:
    amps = {"D0": complex(state.amplitude(OUT0)), "D1": complex(state.amplitude(OUT1))}
    probs = {"D0": abs(amps["D0"]) ** 2, "D1": abs(amps["D1"]) ** 2}
    for sink, p in state.sinks.items():
        probs[sink] = probs.get(sink, 0.0) + float(p)
    return OutcomeDistribution(probs, amps)


def run_gate(cfg: GateConfig, inputs, *, memo: bool = True) -> OutcomeDistribution:
    return distribution(gate_state(cfg, inputs, memo=memo))


def _require(cfg: GateConfig, *kinds: GateKind) -> None:
    if cfg.kind not in kinds:
        raise UsageError(f"expected a {' or '.join(k.value for k in kinds)} gate, got {cfg.kind.value}")


def run_nand2(cfg: GateConfig, inputs, *, memo: bool = True) -> OutcomeDistribution:
    _require(cfg, GateKind.NAND2)
    return run_gate(cfg, inputs, memo=memo)


def run_nand_multi(cfg: GateConfig, inputs, *, memo: bool = True) -> OutcomeDistribution:
    _require(cfg, GateKind.NAND_MULTI)
    return run_gate(cfg, inputs, memo=memo)


def run_nor(cfg: GateConfig, inputs, *, memo: bool = True) -> OutcomeDistribution:
    _require(cfg, GateKind.NOR)
    return run_gate(cfg, inputs, memo=memo)


def run_xor(cfg: GateConfig, inputs, *, memo: bool = True) -> OutcomeDistribution:
    _require(cfg, GateKind.XOR)
    return run_gate(cfg, inputs, memo=memo)


# -- closed-form predictions --------------------------------------------------


def _sin2_sum(n: int, K: int) -> float:
    return sum(math.sin(m * math.pi / (2 * K)) ** 2 for m in range(1, n + 1))


def theory_prediction(cfg: GateConfig, inputs, form: str = "asymptotic") -> dict[str, float]:
    """Analytic P(D0), P(D1).

    ``form="asymptotic"`` gives the leading-order expressions in 1/M and M/N
    (the wrong detector is zero at that order). ``form="sum"`` keeps the
    working-mode products and loss sums before expansion.
    """
    bits = cfg.normalize_inputs(inputs)
    M, N = cfg.M, cfg.N
    pi2 = math.pi**2
    c_m = math.cos(math.pi / (2 * M))
    c_n = math.cos(math.pi / (2 * N))
    if form not in ("asymptotic", "sum"):
        raise UsageError(f"unknown theory form {form!r}")
    asym = form == "asymptotic"

    def open_outer() -> dict[str, float]:
        if asym:
            return {"D0": 1 - pi2 / (4 * M), "D1": 0.0}
        return {"D0": c_m ** (2 * M), "D1": c_m ** (2 * (M - 1)) * math.sin(math.pi / (2 * M)) ** 2}

    if cfg.kind in (GateKind.NAND2, GateKind.NAND_MULTI):
        if all(bits.values()):
            return open_outer()
        if asym:
            return {"D0": 0.0, "D1": 1 - M * pi2 / (8 * N)}
        return {"D0": 0.0, "D1": 1 - _sin2_sum(M, M) * (1 - c_n ** (2 * N))}

    if cfg.kind is GateKind.NOR:
        if any(bits.values()):
            return open_outer()
        if asym:
            return {"D0": 0.0, "D1": 1 - 3 * pi2 * M / (4 * N)}
        return {"D0": 0.0, "D1": 1 - _sin2_sum(M, M) * (1 - c_n ** (12 * N))}

    j1, j2 = (bits[p] for p in cfg.parties)
    if asym:
        if j1 == j2 == 0:
            return {"D0": 1 - pi2 * M / (4 * N), "D1": 0.0}
        if j1 == j2 == 1:
            return {"D0": 1 - pi2 / (2 * M), "D1": 0.0}
        return {"D0": 0.0, "D1": 1 - pi2 * M / (8 * N) - pi2 / (4 * M)}
    loss = {1: 1 - c_m ** (4 * M), 0: _sin2_sum(2 * M, M) * (1 - c_n ** (2 * N))}
    sign = (-1) ** (j1 + j2)
    through = math.sqrt(1 - loss[j1]) * math.sqrt(1 - loss[j2])
    return {"D0": (1 + sign * through) ** 2 / 4, "D1": (1 - sign * through) ** 2 / 4}


# -- counterfactuality audit --------------------------------------------------


@dataclass
class AuditReport:
    inputs: dict[str, int]
    deviations: dict[str, float]
    claimed: tuple[str, ...]
    balanced_residuals: list[float]

    @property
    def max_deviation(self) -> float:
        return max(self.deviations[d] for d in self.claimed)

    @property
    def max_balanced_residual(self) -> float:
        return max(self.balanced_residuals, default=0.0)


def counterfactual_audit(cfg: GateConfig, inputs) -> AuditReport:
    """Compare output amplitudes with and without the channel-bearing units.

    Every unit that contains an unblocked channel segment (inner chain for
    NAND, middle interferometer for NOR, CGU_N for XOR) is swapped for a
    perfect absorber; blocked segments are absorbers already. If the detector
    amplitudes do not change, the photon reaching them never entered a
    channel. For NOR with an open input the |010> amplitude after every
    middle recombination is recorded as well.
    """
    bits = cfg.normalize_inputs(inputs)
    blockers = cfg.blockers(bits)
    net = build_gate(cfg)
    trace: list = []
    normal = simulate(net, blockers=blockers, memo=False, trace=trace)
    cut = simulate(net, blockers=blockers, memo=False, absorb_roles={_AUDIT_ROLE[cfg.kind]})
    deviations = {
        "D0": float(abs(normal.amplitude(OUT0) - cut.amplitude(OUT0))),
        "D1": float(abs(normal.amplitude(OUT1) - cut.amplitude(OUT1))),
    }
    if cfg.kind is GateKind.XOR:
        claimed = ("D0", "D1")
    else:
        claimed = ("D0",) if cfg.ideal_output(bits) == 0 else ("D1",)
    residuals = []
    if cfg.kind is GateKind.NOR and any(bits.values()):
        residuals = [float(abs(amp)) for label, amp in trace if label == "recombined"]
    return AuditReport(bits, deviations, claimed, residuals)
