"""Quantum controllers and counterfactual GHZ/W preparation.

A party's channel controller is a V-type atom: ``g`` absorbs the photon (the
atom jumps to ``u`` and fires that party's D_u detector), so it acts as a
blocking switch; ``e`` is transparent. Different atomic configurations never
interfere, so a run over superposed atoms is a weighted ensemble of classical
gate runs, one per configuration.

Pipelines cascade gates. After every non-terminal stage one output port is
kept and fed to the next gate; the other is detected by a failure detector.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .components import BOB, CHARLIE, DAVID
from .errors import ParameterError, UsageError
from .gates import OUT0, OUT1, GateConfig, GateKind, gate_state_for_blockers
from .netlist import REAL, sw_sink
from .state import PhotonState

LEVELS = ("g", "e")
PORTS = (OUT0, OUT1)
PHOTON_IN = "in"
NORM_TOL = 1e-9


def du_sink(party: str) -> str:
    return f"D_u[{party}]"


# -- controllers ---------------------------------------------------------------


@dataclass(frozen=True)
class AtomState:
    """Prepared atoms: party -> (C_g, C_e).

    Absorption (the jump to ``u``) is not stored here; it shows up as
    probability in the party's ``D_u`` sink of each branch.
    """

    amplitudes: Mapping[str, tuple[complex, complex]]

    def __post_init__(self):
        amps = {}
        for party, pair in dict(self.amplitudes).items():
            c_g, c_e = (complex(a) for a in pair)
            norm = abs(c_g) ** 2 + abs(c_e) ** 2
            if abs(norm - 1) > NORM_TOL:
                raise ParameterError(f"atom of {party} is not normalized (|C_g|^2 + |C_e|^2 = {norm!r})")
            amps[party] = (c_g, c_e)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def uniform(cls, parties: Sequence[str] = (BOB, CHARLIE, DAVID)) -> AtomState:
        """Every atom in (|e> + |g>)/sqrt 2."""
        h = 1 / math.sqrt(2)
        return cls({p: (h, h) for p in parties})

    @classmethod
    def classical(cls, bits: Mapping[str, int]) -> AtomState:
        """Bit 0 = |g> (block), bit 1 = |e> (unblock)."""
        return cls({p: ((0, 1) if b else (1, 0)) for p, b in bits.items()})

    @property
    def parties(self) -> tuple[str, ...]:
        return tuple(self.amplitudes)

    def with_atom(self, party: str, c_g: complex, c_e: complex) -> AtomState:
        amps = dict(self.amplitudes)
        amps[party] = (c_g, c_e)
        return AtomState(amps)

    def configurations(self, parties: Sequence[str] | None = None):
        """Yield (config, weight) over nonzero-weight level assignments."""
        parties = tuple(parties) if parties is not None else self.parties
        missing = [p for p in parties if p not in self.amplitudes]
        if missing:
            raise UsageError(f"no atom prepared for {', '.join(missing)}")
        choices = []
        for p in parties:
            c_g, c_e = self.amplitudes[p]
            choices.append([(lvl, amp) for lvl, amp in zip(LEVELS, (c_g, c_e)) if amp != 0])
        for combo in itertools.product(*choices):
            weight = 1 + 0j
            for _, amp in combo:
                weight *= amp
            yield dict(zip(parties, (lvl for lvl, _ in combo))), weight


def config_key(config: Mapping[str, str], parties: Sequence[str]) -> str:
    return "".join(config[p] for p in parties)


# -- single gate with quantum controllers ----------------------------------------


@dataclass
class Branch:
    config: dict[str, str]
    weight: complex
    photon: PhotonState

    def u_probability(self, party: str) -> float:
        return float(self.photon.sink_probability(du_sink(party)))


@dataclass
class BranchEnsemble:
    branches: list[Branch]

    def total(self) -> float:
        return sum(abs(b.weight) ** 2 * float(b.photon.total()) for b in self.branches)

    def output_amplitudes(self, port: str) -> dict[str, complex]:
        out = {}
        for b in self.branches:
            key = "".join(b.config.values())
            out[key] = b.weight * complex(b.photon.amplitude(port))
        return out

    def __len__(self) -> int:
        return len(self.branches)


def _rename_sinks(state: PhotonState, parties: Iterable[str]) -> PhotonState:
    renames = {sw_sink(p): du_sink(p) for p in parties}
    state.sinks = {renames.get(k, k): v for k, v in state.sinks.items()}
    return state


def _blockers(cfg: GateConfig, config: Mapping[str, str]) -> frozenset[str]:
    return frozenset(p for p in cfg.parties if config[p] == "g")


def run_gate_quantum(cfg: GateConfig, controllers: AtomState | Mapping) -> BranchEnsemble:
    """One branch per nonzero-weight atomic configuration of the gate's parties."""
    if not isinstance(controllers, AtomState):
        controllers = AtomState(controllers)
    branches = []
    for config, weight in controllers.configurations(cfg.parties):
        state = gate_state_for_blockers(cfg, _blockers(cfg, config))
        branches.append(Branch(config, weight, _rename_sinks(state, cfg.parties)))
    return BranchEnsemble(branches)


# -- pipelines --------------------------------------------------------------------


@dataclass(frozen=True)
class Stage:
    """``keep`` is the port (0/1) fed onward, or None for the terminal measurement."""

    gate: GateConfig
    keep: int | None = 0

    def __post_init__(self):
        if self.keep not in (0, 1, None):
            raise UsageError(f"stage port must be 0, 1 or None, got {self.keep!r}")


_HALF_ROOT2 = 1 / math.sqrt(2)
_THIRD_ROOT3 = 1 / math.sqrt(3)

TARGETS: dict[str, tuple[dict[str, complex], bool]] = {
    # name -> (target vector over bob/charlie/david levels, relabel e<->g before comparing)
    "ghz": ({"ggg": _HALF_ROOT2, "eee": _HALF_ROOT2}, False),
    "w": ({"egg": _THIRD_ROOT3, "geg": _THIRD_ROOT3, "gge": _THIRD_ROOT3}, True),
}


@dataclass(frozen=True)
class Pipeline:
    """Cascade of gate stages.

    Postselecting stages send their discarded port to ``D_F`` (or ``D_F1``,
    ``D_F2`` ... when there are several). A terminal measuring stage
    detects both ports with D0/D1 and succeeds on ``success_port``.
    """

    stages: tuple[Stage, ...]
    success_port: int = 0
    target: str | None = None
    name: str = "pipeline"

    def __post_init__(self):
        if not self.stages:
            raise UsageError("a pipeline needs at least one stage")
        for stage in self.stages[:-1]:
            if stage.keep is None:
                raise UsageError("only the last stage may measure")
        if self.success_port not in (0, 1):
            raise UsageError("success port must be 0 or 1")
        if self.target is not None and self.target not in TARGETS:
            raise UsageError(f"unknown target state {self.target!r}")

    @property
    def parties(self) -> tuple[str, ...]:
        seen: list[str] = []
        for stage in self.stages:
            for p in stage.gate.parties:
                if p not in seen:
                    seen.append(p)
        return tuple(seen)

    @property
    def measures(self) -> bool:
        return self.stages[-1].keep is None

    @property
    def final_port(self) -> int:
        last = self.stages[-1]
        return self.success_port if last.keep is None else last.keep

    def failure_sinks(self) -> list[str | None]:
        """Failure detector of every stage (None for a terminal measurement)."""
        post = [i for i, s in enumerate(self.stages) if s.keep is not None]
        names: list[str | None] = [None] * len(self.stages)
        for n, i in enumerate(post, start=1):
            names[i] = "D_F" if len(post) == 1 else f"D_F{n}"
        return names


@dataclass
class PipelineResult:
    success_probability: float
    amplitudes: dict[str, complex]
    fidelity: float | None
    failures: dict[str, float]
    ports: dict[str, dict[str, complex]] = field(default_factory=dict)
    conservation: float = 1.0
    stage_amplitudes: list[dict[str, complex]] = field(default_factory=list)

    def normalized_state(self) -> dict[str, complex]:
        norm = math.sqrt(self.success_probability)
        if norm == 0:
            return {}
        return {k: v / norm for k, v in self.amplitudes.items()}


def _ideal_transfer(cfg: GateConfig, config: Mapping[str, str]):
    bits = {p: (0 if config[p] == "g" else 1) for p in cfg.parties}
    q = cfg.ideal_output(bits)
    amps = {OUT0: 0.0, OUT1: 0.0}
    amps[PORTS[q]] = 1.0
    return amps, {}


def _exact_transfer(cfg: GateConfig, config: Mapping[str, str]):
    state = gate_state_for_blockers(cfg, _blockers(cfg, config))
    _rename_sinks(state, cfg.parties)
    amps = {port: state.amplitude(port) for port in PORTS}
    return amps, dict(state.sinks)


def flip_key(key: str) -> str:
    return key.translate(str.maketrans("ge", "eg"))


def fidelity(state: Mapping[str, complex], target: Mapping[str, complex]) -> float | None:
    """|<target|psi/|psi|>|^2, or None for a zero vector."""
    norm2 = sum(abs(a) ** 2 for a in state.values())
    if norm2 == 0:
        return None
    overlap = sum(target[k].conjugate() * state.get(k, 0) for k in target)
    return abs(overlap) ** 2 / norm2


def run_pipeline(pipeline: Pipeline, preparation: AtomState | None = None, *, ideal: bool = False) -> PipelineResult:
    """Exact branch-by-branch evaluation of ``pipeline`` (or its ideal-gate limit)."""
    parties = pipeline.parties
    if preparation is None:
        preparation = AtomState.uniform(parties)
    missing = [p for p in parties if p not in preparation.amplitudes]
    if missing:
        raise UsageError(f"no atom prepared for {', '.join(missing)}")
    # untouched prepared atoms still label the reported state
    parties = parties + tuple(p for p in preparation.parties if p not in parties)

    transfer = _ideal_transfer if ideal else _exact_transfer
    cache: dict = {}
    sinks_for = pipeline.failure_sinks()
    n = len(pipeline.stages)
    stage_amps: list[dict[str, complex]] = [{} for _ in range(n)]
    ports: dict[str, dict[str, complex]] = {OUT0: {}, OUT1: {}}
    failures: dict[str, float] = {}
    total = 0.0

    for config, weight in preparation.configurations(parties):
        key = config_key(config, parties)
        w2 = abs(weight) ** 2
        photon = PhotonState({PHOTON_IN: REAL(1)})
        for i, stage in enumerate(pipeline.stages):
            amp = photon.amplitudes.pop(PHOTON_IN, 0.0)
            if amp == 0:
                break
            ck = (stage.gate, _blockers(stage.gate, config))
            hit = cache.get(ck)
            if hit is None:
                hit = cache[ck] = transfer(stage.gate, config)
            t_amps, t_sinks = hit
            a2 = abs(amp) ** 2
            for sink, prob in t_sinks.items():
                photon.add_to_sink(sink, a2 * prob)
            out = {port: amp * t_amps[port] for port in PORTS}
            if stage.keep is None:
                for q, port in enumerate(PORTS):
                    ports[port][key] = weight * complex(out[port])
                    if q != pipeline.success_port:
                        photon.add_to_sink(f"D{q}", abs(complex(out[port])) ** 2)
                    else:
                        photon.amplitudes[port] = out[port]
            else:
                kept = PORTS[stage.keep]
                dropped = PORTS[1 - stage.keep]
                photon.add_to_sink(sinks_for[i], abs(complex(out[dropped])) ** 2)
                photon.amplitudes[PHOTON_IN] = out[kept]
                stage_amps[i][key] = weight * complex(out[kept])
        total += w2 * float(photon.total())
        for sink, prob in photon.sinks.items():
            failures[sink] = failures.get(sink, 0.0) + w2 * float(prob)

    final = ports[PORTS[pipeline.success_port]] if pipeline.measures else stage_amps[-1]
    amplitudes = {k: v for k, v in final.items() if v != 0}
    success = sum(abs(a) ** 2 for a in amplitudes.values())

    fid = None
    if pipeline.target is not None:
        target, flip = TARGETS[pipeline.target]
        shown = {flip_key(k): v for k, v in amplitudes.items()} if flip else amplitudes
        fid = fidelity(shown, target)
        if flip:
            amplitudes = shown

    return PipelineResult(
        success_probability=success,
        amplitudes=amplitudes,
        fidelity=fid,
        failures=failures,
        ports={p: {k: v for k, v in amps.items() if v != 0} for p, amps in ports.items()},
        conservation=total,
        stage_amplitudes=[{k: v for k, v in amps.items() if v != 0} for amps in stage_amps],
    )


def ghz_stages(M: int, N: int) -> Pipeline:
    return Pipeline(
        (
            Stage(GateConfig(GateKind.XOR, M, N, (BOB, CHARLIE)), keep=0),
            Stage(GateConfig(GateKind.XOR, M, N, (CHARLIE, DAVID)), keep=None),
        ),
        success_port=0,
        target="ghz",
        name="ghz",
    )


def w_stages(M: int, N: int) -> Pipeline:
    return Pipeline(
        (
            Stage(GateConfig(GateKind.NOR, M, N, (BOB, CHARLIE)), keep=0),
            Stage(GateConfig(GateKind.NOR, M, N, (BOB, DAVID)), keep=0),
            Stage(GateConfig(GateKind.NOR, M, N, (CHARLIE, DAVID)), keep=0),
            Stage(GateConfig(GateKind.NAND_MULTI, M, N, (BOB, CHARLIE, DAVID)), keep=None),
        ),
        success_port=1,
        target="w",
        name="w",
    )


def ghz_pipeline(M: int, N: int, preparation: AtomState | None = None) -> PipelineResult:
    return run_pipeline(ghz_stages(M, N), preparation)


def w_pipeline(M: int, N: int, preparation: AtomState | None = None) -> PipelineResult:
    return run_pipeline(w_stages(M, N), preparation)


PIPELINES = {"ghz": ghz_stages, "w": w_stages}


def ideal_oracle(pipeline: str | Pipeline, preparation: AtomState | None = None) -> PipelineResult:
    """Pipeline evaluated with unit-amplitude ideal gate maps (no losses)."""
    if isinstance(pipeline, str):
        try:
            pipeline = PIPELINES[pipeline](2, 2)
        except KeyError:
            raise UsageError(f"unknown pipeline {pipeline!r}; choose ghz or w") from None
    return run_pipeline(pipeline, preparation, ideal=True)
