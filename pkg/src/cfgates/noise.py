"""Random channel blocking and effective detector probabilities.

Channel noise blocks open transmission-channel segments with probability
``gamma``, independently of the parties' own choices. Samples are evaluated
together as a batch: every amplitude becomes a length-``samples`` array the
first time a noise event touches it.

Effective probability of detector q: ``E_q = <P_q> / (<P_D0> + <P_D1>)``, the
no-click mass (photon absorbed anywhere else) being discarded.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .gates import OUT0, OUT1, GateConfig, build_gate, distribution
from .netlist import Channel, simulate
from .state import PhotonState

NOISE_SINK = "noise"
POLICIES = ("segment", "run")


@dataclass(frozen=True)
class NoiseModel:
    """``policy="segment"`` draws per segment per traversal; ``"run"`` blocks
    a whole channel (all segments with the same owners) for a sample."""

    gamma: float
    samples: int = 2000
    seed: int = 0
    policy: str = "segment"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown noise policy {self.policy!r}; choose from {POLICIES}")


class ChannelNoise:
    """Hook called by :class:`~cfgates.netlist.Channel` on every open segment."""

    def __init__(self, gamma: float, samples: int, rng: np.random.Generator, policy: str = "segment"):
        self.gamma = gamma
        self.samples = samples
        self.rng = rng
        self.policy = policy
        self.draws = 0
        self._run_masks: dict[tuple[str, ...], np.ndarray] = {}

    def _mask(self, channel: Channel) -> np.ndarray:
        if self.policy == "run":
            mask = self._run_masks.get(channel.owners)
            if mask is None:
                mask = self.rng.random(self.samples) < self.gamma
                self._run_masks[channel.owners] = mask
            return mask
        self.draws += 1
        return self.rng.random(self.samples) < self.gamma

    def on_open_segment(self, channel: Channel, state: PhotonState) -> None:
        mask = self._mask(channel)
        if mask.any():
            state.absorb(channel.mode, NOISE_SINK, where=mask)


@dataclass
class EffectiveProbabilities:
    inputs: dict[str, int]
    gamma: float
    samples: int
    p_d0: float
    p_d1: float
    e: dict[int, float | None]
    se: dict[int, float | None]
    extra: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, detector: int) -> float | None:
        return self.e[detector]


def _ratio(num: np.ndarray, den: np.ndarray) -> tuple[float | None, float | None]:
    """Ratio of means and its delta-method standard error."""
    n = num.size
    mean_den = float(den.mean())
    if mean_den <= 0:
        return None, None
    r = float(num.mean()) / mean_den
    if n < 2:
        return r, None
    if np.ptp(num) == 0 and np.ptp(den) == 0:
        return r, 0.0
    resid = num - r * den
    se = math.sqrt(float((resid**2).sum()) / (n * (n - 1))) / mean_den
    return r, se


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one (grid point, input) cell."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def run_noisy(
    cfg: GateConfig,
    inputs,
    noise: NoiseModel,
    rng: np.random.Generator | None = None,
) -> EffectiveProbabilities:
    bits = cfg.normalize_inputs(inputs)
    blockers = cfg.blockers(bits)
    if noise.gamma == 0:
        # no draws at all: every sample is the exact run
        dist = distribution(simulate(build_gate(cfg), blockers=blockers))
        return EffectiveProbabilities(
            inputs=bits,
            gamma=0.0,
            samples=noise.samples,
            p_d0=dist.p_d0,
            p_d1=dist.p_d1,
            e={0: dist.effective(0), 1: dist.effective(1)},
            se={0: 0.0, 1: 0.0},
            extra={"noise_absorbed": 0.0},
        )
    if rng is None:
        rng = stream(noise.seed)
    hook = ChannelNoise(noise.gamma, noise.samples, rng, noise.policy)
    state = simulate(build_gate(cfg), blockers=blockers, noise=hook)

    shape = (noise.samples,)
    p0 = np.broadcast_to(np.asarray(abs(state.amplitude(OUT0)) ** 2, dtype=float), shape)
    p1 = np.broadcast_to(np.asarray(abs(state.amplitude(OUT1)) ** 2, dtype=float), shape)
    clicks = p0 + p1
    e0, se0 = _ratio(p0, clicks)
    e1, se1 = _ratio(p1, clicks)
    noise_mass = np.broadcast_to(np.asarray(state.sink_probability(NOISE_SINK), dtype=float), shape)
    return EffectiveProbabilities(
        inputs=bits,
        gamma=noise.gamma,
        samples=noise.samples,
        p_d0=float(p0.mean()),
        p_d1=float(p1.mean()),
        e={0: e0, 1: e1},
        se={0: se0, 1: se1},
        extra={"noise_absorbed": float(noise_mass.mean())},
    )


def _cell(args) -> EffectiveProbabilities:
    cfg, inputs, model, key = args
    return run_noisy(cfg, inputs, model, stream(model.seed, *key))


def noise_sweep(
    cfg: GateConfig,
    inputs_list: Sequence,
    gamma_grid: Iterable[float],
    samples: int = 2000,
    seed: int = 0,
    policy: str = "segment",
    workers: int = 1,
) -> list[dict]:
    """One row per gamma: E and its standard error for every input pair.

    Rows come back in grid order whatever ``workers`` is; each cell's random
    stream depends only on ``(seed, grid index, input index)``.
    """
    gammas = list(gamma_grid)
    if not gammas:
        raise ValueError("gamma grid is empty")
    inputs_list = [cfg.normalize_inputs(i) for i in inputs_list]
    jobs = [
        (cfg, inputs, NoiseModel(g, samples, seed, policy), (gi, ii))
        for gi, g in enumerate(gammas)
        for ii, inputs in enumerate(inputs_list)
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell, jobs))
    else:
        results = [_cell(job) for job in jobs]

    rows = []
    per_gamma = len(inputs_list)
    for gi, gamma in enumerate(gammas):
        row: dict = {"gamma": gamma}
        for res in results[gi * per_gamma : (gi + 1) * per_gamma]:
            tag = "".join(str(res.inputs[p]) for p in cfg.parties)
            for q in (0, 1):
                row[f"E_{tag}D{q}"] = res.e[q]
                row[f"SE_{tag}D{q}"] = res.se[q]
        rows.append(row)
    return rows
