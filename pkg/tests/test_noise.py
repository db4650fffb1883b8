"""Monte Carlo channel noise."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfgates.gates import GateConfig, GateKind, run_gate
from cfgates.netlist import Channel
from cfgates.noise import ChannelNoise, _ratio, NoiseModel, noise_sweep, run_noisy, stream
from cfgates.state import PhotonState

NOR = GateConfig(GateKind.NOR, 8, 70)
XOR = GateConfig(GateKind.XOR, 10, 50)
ALL = [(0, 0), (0, 1), (1, 0), (1, 1)]


class TestModel:
    @pytest.mark.parametrize("kwargs", [{"gamma": -0.1}, {"gamma": 1.5}, {"gamma": 0.1, "samples": 0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            NoiseModel(**kwargs)

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            NoiseModel(0.1, policy="sometimes")


class TestHook:
    def test_masked_absorption(self):
        hook = ChannelNoise(0.5, 1000, stream(3))
        state = PhotonState({"arm": 1.0})
        hook.on_open_segment(Channel("arm", ("bob",)), state)
        amp = state.amplitude("arm")
        assert set(np.unique(amp)) <= {0.0, 1.0}
        assert 0.4 < (amp == 0).mean() < 0.6
        np.testing.assert_allclose(amp**2 + state.sink_probability("noise"), 1)

    def test_run_policy_reuses_mask(self):
        hook = ChannelNoise(0.3, 500, stream(3), policy="run")
        seg = Channel("a", ("bob",))
        first = hook._mask(seg)
        assert np.array_equal(first, hook._mask(Channel("b", ("bob",))))
        assert not np.array_equal(first, hook._mask(Channel("c", ("charlie",))))


class TestRunNoisy:
    def test_gamma_zero_is_exact(self):
        for bits in ALL:
            exact = run_gate(NOR, bits)
            noisy = run_noisy(NOR, bits, NoiseModel(0.0, 10))
            assert noisy.p_d0 == exact.p_d0
            assert noisy.p_d1 == exact.p_d1
            assert noisy.e[0] == exact.effective(0)

    def test_blocked_inputs_ignore_gamma(self):
        base = run_noisy(NOR, (0, 0), NoiseModel(0.0, 50))
        for gamma in (0.01, 0.1, 0.5):
            r = run_noisy(NOR, (0, 0), NoiseModel(gamma, 50, seed=4))
            assert abs(r.e[1] - base.e[1]) <= 1e-12

    def test_effective_definition(self):
        r = run_noisy(XOR, (1, 1), NoiseModel(0.03, 300, seed=1))
        assert r.e[0] == pytest.approx(r.p_d0 / (r.p_d0 + r.p_d1), rel=1e-12)
        assert r.e[0] + r.e[1] == pytest.approx(1, abs=1e-12)

    def test_undefined_when_nothing_clicks(self):
        zeros = np.zeros(10)
        assert _ratio(zeros, zeros) == (None, None)

    def test_reproducible(self):
        a = run_noisy(XOR, (0, 1), NoiseModel(0.05, 200, seed=9))
        b = run_noisy(XOR, (0, 1), NoiseModel(0.05, 200, seed=9))
        c = run_noisy(XOR, (0, 1), NoiseModel(0.05, 200, seed=10))
        assert a.e == b.e
        assert a.e != c.e

    @settings(max_examples=15, deadline=None)
    @given(gamma=st.floats(0, 1), seed=st.integers(0, 2**63 - 1), bits=st.sampled_from(ALL))
    def test_values_in_range(self, gamma, seed, bits):
        r = run_noisy(GateConfig(GateKind.NOR, 3, 6), bits, NoiseModel(gamma, 20, seed))
        for q in (0, 1):
            assert r.e[q] is None or 0 <= r.e[q] <= 1
        assert 0 <= r.extra["noise_absorbed"] <= 1

    def test_standard_error_scaling(self):
        a = run_noisy(XOR, (1, 1), NoiseModel(0.03, 1000), stream(5, 0, 0))
        b = run_noisy(XOR, (1, 1), NoiseModel(0.03, 2000), stream(5, 0, 0))
        assert b.se[0] / a.se[0] == pytest.approx(1 / math.sqrt(2), rel=0.25)


class TestSweep:
    def test_row_layout_and_determinism(self):
        rows = noise_sweep(NOR, ALL, [0.0, 0.02], samples=100, seed=3)
        assert [r["gamma"] for r in rows] == [0.0, 0.02]
        assert set(rows[0]) >= {"E_00D1", "SE_11D0", "E_10D0"}
        again = noise_sweep(NOR, ALL, [0.0, 0.02], samples=100, seed=3)
        assert rows == again

    def test_parallel_matches_serial(self):
        serial = noise_sweep(XOR, [(1, 1), (0, 1)], [0.01, 0.03], samples=100, seed=2)
        parallel = noise_sweep(XOR, [(1, 1), (0, 1)], [0.01, 0.03], samples=100, seed=2, workers=2)
        assert serial == parallel

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            noise_sweep(NOR, ALL, [])

    def test_blocked_column_constant(self):
        rows = noise_sweep(XOR, [(0, 0)], [0.0, 0.01, 0.03, 0.1], samples=50)
        values = [r["E_00D0"] for r in rows]
        assert max(values) - min(values) <= 1e-12

    def test_monotone_in_gamma(self):
        rows = noise_sweep(NOR, [(1, 1), (0, 1)], [0.0, 0.01, 0.02, 0.03], samples=1000, seed=11)
        for tag in ("11", "01"):
            for prev, cur in zip(rows, rows[1:]):
                slack = 2 * math.hypot(prev[f"SE_{tag}D0"], cur[f"SE_{tag}D0"])
                assert cur[f"E_{tag}D0"] <= prev[f"E_{tag}D0"] + slack

    def test_xor_mixed_inputs_agree(self):
        rows = noise_sweep(XOR, [(0, 1), (1, 0)], [0.03], samples=2000)
        r = rows[0]
        assert abs(r["E_01D1"] - r["E_10D1"]) <= 2 * math.hypot(r["SE_01D1"], r["SE_10D1"])
