"""Gate networks: truth tables, closed-form oracles, audits."""

import itertools
import math

import pytest
import scalar_model

from cfgates.components import BOB, CHARLIE, DAVID, CguSpec, build_cgu
from cfgates.errors import ParameterError, UsageError
from cfgates.gates import (
    OUT0,
    OUT1,
    GateConfig,
    GateKind,
    build_gate,
    counterfactual_audit,
    gate_state,
    run_gate,
    run_nand2,
    run_nand_multi,
    run_nor,
    run_xor,
    theory_prediction,
)
from cfgates.netlist import Netlist, PhaseShift, Unit, simulate

TWO = list(itertools.product((0, 1), repeat=2))
THREE = list(itertools.product((0, 1), repeat=3))
TRUTH = {
    GateKind.NAND2: {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 0},
    GateKind.NOR: {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 0},
    GateKind.XOR: {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0},
}


def cfg_for(kind, M, N):
    parties = (BOB, CHARLIE, DAVID) if kind is GateKind.NAND_MULTI else (BOB, CHARLIE)
    return GateConfig(kind, M, N, parties)


class TestConfig:
    def test_parameter_bounds(self):
        with pytest.raises(ParameterError):
            GateConfig(GateKind.NOR, 1, 10)

    def test_party_counts(self):
        with pytest.raises(UsageError):
            GateConfig(GateKind.XOR, 4, 4, (BOB, CHARLIE, DAVID))
        with pytest.raises(UsageError):
            GateConfig(GateKind.NAND_MULTI, 4, 4, (BOB,))
        with pytest.raises(UsageError):
            GateConfig(GateKind.NOR, 4, 4, (BOB, BOB))

    def test_nand_factory(self):
        assert GateConfig.nand(4, 4).kind is GateKind.NAND2
        assert GateConfig.nand(4, 4, (BOB, CHARLIE, DAVID)).kind is GateKind.NAND_MULTI

    def test_inputs(self):
        cfg = GateConfig(GateKind.NOR, 4, 4)
        assert cfg.normalize_inputs({"bob": 1, "charlie": 0}) == {"bob": 1, "charlie": 0}
        assert cfg.blockers((0, 1)) == {BOB}
        for bad in [(0,), (0, 2), {"bob": 1, "david": 0}]:
            with pytest.raises(UsageError):
                cfg.normalize_inputs(bad)

    def test_fidelity_regime(self):
        assert GateConfig(GateKind.NOR, 8, 640).fidelity_regime
        assert not GateConfig(GateKind.NOR, 8, 70).fidelity_regime

    def test_wrong_kind(self):
        with pytest.raises(UsageError):
            run_xor(GateConfig(GateKind.NOR, 4, 4), (0, 0))
        with pytest.raises(UsageError):
            run_nand_multi(GateConfig(GateKind.NAND2, 4, 4), (0, 0))


class TestScalarOracle:
    """Exact network amplitudes against the collapsed scalar model."""

    @pytest.mark.parametrize("kind", list(GateKind))
    @pytest.mark.parametrize("M,N", [(2, 2), (4, 10), (8, 70), (10, 50), (16, 300)])
    def test_amplitudes(self, kind, M, N):
        cfg = cfg_for(kind, M, N)
        for bits in itertools.product((0, 1), repeat=len(cfg.parties)):
            state = gate_state(cfg, bits)
            d0, d1 = scalar_model.gate(kind.value, M, N, bits)
            assert abs(complex(state.amplitude(OUT0)) - d0) < 1e-12
            assert abs(complex(state.amplitude(OUT1)) - d1) < 1e-12

    @pytest.mark.parametrize("kind", list(GateKind))
    def test_totals(self, kind):
        cfg = cfg_for(kind, 8, 70)
        for bits in itertools.product((0, 1), repeat=len(cfg.parties)):
            assert abs(run_gate(cfg, bits).total - 1) < 1e-12

    @pytest.mark.parametrize("kind", list(GateKind))
    def test_memo_matches_full_evaluation(self, kind):
        cfg = cfg_for(kind, 6, 40)
        for bits in itertools.product((0, 1), repeat=len(cfg.parties)):
            a = gate_state(cfg, bits)
            b = gate_state(cfg, bits, memo=False)
            for port in (OUT0, OUT1):
                assert abs(complex(a.amplitude(port)) - complex(b.amplitude(port))) < 1e-13


class TestNand:
    @pytest.mark.parametrize("M", [4, 8, 30])
    def test_open_is_cos_power(self, M):
        dist = run_nand2(GateConfig.nand(M, 100), (1, 1))
        assert abs(dist.p_d0 - math.cos(math.pi / (2 * M)) ** (2 * M)) < 1e-12

    @pytest.mark.parametrize("M,N", [(8, 640), (30, 7200)])
    def test_blocked_bound(self, M, N):
        cfg = GateConfig.nand(M, N)
        for bits in [(0, 0), (0, 1), (1, 0)]:
            assert run_nand2(cfg, bits).p_d1 >= 1 - M * math.pi**2 / (8 * N) - 0.01

    def test_truth_table(self):
        cfg = GateConfig.nand(30, 2500)
        for bits, out in TRUTH[GateKind.NAND2].items():
            assert run_nand2(cfg, bits).argmax_output() == out

    def test_three_party_truth_table(self):
        cfg = GateConfig.nand(8, 640, (BOB, CHARLIE, DAVID))
        for bits in THREE:
            assert run_nand_multi(cfg, bits).argmax_output() == (0 if all(bits) else 1)

    def test_three_party_open_equals_two_party(self):
        three = run_nand_multi(GateConfig.nand(8, 640, (BOB, CHARLIE, DAVID)), (1, 1, 1))
        two = run_nand2(GateConfig.nand(8, 640), (1, 1))
        assert three.probabilities == two.probabilities


class TestNor:
    def inner_factor(self, N, blockers):
        """Three CGU_2N (bob, charlie, both) followed by the pi shifter."""
        owners = [(BOB,), (CHARLIE,), (BOB, CHARLIE)]
        elements = [Unit(build_cgu(CguSpec(N, "2N", o)), (("L", "arm"),)) for o in owners]
        elements.append(PhaseShift("arm", math.pi))
        net = Netlist("nor-inner", tuple(elements), {"entrance": "arm"})
        return simulate(net, blockers=blockers).amplitude("arm")

    @pytest.mark.parametrize("N", [10, 70, 400])
    def test_sign_ledger(self, N):
        c6 = math.cos(math.pi / (2 * N)) ** (6 * N)
        assert abs(self.inner_factor(N, {BOB, CHARLIE}) + c6) < 1e-12
        for blockers in [set(), {BOB}, {CHARLIE}]:
            assert abs(self.inner_factor(N, blockers) - c6) < 1e-12

    def test_truth_table_in_fidelity_regime(self):
        cfg = GateConfig(GateKind.NOR, 8, 1600)
        for bits, out in TRUTH[GateKind.NOR].items():
            assert run_nor(cfg, bits).argmax_output() == out

    def test_open_cases_identical(self):
        cfg = GateConfig(GateKind.NOR, 8, 70)
        d = [run_nor(cfg, bits) for bits in [(0, 1), (1, 0), (1, 1)]]
        assert d[0].p_d0 == pytest.approx(d[1].p_d0, abs=1e-14)
        assert d[0].p_d0 == pytest.approx(d[2].p_d0, abs=1e-14)


class TestXor:
    def test_truth_table(self):
        cfg = GateConfig(GateKind.XOR, 16, 6400)
        for bits, out in TRUTH[GateKind.XOR].items():
            assert run_xor(cfg, bits).argmax_output() == out

    def test_symmetric_in_parties(self):
        cfg = GateConfig(GateKind.XOR, 10, 50)
        assert run_xor(cfg, (0, 1)).p_d1 == pytest.approx(run_xor(cfg, (1, 0)).p_d1, abs=1e-14)

    def test_structure(self):
        net = build_gate(GateConfig(GateKind.XOR, 5, 7))
        # 2 outer + 4M middle splitters; every middle arm but the last of each half holds a CGU_N
        from cfgates.netlist import BeamSplitter

        assert net.count(BeamSplitter) == 2 + 4 * 5 + 2 * (2 * 5 - 1) * 7


class TestGrid:
    GRID = [(M, N) for M in (8, 16, 30) for N in (100, 400, 1600, 6400)]

    @pytest.mark.parametrize("kind", [GateKind.NAND2, GateKind.NOR, GateKind.XOR])
    def test_blocked_cases_improve_with_n(self, kind):
        for M in (8, 16, 30):
            for bits in [b for b in TWO if 0 in b]:
                cfg = [GateConfig(kind, M, N) for N in (100, 400, 1600, 6400)]
                p = [run_gate(c, bits).probabilities[f"D{c.ideal_output(bits)}"] for c in cfg]
                assert all(b >= a - 1e-12 for a, b in zip(p, p[1:])), (kind, M, bits, p)

    @pytest.mark.parametrize("kind", [GateKind.NAND2, GateKind.NOR, GateKind.XOR])
    def test_truth_tables_when_n_large(self, kind):
        for M, N in self.GRID:
            if N < 10 * M * M:
                continue
            cfg = GateConfig(kind, M, N)
            for bits, out in TRUTH[kind].items():
                assert run_gate(cfg, bits).argmax_output() == out


class TestTheory:
    def test_nor_values(self):
        cfg = GateConfig(GateKind.NOR, 30, 2500)
        assert theory_prediction(cfg, (0, 0))["D1"] == pytest.approx(0.911, abs=1e-3)
        for bits in [(0, 1), (1, 0), (1, 1)]:
            assert theory_prediction(cfg, bits)["D0"] == pytest.approx(0.918, abs=1e-3)

    def test_xor_values(self):
        cfg = GateConfig(GateKind.XOR, 100, 3000)
        assert theory_prediction(cfg, (0, 0))["D0"] == pytest.approx(0.918, abs=1e-3)
        assert theory_prediction(cfg, (1, 1))["D0"] == pytest.approx(0.951, abs=1e-3)
        assert theory_prediction(cfg, (0, 1))["D1"] == pytest.approx(0.934, abs=1e-3)

    def test_nand_forms(self):
        cfg = GateConfig.nand(30, 7200)
        assert theory_prediction(cfg, (1, 1), form="sum")["D0"] == pytest.approx(
            math.cos(math.pi / 60) ** 60, abs=1e-15
        )
        assert theory_prediction(cfg, (0, 1))["D1"] == pytest.approx(1 - 30 * math.pi**2 / (8 * 7200), abs=1e-15)

    def test_xor_ideal_limit(self):
        cfg = GateConfig(GateKind.XOR, 2000, 2000**3)
        assert theory_prediction(cfg, (0, 1), form="sum")["D1"] == pytest.approx(1, abs=2e-3)

    def test_sum_form_tracks_exact(self):
        # the sum form keeps the products before expansion; at moderate (M, N) it follows the exact run
        cfg = GateConfig(GateKind.XOR, 10, 2000)
        for bits in TWO:
            exact = run_gate(cfg, bits)
            theory = theory_prediction(cfg, bits, form="sum")
            assert abs(exact.p_d0 - theory["D0"]) < 0.01

    def test_unknown_form(self):
        with pytest.raises(UsageError):
            theory_prediction(GateConfig(GateKind.XOR, 4, 4), (0, 0), form="exact")

    @pytest.mark.parametrize(
        "kind,M,N",
        [(GateKind.NOR, 30, 2500), (GateKind.XOR, 100, 3000), (GateKind.NAND2, 30, 7200)],
    )
    def test_gap_at_reference_points(self, kind, M, N):
        cfg = GateConfig(kind, M, N)
        for bits in TWO:
            exact = run_gate(cfg, bits)
            theory = theory_prediction(cfg, bits)
            q = f"D{cfg.ideal_output(bits)}"
            assert abs(exact.probabilities[q] - theory[q]) <= 0.01


class TestAudit:
    @pytest.mark.parametrize("kind", list(GateKind))
    def test_deviation_small(self, kind):
        cfg = cfg_for(kind, 8, 70)
        for bits in itertools.product((0, 1), repeat=len(cfg.parties)):
            assert counterfactual_audit(cfg, bits).max_deviation <= 1e-9

    def test_nand_blocked_exact_zero(self):
        rep = counterfactual_audit(GateConfig.nand(8, 70), (0, 0))
        assert rep.max_deviation == 0.0

    def test_nor_balanced_arms(self):
        cfg = GateConfig(GateKind.NOR, 8, 70)
        for bits in [(0, 1), (1, 0), (1, 1)]:
            rep = counterfactual_audit(cfg, bits)
            assert len(rep.balanced_residuals) == 7
            assert rep.max_balanced_residual <= 1e-12

    def test_claimed_detectors(self):
        assert counterfactual_audit(GateConfig(GateKind.XOR, 4, 8), (0, 1)).claimed == ("D0", "D1")
        assert counterfactual_audit(GateConfig(GateKind.NOR, 4, 8), (0, 0)).claimed == ("D1",)

    def test_cut_really_changes_unclaimed_paths(self):
        # sanity: the substitution is not a no-op; NAND (1,1) photons do enter the inner chains
        cfg = GateConfig.nand(8, 70)
        normal = gate_state(cfg, (1, 1), memo=False)
        cut = gate_state(cfg, (1, 1), memo=False, absorb_roles={"inner"})
        assert cut.sink_probability("audit[inner]") > 0.1
        assert normal.sink_probability("D2") > 0.1
