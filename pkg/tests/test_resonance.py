"""Resonance-geometry tests: phase derivatives, region partition, cutoffs,
divisor symbols and the sampled pointwise bounds."""

import math

import numpy as np
import pytest

from gpbox import resonance as rg
from gpbox.multilinear import get_symbol
from gpbox.resonance import (
    chi_bump,
    CLAIM_CEILINGS,
    FreqTriple,
    InvariantViolation,
    classify_region,
    cutoff_alpha,
    cutoff_perp,
    divisor_floor_check,
    divisor_symbols,
    dyadic_feasible,
    phase_omega,
    phase_omega_fd,
    region_weights,
    sample_triples,
    sampled_bound_suite,
    symbol_split_BXBT,
)


def triple(xi, eta):
    return FreqTriple(np.array([xi], float), np.array([eta], float))


class TestPhase:
    def test_zz_collapse_limit(self):
        # eta = xi: zeta -> 0 is degenerate, but slightly off it Omega ~ 0
        t = triple([1.0, 0, 0], [1.0 - 1e-9, 0, 0])
        om, _, _, ok = phase_omega("ZZ", t)
        assert abs(om[0]) < 1e-8

    def test_zbarzbar_positive(self, rng):
        t = sample_triples(2000, rng, 0.01, 10.0)
        om, _, _, ok = phase_omega("ZbarZbar", t)
        assert np.all(om[ok] > 0)

    def test_gradients_match_fd(self, rng):
        t = sample_triples(300, rng, 0.05, 8.0)
        om, gxi, geta, ok = phase_omega("ZbarZ", t)
        fxi, feta = phase_omega_fd("ZbarZ", t)
        scale = np.linalg.norm(gxi, axis=-1) + np.linalg.norm(geta, axis=-1) + 1.0
        assert np.max(np.linalg.norm(gxi - fxi, axis=-1) / scale) < 1e-6
        assert np.max(np.linalg.norm(geta - feta, axis=-1) / scale) < 1e-6

    def test_zero_leg_flagged(self):
        t = triple([1.0, 0, 0], [1.0, 0, 0])  # zeta = 0
        _, _, _, ok = phase_omega("ZZ", t)
        assert not ok[0]

    def test_unknown_interaction(self):
        with pytest.raises(ValueError, match="unknown interaction"):
            phase_omega("XY", triple([1, 0, 0], [0.5, 0, 0]))


class TestClassification:
    def test_zbarz_case1(self):
        # b = a = 8, c = 1/2 -> dyadic ratio 16, case 1, temporally routed
        t = triple([8.0, 0, 0], [7.5, 0.0, 0.0])
        lab = classify_region("ZbarZ", t)[0]
        assert lab.case == 1 and lab.destination == "T"

    def test_zbarzbar_always_T(self, rng):
        t = sample_triples(500, rng, 0.01, 10.0)
        labs = classify_region("ZbarZbar", t)
        assert all(l.case == 1 and l.destination == "T" for l in labs)

    def test_zz_small_output(self):
        # |eta| ~ |zeta| = 1 >> |xi| = eps: case 1, T
        eps = 1e-3
        t = triple([eps, 0, 0], [1.0, 0.0, 0.0])
        lab = classify_region("ZZ", t)[0]
        assert lab.case == 1 and lab.destination == "T"

    def test_partition_of_unity(self, rng):
        for inter in rg.INTERACTIONS:
            t = rg.mixed_triples(20000, rng)
            w = region_weights(inter, t)
            assert np.max(np.abs(np.sum(w, axis=-1) - 1.0)) < 1e-12
            assert np.min(w) > -1e-15

    def test_destination_weights_complement(self, rng):
        t = rg.mixed_triples(5000, rng)
        wx, wt = rg.destination_weights("ZbarZ", t)
        assert np.max(np.abs(wx + wt - 1.0)) < 1e-12

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError, match="zero-leg|degenerate"):
            region_weights("ZZ", triple([1.0, 0, 0], [1.0, 0, 0]))


class TestCutoffs:
    def test_alpha_extremes(self):
        # xi_hat = -zeta_hat: alpha = 2 -> 1; xi_hat = zeta_hat: alpha = 0 -> 0
        t = triple([1.0, 0, 0], [3.0, 0, 0])  # zeta = -2 e1
        assert cutoff_alpha(t)[0] == 1.0
        t2 = triple([3.0, 0, 0], [1.0, 0, 0])  # zeta = 2 e1, same direction
        assert cutoff_alpha(t2)[0] == 0.0

    def test_alpha_bridge_monotone(self):
        vals = rg.gamma_cutoff(np.linspace(1.5, math.sqrt(3.0), 50))
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert np.all(np.diff(vals) >= -1e-12)

    def test_perp_parallel_gives_one(self):
        t = triple([1.0, 0, 0], [0.5, 0.0, 0.0])
        assert cutoff_perp(t)[0] == 1.0

    def test_perp_formula_consistency(self, rng):
        t = sample_triples(300, rng, 0.01, 4.0)
        M = t.M
        b = t.labels[1]
        arg = rg.bracket(M) * t.eta_perp_mag / (100.0 * M * b)
        assert np.allclose(cutoff_perp(t), rg.chi_bump(arg))

    def test_perp_support_endpoints(self):
        # the literal constant only cuts at low frequency: with |xi| = |eta|
        #   = 2^-8 the argument is 3.62 sin(angle(eta, xi))
        s = 2.0**-8
        t = triple([s, 0, 0], [0.0, s, 0.0])  # argument 3.62 -> weight 0
        assert cutoff_perp(t)[0] == 0.0
        phi = math.asin(0.1)  # argument 0.36 -> weight 1
        t1 = triple([s, 0, 0], [s * math.cos(phi), s * math.sin(phi), 0.0])
        assert cutoff_perp(t1)[0] == 1.0

    def test_perp_midrange(self):
        s = 2.0**-8
        phi = math.asin(0.4)  # argument ~1.45: inside the bridge
        t = triple([s, 0, 0], [s * math.cos(phi), s * math.sin(phi), 0.0])
        v = cutoff_perp(t)[0]
        assert 0.0 < v < 1.0


class TestDivisorSymbols:
    def test_zbarzbar_B3_finite(self, rng):
        d = rng.normal(size=(50, 3))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        eta = 1.0 * d
        zeta = 1.1 * _units(rng, 50)
        t = FreqTriple(eta + zeta, eta)
        vals = divisor_symbols("ZbarZbar", 3, t, "B3", shells=(1.0, 1.0, 1.0))
        assert np.all(np.isfinite(vals))

    def test_wrong_region_raises(self):
        # a Z-bar-Z-bar triple is all-T: asking for the spatial divisor fails
        t = triple([2.0, 0, 0], [1.0, 0.1, 0.0])
        with pytest.raises(InvariantViolation, match="destination"):
            divisor_symbols("ZbarZbar", 3, t, "B1", shells=(2.0, 1.0, 1.0))

    def test_B1_matches_independent_expression(self, rng):
        # spatially routed region of the same-sign interaction
        t = _region_triples("ZZ", 4, rng, 60)
        vals = divisor_symbols("ZZ", 3, t, "B1")
        om, gxi, geta, _ = phase_omega("ZZ", t)
        shells = (float(np.median(t.labels[0])), float(np.median(t.labels[1])),
                  float(np.median(t.labels[2])))
        BX, BT = symbol_split_BXBT("ZZ", 3, *shells)
        ref = np.sum(gxi * geta, axis=-1) / np.sum(geta * geta, axis=-1) \
            * BX.value(t.eta, t.zeta)
        assert np.max(np.abs(vals - ref)) < 1e-12 * max(1.0, np.max(np.abs(ref)))

    def test_B2_finite_in_region(self, rng):
        t = _region_triples("ZZ", 4, rng, 10)
        vals = divisor_symbols("ZZ", 3, t, "B2")
        assert np.all(np.isfinite(vals))


def _units(rng, k):
    d = rng.normal(size=(k, 3))
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def _region_triples(interaction, case, rng, n):
    t = rg.mixed_triples(50000, rng)
    w = region_weights(interaction, t)
    sel = (np.argmax(w, axis=-1) + 1 == case) & (np.max(w, axis=-1) > 0.999)
    return FreqTriple(t.xi[sel][:n], t.eta[sel][:n])


class TestSplitBXBT:
    def test_zbarzbar_all_T(self, rng):
        BX, BT = symbol_split_BXBT("ZbarZbar", 3, 1.0, 1.0, 1.0)
        xi1 = rng.normal(size=(100, 3))
        xi2 = rng.normal(size=(100, 3))
        assert np.max(np.abs(BX.value(xi1, xi2))) == 0.0

    def test_partition(self, rng):
        BX, BT = symbol_split_BXBT("ZbarZ", 4, 1.0, 1.0, 1.0)
        from gpbox.multilinear import bi_B4
        from gpbox.resonance import piece_weight
        xi1 = rng.normal(size=(5000, 3)) * 0.8
        xi2 = rng.normal(size=(5000, 3)) * 0.8
        t = FreqTriple(xi1 + xi2, xi1)
        ok = t.nondegenerate()
        total = BX.value(xi1, xi2) + BT.value(xi1, xi2)
        ref = bi_B4().value(xi1, xi2) * piece_weight(1.0, 1.0, 1.0, t)
        assert np.max(np.abs((total - ref)[ok])) < 1e-12

    def test_infeasible_shells_empty(self, rng):
        assert not dyadic_feasible(64.0, 1.0, 1.0)
        BX, BT = symbol_split_BXBT("ZbarZ", 3, 64.0, 1.0, 1.0)
        xi1 = rng.normal(size=(50, 3))
        xi2 = rng.normal(size=(50, 3))
        assert np.max(np.abs(BX.value(xi1, xi2))) == 0.0
        assert np.max(np.abs(BT.value(xi1, xi2))) == 0.0


class TestSampledBounds:
    def test_claim_vii_exact(self, rng):
        rep = sampled_bound_suite("vii", 100_000, rng)
        assert rep.passed
        assert rep.constants["max_residual"] < 1e-12

    def test_claim_i_two_sided(self, rng):
        rep = sampled_bound_suite("i", 50_000, rng)
        assert rep.passed

    def test_claim_i_degenerate_pair(self):
        # eta = xi: both sides vanish (handled by the rhs > 0 filter)
        rep = sampled_bound_suite("i", 100, np.random.default_rng(0))
        assert rep.passed

    def test_claim_ii_fd_tensors(self, rng):
        rep = sampled_bound_suite("ii", 2000, rng)
        assert rep.passed

    def test_claims_region_bounds(self, rng):
        for cid in ("iii", "iv", "v", "vi"):
            rep = sampled_bound_suite(cid, 3000, np.random.default_rng(11))
            assert rep.passed, (cid, rep.constants)

    def test_claim_iv_reported_constant(self, rng):
        rep = sampled_bound_suite("iv", 5000, rng)
        C = max(rep.constants["max"], 1.0 / rep.constants["min"])
        assert C <= 32.0

    def test_unknown_claim(self, rng):
        with pytest.raises(ValueError, match="unknown claim"):
            sampled_bound_suite("zz", 10, rng)


class TestFloors:
    def test_all_interactions_no_violations(self):
        for inter in rg.INTERACTIONS:
            rep = divisor_floor_check(inter, 100_000, np.random.default_rng(5))
            assert not rep["violations"], rep["violations"][:1]

    def test_registry_factories(self):
        for name in ("calB1", "calB2", "calB3"):
            fac = get_symbol(name)
            assert callable(fac)
        B = get_symbol("calB3")("ZbarZbar", 3, 1.0, 1.0, 1.0)
        v = B.value(np.array([[1.0, 0, 0]]), np.array([[0.0, 1.0, 0]]))
        assert np.isfinite(v[0])
