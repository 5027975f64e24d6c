"""Normal-form apparatus tests: the distance, the exact energy-mapping
identity, the contraction inverse, and the z-equation nonlinearities."""

import math

import numpy as np
import pytest

from gpbox.dynamics import EvolutionConfig, StateU, energy_E1, evolve, gaussian_state
from gpbox.normalform import (
    Z_equation_residual,
    EnergyPoint,
    FixedPointReport,
    InversionError,
    delta_distance,
    energy_mapping_check,
    inverse_R,
    nonlinearity_NO,
    nonlinearity_NO_split,
    roundtrip_defect,
    z_equation_residual,
)
from gpbox.multilinear import transform_M, apply_symbol1
from gpbox.spectral import sym_bracket as _sb
from gpbox.spectral import (
    COMPLEX,
    REAL,
    Field,
    ZeroModeViolation,
    constant_field,
    dealiased_product,
    h1_norm,
    lp_norm,
    make_grid,
    random_smooth_field,
    sym_U,
    sym_bracket,
    zero_field,
)


def random_point(grid, rng, amp=0.5):
    f = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45, amplitude=amp)
    return EnergyPoint(f)


class TestDelta:
    def test_identical_points(self, grid2d, rng):
        p = random_point(grid2d, rng)
        assert delta_distance(p, p) == 0.0

    def test_symmetry(self, grid2d, rng):
        p = random_point(grid2d, rng)
        q = random_point(grid2d, rng)
        assert abs(delta_distance(p, q) - delta_distance(q, p)) < 1e-14

    def test_delta_to_zero_is_energy(self, grid2d, rng):
        p = random_point(grid2d, rng, amp=0.4)
        zero = EnergyPoint(zero_field(grid2d, COMPLEX))
        d2 = delta_distance(p, zero) ** 2
        st = StateU(0.0, p.f.real_part(), p.f.imag_part())
        assert abs(d2 - energy_E1(st)) < 1e-12 * max(d2, 1.0)

    def test_cache_consistency(self, grid2d, rng):
        p = random_point(grid2d, rng)
        assert p.recompute_defect() < 1e-14


class TestEnergyMapping:
    def test_identical(self, grid2d, rng):
        p = random_point(grid2d, rng)
        assert energy_mapping_check(p, p) < 1e-15

    def test_random_pairs(self, grid2d, rng):
        for _ in range(10):
            p = random_point(grid2d, rng)
            q = random_point(grid2d, rng)
            assert energy_mapping_check(p, q) < 1e-10

    def test_large_amplitude_not_perturbative(self, grid2d, rng):
        p = random_point(grid2d, rng, amp=1.0)
        q = random_point(grid2d, rng, amp=1.2)
        assert energy_mapping_check(p, q) < 1e-10


class TestInverseR:
    def test_zero_input(self, grid2d):
        g, rep = inverse_R(zero_field(grid2d, COMPLEX))
        assert rep.converged and rep.iterations == 1
        assert np.max(np.abs(g.f.values)) == 0.0

    def test_roundtrip(self, grid2d, rng):
        for _ in range(5):
            f = random_smooth_field(grid2d, rng, kind=COMPLEX, cutoff_frac=0.45,
                                    amplitude=0.03, mean_free=False)
            # imaginary part must be mean-free for U^-1
            f = f.real_part() + 1j * _mean_free(f.imag_part())
            assert roundtrip_defect(f) < 1e-9

    def test_recovers_transformed_state(self, grid2d, rng):
        # u2 mean-free: U^-1 U only recovers the mean-free part
        u1 = 0.02 * random_smooth_field(grid2d, rng, kind=REAL, cutoff_frac=0.45)
        u2 = 0.02 * random_smooth_field(grid2d, rng, kind=REAL, cutoff_frac=0.45,
                                        mean_free=True)
        z = transform_M(u1, u2)
        g, rep = inverse_R(z)
        assert rep.converged
        err = h1_norm(g.f - (u1 + 1j * u2))
        assert err < 1e-9

    def test_mean_violation_raises(self, grid2d):
        f = constant_field(grid2d, 0.01 + 0.01j)
        with pytest.raises(ZeroModeViolation):
            inverse_R(f)

    def test_smallness_gate(self, grid2d, rng):
        f = random_smooth_field(grid2d, rng, kind=COMPLEX, amplitude=5.0)
        with pytest.raises(InversionError, match="smallness"):
            inverse_R(f)

    def test_iterations_grow_near_failure(self, grid2d, rng):
        f = random_smooth_field(grid2d, rng, kind=COMPLEX, cutoff_frac=0.45,
                                amplitude=1.0)
        f = f.real_part() + 1j * _mean_free(f.imag_part())
        iters = []
        for scale in (0.01, 0.05, 0.2):
            g, rep = inverse_R(scale * f, kappa=10.0)
            iters.append(rep.iterations)
        assert iters[0] <= iters[1] <= iters[2]

    def test_lipschitz_bound_sampled(self, grid2d, rng):
        pairs = []
        for _ in range(6):
            f = random_smooth_field(grid2d, rng, kind=COMPLEX, cutoff_frac=0.45,
                                    amplitude=0.03)
            pairs.append(f.real_part() + 1j * _mean_free(f.imag_part()))
        for i in range(len(pairs) - 1):
            f, g = pairs[i], pairs[i + 1]
            rf, _ = inverse_R(f)
            rg, _ = inverse_R(g)
            lhs = delta_distance(rf, rg)
            rhs = 2.0 * h1_norm(f - g)
            assert lhs <= rhs

    def test_energy_identity_through_R(self, grid2d, rng):
        f = random_smooth_field(grid2d, rng, kind=COMPLEX, cutoff_frac=0.45,
                                amplitude=0.05)
        f = f.real_part() + 1j * _mean_free(f.imag_part())
        g, _ = inverse_R(f)
        st = StateU(0.0, g.f.real_part(), g.f.imag_part())
        lhs = energy_E1(st)
        rhs = h1_norm(f) ** 2 + 0.5 * lp_norm(
            apply_symbol1(sym_U(), g.abs_sq), 2) ** 2
        assert abs(lhs - rhs) < 1e-9 * max(lhs, 1.0)


def _mean_free(f):
    vals = f.physical().values
    return Field(f.grid, vals - np.mean(vals), f.repr, f.value_kind)


class TestNO:
    def test_zero(self, grid1d):
        z = zero_field(grid1d)
        out = nonlinearity_NO(z, z)
        assert np.max(np.abs(out.values)) < 1e-15

    def test_u2_zero_reduces(self, grid1d, rng):
        u1 = random_smooth_field(grid1d, rng, kind=REAL, cutoff_frac=0.45)
        zero = zero_field(grid1d)
        out = nonlinearity_NO(u1, zero)
        u1sq = dealiased_product(u1, u1)
        ref = apply_symbol1(sym_U(), 2.0 * u1sq + dealiased_product(u1sq, u1))
        assert np.max(np.abs(out.values - ref.values)) < 1e-13

    def test_split_sum_identity(self, grid1d, rng):
        u1 = random_smooth_field(grid1d, rng, kind=REAL, cutoff_frac=0.45)
        u2 = random_smooth_field(grid1d, rng, kind=REAL, cutoff_frac=0.45)
        a, b = nonlinearity_NO_split(u1, u2)
        total = a + b
        ref = nonlinearity_NO(u1, u2)
        scale = max(np.max(np.abs(ref.physical().values)), 1e-300)
        assert np.max(np.abs(total.physical().values - ref.physical().values)) \
            < 1e-10 * scale

    def test_split_u1_zero_crosscheck(self, grid1d, rng):
        u2 = random_smooth_field(grid1d, rng, kind=REAL, cutoff_frac=0.45)
        zero = zero_field(grid1d)
        a, b = nonlinearity_NO_split(zero, u2)
        ref = nonlinearity_NO(zero, u2)
        total = a + b
        assert np.max(np.abs(total.physical().values - ref.physical().values)) < 1e-12

    def test_residual_second_order_along_trajectory(self):
        grid = make_grid(1, 128, 40.0)
        st0 = gaussian_state(grid, eps=0.05, width=3.0, phase=0.5)
        resids, hs = [], []
        for h in (0.04, 0.02, 0.01):
            cfg = EvolutionConfig(dt=h, T=1.0, allow_wraparound=True, cadence=10**9)
            traj = evolve(st0, cfg, snapshot_dt=h)
            snaps = traj.snapshots
            mid = len(snaps) // 2
            r = z_equation_residual(snaps[mid - 1], snaps[mid], snaps[mid + 1])
            resids.append(r)
            hs.append(h)
        slope = np.polyfit(np.log(hs), np.log(resids), 1)[0]
        assert abs(slope - 2.0) < 0.2


class TestZResidual:
    def test_second_order_along_trajectory(self):
        grid = make_grid(1, 128, 40.0)
        st0 = gaussian_state(grid, eps=0.05, width=3.0, phase=0.5)
        resids, hs = [], []
        for h in (0.04, 0.02, 0.01):
            cfg = EvolutionConfig(dt=h, T=1.0, allow_wraparound=True, cadence=10**9)
            snaps = evolve(st0, cfg, snapshot_dt=h).snapshots
            mid = len(snaps) // 2
            resids.append(Z_equation_residual(snaps[mid - 1], snaps[mid],
                                              snaps[mid + 1]))
            hs.append(h)
        slope = np.polyfit(np.log(hs), np.log(resids), 1)[0]
        assert abs(slope - 2.0) < 0.2

    def test_broken_B4_detected(self):
        # mutation fixture: a sign-flipped B4 must blow the residual past the
        # scheme-error level (the identity is sensitive to every multiplier)
        from gpbox import multilinear as ml

        def broken_NZ(v, u1, u2, check_tol=1e-8):
            out = ml.nonlinearity_NZ(v, u1, u2)
            b4 = ml.apply_symbol1(ml.sym_U(),
                                  ml.bilinear_apply_direct(ml.bi_Bprime(4), u2, u2))
            return out - 2.0 * b4

        grid = make_grid(1, 128, 40.0)
        st0 = gaussian_state(grid, eps=0.05, width=3.0, phase=0.5)
        cfg = EvolutionConfig(dt=0.01, T=1.0, allow_wraparound=True, cadence=10**9)
        snaps = evolve(st0, cfg, snapshot_dt=0.01).snapshots
        mid = len(snaps) // 2
        good = Z_equation_residual(snaps[mid - 1], snaps[mid], snaps[mid + 1])
        bad = Z_equation_residual(snaps[mid - 1], snaps[mid], snaps[mid + 1],
                                  NZ_override=broken_NZ)
        assert bad > 5.0 * good

    def test_broken_energy_mapping_detected(self):
        # mutation fixture: misweighting the quadratic part of the transform
        # must break the flagship identity
        rng = np.random.default_rng(5)
        grid = make_grid(1, 64, 25.0)
        f = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45,
                                amplitude=0.5)
        g = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45,
                                amplitude=0.5)
        good = energy_mapping_check(EnergyPoint(f), EnergyPoint(g))

        from gpbox.normalform import delta_distance as dd
        from gpbox.spectral import dealiased_square_abs
        from gpbox.multilinear import diag_v

        def broken_M(u1, u2):
            usq = dealiased_square_abs(u1 + 1j * u2)
            return diag_v(u1, u2) + apply_symbol1(sym_bracket(-1.0), usq)

        fp, gp = EnergyPoint(f), EnergyPoint(g)
        d2 = dd(fp, gp) ** 2
        mf = broken_M(f.real_part(), f.imag_part())
        mg = broken_M(g.real_part(), g.imag_part())
        t1 = h1_norm(mf - mg) ** 2
        t2 = 0.5 * lp_norm(apply_symbol1(sym_U(), fp.abs_sq - gp.abs_sq), 2) ** 2
        bad = abs(d2 - t1 - t2) / (1.0 + d2)
        assert good <= 1e-10
        assert bad > 1e-3
