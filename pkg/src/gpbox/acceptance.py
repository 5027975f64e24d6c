"""The acceptance battery: every exit criterion as an executable check with
its tolerance pinned, one verdict per criterion.

``fast`` runs the low-dimensional variants (d <= 2, n <= 64 lattices plus the
pointwise three-dimensional frequency sampling, which costs nothing); ``full``
adds the three-dimensional grids and the long nonlinear run.  Criteria 9 and
10 share one simulation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    EQUIVALENCE_K,
    extract_profile,
    fit_loglog,
    linear_observable,
    norm_X,
    propagate_linear,
)
from .dynamics import (
    EvolutionConfig,
    StateU,
    energy_E1,
    evolve,
    gaussian_state,
    self_convergence_slope,
)
from .multilinear import (
    MixedNormSpec,
    bi_pair_bracket_inv2,
    bilinear_apply_direct,
    bilinear_apply_fast,
    bracket_pair_apply,
    separable_symbol,
    symbol_mixed_norm,
    transform_M,
    tri_C1,
    tri_Cprime3,
    tri_Cprime4,
    trilinear_apply,
    trilinear_apply_direct,
)
from .normalform import (
    EnergyPoint,
    delta_distance,
    energy_mapping_check,
    inverse_R,
    nonlinearity_NO,
    nonlinearity_NO_split,
    roundtrip_defect,
    z_equation_residual,
)
from .resonance import (
    CLAIM_CEILINGS,
    INTERACTIONS,
    divisor_floor_check,
    make_divisor_factory,
    mixed_triples,
    region_weights,
    sampled_bound_suite,
)
from .spectral import (
    COMPLEX,
    PHYSICAL,
    REAL,
    Field,
    Grid,
    bracket,
    group_velocity_min,
    h1_norm,
    l2_norm,
    lp_norm,
    make_grid,
    project_mean_free,
    random_smooth_field,
    sym_U,
    sym_abs,
    sym_bracket,
)


@dataclass
class CriterionResult:
    id: int
    name: str
    verdict: str
    detail: dict
    runtime_s: float

    def as_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "verdict": self.verdict,
                "detail": self.detail, "runtime_s": self.runtime_s}


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _gaussian_profile(grid: Grid, width: float, k0_idx=None, mean_free=False) -> Field:
    xs = grid.coords()
    r2 = sum(x * x for x in xs)
    vals = np.exp(-r2 / width**2).astype(complex)
    if k0_idx is not None:
        ph = sum(grid.dxi * k * x for k, x in zip(k0_idx, xs))
        vals = vals * np.exp(1j * ph)
    f = Field(grid, vals, PHYSICAL, COMPLEX)
    return project_mean_free(f) if mean_free else f


# --------------------------------------------------------------------- 1
def criterion_1(level: str) -> CriterionResult:
    """Energy-mapping identity on random dealiased pairs."""
    t0 = time.time()
    cases = [(2, 64, 20.0, 100)]
    if level == "full":
        cases.append((3, 32, 12.0, 100))
    rng = np.random.default_rng(101)
    worst = 0.0
    for d, n, L, pairs in cases:
        grid = make_grid(d, n, L)
        for _ in range(pairs):
            f = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45,
                                    amplitude=0.8)
            g = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45,
                                    amplitude=0.8)
            worst = max(worst, energy_mapping_check(EnergyPoint(f), EnergyPoint(g)))
    return CriterionResult(1, "energy-mapping identity", _verdict(worst <= 1e-10),
                           {"max_residual": worst, "tolerance": 1e-10},
                           time.time() - t0)


# --------------------------------------------------------------------- 2
def criterion_2(level: str) -> CriterionResult:
    """Inverse roundtrip and the sampled Lipschitz bound."""
    t0 = time.time()
    grid = make_grid(2, 32, 15.0)
    rng = np.random.default_rng(102)
    worst_rt = 0.0
    lipschitz_ok = True
    points = []
    for _ in range(50):
        f = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45,
                                amplitude=0.03)
        f = f.real_part() + 1j * project_mean_free(f.imag_part())
        worst_rt = max(worst_rt, roundtrip_defect(f))
        points.append(f)
    for f, g in zip(points[:-1], points[1:]):
        rf, _ = inverse_R(f)
        rg, _ = inverse_R(g)
        if delta_distance(rf, rg) > 2.0 * h1_norm(f - g):
            lipschitz_ok = False
    ok = worst_rt <= 1e-9 and lipschitz_ok
    return CriterionResult(2, "inverse map roundtrip + Lipschitz", _verdict(ok),
                           {"max_roundtrip_H1": worst_rt, "tolerance": 1e-9,
                            "lipschitz_ok": lipschitz_ok},
                           time.time() - t0)


# --------------------------------------------------------------------- 3
def criterion_3(level: str) -> CriterionResult:
    """Fast vs direct bilinear, grouped vs direct trilinear."""
    t0 = time.time()
    rng = np.random.default_rng(103)
    grid = make_grid(1, 32, 15.0)
    factors = [None, sym_U(), sym_bracket(1.0), sym_bracket(-2.0), sym_abs(1.0)]
    worst_bi = 0.0
    for trial in range(50):
        terms = []
        for _ in range(rng.integers(1, 3)):
            coeff = complex(rng.normal(), rng.normal())
            pick = lambda: factors[rng.integers(len(factors))]
            terms.append((coeff, pick(), pick(), pick()))
        B = separable_symbol(f"acc{trial}", terms)
        f = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.75)
        g = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.75)
        a = bilinear_apply_direct(B, f, g).spectral().values
        b = bilinear_apply_fast(B, f, g).spectral().values
        scale = max(float(np.max(np.abs(a))), 1e-300)
        worst_bi = max(worst_bi, float(np.max(np.abs(a - b))) / scale)

    d_tri = 3 if level == "full" else 2
    gt = make_grid(d_tri, 8, 7.0)
    worst_tri = 0.0
    for C in (tri_Cprime3(), tri_Cprime4(), tri_C1()):
        legs = [random_smooth_field(gt, rng, kind=REAL, decay=2.0, cutoff_frac=0.75)
                for _ in range(3)]
        a = trilinear_apply(C, *legs).spectral().values
        b = trilinear_apply_direct(C, *legs).spectral().values
        scale = max(float(np.max(np.abs(b))), 1e-300)
        worst_tri = max(worst_tri, float(np.max(np.abs(a - b))) / scale)
    ok = worst_bi <= 1e-10 and worst_tri <= 1e-9
    return CriterionResult(3, "multilinear oracle equivalence", _verdict(ok),
                           {"max_bilinear": worst_bi, "max_trilinear": worst_tri,
                            "trilinear_dimension": d_tri},
                           time.time() - t0)


# --------------------------------------------------------------------- 4
#: calibrated linear-rate cases: (d, p, theta) -> grid/data/window/observable
_RATE_CASES = {
    (1, 6, 0.0): dict(grid=(1, 256, 240.0), width=4.0, k0=(48,),
                      observable="L6", window=(10.0, 100.0), rate=1.0 / 3.0,
                      mean_free=False),
    (2, 6, 0.0): dict(grid=(2, 128, 160.0), width=3.5, k0=(26, 0),
                      observable="L6", window=(6.0, 60.0), rate=2.0 / 3.0,
                      mean_free=False),
    (3, 6, 0.0): dict(grid=(3, 128, 140.0), width=3.5, k0=(28, 0, 0),
                      observable="L6", window=(5.0, 50.0), rate=1.0,
                      mean_free=False),
    (3, 4, 2.0 / 3.0): dict(grid=(3, 128, 180.0), width=3.0, k0=None,
                            observable="weighted-L4", window=(8.0, 80.0),
                            rate=7.0 / 12.0, mean_free=True),
}


def criterion_4(level: str) -> CriterionResult:
    """Linear dispersive rates on Gaussian data, one-decade windows."""
    t0 = time.time()
    keys = [(1, 6, 0.0), (2, 6, 0.0)]
    if level == "full":
        keys += [(3, 6, 0.0), (3, 4, 2.0 / 3.0)]
    detail = {}
    ok = True
    for key in keys:
        c = _RATE_CASES[key]
        grid = make_grid(*c["grid"])
        f0 = _gaussian_profile(grid, c["width"], c["k0"], c["mean_free"])
        ts = np.geomspace(c["window"][0], c["window"][1], 20)
        vals = [linear_observable(c["observable"], propagate_linear(f0, float(t)))
                for t in ts]
        slope, _ = fit_loglog(ts, vals, c["window"])
        good = abs(slope + c["rate"]) <= 0.1
        ok = ok and good
        detail[str(key)] = {"fitted": slope, "predicted": -c["rate"],
                            "pass": good}
    return CriterionResult(4, "linear dispersive rates", _verdict(ok), detail,
                           time.time() - t0)


# --------------------------------------------------------------------- 5
def criterion_5(level: str) -> CriterionResult:
    """Energy conservation at the reference resolutions + Strang order."""
    t0 = time.time()
    detail = {}
    grid1 = make_grid(1, 256, 60.0)
    st1 = gaussian_state(grid1, eps=0.05, width=3.0, phase=0.7)
    res1 = evolve(st1, EvolutionConfig(dt=1e-3, T=10.0, cadence=500,
                                       allow_wraparound=True))
    e = np.array(res1.ledger.E1)
    drift1 = float(np.max(np.abs(e - e[0])) / e[0])
    detail["d1_drift"] = {"value": drift1, "tolerance": 1e-6}
    ok = drift1 <= 1e-6

    gs = make_grid(1, 64, 30.0)
    sts = gaussian_state(gs, eps=0.2, width=3.0, phase=0.7)
    slope = self_convergence_slope(sts, EvolutionConfig(dt=0.05, T=0.5,
                                                        allow_wraparound=True))
    detail["strang_slope"] = {"value": slope, "target": 2.0, "tolerance": 0.1}
    ok = ok and abs(slope - 2.0) <= 0.1

    if level == "full":
        grid3 = make_grid(3, 64, 30.0)
        st3 = gaussian_state(grid3, eps=0.05, width=2.5, phase=0.7)
        res3 = evolve(st3, EvolutionConfig(dt=5e-3, T=3.0, cadence=100,
                                           allow_wraparound=True))
        e3 = np.array(res3.ledger.E1)
        drift3 = float(np.max(np.abs(e3 - e3[0])) / e3[0])
        detail["d3_drift"] = {"value": drift3, "tolerance": 1e-5}
        ok = ok and drift3 <= 1e-5
    return CriterionResult(5, "energy conservation + Strang order",
                           _verdict(ok), detail, time.time() - t0)


# --------------------------------------------------------------------- 6
def criterion_6(level: str) -> CriterionResult:
    t0 = time.time()
    worst = math.inf
    for d, n, L in ((1, 256, 60.0), (2, 64, 20.0), (3, 64, 40.0)):
        worst = min(worst, group_velocity_min(make_grid(d, n, L)))
    ok = worst >= math.sqrt(2.0) - 1e-12
    return CriterionResult(6, "group-velocity lower bound", _verdict(ok),
                           {"min_grad_H": worst, "bound": math.sqrt(2.0)},
                           time.time() - t0)


# --------------------------------------------------------------------- 7
def criterion_7(level: str) -> CriterionResult:
    """Opening-angle identities, partition of unity, divisor floors, and the
    frozen degenerate-curvature ratio."""
    t0 = time.time()
    n_big = 1_000_000 if level == "full" else 200_000
    detail = {}
    ok = True

    rep = sampled_bound_suite("vii", n_big, np.random.default_rng(71))
    detail["cos_identities"] = rep.constants
    ok = ok and rep.passed and rep.constants["max_residual"] <= 1e-12

    worst_part = 0.0
    rng = np.random.default_rng(72)
    for inter in INTERACTIONS:
        t = mixed_triples(n_big // 4, rng)
        w = region_weights(inter, t)
        worst_part = max(worst_part, float(np.max(np.abs(np.sum(w, axis=-1) - 1.0))))
    detail["partition_defect"] = worst_part
    ok = ok and worst_part <= 1e-12

    floors = {}
    for inter in INTERACTIONS:
        reps = divisor_floor_check(inter, n_big, np.random.default_rng(73))
        floors[inter] = {"violations": len(reps["violations"]),
                         "cases": {c: d["min_margin"]
                                   for c, d in reps["per_case"].items()}}
        ok = ok and not reps["violations"]
    detail["floors"] = floors

    rep4 = sampled_bound_suite("iv", 100_000, np.random.default_rng(74))
    C = max(rep4.constants["max"], 1.0 / rep4.constants["min"])
    detail["degenerate_curvature_C"] = C
    ok = ok and rep4.passed and C <= 32.0
    return CriterionResult(7, "resonance-geometry suite", _verdict(ok), detail,
                           time.time() - t0)


# --------------------------------------------------------------------- 8
def criterion_8(level: str) -> CriterionResult:
    """Temporal-divisor mixed-norm scaling against the claimed power law,
    fitted in l at fixed M and in M at fixed l (conjugate-pair pieces)."""
    from .resonance import bt_scaling_sweep
    t0 = time.time()
    detail = {}
    ok = True
    for s in (0.5, 1.0, 1.5):
        rl = bt_scaling_sweep(s, "l", 10, np.random.default_rng(81))
        rM = bt_scaling_sweep(s, "M", 10, np.random.default_rng(82))
        good = (abs(rl["fitted_slope"] - rl["predicted_slope"]) <= 0.25
                and abs(rM["fitted_slope"] - rM["predicted_slope"]) <= 0.25)
        detail[f"s={s}"] = {"l_slope": rl["fitted_slope"],
                            "l_predicted": rl["predicted_slope"],
                            "M_slope": rM["fitted_slope"],
                            "M_predicted": rM["predicted_slope"], "pass": good}
        ok = ok and good
    return CriterionResult(8, "temporal-divisor norm scaling", _verdict(ok),
                           detail, time.time() - t0)


# --------------------------------------------------------------------- 9, 10
_D3_RUN_CACHE: dict = {}


def _d3_decay_run():
    """Shared d=3 small-data run for criteria 9 and 10."""
    if "run" in _D3_RUN_CACHE:
        return _D3_RUN_CACHE["run"]
    grid = make_grid(3, 64, 50.0)
    st = gaussian_state(grid, eps=0.01, width=2.5, phase=math.pi / 2)
    energy = energy_E1(st)
    chunk = 0.5
    n_chunks = 32
    times = [0.0]
    u1s = [float(np.max(np.abs(st.u1.physical().values.real)))]
    u2s = [float(np.max(np.abs(st.u2.physical().values.real)))]
    tailZ = []
    gaps = []  # E1 - ||<grad> z||^2 = (1/2)||U |u|^2||^2, the profile-energy gap
    cur = st
    for i in range(n_chunks):
        res = evolve(cur, EvolutionConfig(dt=0.01, T=chunk, cadence=10**9,
                                          allow_wraparound=True))
        cur = res.state
        times.append(cur.t)
        u1s.append(float(np.max(np.abs(cur.u1.physical().values.real))))
        u2s.append(float(np.max(np.abs(cur.u2.physical().values.real))))
        if cur.t >= 8.0 - 1e-9:
            tailZ.append((cur.t, cur.Z))
            gaps.append(abs(energy - h1_norm(cur.z) ** 2))
    _D3_RUN_CACHE["run"] = (times, u1s, u2s, tailZ, gaps, energy)
    return _D3_RUN_CACHE["run"]


def criterion_9(level: str) -> CriterionResult:
    t0 = time.time()
    if level != "full":
        return CriterionResult(9, "nonlinear pointwise decay (d=3)", "SKIPPED",
                               {"reason": "full level only"}, time.time() - t0)
    times, u1s, u2s, _, _, _ = _d3_decay_run()
    s1, _ = fit_loglog(times, u1s, (1.5, 15.0))
    s2, _ = fit_loglog(times, u2s, (1.5, 15.0))
    ok = s1 <= -0.7 and s2 <= -0.6
    return CriterionResult(9, "nonlinear pointwise decay (d=3)", _verdict(ok),
                           {"u1_Linf_slope": s1, "bound": -0.7,
                            "u2_Linf_slope": s2, "bound2": -0.6},
                           time.time() - t0)


def criterion_10(level: str) -> CriterionResult:
    t0 = time.time()
    if level != "full":
        return CriterionResult(10, "scattering Cauchy trend (d=3)", "SKIPPED",
                               {"reason": "full level only"}, time.time() - t0)
    _, _, _, tailZ, gaps, energy = _d3_decay_run()
    prof = extract_profile(tailZ, tail_start=tailZ[0][0])
    gap_monotone = all(b <= a * 1.02 for a, b in zip(gaps, gaps[1:]))
    ok = prof.fitted_exponent <= -0.4 and gap_monotone
    return CriterionResult(10, "scattering Cauchy trend (d=3)", _verdict(ok),
                           {"cauchy_slope": prof.fitted_exponent, "bound": -0.4,
                            "gap_monotone": gap_monotone,
                            "gap_first": gaps[0], "gap_last": gaps[-1]},
                           time.time() - t0)


# --------------------------------------------------------------------- 11
def criterion_11(level: str) -> CriterionResult:
    """Quadratic smallness of the normal-form differences and the frozen
    time envelope along a run."""
    import warnings
    t0 = time.time()
    grid = make_grid(1, 256, 80.0)
    eps_vals = (0.02, 0.01, 0.005)
    sups_Z, sups_z = [], []
    envelope_ok = True
    with warnings.catch_warnings():
        # quadratic observables carry low-frequency tails; the periodic
        # x-weight caveat is absorbed by the frozen envelope constant
        warnings.filterwarnings("ignore", message=".*poorly localized.*")
        for eps in eps_vals:
            st = gaussian_state(grid, eps=eps, width=3.0, phase=0.7)
            res = evolve(st, EvolutionConfig(dt=5e-3, T=5.0, cadence=10**9,
                                             allow_wraparound=True), snapshot_dt=1.0)
            dz = [norm_X(s.z - s.v, s.t) for s in res.snapshots]
            dZ = [norm_X(s.Z - s.v, s.t) for s in res.snapshots]
            vx = [norm_X(s.v, s.t) for s in res.snapshots]
            sups_Z.append(max(dZ))
            sups_z.append(max(dz))
            sup_v = max(vx)
            for s_, a, b in zip(res.snapshots, dz, dZ):
                env = EQUIVALENCE_K * (2.0 + s_.t**2) ** (-1.0 / 12.0) * sup_v**2
                if a > env or b > env:
                    envelope_ok = False
    slope_Z = float(np.polyfit(np.log(eps_vals), np.log(sups_Z), 1)[0])
    slope_z = float(np.polyfit(np.log(eps_vals), np.log(sups_z), 1)[0])
    ok = abs(slope_Z - 2.0) <= 0.05 and abs(slope_z - 2.0) <= 0.05 and envelope_ok
    return CriterionResult(11, "normal-form equivalence scaling", _verdict(ok),
                           {"slope_Z_minus_v": slope_Z, "slope_z_minus_v": slope_z,
                            "tolerance": 0.05, "envelope_ok": envelope_ok,
                            "envelope_K": EQUIVALENCE_K},
                           time.time() - t0)


# --------------------------------------------------------------------- 12
def criterion_12(level: str) -> CriterionResult:
    """z-equation residual at the scheme's order, and the exact regrouping."""
    t0 = time.time()
    grid = make_grid(1, 128, 40.0)
    st0 = gaussian_state(grid, eps=0.05, width=3.0, phase=0.5)
    resids, hs = [], []
    for h in (0.04, 0.02, 0.01):
        traj = evolve(st0, EvolutionConfig(dt=h, T=1.0, allow_wraparound=True,
                                           cadence=10**9), snapshot_dt=h)
        snaps = traj.snapshots
        mid = len(snaps) // 2
        resids.append(z_equation_residual(snaps[mid - 1], snaps[mid], snaps[mid + 1]))
        hs.append(h)
    slope = float(np.polyfit(np.log(hs), np.log(resids), 1)[0])

    rng = np.random.default_rng(121)
    u1 = random_smooth_field(grid, rng, kind=REAL, cutoff_frac=0.45)
    u2 = random_smooth_field(grid, rng, kind=REAL, cutoff_frac=0.45)
    a, b = nonlinearity_NO_split(u1, u2)
    ref = nonlinearity_NO(u1, u2)
    scale = max(float(np.max(np.abs(ref.physical().values))), 1e-300)
    regroup = float(np.max(np.abs((a + b).physical().values
                                  - ref.physical().values))) / scale
    ok = abs(slope - 2.0) <= 0.2 and regroup <= 1e-10
    return CriterionResult(12, "z-equation residual + regrouping", _verdict(ok),
                           {"residual_slope": slope, "tolerance": 0.2,
                            "regrouping_defect": regroup},
                           time.time() - t0)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
            9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12}


def acceptance_suite(level: str = "fast", criteria: list | None = None,
                     verbose: bool = False) -> list:
    """Run the battery; returns one CriterionResult per criterion."""
    ids = sorted(CRITERIA) if criteria is None else sorted(criteria)
    results = []
    for cid in ids:
        res = CRITERIA[cid](level)
        results.append(res)
        if verbose:
            print(f"[{res.verdict:>7}] criterion {res.id:2d} "
                  f"{res.name} ({res.runtime_s:.1f}s)")
    return results
