"""Experiment configuration, dispatch and reproducible reporting.

Every run takes a strict-schema config, writes its resolved config, numeric
artifacts (CSV series, JSON verdicts, field containers) and a manifest with
the config hash.  At a fixed seed and thread count the numeric artifacts are
bit-for-bit reproducible (numpy pairwise summation, single-threaded FFTs,
fixed float formatting).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PField

from . import __version__
from .analysis import (
    decay_fit,
    extract_profile,
    linear_observable,
    norm_S,
    norm_X,
    normalform_equivalence,
    propagate_linear,
    state_observable,
)
from .dynamics import (
    EvolutionConfig,
    StateU,
    energy_E1,
    evolve,
    evolve_boussinesq,
    gaussian_state,
    weighted_smallness,
)
from .fieldio import save_field
from .multilinear import (
    SymbolBi,
    get_symbol,
    sbil_inequality_harness,
)
from .normalform import (
    EnergyPoint,
    energy_mapping_check,
    inverse_R,
    roundtrip_defect,
)
from .resonance import divisor_floor_check, sampled_bound_suite
from .spectral import (
    COMPLEX,
    PHYSICAL,
    REAL,
    Field,
    Grid,
    h1_norm,
    l2_norm,
    lp_norm,
    project_mean_free,
    random_smooth_field,
    wraparound_horizon,
)

RUN_KINDS = ("propagate-linear", "simulate", "boussinesq", "decay-fit",
             "normalform-check", "normalform-invert", "resonance-scan",
             "sbil-harness", "scatter-extract")


def output_root() -> Path:
    return Path(os.environ.get("GPBOX_OUTPUT_ROOT", "gpbox-runs"))


def thread_count() -> int:
    return int(os.environ.get("GPBOX_THREADS", "1"))


# ---------------------------------------------------------------------------
# config schema (strict: unknown keys rejected)
# ---------------------------------------------------------------------------

class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSpec(StrictModel):
    d: int = 1
    n: int = 64
    L: float = 30.0

    def build(self) -> Grid:
        return Grid(self.d, self.n, self.L)


class DataSpec(StrictModel):
    """Initial-data family: modulated Gaussians or seeded random smooth data."""

    family: Literal["gaussian", "random"] = "gaussian"
    eps: float = 0.01
    width: float = 3.0
    phase: float = 0.0
    k0: Optional[list] = None  # integer lattice modulation vector
    width2: Optional[float] = None
    seed: int = 0
    mean_free: bool = False

    def build_state(self, grid: Grid) -> StateU:
        if self.family == "gaussian":
            return gaussian_state(grid, eps=self.eps, width=self.width,
                                  phase=self.phase, k0=self.k0, width2=self.width2)
        rng = np.random.default_rng(self.seed)
        u1 = self.eps * random_smooth_field(grid, rng, kind=REAL, cutoff_frac=0.45)
        u2 = self.eps * random_smooth_field(grid, rng, kind=REAL, cutoff_frac=0.45,
                                            mean_free=self.mean_free)
        return StateU(0.0, u1, u2)

    def build_profile(self, grid: Grid) -> Field:
        """Complex single-field profile for linear-flow experiments."""
        xs = grid.coords()
        r2 = sum(x * x for x in xs)
        vals = self.eps * np.exp(-r2 / self.width**2).astype(complex)
        if self.k0 is not None:
            phase = sum(grid.dxi * k * x for k, x in zip(self.k0, xs))
            vals = vals * np.exp(1j * phase)
        f = Field(grid, vals * np.exp(1j * self.phase), PHYSICAL, COMPLEX)
        if self.mean_free:
            f = project_mean_free(f)
        return f


class DecaySpec(StrictModel):
    mode: Literal["linear", "nonlinear"] = "linear"
    observable: str = "L6"
    predicted_rate: float = 1.0
    window: list = PField(default_factory=lambda: [1.0, 10.0])
    sharp: bool = True
    tolerance: Optional[float] = None
    samples: int = 25


class ResonanceSpec(StrictModel):
    interaction: str = "ZbarZ"
    claim: str = "vii"  # claim id, "floors", or "bt-scaling"
    samples: int = 100_000
    r_lo: float = 2.0**-8
    r_hi: float = 2.0**6
    s: float = 1.0      # bt-scaling: mixed-norm order
    sweep: str = "l"    # bt-scaling: 'l' or 'M'
    octaves: int = 10


class SbilSpec(StrictModel):
    symbol: str = "B3"
    s: float = 0.25
    q1: float = 2.0
    q2: Optional[float] = None  # solved from the exponent relation if absent
    trials: int = 10


class NormalformSpec(StrictModel):
    pairs: int = 20
    amplitude: float = 0.5
    kappa: float = 0.1
    tol: float = 1e-10
    eps_sweep: list = PField(default_factory=lambda: [0.01, 0.03, 0.06, 0.09])


class RunConfig(StrictModel):
    kind: Literal["propagate-linear", "simulate", "boussinesq", "decay-fit",
                  "normalform-check", "normalform-invert", "resonance-scan",
                  "sbil-harness", "scatter-extract"]
    grid: GridSpec = GridSpec()
    data: DataSpec = DataSpec()
    scheme: str = "strang-split"
    dt: float = 0.01
    T: float = 1.0
    cadence: int = 10
    snapshot_dt: Optional[float] = None
    allow_wraparound: bool = True
    seed: int = 0
    output_dir: Optional[str] = None
    decay: DecaySpec = DecaySpec()
    resonance: ResonanceSpec = ResonanceSpec()
    sbil: SbilSpec = SbilSpec()
    normalform: NormalformSpec = NormalformSpec()

    def config_hash(self) -> str:
        payload = self.model_dump_json(exclude={"output_dir"})
        return hashlib.sha256(payload.encode()).hexdigest()

    def evolution(self) -> EvolutionConfig:
        return EvolutionConfig(dt=self.dt, T=self.T, scheme=self.scheme,
                               cadence=self.cadence,
                               allow_wraparound=self.allow_wraparound)


class Verdict(StrictModel):
    name: str
    verdict: str
    detail: dict = PField(default_factory=dict)


class RunManifest(StrictModel):
    kind: str
    config_hash: str
    code_version: str
    wall_time_s: float
    artifacts: list
    verdicts: list
    seed: int
    thread_count: int
    output_dir: str


# ---------------------------------------------------------------------------
# deterministic writers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, columns: list, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: Path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)}")


# ---------------------------------------------------------------------------
# experiment bodies
# ---------------------------------------------------------------------------

def _run_propagate_linear(cfg: RunConfig, outdir: Path):
    grid = cfg.grid.build()
    f0 = cfg.data.build_profile(grid)
    times = np.linspace(0.0, cfg.T, max(2, cfg.cadence))
    rows = []
    for t in times:
        ft = propagate_linear(f0, float(t))
        rows.append((t, l2_norm(ft), lp_norm(ft, 6.0), lp_norm(ft, math.inf),
                     h1_norm(ft)))
    write_csv(outdir / "norms.csv", ["t", "L2", "L6", "Linf", "H1"], rows)
    save_field(propagate_linear(f0, cfg.T), outdir / "final.field")
    return ["norms.csv", "final.field"], []


def _run_simulate(cfg: RunConfig, outdir: Path):
    grid = cfg.grid.build()
    st = cfg.data.build_state(grid)
    res = evolve(st, cfg.evolution(), snapshot_dt=cfg.snapshot_dt)
    write_csv(outdir / "energy.csv", ["t", "E1", "H1z", "Uu2sq"],
              [(t, e, h, u) for t, e, h, u, _ in res.ledger.rows()])
    arts = ["energy.csv"]
    for i, snap in enumerate(res.snapshots):
        save_field(snap.u1, outdir / f"u1-{i:04d}.field")
        save_field(snap.u2, outdir / f"u2-{i:04d}.field")
        arts += [f"u1-{i:04d}.field", f"u2-{i:04d}.field"]
    diag = {"weighted_smallness_t0": weighted_smallness(st),
            "charge_series": res.ledger.charge,
            "E1_initial": res.ledger.E1[0], "E1_final": res.ledger.E1[-1]}
    write_json(outdir / "diagnostics.json", diag)
    arts.append("diagnostics.json")
    drift = max(abs(e - res.ledger.E1[0]) for e in res.ledger.E1)
    rel = drift / max(res.ledger.E1[0], 1e-300)
    verdicts = [Verdict(name="energy-drift", verdict="PASS" if rel < 1e-5 else "FAIL",
                        detail={"relative_drift": rel})]
    return arts, verdicts


def _run_boussinesq(cfg: RunConfig, outdir: Path):
    grid = cfg.grid.build()
    v = cfg.data.build_profile(grid)
    n_chunks = max(2, cfg.cadence)
    chunk = cfg.T / n_chunks
    rows = [(0.0, l2_norm(v))]
    cur = v
    for i in range(n_chunks):
        cur = evolve_boussinesq(cur, EvolutionConfig(
            dt=cfg.dt, T=chunk, allow_wraparound=True))
        rows.append(((i + 1) * chunk, l2_norm(cur)))
    write_csv(outdir / "l2.csv", ["t", "L2"], rows)
    save_field(cur, outdir / "final.field")
    return ["l2.csv", "final.field"], []


def _run_decay_fit(cfg: RunConfig, outdir: Path):
    grid = cfg.grid.build()
    d = cfg.decay
    lo, hi = d.window
    if d.mode == "linear":
        f0 = cfg.data.build_profile(grid)
        times = np.geomspace(max(lo * 0.8, 1e-3), hi, d.samples)
        vals = [linear_observable(d.observable, propagate_linear(f0, float(t)))
                for t in times]
    else:
        st = cfg.data.build_state(grid)
        snap_dt = (hi - 0.0) / max(d.samples - 1, 1)
        res = evolve(st, cfg.evolution(), snapshot_dt=snap_dt)
        times = [s.t for s in res.snapshots]
        vals = [state_observable(d.observable, s) for s in res.snapshots]
    rep = decay_fit(d.observable, times, vals, d.predicted_rate, (lo, hi),
                    sharp=d.sharp, tolerance=d.tolerance)
    write_csv(outdir / "series.csv", ["t", "value"], list(zip(times, vals)))
    write_json(outdir / "fit.json", {
        "observable": rep.observable, "fitted_exponent": rep.fitted_exponent,
        "fit_residual": rep.fit_residual, "predicted_rate": rep.predicted_rate,
        "sharp": rep.sharp, "tolerance": rep.tolerance, "window": rep.window,
        "verdict": rep.verdict})
    return (["series.csv", "fit.json"],
            [Verdict(name=f"decay-{d.observable}", verdict=rep.verdict,
                     detail={"fitted": rep.fitted_exponent,
                             "predicted": rep.predicted_rate})])


def _run_normalform_check(cfg: RunConfig, outdir: Path):
    grid = cfg.grid.build()
    rng = np.random.default_rng(cfg.seed)
    nf = cfg.normalform
    worst = 0.0
    for _ in range(nf.pairs):
        f = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45,
                                amplitude=nf.amplitude)
        g = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45,
                                amplitude=nf.amplitude)
        worst = max(worst, energy_mapping_check(EnergyPoint(f), EnergyPoint(g)))
    verdict = "PASS" if worst <= 1e-10 else "FAIL"
    write_json(outdir / "identity.json", {"pairs": nf.pairs,
                                          "max_residual": worst,
                                          "verdict": verdict})
    return (["identity.json"],
            [Verdict(name="energy-mapping", verdict=verdict,
                     detail={"max_residual": worst})])


def _run_normalform_invert(cfg: RunConfig, outdir: Path):
    grid = cfg.grid.build()
    rng = np.random.default_rng(cfg.seed)
    nf = cfg.normalform
    base = random_smooth_field(grid, rng, kind=COMPLEX, cutoff_frac=0.45,
                               amplitude=1.0)
    base = base.real_part() + 1j * project_mean_free(base.imag_part())
    rows = []
    worst = 0.0
    for eps in nf.eps_sweep:
        f = eps * base
        g, rep = inverse_R(f, tol=nf.tol, kappa=nf.kappa)
        defect = roundtrip_defect(f, tol=nf.tol, kappa=nf.kappa)
        worst = max(worst, defect)
        rows.append((eps, rep.iterations, rep.residual, rep.contraction, defect))
    write_csv(outdir / "sweep.csv",
              ["eps", "iterations", "residual", "contraction", "roundtrip_H1"],
              rows)
    verdict = "PASS" if worst <= 1e-9 else "FAIL"
    write_json(outdir / "invert.json", {"worst_roundtrip_H1": worst,
                                        "verdict": verdict})
    return (["sweep.csv", "invert.json"],
            [Verdict(name="inverse-roundtrip", verdict=verdict,
                     detail={"worst_roundtrip_H1": worst})])


def _run_resonance_scan(cfg: RunConfig, outdir: Path):
    rs = cfg.resonance
    rng = np.random.default_rng(cfg.seed)
    if rs.claim == "bt-scaling":
        from .resonance import bt_scaling_sweep
        rep = bt_scaling_sweep(rs.s, rs.sweep, rs.octaves, rng)
        write_csv(outdir / "sweep.csv", ["a", "b", "c", "s", "value"], rep["rows"])
        verdict = "PASS" if abs(rep["fitted_slope"] - rep["predicted_slope"]) <= 0.25 \
            else "FAIL"
        write_json(outdir / "verdict.json", {"fitted_slope": rep["fitted_slope"],
                                             "predicted_slope": rep["predicted_slope"],
                                             "sweep": rs.sweep, "s": rs.s,
                                             "verdict": verdict})
        return (["sweep.csv", "verdict.json"],
                [Verdict(name=f"bt-scaling-{rs.sweep}", verdict=verdict,
                         detail={"fitted": rep["fitted_slope"],
                                 "predicted": rep["predicted_slope"]})])
    if rs.claim == "floors":
        rep = divisor_floor_check(rs.interaction, rs.samples, rng,
                                  r_lo=rs.r_lo, r_hi=rs.r_hi)
        rows = [(case, d["count"], d["min_margin"])
                for case, d in sorted(rep["per_case"].items())]
        write_csv(outdir / "floors.csv", ["case", "count", "min_margin"], rows)
        verdict = "PASS" if not rep["violations"] else "FAIL"
        write_json(outdir / "verdict.json", {"interaction": rs.interaction,
                                             "violations": rep["violations"],
                                             "verdict": verdict})
        return (["floors.csv", "verdict.json"],
                [Verdict(name=f"floors-{rs.interaction}", verdict=verdict,
                         detail={"violations": len(rep["violations"])})])
    rep = sampled_bound_suite(rs.claim, rs.samples, rng)
    rows = [(k, v) for k, v in sorted(rep.constants.items())]
    write_csv(outdir / "constants.csv", ["name", "value"], rows)
    verdict = "PASS" if rep.passed else "FAIL"
    write_json(outdir / "verdict.json", {"claim": rep.claim,
                                         "constants": rep.constants,
                                         "counterexamples": rep.counterexamples,
                                         "verdict": verdict})
    return (["constants.csv", "verdict.json"],
            [Verdict(name=f"claim-{rs.claim}", verdict=verdict,
                     detail=rep.constants)])


def _run_sbil(cfg: RunConfig, outdir: Path):
    grid = cfg.grid.build()
    sb = cfg.sbil
    rng = np.random.default_rng(cfg.seed)
    B = get_symbol(sb.symbol)
    if not isinstance(B, SymbolBi):
        raise ValueError(f"{sb.symbol} is not a bilinear symbol")
    q2 = sb.q2
    if q2 is None:
        inv = 0.5 + (0.5 - sb.s / grid.d) - 1.0 / sb.q1
        q2 = math.inf if inv <= 1e-12 else 1.0 / inv
    rep = sbil_inequality_harness(B, sb.s, sb.q1, q2, sb.trials, grid, rng)
    write_csv(outdir / "ratios.csv", ["trial", "ratio"],
              list(enumerate(rep.ratios)))
    write_json(outdir / "report.json", {"max_ratio": rep.max_ratio,
                                        "b_norm_estimate": rep.b_norm_estimate,
                                        "params": rep.params})
    return (["ratios.csv", "report.json"],
            [Verdict(name="sbil-max-ratio", verdict="PASS",
                     detail={"max_ratio": rep.max_ratio})])


def _run_scatter_extract(cfg: RunConfig, outdir: Path):
    grid = cfg.grid.build()
    st = cfg.data.build_state(grid)
    snap_dt = cfg.snapshot_dt or cfg.T / 20.0
    res = evolve(st, cfg.evolution(), snapshot_dt=snap_dt)
    energy = energy_E1(st)
    traj = [(s.t, s.Z) for s in res.snapshots]
    prof = extract_profile(traj, energy=energy)
    write_csv(outdir / "cauchy.csv", ["t", "difference"],
              list(zip(prof.times, prof.cauchy)))
    gap_ok = all(b <= a * 1.05 for a, b in zip(prof.energy_gap, prof.energy_gap[1:]))
    doc = {"fitted_exponent": prof.fitted_exponent, "verdict": prof.verdict,
           "energy_gap": prof.energy_gap, "gap_monotone": gap_ok}
    write_json(outdir / "profile.json", doc)
    save_field(prof.v_plus, outdir / "v_plus.field")
    verdicts = [Verdict(name="cauchy-tail", verdict=prof.verdict,
                        detail={"fitted": prof.fitted_exponent}),
                Verdict(name="energy-gap-trend",
                        verdict="PASS" if gap_ok else "FAIL", detail={})]
    return ["cauchy.csv", "profile.json", "v_plus.field"], verdicts


_BODIES = {
    "propagate-linear": _run_propagate_linear,
    "simulate": _run_simulate,
    "boussinesq": _run_boussinesq,
    "decay-fit": _run_decay_fit,
    "normalform-check": _run_normalform_check,
    "normalform-invert": _run_normalform_invert,
    "resonance-scan": _run_resonance_scan,
    "sbil-harness": _run_sbil,
    "scatter-extract": _run_scatter_extract,
}


def run(config: RunConfig) -> RunManifest:
    """Dispatch to the named experiment; write artifacts and the manifest."""
    h = config.config_hash()
    outdir = Path(config.output_dir) if config.output_dir else \
        output_root() / f"{config.kind}-{h[:12]}"
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.json").write_text(config.model_dump_json(indent=2) + "\n")
    t0 = time.monotonic()
    artifacts, verdicts = _BODIES[config.kind](config, outdir)
    wall = time.monotonic() - t0
    manifest = RunManifest(kind=config.kind, config_hash=h,
                           code_version=__version__, wall_time_s=wall,
                           artifacts=["config.json"] + artifacts,
                           verdicts=[v.model_dump() for v in verdicts],
                           seed=config.seed, thread_count=thread_count(),
                           output_dir=str(outdir))
    (outdir / "manifest.json").write_text(manifest.model_dump_json(indent=2) + "\n")
    return manifest


def load_config(path) -> RunConfig:
    return RunConfig.model_validate_json(Path(path).read_text())
