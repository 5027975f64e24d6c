"""Resonance geometry of the quadratic interactions in three dimensions:
the interaction phase and its derivatives, the smooth region decompositions
routing each frequency region to a spatially or temporally non-resonant
treatment, the divisor symbols built from the phase, and sampled verification
of the pointwise bounds each region claims.

Everything here is pointwise evaluation on frequency triples xi = eta + zeta
in R^3; this module is three-dimensional by construction (the transverse
geometry has no lower-dimensional surrogate).

Sign convention: a leg tagged '+' carries Z (phase -H), a leg tagged '-'
carries the conjugate (phase +H), so

    Omega = H(xi) - e1 H(eta) - e2 H(zeta),   e = +1 for '+', -1 for '-'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .multilinear import SymbolBi, bi_B3, bi_B4, register_symbol
from .spectral import bracket, chi_bump, chi_shell, grad_h, h_of, h_prime, u_of

INTERACTIONS = ("ZbarZ", "ZZ", "ZbarZbar")

_SIGNS = {"ZbarZ": ("-", "+"), "ZZ": ("+", "+"), "ZbarZbar": ("-", "-")}


class InvariantViolation(RuntimeError):
    """A divisor vanished inside the region that was designed to exclude it."""


def sign_pair(interaction: str) -> tuple:
    if interaction not in _SIGNS:
        raise ValueError(f"unknown interaction {interaction!r}; known: {INTERACTIONS}")
    return _SIGNS[interaction]


def _eps(s: str) -> float:
    return 1.0 if s == "+" else -1.0


# ---------------------------------------------------------------------------
# frequency triples
# ---------------------------------------------------------------------------

def dyadic_label(r):
    """Nearest power of two to r (the shell a ~ |xi| convention)."""
    r = np.asarray(r, dtype=float)
    return 2.0 ** np.round(np.log2(np.where(r > 0, r, 1.0)))


@dataclass(frozen=True)
class FreqTriple:
    """Batch of frequency triples xi = eta + zeta; arrays of shape (N, 3)."""

    xi: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        xi = np.atleast_2d(np.asarray(self.xi, dtype=float))
        eta = np.atleast_2d(np.asarray(self.eta, dtype=float))
        if xi.shape[-1] != 3 or eta.shape != xi.shape:
            raise ValueError("triples must be (N, 3) arrays with matching shapes")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)

    @cached_property
    def zeta(self) -> np.ndarray:
        return self.xi - self.eta

    @cached_property
    def r(self) -> tuple:
        return (np.linalg.norm(self.xi, axis=-1),
                np.linalg.norm(self.eta, axis=-1),
                np.linalg.norm(self.zeta, axis=-1))

    @cached_property
    def labels(self) -> tuple:
        return tuple(dyadic_label(x) for x in self.r)

    @cached_property
    def M(self) -> np.ndarray:
        return np.maximum.reduce(self.labels)

    @cached_property
    def m(self) -> np.ndarray:
        return np.minimum.reduce(self.labels)

    @cached_property
    def l(self) -> np.ndarray:
        return np.minimum(self.labels[1], self.labels[2])

    def nondegenerate(self) -> np.ndarray:
        rx, re, rz = self.r
        return (rx > 0) & (re > 0) & (rz > 0)

    def _hat(self, which: str) -> np.ndarray:
        v = getattr(self, which)
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        return v / np.where(n == 0.0, 1.0, n)

    @cached_property
    def alpha(self) -> np.ndarray:
        """|xi_hat - zeta_hat| (both interactions use this opening)."""
        return np.linalg.norm(self._hat("xi") - self._hat("zeta"), axis=-1)

    @cached_property
    def beta(self) -> np.ndarray:
        """|zeta_hat + eta_hat| (conjugate-first interaction)."""
        return np.linalg.norm(self._hat("zeta") + self._hat("eta"), axis=-1)

    @cached_property
    def beta_prime(self) -> np.ndarray:
        """|eta_hat - zeta_hat| (same-sign interaction)."""
        return np.linalg.norm(self._hat("eta") - self._hat("zeta"), axis=-1)

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.linalg.norm(self._hat("xi") - self._hat("eta"), axis=-1)

    @cached_property
    def eta_perp_mag(self) -> np.ndarray:
        """|eta x xi_hat|, the transverse part of eta relative to xi."""
        return np.linalg.norm(np.cross(self.eta, self._hat("xi")), axis=-1)

    @cached_property
    def lam(self) -> np.ndarray:
        rx, re, rz = self.r
        return rx + re - rz

    @cached_property
    def lam_prime(self) -> np.ndarray:
        rx, re, rz = self.r
        return rz + re - rx

    def swapped(self) -> "FreqTriple":
        """eta <-> zeta (used for the same-sign symmetry reduction)."""
        return FreqTriple(self.xi, self.zeta)


def triples_from_arrays(xi, eta) -> FreqTriple:
    return FreqTriple(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))


# ---------------------------------------------------------------------------
# the phase and its derivatives
# ---------------------------------------------------------------------------

def phase_omega(interaction: str, t: FreqTriple):
    """(Omega, grad_xi^(eta) Omega, grad_eta Omega, defined_mask).

    grad H(xi) = xi_hat (<xi> + |xi|^2/<xi>) analytically; triples with a zero
    leg get defined_mask False (direction singular).
    """
    s1, s2 = sign_pair(interaction)
    e1, e2 = _eps(s1), _eps(s2)
    rx, re_, rz = t.r
    omega = h_of(rx) - e1 * h_of(re_) - e2 * h_of(rz)
    gxi = grad_h(t.xi) - e2 * grad_h(t.zeta)
    geta = -e1 * grad_h(t.eta) + e2 * grad_h(t.zeta)
    return omega, gxi, geta, t.nondegenerate()


def phase_omega_fd(interaction: str, t: FreqTriple, step: float = 1e-6):
    """Central-difference gradients of Omega for cross-checks."""
    s1, s2 = sign_pair(interaction)
    e1, e2 = _eps(s1), _eps(s2)

    def omega_of(xi, eta):
        zeta = xi - eta
        return (h_of(np.linalg.norm(xi, axis=-1))
                - e1 * h_of(np.linalg.norm(eta, axis=-1))
                - e2 * h_of(np.linalg.norm(zeta, axis=-1)))

    rx, re_, rz = t.r
    scale = np.minimum.reduce([rx, re_, rz])[:, None] * step
    gxi = np.zeros_like(t.xi)
    geta = np.zeros_like(t.eta)
    for a in range(3):
        dv = np.zeros_like(t.xi)
        dv[:, a] = scale[:, 0]
        gxi[:, a] = (omega_of(t.xi + dv, t.eta) - omega_of(t.xi - dv, t.eta)) / (2 * scale[:, 0])
        geta[:, a] = (omega_of(t.xi, t.eta + dv) - omega_of(t.xi, t.eta - dv)) / (2 * scale[:, 0])
    return gxi, geta


# ---------------------------------------------------------------------------
# cutoffs and region decomposition
# ---------------------------------------------------------------------------

def _smooth01(x):
    """C^inf step: 0 for x<=0, 1 for x>=1 (two-sided exponential blend)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    out[x >= 1.0] = 1.0
    mid = (x > 0.0) & (x < 1.0)
    tt = x[mid]
    g1 = np.exp(-1.0 / tt)
    g0 = np.exp(-1.0 / (1.0 - tt))
    out[mid] = g1 / (g1 + g0)
    return out


def gamma_cutoff(r):
    """Opening-angle cutoff: 0 for r <= 3/2, 1 for r >= sqrt(3), smooth bridge."""
    lo, hi = 1.5, math.sqrt(3.0)
    return _smooth01((np.asarray(r, dtype=float) - lo) / (hi - lo))


def cutoff_alpha(t: FreqTriple) -> np.ndarray:
    """Gamma(|xi_hat - zeta_hat|); zero legs are rejected."""
    if not np.all(t.nondegenerate()):
        raise ValueError("cutoff undefined on triples with a zero leg")
    return gamma_cutoff(t.alpha)


def cutoff_perp(t: FreqTriple, confine: bool = False) -> np.ndarray:
    """Transverse cutoff chi(<M> |eta x xi_hat| / (100 M b)) with dyadic
    labels M and b ~ |eta|.

    With ``confine=True`` the constant moves to the numerator,
    chi(100 <M> |eta x xi_hat| / (M b)), so the support realizes
    |eta_perp| << M |eta| / <M> with margin 1/50.  The region decomposition
    uses the confining version: on the wide support the interaction phase
    has genuine zeros, and the temporally non-resonant floor |Omega| ~ M^2 m
    (which the decomposition exists to guarantee) would fail.
    """
    if not np.all(t.nondegenerate()):
        raise ValueError("cutoff undefined on triples with a zero leg")
    M = t.M
    b = t.labels[1]
    if confine:
        arg = 100.0 * bracket(M) * t.eta_perp_mag / (M * b)
    else:
        arg = bracket(M) * t.eta_perp_mag / (100.0 * M * b)
    return chi_bump(arg)


# case -> destination maps ('T' temporally, 'X' spatially non-resonant)
DESTINATIONS = {
    "ZbarZ": {1: "T", 2: "T", 3: "X", 4: "T", 5: "X"},
    "ZZ": {1: "T", 2: "T", 3: "T", 4: "X"},
    "ZbarZbar": {1: "T"},
}


def region_weights(interaction: str, t: FreqTriple) -> np.ndarray:
    """Smooth partition-of-unity weights over the interaction's cases;
    shape (N, n_cases), rows sum to 1.

    Dyadic case-1 conditions are realized by a one-octave smooth blend in the
    continuous magnitude ratio (the source text fixes only the dyadic margin).
    """
    if not np.all(t.nondegenerate()):
        raise ValueError("degenerate (zero-leg) triples are rejected")
    rx, re_, rz = t.r
    if interaction == "ZbarZbar":
        return np.ones((len(rx), 1))
    if interaction == "ZbarZ":
        ratio = np.minimum(rx, re_) / rz
        w1 = _smooth01(np.log2(np.maximum(ratio, 1e-300)) - 2.0)  # 0 at <=4c, 1 at >=8c
        g = gamma_cutoff(t.alpha)
        sig = 1.0 - chi_bump(2.0 * rz)  # 0 for |zeta|<=1/2, 1 for >=1
        perp = cutoff_perp(t, confine=True)
        w2 = (1.0 - w1) * g
        w3 = (1.0 - w1) * (1.0 - g) * sig
        w4 = (1.0 - w1) * (1.0 - g) * (1.0 - sig) * perp
        w5 = (1.0 - w1) * (1.0 - g) * (1.0 - sig) * (1.0 - perp)
        return np.stack([w1, w2, w3, w4, w5], axis=-1)
    # same-sign: symmetry reduction to |eta| <= |zeta|
    swap = re_ > rz
    ts = FreqTriple(t.xi, np.where(swap[:, None], t.zeta, t.eta))
    rxs, res, rzs = ts.r
    ratio = np.minimum(res, rzs) / rxs
    w1 = _smooth01(np.log2(np.maximum(ratio, 1e-300)) - 1.0)  # 0 at <=2a, 1 at >=4a
    g = gamma_cutoff(ts.alpha)
    perp = cutoff_perp(ts, confine=True)
    w2 = (1.0 - w1) * g
    w3 = (1.0 - w1) * (1.0 - g) * perp
    w4 = (1.0 - w1) * (1.0 - g) * (1.0 - perp)
    return np.stack([w1, w2, w3, w4], axis=-1)


@dataclass
class RegionLabel:
    case: int
    destination: str
    weights: np.ndarray


def classify_region(interaction: str, t: FreqTriple) -> list:
    """Exhaustive, exclusive labels (argmax of the smooth weights; ties go to
    the earlier case) plus the weight vectors."""
    w = region_weights(interaction, t)
    cases = np.argmax(w, axis=-1) + 1
    dest = DESTINATIONS[interaction]
    return [RegionLabel(int(c), dest[int(c)], w[i]) for i, c in enumerate(cases)]


def destination_weights(interaction: str, t: FreqTriple) -> tuple:
    """(w_X, w_T) complementary destination weights."""
    w = region_weights(interaction, t)
    dest = DESTINATIONS[interaction]
    wx = np.zeros(w.shape[0])
    for case, d in dest.items():
        if d == "X":
            wx = wx + w[:, case - 1]
    return wx, 1.0 - wx


# ---------------------------------------------------------------------------
# dyadic pieces and divisor symbols
# ---------------------------------------------------------------------------

def _bj(j: int) -> SymbolBi:
    if j == 3:
        return bi_B3()
    if j == 4:
        return bi_B4()
    raise ValueError("divisor symbols exist for j in {3, 4}")


def dyadic_feasible(a: float, b: float, c: float) -> bool:
    """Whether shells a~|xi|, b~|eta|, c~|zeta| admit xi = eta + zeta."""
    los = (a / 2, b / 2, c / 2)
    his = (2 * a, 2 * b, 2 * c)
    return (los[0] <= his[1] + his[2] and los[1] <= his[0] + his[2]
            and los[2] <= his[0] + his[1])


def piece_weight(a: float, b: float, c: float, t: FreqTriple) -> np.ndarray:
    rx, re_, rz = t.r
    return chi_shell(rx, a) * chi_shell(re_, b) * chi_shell(rz, c)


def symbol_split_BXBT(interaction: str, j: int, a: float, b: float, c: float):
    """(B_j^{a,b,c,X}, B_j^{a,b,c,T}) as bilinear symbols over (eta, zeta);
    their sum is the plain dyadic piece.  Infeasible shells give zero symbols."""
    Bj = _bj(j)

    if not dyadic_feasible(a, b, c):
        zero = SymbolBi(f"B{j}^({a},{b},{c})-empty",
                        lambda x1, x2: np.zeros(np.broadcast(
                            *(np.asarray(q) for q in x1 + x2)).shape))
        return zero, zero

    def make(dest: str) -> SymbolBi:
        def fn(x1, x2):
            eta = np.stack([np.broadcast_to(np.asarray(q, dtype=float),
                                            np.broadcast(*(np.asarray(p) for p in x1 + x2)).shape)
                            for q in x1], axis=-1)
            zeta = np.stack([np.broadcast_to(np.asarray(q, dtype=float), eta.shape[:-1])
                             for q in x2], axis=-1)
            shape = eta.shape[:-1]
            tt = FreqTriple(eta.reshape(-1, 3) + zeta.reshape(-1, 3), eta.reshape(-1, 3))
            ok = tt.nondegenerate()
            base = Bj.value(eta.reshape(-1, 3), zeta.reshape(-1, 3))
            w = piece_weight(a, b, c, tt)
            wx = np.zeros(len(w))
            if np.any(ok):
                sub = FreqTriple(tt.xi[ok], tt.eta[ok])
                wxs, wts = destination_weights(interaction, sub)
                wx[ok] = wxs if dest == "X" else wts
            out = base * w * wx
            return out.reshape(shape)
        return SymbolBi(f"B{j}^({a},{b},{c},{dest})[{interaction}]", fn)

    return make("X"), make("T")


def _phase_parts(interaction: str, tt: FreqTriple):
    omega, gxi, geta, ok = phase_omega(interaction, tt)
    return omega, gxi, geta, ok


def divisor_symbols(interaction: str, j: int, t: FreqTriple, kind: str,
                    shells: tuple | None = None,
                    fd_step_frac: float = 1e-3) -> np.ndarray:
    """Pointwise divisor symbol values on the triples.

    kind 'B1': (grad_xi Omega . grad_eta Omega / |grad_eta Omega|^2) B^X
    kind 'B2': |eta-divergence of (grad_eta Omega otimes grad_xi Omega
               B^X / |grad_eta Omega|^2)| via central differences on eta
    kind 'B3': (|grad_xi Omega| / Omega) B^T

    The triples must sit in the matching destination region; a divisor below
    1e-12 inside its region raises InvariantViolation (the decomposition is
    designed to keep divisors away from zero, so that is a checkable error).
    """
    if kind not in ("B1", "B2", "B3"):
        raise ValueError(f"unknown divisor kind {kind!r}")
    if shells is None:
        labels = t.labels
        a = float(np.median(labels[0]))
        b = float(np.median(labels[1]))
        c = float(np.median(labels[2]))
    else:
        a, b, c = shells
    BX, BT = symbol_split_BXBT(interaction, j, a, b, c)
    dest = "T" if kind == "B3" else "X"
    wx, wt = destination_weights(interaction, t)
    wdest = wt if dest == "T" else wx
    if np.any(wdest < 1e-12):
        raise InvariantViolation(
            f"triple outside the {dest} destination region for kind {kind}")

    omega, gxi, geta, ok = _phase_parts(interaction, t)
    if kind == "B3":
        if np.any(np.abs(omega) < 1e-12):
            raise InvariantViolation("phase vanished inside a temporally non-resonant region")
        base = BT.value(t.eta, t.zeta)
        return np.linalg.norm(gxi, axis=-1) / omega * base

    geta_sq = np.sum(geta * geta, axis=-1)
    if np.any(np.sqrt(geta_sq) < 1e-12):
        raise InvariantViolation("eta-gradient vanished inside a spatially non-resonant region")
    if kind == "B1":
        base = BX.value(t.eta, t.zeta)
        return np.sum(gxi * geta, axis=-1) / geta_sq * base

    # kind B2: FD divergence in eta of the matrix field W_ij = (geta)_i (gxi)_j B^X / |geta|^2
    def Wfield(eta_pts):
        tt = FreqTriple(t.xi, eta_pts)
        om, gx, ge, _ = _phase_parts(interaction, tt)
        gsq = np.sum(ge * ge, axis=-1)
        base = BX.value(tt.eta, tt.zeta)
        return ge[:, :, None] * gx[:, None, :] * (base / gsq)[:, None, None]

    h = t.labels[1] * fd_step_frac
    div = np.zeros_like(t.xi)
    for axis in range(3):
        dv = np.zeros_like(t.eta)
        dv[:, axis] = h
        Wp = Wfield(t.eta + dv)
        Wm = Wfield(t.eta - dv)
        div += (Wp[:, axis, :] - Wm[:, axis, :]) / (2.0 * h[:, None])
    return np.linalg.norm(div, axis=-1)


def make_divisor_factory(kind: str):
    """Registry entry: returns SymbolBi builders for the divisor symbols."""

    def factory(interaction: str, j: int, a: float, b: float, c: float) -> SymbolBi:
        def fn(x1, x2):
            shape = np.broadcast(*(np.asarray(q) for q in x1 + x2)).shape
            eta = np.stack([np.broadcast_to(np.asarray(q, dtype=float), shape)
                            for q in x1], axis=-1).reshape(-1, 3)
            zeta = np.stack([np.broadcast_to(np.asarray(q, dtype=float), shape)
                             for q in x2], axis=-1).reshape(-1, 3)
            tt = FreqTriple(eta + zeta, eta)
            ok = tt.nondegenerate()
            out = np.zeros(len(eta))
            if np.any(ok):
                sub = FreqTriple(tt.xi[ok], tt.eta[ok])
                out[ok] = _divisor_values_masked(interaction, j, sub, kind, (a, b, c))
            return out.reshape(shape)
        return SymbolBi(f"cal{kind}[{interaction},B{j},({a},{b},{c})]", fn)

    return factory


def _divisor_values_masked(interaction, j, t, kind, shells):
    """Divisor values with the destination weight folded in (no region error);
    used when tabulating the symbols over whole grids."""
    a, b, c = shells
    BX, BT = symbol_split_BXBT(interaction, j, a, b, c)
    omega, gxi, geta, ok = _phase_parts(interaction, t)
    if kind == "B3":
        base = BT.value(t.eta, t.zeta)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.linalg.norm(gxi, axis=-1) / omega * base
        return np.where(np.abs(base) > 0, np.nan_to_num(vals), 0.0)
    base = BX.value(t.eta, t.zeta)
    gsq = np.sum(geta * geta, axis=-1)
    if kind == "B1":
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.sum(gxi * geta, axis=-1) / gsq * base
        return np.where(np.abs(base) > 0, np.nan_to_num(vals), 0.0)
    raise ValueError("grid tabulation is provided for kinds B1 and B3")


register_symbol("calB1", make_divisor_factory("B1"),
                "divisor symbol factory (spatial route)")
register_symbol("calB2", make_divisor_factory("B2"),
                "divisor symbol factory (spatial route, divergence form)")
register_symbol("calB3", make_divisor_factory("B3"),
                "divisor symbol factory (temporal route)")


# ---------------------------------------------------------------------------
# divisor floors (empirical constants frozen after calibration)
# ---------------------------------------------------------------------------

#: floors are formula(t) * constant; constants calibrated on 10^6 mixed
#: samples (seed 7, radii 2^-8..2^6; observed minima 1.2x-2.4x these values)
#: and frozen as regression bounds
FLOOR_CONSTANTS = {
    ("ZbarZ", 1): 0.9,
    ("ZbarZ", 2): 0.5,
    ("ZbarZ", 3): 0.5,
    ("ZbarZ", 4): 0.3,
    ("ZbarZ", 5): 0.3,
    ("ZZ", 1): 0.9,
    ("ZZ", 2): 0.9,  # empty under the |eta|<=|zeta| reduction: alpha < sqrt(2)
    ("ZZ", 3): 0.4,
    ("ZZ", 4): 0.1,
    ("ZbarZbar", 1): 0.9,
}


def floor_formula(interaction: str, case: int, t: FreqTriple) -> np.ndarray:
    """The per-case divisor floor shape (|Omega| for T cases, |grad_eta Omega|
    for X cases), before the frozen constant."""
    rx, re_, rz = t.r
    M = np.maximum.reduce([rx, re_, rz])
    m = np.minimum.reduce([rx, re_, rz])
    if interaction == "ZbarZbar":
        return h_of(M)
    if interaction == "ZbarZ":
        if case == 1:
            return h_of(M)
        if case == 2:
            return bracket(M) * m
        if case == 4:
            return M * M * m
        if case == 3:
            return rx
        if case == 5:
            return M * rx
    if interaction == "ZZ":
        if case in (1, 2):
            return M * bracket(M)
        if case == 3:
            return (M * M / bracket(M)) * m
        if case == 4:
            return bracket(m) * M / bracket(M)
    raise ValueError(f"no floor for {interaction} case {case}")


def divisor_floor_check(interaction: str, n_samples: int, rng: np.random.Generator,
                        r_lo: float = 2.0**-8, r_hi: float = 2.0**6,
                        weight_min: float = 0.5) -> dict:
    """Sample nondegenerate triples (uniform plus families aimed at the
    narrow transverse/antiparallel regions), classify, and compare the
    divisor against the frozen floor in every dominant region.  Returns the
    worst margin per case and any violations."""
    t = mixed_triples(n_samples, rng, r_lo, r_hi)
    w = region_weights(interaction, t)
    cases = np.argmax(w, axis=-1) + 1
    wmax = np.max(w, axis=-1)
    omega, gxi, geta, ok = phase_omega(interaction, t)
    dest = DESTINATIONS[interaction]
    out = {}
    violations = []
    for case in dest:
        sel = (cases == case) & (wmax >= weight_min) & ok
        if not np.any(sel):
            continue
        sub = FreqTriple(t.xi[sel], t.eta[sel])
        floor = floor_formula(interaction, case, sub) * FLOOR_CONSTANTS[(interaction, case)]
        if dest[case] == "T":
            vals = np.abs(omega[sel])
        else:
            vals = np.linalg.norm(geta[sel], axis=-1)
        margin = vals / floor
        out[case] = {"count": int(np.sum(sel)), "min_margin": float(np.min(margin))}
        bad = margin < 1.0
        if np.any(bad):
            idx = np.argmin(margin)
            violations.append({"interaction": interaction, "case": case,
                               "xi": sub.xi[idx].tolist(), "eta": sub.eta[idx].tolist(),
                               "margin": float(margin[idx])})
    return {"per_case": out, "violations": violations}


def sample_triples(n: int, rng: np.random.Generator,
                   r_lo: float, r_hi: float) -> FreqTriple:
    """Log-uniform radii, uniform directions for (xi, eta)."""
    def vecs(k):
        r = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), size=k))
        d = rng.normal(size=(k, 3))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        return r[:, None] * d
    xi = vecs(n)
    eta = vecs(n)
    t = FreqTriple(xi, eta)
    ok = t.nondegenerate()
    return FreqTriple(xi[ok], eta[ok])


def mixed_triples(n: int, rng: np.random.Generator,
                  r_lo: float = 2.0**-8, r_hi: float = 2.0**6) -> FreqTriple:
    """Uniform triples plus families aimed at the narrow regions: nearly
    collinear pairs at several angular scales (the transverse cutoffs) and
    antiparallel openings (the opening-angle cutoff)."""
    def logu(k, lo, hi):
        return np.exp(rng.uniform(math.log(lo), math.log(hi), size=k))

    k = n // 4
    parts = [sample_triples(n - 3 * k, rng, r_lo, r_hi)]

    # collinear: zeta large along d, xi small at angle scale s
    for scale in (3e-4, 3e-3):
        d = _unit(rng, k // 2)
        M = logu(k // 2, r_lo * 4, min(1.0, r_hi))
        m = M * logu(k // 2, 1e-3, 1.0)
        ang = rng.uniform(0.0, scale, k // 2) * M
        xi = m[:, None] * _rotate_towards(d, ang, rng)
        zeta = M[:, None] * d
        parts.append(FreqTriple(xi, xi - zeta))
        # eta small nearly parallel to zeta (the same-sign narrow region)
        eta = m[:, None] * _rotate_towards(d, ang, rng)
        parts.append(FreqTriple(eta + zeta, eta))

    # antiparallel opening: xi ~ -t zeta
    d = _unit(rng, k // 2)
    rz = logu(k // 2, r_lo * 4, r_hi / 4)
    tfac = rng.uniform(0.05, 0.6, k // 2)
    wob = rng.uniform(0.0, 0.2, k // 2)
    xi = (tfac * rz)[:, None] * _rotate_towards(-d, wob, rng)
    zeta = rz[:, None] * d
    parts.append(FreqTriple(xi, xi - zeta))

    # output pair comparable, zeta tiny: eta = xi - zeta
    d = _unit(rng, k // 2)
    rx = logu(k // 2, r_lo * 32, r_hi)
    rzt = rx * logu(k // 2, 1e-3, 2.0**-4)
    xi = rx[:, None] * d
    zeta = rzt[:, None] * _unit(rng, k // 2)
    parts.append(FreqTriple(xi, xi - zeta))

    xi = np.concatenate([p.xi for p in parts])
    eta = np.concatenate([p.eta for p in parts])
    t = FreqTriple(xi, eta)
    ok = t.nondegenerate()
    return FreqTriple(xi[ok], eta[ok])


# ---------------------------------------------------------------------------
# sampled bound suite
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    claim: str
    n_samples: int
    constants: dict
    counterexamples: list

    @property
    def passed(self) -> bool:
        return not self.counterexamples


#: per-claim ceilings for the sampled constants, frozen after calibration
CLAIM_CEILINGS = {
    "i": 4.0,
    "ii": 4.0,
    "iii": 8.0,
    "iv": 32.0,
    "v": 32.0,
    "vi": 8.0,
    "vii": 1e-12,
}


def _unit(rng, k):
    d = rng.normal(size=(k, 3))
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def _rotate_towards(d, angle, rng):
    """Unit vectors at the given angles from d (random azimuth)."""
    k = len(d)
    aux = _unit(rng, k)
    perp = aux - np.sum(aux * d, axis=-1, keepdims=True) * d
    nrm = np.linalg.norm(perp, axis=-1, keepdims=True)
    perp = np.where(nrm > 1e-12, perp / np.where(nrm == 0, 1, nrm), 0.0)
    return np.cos(angle)[:, None] * d + np.sin(angle)[:, None] * perp


def claim_i(samples: int, rng, r_lo=2.0**-8, r_hi=2.0**6) -> BoundReport:
    """Two-sided: |grad H(xi) - grad H(eta)| against
    U(|xi|) ||xi|-|eta|| + <eta> |xi_hat - eta_hat| for |xi| >= |eta|."""
    rx = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), samples))
    re_ = rx * np.exp(rng.uniform(math.log(1e-3), 0.0, samples))
    dx = _unit(rng, samples)
    de = _unit(rng, samples)
    xi = rx[:, None] * dx
    eta = re_[:, None] * de
    lhs = np.linalg.norm(grad_h(xi) - grad_h(eta), axis=-1)
    rhs = u_of(rx) * np.abs(rx - re_) + bracket(re_) * np.linalg.norm(dx - de, axis=-1)
    keep = rhs > 1e-14
    ratio = lhs[keep] / rhs[keep]
    cmax = float(np.max(ratio))
    cmin = float(np.min(ratio))
    ceiling = CLAIM_CEILINGS["i"]
    bad = []
    if cmax > ceiling or cmin < 1.0 / ceiling:
        idx = int(np.argmax(np.maximum(ratio / ceiling, 1.0 / (ratio * ceiling))))
        bad.append({"ratio": float(ratio[idx])})
    return BoundReport("i", samples, {"max": cmax, "min": cmin}, bad)


def _fd_tensor_norm(xi, order: int, step_frac: float = 1e-4):
    """Max-entry norm of the order-2 or order-3 derivative tensor of H via
    central differences on the analytic gradient."""
    r = np.linalg.norm(xi, axis=-1)
    h = (r * step_frac)[:, None]
    if order == 2:
        rows = []
        for a in range(3):
            dv = np.zeros_like(xi)
            dv[:, a] = h[:, 0]
            rows.append((grad_h(xi + dv) - grad_h(xi - dv)) / (2 * h))
        T = np.stack(rows, axis=1)
        return np.max(np.abs(T), axis=(1, 2))
    rows = []
    for a in range(3):
        dv = np.zeros_like(xi)
        dv[:, a] = h[:, 0]
        sub = []
        for b in range(3):
            dw = np.zeros_like(xi)
            dw[:, b] = h[:, 0]
            gpp = grad_h(xi + dv + dw)
            gpm = grad_h(xi + dv - dw)
            gmp = grad_h(xi - dv + dw)
            gmm = grad_h(xi - dv - dw)
            sub.append((gpp - gpm - gmp + gmm) / (4 * h * h))
        rows.append(np.stack(sub, axis=1))
    T = np.stack(rows, axis=1)
    return np.max(np.abs(T), axis=(1, 2, 3))


def claim_ii(samples: int, rng, r_lo=2.0**-6, r_hi=2.0**5) -> BoundReport:
    """|grad^k H(xi)| <= C <xi>/|xi|^(k-1) for k = 2, 3 (FD tensors)."""
    r = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), samples))
    xi = r[:, None] * _unit(rng, samples)
    consts = {}
    bad = []
    for k in (2, 3):
        t = _fd_tensor_norm(xi, k)
        bound = bracket(r) / r ** (k - 1)
        ratio = t / bound
        consts[f"k{k}"] = float(np.max(ratio))
        if consts[f"k{k}"] > CLAIM_CEILINGS["ii"]:
            bad.append({"k": k, "ratio": consts[f"k{k}"]})
    return BoundReport("ii", samples, consts, bad)


def _region_samples(interaction: str, case: int, samples: int, rng,
                    r_lo=2.0**-8, r_hi=2.0**6, weight_min=0.7,
                    max_tries: int = 60):
    got_xi, got_eta = [], []
    n = 0
    for _ in range(max_tries):
        t = sample_triples(4 * samples, rng, r_lo, r_hi)
        w = region_weights(interaction, t)
        sel = (np.argmax(w, axis=-1) + 1 == case) & (np.max(w, axis=-1) >= weight_min)
        got_xi.append(t.xi[sel])
        got_eta.append(t.eta[sel])
        n += int(np.sum(sel))
        if n >= samples:
            break
    xi = np.concatenate(got_xi)[:samples]
    eta = np.concatenate(got_eta)[:samples]
    return FreqTriple(xi, eta)


def claim_iii(samples: int, rng) -> BoundReport:
    """Conjugate-first case 2: |Omega| >= c <M> m and |grad_eta Omega| <= C |Omega| / M."""
    t = _region_samples("ZbarZ", 2, samples, rng)
    omega, gxi, geta, ok = phase_omega("ZbarZ", t)
    rx, re_, rz = t.r
    M = np.maximum.reduce([rx, re_, rz])
    m = np.minimum.reduce([rx, re_, rz])
    lower = np.abs(omega) / (bracket(M) * m)
    upper = np.linalg.norm(geta, axis=-1) * M / np.abs(omega)
    consts = {"omega_floor_min": float(np.min(lower)),
              "grad_over_omega_max": float(np.max(upper))}
    ceiling = CLAIM_CEILINGS["iii"]
    bad = []
    if consts["omega_floor_min"] < 1.0 / ceiling or consts["grad_over_omega_max"] > ceiling:
        bad.append(consts)
    return BoundReport("iii", len(t.xi), consts, bad)


def _parallel_triples(samples: int, rng, M: float, m: float, angle_scale: float):
    """Nearly collinear triples: |zeta| ~ M, |xi| ~ m, eta ~ -zeta + xi."""
    d = _unit(rng, samples)
    rzeta = M * np.exp(rng.uniform(-0.2, 0.2, samples))
    rxi = m * np.exp(rng.uniform(-0.2, 0.2, samples))
    ang = rng.uniform(0.0, angle_scale, samples)
    xi = rxi[:, None] * _rotate_towards(d, ang, rng)
    zeta = rzeta[:, None] * d
    eta = xi - zeta
    return FreqTriple(xi, eta)


def claim_iv(samples: int, rng, M: float = 1.0 / 8, m: float = 1.0 / 64) -> BoundReport:
    """Conjugate-first case 4 main branch: |Omega| within [1/C, C] of M^2 m
    when lambda << M^2 m (nearly collinear low-frequency triples)."""
    t = _parallel_triples(samples, rng, M, m, angle_scale=0.3 * M)
    rx, re_, rz = t.r
    Mc = np.maximum.reduce([rx, re_, rz])
    mc = np.minimum.reduce([rx, re_, rz])
    keep = t.lam < 0.1 * Mc * Mc * mc
    omega, _, _, _ = phase_omega("ZbarZ", t)
    ratio = np.abs(omega[keep]) / (Mc[keep] ** 2 * mc[keep])
    C = CLAIM_CEILINGS["iv"]
    consts = {"max": float(np.max(ratio)), "min": float(np.min(ratio)),
              "kept": int(np.sum(keep))}
    bad = []
    if consts["max"] > C or consts["min"] < 1.0 / C:
        bad.append(consts)
    return BoundReport("iv", int(np.sum(keep)), consts, bad)


def claim_v(samples: int, rng, M: float = 1.0 / 8, m: float = 1.0 / 64) -> BoundReport:
    """Same-sign case 3 main branch: |Omega| within [1/C, C] of (M^2/<M>) m
    when lambda' << (M/<M>)^2 m."""
    # |xi| ~ |zeta| ~ M >> |eta| ~ m, eta nearly parallel to zeta
    d = _unit(rng, samples)
    rzeta = M * np.exp(rng.uniform(-0.2, 0.2, samples))
    reta = m * np.exp(rng.uniform(-0.2, 0.2, samples))
    ang = rng.uniform(0.0, 0.3 * M / bracket(np.array([M]))[0], samples)
    eta = reta[:, None] * _rotate_towards(d, ang, rng)
    zeta = rzeta[:, None] * d
    t = FreqTriple(eta + zeta, eta)
    rx, re_, rz = t.r
    Mc = np.maximum.reduce([rx, re_, rz])
    mc = np.minimum.reduce([rx, re_, rz])
    keep = t.lam_prime < 0.1 * (Mc / bracket(Mc)) ** 2 * mc
    omega, _, _, _ = phase_omega("ZZ", t)
    ratio = np.abs(omega[keep]) / ((Mc[keep] ** 2 / bracket(Mc[keep])) * mc[keep])
    C = CLAIM_CEILINGS["v"]
    consts = {"max": float(np.max(ratio)), "min": float(np.min(ratio)),
              "kept": int(np.sum(keep))}
    bad = []
    if consts["max"] > C or consts["min"] < 1.0 / C:
        bad.append(consts)
    return BoundReport("v", int(np.sum(keep)), consts, bad)


def claim_vi(samples: int, rng) -> BoundReport:
    """Sine-theorem surrogates, one-sided: beta <= C |xi| alpha / |eta| in the
    conjugate-first case-2 region, and alpha/beta' <= C m/M in the same-sign
    case 4.  (The two-sided form fails pointwise at antiparallel triples,
    where beta vanishes with the comparison quantity finite; only the upper
    direction enters the estimates.)"""
    t = _region_samples("ZbarZ", 2, samples, rng)
    ratio = t.beta / (t.r[0] * t.alpha / t.r[1])
    consts = {"zbarz_max": float(np.max(ratio))}
    t2 = _region_samples("ZZ", 4, samples, rng)
    # case-4 convention has |eta| <= |zeta| after the symmetry swap
    swap = t2.r[1] > t2.r[2]
    t2 = FreqTriple(t2.xi, np.where(swap[:, None], t2.zeta, t2.eta))
    rx, re_, rz = t2.r
    M = np.maximum.reduce([rx, re_, rz])
    m = np.minimum.reduce([rx, re_, rz])
    keep = t2.beta_prime > 1e-12
    r2 = (t2.alpha[keep] / t2.beta_prime[keep]) * (M[keep] / m[keep])
    consts["zz_max"] = float(np.max(r2))
    C = CLAIM_CEILINGS["vi"]
    bad = []
    if consts["zbarz_max"] > C or consts["zz_max"] > C:
        bad.append(consts)
    return BoundReport("vi", samples, consts, bad)


def claim_vii(samples: int, rng, r_lo=2.0**-8, r_hi=2.0**6) -> BoundReport:
    """Exact opening-angle identities:
    |xi|^2 = ||zeta|-|eta||^2 + 2|zeta||eta|(1 + zeta_hat.eta_hat)
           = ||zeta|-|eta||^2 + |zeta||eta| beta^2, and the xi-eta mirror."""
    t = sample_triples(samples, rng, r_lo, r_hi)
    rx, re_, rz = t.r
    zh = t.zeta / rz[:, None]
    eh = t.eta / re_[:, None]
    xh = t.xi / rx[:, None]
    lhs1 = rx**2
    rhs1 = (rz - re_) ** 2 + 2 * rz * re_ * (1.0 + np.sum(zh * eh, axis=-1))
    rhs1b = (rz - re_) ** 2 + rz * re_ * t.beta**2
    lhs2 = re_**2
    rhs2 = (rz - rx) ** 2 + 2 * rz * rx * (1.0 - np.sum(zh * xh, axis=-1))
    scale = np.maximum.reduce([rx, re_, rz]) ** 2
    res = np.maximum.reduce([np.abs(lhs1 - rhs1), np.abs(lhs1 - rhs1b),
                             np.abs(lhs2 - rhs2)]) / scale
    worst = float(np.max(res))
    bad = [] if worst <= CLAIM_CEILINGS["vii"] else [{"residual": worst}]
    return BoundReport("vii", len(rx), {"max_residual": worst}, bad)


CLAIMS = {"i": claim_i, "ii": claim_ii, "iii": claim_iii, "iv": claim_iv,
          "v": claim_v, "vi": claim_vi, "vii": claim_vii}


def sampled_bound_suite(claim_id: str, samples: int, rng: np.random.Generator,
                        **kw) -> BoundReport:
    if claim_id not in CLAIMS:
        raise ValueError(f"unknown claim {claim_id!r}; known: {sorted(CLAIMS)}")
    return CLAIMS[claim_id](samples, rng, **kw)


# ---------------------------------------------------------------------------
# temporal-divisor mixed-norm sweeps
# ---------------------------------------------------------------------------

def bt_predicted_value(a: float, b: float, c: float, s: float) -> float:
    """The claimed envelope (<M>/M)^s l^{3/2-s} <a>^-1 for a dyadic piece."""
    M = max(a, b, c)
    l = min(b, c)
    return float((bracket(M) / M) ** s * l ** (1.5 - s) / bracket(a))


def bt_piece_mixed_norm(interaction: str, j: int, a: float, b: float, c: float,
                        s: float, rng: np.random.Generator, n_eta: int = 32,
                        n_xi: int = 6) -> float:
    """Measured Hdot^s_eta mixed norm of the temporal divisor piece, sup over
    xi samples drawn from the a-shell; the eta grid spans the b-shell."""
    from .multilinear import MixedNormSpec, symbol_mixed_norm
    from .spectral import Grid
    B = make_divisor_factory("B3")(interaction, j, a, b, c)
    eta_grid = Grid(3, n_eta, 8.0 * b)
    r = a * np.exp(rng.uniform(-0.3, 0.3, n_xi))
    d = _unit(rng, n_xi)
    return symbol_mixed_norm(B, MixedNormSpec(s, "eta", "Hdot"),
                             r[:, None] * d, eta_grid)


def bt_scaling_sweep(s: float, sweep: str, octaves: int,
                     rng: np.random.Generator, j: int = 3) -> dict:
    """Sweep the dyadic cells in l (fixed M) or in M (fixed l) for the
    conjugate-pair temporal pieces; returns rows (a, b, c, s, value) plus the
    fitted and predicted slopes."""
    rows = []
    preds = []
    if sweep == "l":
        M0 = 4.0
        cells = [(M0, M0 * 2.0 ** (-k - 1), M0) for k in range(octaves)]
        xvals = [b for _, b, _ in cells]
    elif sweep == "M":
        l0 = 0.5
        cells = [(2.0**k, l0, 2.0**k) for k in range(octaves)]
        xvals = [a for a, _, _ in cells]
    else:
        raise ValueError("sweep must be 'l' or 'M'")
    for a, b, c in cells:
        v = bt_piece_mixed_norm("ZbarZbar", j, a, b, c, s, rng)
        rows.append((a, b, c, s, v))
        preds.append(bt_predicted_value(a, b, c, s))
    vals = [r[-1] for r in rows]
    fitted = float(np.polyfit(np.log(xvals), np.log(vals), 1)[0])
    predicted = float(np.polyfit(np.log(xvals), np.log(preds), 1)[0])
    return {"rows": rows, "fitted_slope": fitted, "predicted_slope": predicted,
            "sweep": sweep, "s": s}
