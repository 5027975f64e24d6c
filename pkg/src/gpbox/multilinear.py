"""Bilinear and trilinear Fourier multiplier engine, the symbol library of the
transformed equations, and discrete mixed symbol norms.

The direct bilinear path is an exact lattice convolution without wraparound
(equivalently: zero padding to 2n per axis), blocked over output-frequency
tiles; accumulation uses numpy's pairwise summation, so results are
bit-reproducible at a fixed thread count.  The fast path rewrites separable
symbols as single multipliers around dealiased pointwise products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .spectral import (
    COMPLEX,
    PHYSICAL,
    REAL,
    SPECTRAL,
    Field,
    Grid,
    Symbol1,
    ZeroModeViolation,
    apply_symbol1,
    besov_norm,
    bracket,
    dealiased_product,
    dealiased_square_abs,
    pad_field,
    sobolev_norm,
    sym_U,
    truncate_field,
    u_of,
    zero_field,
)

# ---------------------------------------------------------------------------
# symbol types
# ---------------------------------------------------------------------------


def _radius(comps) -> np.ndarray:
    return np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in comps))


@dataclass(frozen=True)
class SymbolBi:
    """Bilinear symbol (xi1, xi2) -> C.

    ``fn(x1, x2)`` receives two tuples of d component arrays (broadcastable)
    and must return finite values everywhere; singular behaviour is declared
    through the flags and handled by the zero-mode policy, not by the values.
    ``separable`` is the fast-path hint: a tuple of terms
    (coeff, out|None, left|None, right|None) with Symbol1 factors, meaning
    B = sum coeff * out(xi1+xi2) * left(xi1) * right(xi2).
    """

    name: str
    fn: Callable
    separable: tuple | None = None
    singular_legs: tuple = (False, False)
    singular_total: bool = False
    symmetric: bool = False

    def eval(self, x1, x2) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.fn(x1, x2))

    def value(self, xi1, xi2) -> np.ndarray:
        """Pointwise evaluation on points of shape (..., d)."""
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        x1 = tuple(xi1[..., a] for a in range(xi1.shape[-1]))
        x2 = tuple(xi2[..., a] for a in range(xi2.shape[-1]))
        return self.eval(x1, x2)


@dataclass(frozen=True)
class TriTerm:
    """One term of a trilinear grouping plan.

    The legs listed in ``group`` are pointwise-multiplied (dealiased); the
    result and the remaining leg feed ``bi`` in the order given by
    ``bi_order`` ('group,leg' or 'leg,group'); ``leg_pre`` maps leg index to a
    Symbol1 applied before anything else, ``out`` is applied to the result.
    ``bi`` None means a plain triple product.
    """

    coeff: complex = 1.0
    group: tuple = (1, 2)
    bi: SymbolBi | None = None
    bi_order: str = "leg,group"
    leg_pre: dict = field(default_factory=dict)
    out: Symbol1 | None = None


@dataclass(frozen=True)
class SymbolTri:
    """Trilinear symbol with a grouping plan; fn is the direct contract."""

    name: str
    fn: Callable
    plan: tuple

    def eval(self, x1, x2, x3) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.fn(x1, x2, x3))

    def value(self, xi1, xi2, xi3) -> np.ndarray:
        pts = [np.asarray(x, dtype=float) for x in (xi1, xi2, xi3)]
        comps = [tuple(p[..., a] for a in range(p.shape[-1])) for p in pts]
        return self.eval(*comps)


@dataclass(frozen=True)
class MixedNormSpec:
    """Mixed symbol norm: Sobolev order s, coordinates, and flavor."""

    s: float
    coords: str = "eta"  # 'eta' -> (xi, eta); 'zeta' -> (xi, zeta)
    flavor: str = "Hdot"  # 'Hdot' | 'Bdot21' | 'Bdot2inf'

    def validate(self, d: int):
        if not (0.0 <= self.s <= d / 2.0):
            raise ValueError(f"mixed-norm order s={self.s} outside [0, d/2]")
        if self.coords not in ("eta", "zeta"):
            raise ValueError(f"unknown coordinates {self.coords!r}")
        if self.flavor not in ("Hdot", "Bdot21", "Bdot2inf"):
            raise ValueError(f"unknown flavor {self.flavor!r}")


# ---------------------------------------------------------------------------
# direct and fast bilinear application
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _index_table(n: int, d: int) -> np.ndarray:
    """All centered lattice index vectors, shape (n^d, d), C order."""
    ax = np.arange(n) - n // 2
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _zero_leg(spec_vals: np.ndarray, grid: Grid, rtol: float, what: str) -> np.ndarray:
    z = abs(spec_vals[grid.zero_index])
    l2 = math.sqrt(float(np.sum(np.abs(spec_vals) ** 2)) / grid.L**grid.d)
    if z > rtol * max(l2, 1e-300):
        raise ZeroModeViolation(f"{what}: zero mode {z:.3e} exceeds {rtol:.1e} * ||.||_2")
    out = spec_vals.copy()
    out[grid.zero_index] = 0.0
    return out


def bilinear_apply_direct(B: SymbolBi, f: Field, g: Field,
                          zero_mode_rtol: float | None = None) -> Field:
    """h_hat(xi) = (1/L^d) * sum_{xi1+xi2=xi, no wraparound} B(xi1,xi2) f_hat g_hat.

    Cost O(N^2) over retained pairs, blocked over output tiles.
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    grid = f.grid
    from .spectral import ZERO_MODE_RTOL
    rtol = ZERO_MODE_RTOL if zero_mode_rtol is None else zero_mode_rtol

    fs = f.spectral().values
    gs = g.spectral().values
    if B.singular_legs[0]:
        fs = _zero_leg(fs, grid, rtol, f"first leg of {B.name}")
    if B.singular_legs[1]:
        gs = _zero_leg(gs, grid, rtol, f"second leg of {B.name}")

    n, d = grid.n, grid.d
    N = grid.size
    K = _index_table(n, d)
    dxi = grid.dxi
    f_flat = fs.ravel()
    g_flat = gs.ravel()
    strides = np.array([n ** (d - 1 - a) for a in range(d)], dtype=np.int64)

    out = np.zeros(N, dtype=complex)
    block = max(1, (1 << 21) // (N * d))
    x1 = tuple(dxi * K[None, :, a] for a in range(d))
    for start in range(0, N, block):
        KO = K[start:start + block]
        K2 = KO[:, None, :] - K[None, :, :]
        mask = np.all((K2 >= -n // 2) & (K2 < n // 2), axis=-1)
        x2 = tuple(dxi * K2[..., a] for a in range(d))
        vals = B.eval(x1, x2)
        idx2 = np.clip(K2 + n // 2, 0, n - 1) @ strides
        contrib = np.where(mask, vals * f_flat[None, :] * g_flat[idx2], 0.0)
        out[start:start + len(KO)] = contrib.sum(axis=1)

    out = out.reshape(grid.shape) / grid.L**grid.d
    if B.singular_total:
        out = _zero_leg(out, grid, rtol, f"output of {B.name}")
    return Field(grid, out, SPECTRAL, COMPLEX).as_repr(f.repr)


def bilinear_apply_fast(B: SymbolBi, f: Field, g: Field,
                        zero_mode_rtol: float | None = None) -> Field:
    """Separable route: single multipliers around dealiased pointwise products."""
    if B.separable is None:
        raise ValueError(f"symbol {B.name} carries no separability hint")
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    total = zero_field(f.grid, COMPLEX).spectral()
    for coeff, out_sym, left, right in B.separable:
        a = apply_symbol1(left, f, zero_mode_rtol=zero_mode_rtol) if left else f
        b = apply_symbol1(right, g, zero_mode_rtol=zero_mode_rtol) if right else g
        prod = dealiased_product(a, b)
        if out_sym is not None:
            prod = apply_symbol1(out_sym, prod, zero_mode_rtol=zero_mode_rtol)
        total = total + coeff * prod.spectral()
    return total.as_repr(f.repr)


def bilinear_apply(B: SymbolBi, f: Field, g: Field, **kw) -> Field:
    """Fast path when a separability hint exists, direct otherwise."""
    if B.separable is not None:
        return bilinear_apply_fast(B, f, g, **kw)
    return bilinear_apply_direct(B, f, g, **kw)


def separable_symbol(name: str, terms: Sequence[tuple], symmetric: bool = False) -> SymbolBi:
    """Build a SymbolBi from separable terms; direct fn derives from the terms."""
    terms = tuple(terms)

    def fn(x1, x2):
        r1 = _radius(x1)
        r2 = _radius(x2)
        xt = tuple(np.asarray(a) + np.asarray(b) for a, b in zip(x1, x2))
        rt = _radius(xt)
        acc = 0.0
        for coeff, out_sym, left, right in terms:
            t = np.asarray(coeff, dtype=complex)
            t = t * (out_sym.eval(xt, rt) if out_sym else 1.0)
            t = t * (left.eval(x1, r1) if left else 1.0)
            t = t * (right.eval(x2, r2) if right else 1.0)
            acc = acc + t
        return acc

    sing1 = any(t[2] is not None and t[2].singular for t in terms)
    sing2 = any(t[3] is not None and t[3].singular for t in terms)
    singt = any(t[1] is not None and t[1].singular for t in terms)
    return SymbolBi(name, fn, separable=terms, singular_legs=(sing1, sing2),
                    singular_total=singt, symmetric=symmetric)


def verify_symmetry(B: SymbolBi, rng: np.random.Generator, d: int = 3,
                    samples: int = 200) -> float:
    """Max |B(x,y) - B(y,x)| over random frequency pairs (for flagged symbols)."""
    xi1 = rng.normal(size=(samples, d)) * 3.0
    xi2 = rng.normal(size=(samples, d)) * 3.0
    return float(np.max(np.abs(B.value(xi1, xi2) - B.value(xi2, xi1))))


# ---------------------------------------------------------------------------
# trilinear application
# ---------------------------------------------------------------------------

def trilinear_apply(C: SymbolTri, f: Field, g: Field, h: Field,
                    zero_mode_rtol: float | None = None) -> Field:
    """Grouped evaluation per C.plan, exact against the direct triple sum.

    Grouped pairwise products are formed on the doubled lattice and the
    bilinear stage runs there too, so no aliased triple contributes to the
    retained modes.
    """
    if not C.plan:
        raise ValueError(f"symbol {C.name} has no grouping plan")
    grid = f.grid
    if g.grid != grid or h.grid != grid:
        raise ValueError("fields live on different grids")
    legs0 = [f, g, h]
    total = zero_field(grid, COMPLEX).spectral()
    for term in C.plan:
        legs = list(legs0)
        for i, s in term.leg_pre.items():
            legs[i] = apply_symbol1(s, legs[i], zero_mode_rtol=zero_mode_rtol)
        i, j = term.group
        k = ({0, 1, 2} - {i, j}).pop()
        pi = pad_field(legs[i]).physical()
        pj = pad_field(legs[j]).physical()
        group2 = Field(pi.grid, pi.values * pj.values, PHYSICAL, COMPLEX)
        lone2 = pad_field(legs[k])
        if term.bi is None:
            prod = Field(pi.grid, group2.values * lone2.physical().values, PHYSICAL, COMPLEX)
            res = truncate_field(prod, grid)
        else:
            if term.bi_order == "group,leg":
                r2 = bilinear_apply_direct(term.bi, group2, lone2,
                                           zero_mode_rtol=zero_mode_rtol)
            else:
                r2 = bilinear_apply_direct(term.bi, lone2, group2,
                                           zero_mode_rtol=zero_mode_rtol)
            res = truncate_field(r2, grid)
        if term.out is not None:
            res = apply_symbol1(term.out, res, zero_mode_rtol=zero_mode_rtol)
        total = total + term.coeff * res.spectral()
    return total.as_repr(f.repr)


def trilinear_apply_direct(C: SymbolTri, f: Field, g: Field, h: Field) -> Field:
    """O(N^3) direct triple-sum oracle; use on small grids only."""
    grid = f.grid
    n, d = grid.n, grid.d
    N = grid.size
    K = _index_table(n, d)
    dxi = grid.dxi
    s1 = f.spectral().values.ravel()
    s2 = g.spectral().values.ravel()
    s3 = h.spectral().values.ravel()
    strides = np.array([n ** (d - 1 - a) for a in range(d)], dtype=np.int64)

    K2 = K[:, None, :]
    K3 = K[None, :, :]
    K23 = K2 + K3
    x2 = tuple(np.asarray(K2[..., a] * dxi, dtype=float) for a in range(d))
    x3 = tuple(np.asarray(K3[..., a] * dxi, dtype=float) for a in range(d))
    pair_prod = s2[:, None] * s3[None, :]

    out = np.zeros(N, dtype=complex)
    for o in range(N):
        K1 = K[o][None, None, :] - K23
        mask = np.all((K1 >= -n // 2) & (K1 < n // 2), axis=-1)
        x1 = tuple(K1[..., a] * dxi for a in range(d))
        vals = C.eval(x1, x2, x3)
        idx1 = np.clip(K1 + n // 2, 0, n - 1) @ strides
        contrib = np.where(mask, vals * s1[idx1] * pair_prod, 0.0)
        out[o] = contrib.sum()
    out = out.reshape(grid.shape) / grid.L ** (2 * d)
    return Field(grid, out, SPECTRAL, COMPLEX).as_repr(f.repr)


def tri_plan_value(C: SymbolTri, xi1, xi2, xi3) -> np.ndarray:
    """Evaluate the grouping plan pointwise (sanity check against C.fn)."""
    pts = [np.asarray(x, dtype=float) for x in (xi1, xi2, xi3)]
    comps = [tuple(p[..., a] for a in range(p.shape[-1])) for p in pts]
    rads = [_radius(c) for c in comps]
    total_c = tuple(a + b + c for a, b, c in zip(*comps))
    total_r = _radius(total_c)
    acc = 0.0
    for term in C.plan:
        t = np.asarray(term.coeff, dtype=complex)
        for i, s in term.leg_pre.items():
            t = t * s.eval(comps[i], rads[i])
        if term.bi is not None:
            i, j = term.group
            k = ({0, 1, 2} - {i, j}).pop()
            gc = tuple(comps[i][a] + comps[j][a] for a in range(len(comps[0])))
            if term.bi_order == "group,leg":
                t = t * term.bi.eval(gc, comps[k])
            else:
                t = t * term.bi.eval(comps[k], gc)
        if term.out is not None:
            t = t * term.out.eval(total_c, total_r)
        acc = acc + t
    return acc


# ---------------------------------------------------------------------------
# the symbol library
# ---------------------------------------------------------------------------

def _pair_bracket_sq(x1, x2):
    """2 + |xi1|^2 + |xi2|^2, the 2d-vector bracket squared."""
    return 2.0 + _radius(x1) ** 2 + _radius(x2) ** 2


def _dot(x1, x2):
    return sum(np.asarray(a) * np.asarray(b) for a, b in zip(x1, x2))


def bi_pair_bracket_inv2() -> SymbolBi:
    """<(xi1,xi2)>^-2 = 1/(2+|xi1|^2+|xi2|^2); jointly non-separable."""
    return SymbolBi("bracketpair-inv2", lambda x1, x2: 1.0 / _pair_bracket_sq(x1, x2),
                    symmetric=True)


def bracket_pair_apply(f: Field, g: Field, rel_tol: float = 1e-9,
                       step: float = 0.5) -> Field:
    """<(xi1,xi2)>^-2 [f, g] via the heat-kernel exponential sum

        1/A = int_0^inf e^{-sA} ds,   A = 2 + |xi1|^2 + |xi2|^2,

    each node separable: e^{-s|xi1|^2} e^{-s|xi2|^2} e^{-2s}.  Trapezoid on
    s = e^x converges geometrically (~5e-8 relative at step 0.5), uniformly
    over the lattice; the node range adapts to the spectral supports.  When
    both legs live inside the quarter lattice the pointwise products are
    alias-free without padding, which makes this O(K N log N) route usable on
    grids where the direct O(N^2) convolution is not.
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    grid = f.grid
    sf = f.spectral().values
    sg = g.spectral().values
    r2 = grid.abs_xi**2

    def support_max(s):
        # relative threshold: roundtrip roundoff must not defeat detection
        mag = np.abs(s)
        top = float(np.max(mag))
        if top == 0.0:
            return 0.0, 0
        nz = mag > 1e-13 * top
        idx = np.nonzero(nz)
        kmax = 0
        for ax in idx:
            kmax = max(kmax, int(np.max(np.abs(ax - grid.n // 2))))
        return float(np.max(r2[nz])), kmax

    r2f, kf = support_max(sf)
    r2g, kg = support_max(sg)
    a_max = 2.0 + r2f + r2g
    x_lo = math.log(rel_tol / a_max)
    x_hi = math.log(18.5 / 2.0)  # e^{-2 s} <= 1e-16 beyond
    xs = np.arange(x_lo, x_hi + step, step)
    s_nodes = np.exp(xs)
    w_nodes = step * s_nodes

    unpadded = max(kf, kg) <= grid.n // 4 - 1
    n, d = grid.n, grid.d
    work = grid if unpadded else Grid(d, 2 * n, grid.L)
    heat_r2 = grid.abs_xi**2
    acc = np.zeros(work.shape, dtype=complex)
    from .spectral import _pad_spectrum as _ps
    for sk, wk in zip(s_nodes, w_nodes):
        heat = np.exp(-sk * heat_r2)
        if unpadded:
            a = Field(work, heat * sf, SPECTRAL, COMPLEX).physical()
            b = Field(work, heat * sg, SPECTRAL, COMPLEX).physical()
        else:
            a = Field(work, _ps(heat * sf, n, d), SPECTRAL, COMPLEX).physical()
            b = Field(work, _ps(heat * sg, n, d), SPECTRAL, COMPLEX).physical()
        acc += (wk * math.exp(-2.0 * sk)) * (a.values * b.values)
    prod = Field(work, acc, PHYSICAL, COMPLEX).spectral()
    if unpadded:
        out = prod
    else:
        from .spectral import _truncate_spectrum
        out = Field(grid, _truncate_spectrum(prod.values, n, d), SPECTRAL, COMPLEX)
    return out.as_repr(f.repr)


#: grid size above which the pair-bracket bilinear switches from the direct
#: convolution to the exact heat-kernel route
PAIR_BRACKET_FAST_SIZE = 32768


def _pair_bracket_bilinear(f: Field, g: Field) -> Field:
    if f.grid.size > PAIR_BRACKET_FAST_SIZE:
        return bracket_pair_apply(f, g)
    return bilinear_apply_direct(bi_pair_bracket_inv2(), f, g)


def bi_Bprime(j: int) -> SymbolBi:
    """Real symmetric bilinear transforms B'_j of the derivative-friendly choice.

    -B'_1 = B'_2 = <(xi1,xi2)>^-2; B'_3 = 3 - <xi>^2 B'_1; B'_4 = 1 - <xi>^2 B'_2
    (= -2 xi1.xi2 <(xi1,xi2)>^-2); B'_5 = 0.
    """
    if j == 1:
        return SymbolBi("Bprime1", lambda x1, x2: -1.0 / _pair_bracket_sq(x1, x2),
                        symmetric=True)
    if j == 2:
        return SymbolBi("Bprime2", lambda x1, x2: 1.0 / _pair_bracket_sq(x1, x2),
                        symmetric=True)
    if j == 3:
        def fn3(x1, x2):
            xt = tuple(np.asarray(a) + np.asarray(b) for a, b in zip(x1, x2))
            return 3.0 + (2.0 + _radius(xt) ** 2) / _pair_bracket_sq(x1, x2)
        return SymbolBi("Bprime3", fn3, symmetric=True)
    if j == 4:
        return SymbolBi("Bprime4",
                        lambda x1, x2: -2.0 * _dot(x1, x2) / _pair_bracket_sq(x1, x2),
                        symmetric=True)
    if j == 5:
        return SymbolBi("Bprime5", lambda x1, x2: np.zeros(np.broadcast(
            *(np.asarray(a) for a in x1 + x2)).shape), symmetric=True)
    raise ValueError(f"no B'_{j}")


def bi_alt_Bprime(j: int) -> SymbolBi:
    """B'_j of the discarded third normal-form choice (registered for
    completeness; no dynamics path, and its B'_5 is unavailable)."""
    def brk2(x1, x2):
        xt = tuple(np.asarray(a) + np.asarray(b) for a, b in zip(x1, x2))
        return 2.0 + _radius(xt) ** 2

    if j == 1:
        return SymbolBi("alt-Bprime1",
                        lambda x1, x2: (3.0 - 4.0 * _dot(x1, x2) / brk2(x1, x2)) / brk2(x1, x2),
                        symmetric=True)
    if j == 2:
        return SymbolBi("alt-Bprime2",
                        lambda x1, x2: (1.0 - 4.0 * _dot(x1, x2) / brk2(x1, x2)) / brk2(x1, x2),
                        symmetric=True)
    if j in (3, 4):
        return SymbolBi(f"alt-Bprime{j}",
                        lambda x1, x2: 4.0 * _dot(x1, x2) / brk2(x1, x2),
                        symmetric=True)
    raise ValueError(f"alt B'_{j} unavailable")


def bi_B3() -> SymbolBi:
    """B_3 = U(xi) B'_3 = 2 U(xi) (4+2|xi1|^2+2|xi2|^2+xi1.xi2) / (2+|xi1|^2+|xi2|^2).

    Derived from B'_3 = 3 - <xi>^2 B'_1 with B'_1 = -<(xi1,xi2)>^-2; this is
    the form under which the transformed evolution residual vanishes.
    """
    def fn(x1, x2):
        xt = tuple(np.asarray(a) + np.asarray(b) for a, b in zip(x1, x2))
        num = 8.0 + 4.0 * _radius(x1) ** 2 + 4.0 * _radius(x2) ** 2 + 2.0 * _dot(x1, x2)
        return u_of(_radius(xt)) * num / _pair_bracket_sq(x1, x2)
    return SymbolBi("B3", fn, symmetric=True)


def bi_B4() -> SymbolBi:
    """B_4 = -2 U(xi) <xi1><xi2> (xi1_hat . xi2_hat) / (2+|xi1|^2+|xi2|^2).

    The hat product is defined as 0 when either leg vanishes.
    """
    def fn(x1, x2):
        r1 = _radius(x1)
        r2 = _radius(x2)
        xt = tuple(np.asarray(a) + np.asarray(b) for a, b in zip(x1, x2))
        safe = np.where((r1 > 0) & (r2 > 0), np.where(r1 > 0, r1, 1.0) * np.where(r2 > 0, r2, 1.0), 1.0)
        hat = np.where((r1 > 0) & (r2 > 0), _dot(x1, x2) / safe, 0.0)
        return -2.0 * u_of(_radius(xt)) * bracket(r1) * bracket(r2) * hat / _pair_bracket_sq(x1, x2)
    return SymbolBi("B4", fn, symmetric=True)


def _sym_U_inv() -> Symbol1:
    return sym_U(-1.0)


def tri_C1() -> SymbolTri:
    def fn(x1, x2, x3):
        xt = tuple(np.asarray(a) + np.asarray(b) + np.asarray(c) for a, b, c in zip(x1, x2, x3))
        return u_of(_radius(xt)) * np.ones(np.broadcast(*(np.asarray(a) for a in x1)).shape)
    return SymbolTri("C1", fn, plan=(TriTerm(coeff=1.0, group=(1, 2), bi=None, out=sym_U()),))


def tri_C2() -> SymbolTri:
    def fn(x1, x2, x3):
        r1 = _radius(x1)
        r2 = _radius(x2)
        xt = tuple(np.asarray(a) + np.asarray(b) + np.asarray(c) for a, b, c in zip(x1, x2, x3))
        u1 = np.where(r1 > 0, u_of(np.where(r1 > 0, r1, 1.0)), 1.0)
        u2 = np.where(r2 > 0, u_of(np.where(r2 > 0, r2, 1.0)), 1.0)
        return u_of(_radius(xt)) / (u1 * u2)
    return SymbolTri("C2", fn, plan=(TriTerm(
        coeff=1.0, group=(1, 2), bi=None, out=sym_U(),
        leg_pre={0: _sym_U_inv(), 1: _sym_U_inv()}),))


def _cprime3_fn(x1, x2, x3):
    b1 = bi_Bprime(1)
    b2 = bi_Bprime(2)
    x23 = tuple(np.asarray(b) + np.asarray(c) for b, c in zip(x2, x3))
    x12 = tuple(np.asarray(a) + np.asarray(b) for a, b in zip(x1, x2))
    return 1.0 + 4.0 * b1.eval(x1, x23) - 6.0 * b2.eval(x12, x3)


def tri_Cprime3() -> SymbolTri:
    plan = (
        TriTerm(coeff=1.0, group=(1, 2), bi=None),
        TriTerm(coeff=4.0, group=(1, 2), bi=bi_Bprime(1), bi_order="leg,group"),
        TriTerm(coeff=-6.0, group=(0, 1), bi=bi_Bprime(2), bi_order="group,leg"),
    )
    return SymbolTri("Cprime3", _cprime3_fn, plan=plan)


def _cprime4_fn(x1, x2, x3):
    x12 = tuple(np.asarray(a) + np.asarray(b) for a, b in zip(x1, x2))
    num = _radius(x12) ** 2 + _radius(x3) ** 2
    return num / (2.0 + num)


def tri_Cprime4() -> SymbolTri:
    plan = (
        TriTerm(coeff=1.0, group=(0, 1), bi=None),
        TriTerm(coeff=-2.0, group=(0, 1), bi=bi_Bprime(2), bi_order="group,leg"),
    )
    return SymbolTri("Cprime4", _cprime4_fn, plan=plan)


def tri_C3() -> SymbolTri:
    """C_3 = U(xi3)^-1 C'_3; the single multiplier goes on the third leg first."""
    base = tri_Cprime3()

    def fn(x1, x2, x3):
        r3 = _radius(x3)
        u3 = np.where(r3 > 0, u_of(np.where(r3 > 0, r3, 1.0)), 1.0)
        return _cprime3_fn(x1, x2, x3) / u3

    plan = tuple(TriTerm(coeff=t.coeff, group=t.group, bi=t.bi, bi_order=t.bi_order,
                         leg_pre={**t.leg_pre, 2: _sym_U_inv()}, out=t.out)
                 for t in base.plan)
    return SymbolTri("C3", fn, plan=plan)


def tri_C4() -> SymbolTri:
    base = tri_Cprime4()

    def fn(x1, x2, x3):
        rs = [_radius(x) for x in (x1, x2, x3)]
        us = [np.where(r > 0, u_of(np.where(r > 0, r, 1.0)), 1.0) for r in rs]
        return _cprime4_fn(x1, x2, x3) / (us[0] * us[1] * us[2])

    pre = {0: _sym_U_inv(), 1: _sym_U_inv(), 2: _sym_U_inv()}
    plan = tuple(TriTerm(coeff=t.coeff, group=t.group, bi=t.bi, bi_order=t.bi_order,
                         leg_pre={**t.leg_pre, **pre}, out=t.out)
                 for t in base.plan)
    return SymbolTri("C4", fn, plan=plan)


def bi_Q1_left() -> SymbolBi:
    """-2 <(xi1,xi2)>^-2, the bilinear half of the quartic gatherer."""
    return SymbolBi("Q1-left", lambda x1, x2: -2.0 / _pair_bracket_sq(x1, x2),
                    symmetric=True)


# ---------------------------------------------------------------------------
# transforms and nonlinearities of the perturbation system
# ---------------------------------------------------------------------------

def diag_v(u1: Field, u2: Field) -> Field:
    """v = u1 + i U u2, the diagonalizing change of variables."""
    return u1 + 1j * apply_symbol1(sym_U(), u2)


def symbol_b(u1: Field, u2: Field) -> Field:
    """b(u) = -<(xi1,xi2)>^-2 [u1,u1] + <(xi1,xi2)>^-2 [u2,u2]; real-valued.

    Small grids use the direct pairwise convolution (the symbol is jointly
    non-separable); large grids the exact heat-kernel route.
    """
    res = _pair_bracket_bilinear(u2, u2) - _pair_bracket_bilinear(u1, u1)
    vals = res.physical().values
    return Field(u1.grid, vals.real.astype(complex), PHYSICAL, REAL)


def transform_M(u1: Field, u2: Field) -> Field:
    """z = M(u) = (u1 + i U u2) + <grad>^-2 |u|^2, products dealiased."""
    usq = dealiased_square_abs(u1 + 1j * u2)
    from .spectral import sym_bracket
    return diag_v(u1, u2) + apply_symbol1(sym_bracket(-2.0), usq)


def transform_Z(u1: Field, u2: Field) -> Field:
    """Z = (u1 + i U u2) + b(u)."""
    return diag_v(u1, u2) + symbol_b(u1, u2)


def nonlinearity_Nv(u1: Field, u2: Field) -> Field:
    """N_v(u) = U(3 u1^2 + u2^2 + |u|^2 u1) + i (2 u1 u2 + |u|^2 u2)."""
    usq = dealiased_square_abs(u1 + 1j * u2)
    re = apply_symbol1(sym_U(), 3.0 * dealiased_product(u1, u1)
                       + dealiased_product(u2, u2) + dealiased_product(usq, u1))
    im = 2.0 * dealiased_product(u1, u2) + dealiased_product(usq, u2)
    return re + 1j * im


def q1_quartic(u1: Field, u2: Field) -> Field:
    """Q_1(u) = -2 P[u1, |u|^2 u2] - 2 P[u2, |u|^2 u1], P = <(xi1,xi2)>^-2."""
    usq = dealiased_square_abs(u1 + 1j * u2)
    t1 = _pair_bracket_bilinear(u1, dealiased_product(usq, u2))
    t2 = _pair_bracket_bilinear(u2, dealiased_product(usq, u1))
    return -2.0 * (t1 + t2)


def nonlinearity_NZ(v: Field, u1: Field, u2: Field, check_tol: float = 1e-8) -> Field:
    """N_Z = B3[v1,v1] + B4[v2,v2] + C1[v1,v1,v1] + C2[v2,v2,v1]
           + i C3[v1,v1,v2] + i C4[v2,v2,v2] + i Q1(u).

    Requires v = u1 + i U u2 to the stated tolerance.  The U(xi_i)^-1 legs of
    B4, C2, C3, C4 reconstruct components of u from v; evaluating them in the
    equivalent u-form keeps the zero mode of u2, which U^-1 v2 cannot carry
    (on the torus that mean evolves, and dropping it breaks the evolution
    identity at cubic order).  The registry symbols stay in the v-form.
    """
    from .spectral import h1_norm
    vref = diag_v(u1, u2)
    scale = max(h1_norm(vref), 1e-300)
    if h1_norm(v - vref) > check_tol * scale:
        raise ValueError("v is not the diagonalization of (u1, u2) within tolerance")
    sU = sym_U()
    # quadratic: B_j = U(xi) B'_j with the B' acting on the real pair
    out = apply_symbol1(sU, bilinear_apply_direct(bi_Bprime(3), u1, u1))
    out = out + apply_symbol1(sU, bilinear_apply_direct(bi_Bprime(4), u2, u2))
    # cubic: C1, C2 -> U applied to the plain cubics; C3, C4 -> the C' forms
    u1sq = dealiased_product(u1, u1)
    u2sq = dealiased_product(u2, u2)
    out = out + apply_symbol1(sU, dealiased_product(u1sq, u1))
    out = out + apply_symbol1(sU, dealiased_product(u2sq, u1))
    out = out + 1j * trilinear_apply(tri_Cprime3(), u1, u1, u2)
    out = out + 1j * trilinear_apply(tri_Cprime4(), u2, u2, u2)
    out = out + 1j * q1_quartic(u1, u2)
    return out


# ---------------------------------------------------------------------------
# mixed symbol norms and the singular bilinear inequality harness
# ---------------------------------------------------------------------------

def symbol_mixed_norm(B: SymbolBi, spec: MixedNormSpec, xi_samples: np.ndarray,
                      eta_grid: Grid) -> float:
    """Numerical estimator of the mixed symbol norm: tabulate B(xi, .) on the
    second-coordinate grid, transform, weight by |y|^s, reduce; sup over the
    xi samples.  Not a certified norm.
    """
    xi_samples = np.atleast_2d(np.asarray(xi_samples, dtype=float))
    d = eta_grid.d
    spec.validate(d)
    best = 0.0
    mesh = eta_grid.coords()
    for xi in xi_samples:
        if spec.coords == "eta":
            x1 = tuple(np.full(eta_grid.shape, 0.0) + m for m in mesh)
            x2 = tuple(xi[a] - mesh[a] for a in range(d))
        else:
            x2 = tuple(np.full(eta_grid.shape, 0.0) + m for m in mesh)
            x1 = tuple(xi[a] - mesh[a] for a in range(d))
        vals = np.asarray(B.eval(x1, x2), dtype=complex)
        fld = Field(eta_grid, vals, PHYSICAL, COMPLEX)
        if spec.flavor == "Hdot":
            v = sobolev_norm(fld, spec.s, 2.0, homogeneous=True, zero_mode_rtol=np.inf)
        elif spec.flavor == "Bdot21":
            v = besov_norm(fld, spec.s, 2.0, 1.0)
        else:
            v = besov_norm(fld, spec.s, 2.0, math.inf)
        best = max(best, float(v))
    return best


def besov_pair_estimate(B: SymbolBi, s: float, grid: Grid,
                        rng: np.random.Generator, n_xi: int = 6) -> float:
    """[B^s]-style estimate: min over the (xi,eta)/(xi,zeta) coordinates of
    the Bdot^s_{2,1} mixed norm.

    The sup over xi combines random lattice samples with structured ones
    (the origin and dyadically spaced magnitudes along the first axis), so
    symbols concentrated near zero frequency are not missed as the lattice
    refines.
    """
    eta_grid = Grid(grid.d, grid.n, 2.0 * math.pi * grid.n / grid.L)
    lat = grid.axis_freqs
    xi_rand = rng.choice(lat, size=(n_xi, grid.d))
    mags = [0.0] + [grid.dxi * 2.0**j for j in
                    range(int(math.log2(grid.n)) - 1)]
    xi_struct = np.zeros((len(mags), grid.d))
    xi_struct[:, 0] = mags
    xi = np.concatenate([xi_struct, xi_rand])
    v_eta = symbol_mixed_norm(B, MixedNormSpec(s, "eta", "Bdot21"), xi, eta_grid)
    v_zeta = symbol_mixed_norm(B, MixedNormSpec(s, "zeta", "Bdot21"), xi, eta_grid)
    return min(v_eta, v_zeta)


@dataclass
class RatioReport:
    """Outcome of a sampled-inequality run."""

    ratios: list
    max_ratio: float
    b_norm_estimate: float
    params: dict


def q_of_s(s: float, d: int) -> float:
    """Sobolev exponent q(s): 1/q(s) = 1/2 - s/d."""
    inv = 0.5 - s / d
    if inv <= 0:
        return math.inf
    return 1.0 / inv


def sbil_inequality_harness(B: SymbolBi, s: float, q1: float, q2: float,
                            trials: int, grid: Grid, rng: np.random.Generator) -> RatioReport:
    """Sampled check of ||B[phi,psi]||_2 <= C ||B||_[B^s] ||phi||_q1 ||psi||_q2.

    The exponents must satisfy 1/q1 + 1/q2 = 1/2 + 1/q(s).
    """
    d = grid.d
    lhs_sum = 1.0 / q1 + 1.0 / q2
    rhs_sum = 0.5 + (0.5 - s / d)
    if abs(lhs_sum - rhs_sum) > 1e-9:
        raise ValueError(
            f"invalid exponent triple: 1/q1+1/q2 = {lhs_sum:.6f} != 1/2 + 1/q(s) = {rhs_sum:.6f}")
    if not (0.0 <= s <= d / 2.0):
        raise ValueError(f"order s={s} outside [0, d/2]")
    from .spectral import l2_norm, lp_norm, random_smooth_field
    bnorm = besov_pair_estimate(B, s, grid, rng)
    ratios = []
    for _ in range(trials):
        phi = random_smooth_field(grid, rng, kind=COMPLEX, decay=2.0)
        psi = random_smooth_field(grid, rng, kind=COMPLEX, decay=2.0)
        num = l2_norm(bilinear_apply_direct(B, phi, psi))
        den = bnorm * lp_norm(phi, q1) * lp_norm(psi, q2)
        ratios.append(num / den if den > 0 else 0.0)
    return RatioReport(ratios=ratios, max_ratio=max(ratios) if ratios else 0.0,
                       b_norm_estimate=bnorm,
                       params={"s": s, "q1": q1, "q2": q2, "n": grid.n, "d": d,
                               "trials": trials})


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_REGISTRY: dict = {}


def register_symbol(name: str, obj, note: str = ""):
    _REGISTRY[name] = {"object": obj, "note": note}


def get_symbol(name: str):
    if name not in _REGISTRY:
        raise KeyError(f"unknown symbol {name!r}; known: {sorted(_REGISTRY)}")
    return _REGISTRY[name]["object"]


def list_symbols() -> list:
    out = []
    for name in sorted(_REGISTRY):
        obj = _REGISTRY[name]["object"]
        kind = ("trilinear" if isinstance(obj, SymbolTri)
                else "bilinear" if isinstance(obj, SymbolBi)
                else "factory" if callable(obj) else "unavailable")
        out.append({"name": name, "kind": kind, "note": _REGISTRY[name]["note"]})
    return out


register_symbol("B3", bi_B3(), "quadratic multiplier on the real pair")
register_symbol("B4", bi_B4(), "quadratic multiplier on the imaginary pair")
register_symbol("C1", tri_C1(), "cubic, U(xi)")
register_symbol("C2", tri_C2(), "cubic, U(xi) U(xi1)^-1 U(xi2)^-1")
register_symbol("C3", tri_C3(), "cubic, U(xi3)^-1 C'_3")
register_symbol("C4", tri_C4(), "cubic, U^-1 on all legs of C'_4")
register_symbol("Q1-left", bi_Q1_left(), "bilinear half of the quartic gatherer")
register_symbol("bracketpair-inv2", bi_pair_bracket_inv2(), "<(xi1,xi2)>^-2")
for _j in range(1, 6):
    register_symbol(f"Bprime{_j}", bi_Bprime(_j), "transform generator")
for _j in (1, 2, 3, 4):
    register_symbol(f"alt-Bprime{_j}", bi_alt_Bprime(_j),
                    "third normal-form choice; registered, no dynamics path")
register_symbol("alt-Bprime5", None,
                "unavailable: source formula is typographically truncated")
