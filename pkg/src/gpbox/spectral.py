"""Periodic grids, spectral fields, Fourier multipliers, Littlewood-Paley
shells and norm computation.

Conventions, fixed once and used by every other module:

* physical coordinates are centered, x in [-L/2, L/2)^d, spacing h = L/n;
* the frequency lattice is xi_k = (2*pi/L) * k with integer k in
  {-n/2, ..., n/2 - 1} per axis, stored in *centered* order;
* the forward transform carries the trapezoid weight h^d, so spectral values
  approximate the continuum Fourier integral int f(x) exp(-i x.xi) dx;
  the inverse carries 1/L^d.  With this normalization the lattice L2 norm
  satisfies ||f||_2^2 = h^d sum |f|^2 = sum |f_hat|^2 / L^d (Plancherel);
* the Japanese bracket is <a> = sqrt(2 + |a|^2) throughout (the 2 comes from
  the constant background of the equation, not the usual 1), and
  U(a) = |a|/<a>, H(a) = |a|<a>.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.fft as _sfft


def _fft_workers() -> int:
    return int(os.environ.get("GPBOX_THREADS", "1"))

PHYSICAL = "physical"
SPECTRAL = "spectral"
REAL = "real-valued"
COMPLEX = "complex-valued"

#: default relative tolerance for the zero-mode content of fields fed to
#: symbols that are singular at xi = 0 (relative to the L2 norm)
ZERO_MODE_RTOL = 1e-10


class ZeroModeViolation(ValueError):
    """Raised when a singular symbol meets a field with a nonzero mean."""


# ---------------------------------------------------------------------------
# scalar symbol functions, usable on arbitrary numpy arrays (not only grids)
# ---------------------------------------------------------------------------

def bracket(r):
    """<r> = sqrt(2 + r^2) for scalar radii r (arrays ok)."""
    r = np.asarray(r, dtype=float)
    return np.sqrt(2.0 + r * r)


def u_of(r):
    """U(r) = r / <r>, with U(0) = 0."""
    r = np.asarray(r, dtype=float)
    return r / bracket(r)


def h_of(r):
    """H(r) = r * <r>."""
    r = np.asarray(r, dtype=float)
    return r * bracket(r)


def h_prime(r):
    """Radial derivative H'(r) = (2 + 2 r^2) / <r>; equals |grad H| at radius r."""
    r = np.asarray(r, dtype=float)
    return (2.0 + 2.0 * r * r) / bracket(r)


def grad_h(xi):
    """grad H at points xi of shape (..., d): xi_hat * (<xi> + |xi|^2/<xi>).

    The origin is a removable direction singularity; rows with |xi| = 0
    return the zero vector (callers that care must treat xi=0 separately).
    """
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi, axis=-1)
    mag = h_prime(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(r[..., None] > 0.0, xi / np.where(r == 0.0, 1.0, r)[..., None], 0.0)
    return mag[..., None] * unit


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Periodic box discretization: d dimensions, n points per axis, side L."""

    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n % 2 != 0 or self.n < 8 or not _is_pow2(self.n):
            raise ValueError(f"points per axis must be an even power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"box length must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def dxi(self) -> float:
        """Frequency lattice spacing 2*pi/L."""
        return 2.0 * math.pi / self.L

    @property
    def xi_min(self) -> float:
        """Smallest nonzero lattice frequency magnitude."""
        return self.dxi

    @property
    def xi_nyquist(self) -> float:
        """Per-axis Nyquist frequency pi*n/L."""
        return math.pi * self.n / self.L

    @cached_property
    def axis_coords(self) -> np.ndarray:
        return -self.L / 2.0 + self.h * np.arange(self.n)

    @cached_property
    def axis_freqs(self) -> np.ndarray:
        return self.dxi * (np.arange(self.n) - self.n // 2)

    def coords(self) -> tuple:
        """Meshgrid ('ij') of centered physical coordinates, one array per axis."""
        return tuple(np.meshgrid(*([self.axis_coords] * self.d), indexing="ij"))

    def freqs(self) -> tuple:
        """Meshgrid ('ij') of centered lattice frequencies, one array per axis."""
        return tuple(np.meshgrid(*([self.axis_freqs] * self.d), indexing="ij"))

    @cached_property
    def abs_xi(self) -> np.ndarray:
        return np.sqrt(sum(x * x for x in self.freqs()))

    @cached_property
    def _alt_sign(self) -> np.ndarray:
        """(-1)^(k1+...+kd) on the centered lattice; absorbs the x-offset -L/2."""
        k = np.arange(self.n) - self.n // 2
        s = (-1.0) ** (k % 2)
        out = s
        for _ in range(self.d - 1):
            out = np.multiply.outer(out, s)
        return out

    @property
    def zero_index(self) -> tuple:
        return (self.n // 2,) * self.d

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.d, self.n * factor, self.L)


def make_grid(d: int, n: int, L: float) -> Grid:
    """Construct a periodic grid; rejects odd n, d outside 1..3, L <= 0."""
    return Grid(d, n, float(L))


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Field:
    """Grid function with a physical/spectral representation tag.

    ``values`` is always complex and in centered order (both spaces).
    ``value_kind`` marks fields asserted real in physical space; conversions
    preserve the tag, arithmetic degrades it conservatively.
    """

    grid: Grid
    values: np.ndarray
    repr: str = PHYSICAL
    value_kind: str = COMPLEX

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if self.repr not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"unknown repr {self.repr!r}")

    def spectral(self) -> "Field":
        if self.repr == SPECTRAL:
            return self
        s = self.grid.h**self.grid.d * self.grid._alt_sign * np.fft.fftshift(
            _sfft.fftn(self.values, workers=_fft_workers()))
        return Field(self.grid, s, SPECTRAL, self.value_kind)

    def physical(self) -> "Field":
        if self.repr == PHYSICAL:
            return self
        v = _sfft.ifftn(np.fft.ifftshift(self.values * self.grid._alt_sign),
                        workers=_fft_workers()) / self.grid.h**self.grid.d
        return Field(self.grid, v, PHYSICAL, self.value_kind)

    def as_repr(self, repr: str) -> "Field":
        return self.spectral() if repr == SPECTRAL else self.physical()

    def real_part(self) -> "Field":
        return Field(self.grid, self.physical().values.real.astype(complex), PHYSICAL, REAL)

    def imag_part(self) -> "Field":
        return Field(self.grid, self.physical().values.imag.astype(complex), PHYSICAL, REAL)

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.physical().values), PHYSICAL, self.value_kind)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.repr, self.value_kind)

    # arithmetic stays in the left operand's representation
    def __add__(self, other: "Field") -> "Field":
        o = other.as_repr(self.repr)
        kind = REAL if (self.value_kind == REAL and o.value_kind == REAL) else COMPLEX
        return Field(self.grid, self.values + o.values, self.repr, kind)

    def __sub__(self, other: "Field") -> "Field":
        o = other.as_repr(self.repr)
        kind = REAL if (self.value_kind == REAL and o.value_kind == REAL) else COMPLEX
        return Field(self.grid, self.values - o.values, self.repr, kind)

    def __mul__(self, c) -> "Field":
        kind = self.value_kind if (np.isrealobj(np.asarray(c)) or np.imag(c) == 0) else COMPLEX
        return Field(self.grid, self.values * c, self.repr, kind)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values, self.repr, self.value_kind)


def zero_field(grid: Grid, kind: str = REAL) -> Field:
    return Field(grid, np.zeros(grid.shape, dtype=complex), PHYSICAL, kind)


def constant_field(grid: Grid, c: complex) -> Field:
    kind = REAL if np.imag(c) == 0 else COMPLEX
    return Field(grid, np.full(grid.shape, complex(c)), PHYSICAL, kind)


def field_from_function(grid: Grid, fn: Callable, kind: str = COMPLEX) -> Field:
    """Sample fn(*coords) on the grid."""
    vals = np.asarray(fn(*grid.coords()), dtype=complex)
    return Field(grid, vals, PHYSICAL, kind)


def plane_wave(grid: Grid, k_int: Sequence[int]) -> Field:
    """exp(i x . xi) for an integer lattice index k (xi = 2*pi*k/L)."""
    xi = [grid.dxi * ki for ki in k_int]
    xs = grid.coords()
    phase = sum(x * x0 for x, x0 in zip(xs, xi))
    return Field(grid, np.exp(1j * phase), PHYSICAL, COMPLEX)


def random_smooth_field(grid: Grid, rng: np.random.Generator, kind: str = REAL,
                        decay: float = 3.0, amplitude: float = 1.0,
                        mean_free: bool = False, cutoff_frac: float | None = None) -> Field:
    """Random field with spectrum ~ <xi>^(-decay).

    ``cutoff_frac`` zeroes every mode with per-axis |k| >= cutoff_frac * n/2;
    machine-precision identity tests use it to keep products clear of the
    Nyquist row (whose lattice conjugate is unpaired).
    """
    shape = grid.shape
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coef *= bracket(grid.abs_xi) ** (-decay)
    if mean_free:
        coef[grid.zero_index] = 0.0
    if cutoff_frac is not None:
        k = np.abs(np.arange(grid.n) - grid.n // 2)
        keep1 = k < cutoff_frac * (grid.n // 2)
        keep = keep1
        for _ in range(grid.d - 1):
            keep = np.logical_and.outer(keep, keep1)
        coef = np.where(keep, coef, 0.0)
    f = Field(grid, coef, SPECTRAL, COMPLEX).physical()
    vals = f.values.real if kind == REAL else f.values
    vals = np.asarray(vals, dtype=complex)
    scale = np.max(np.abs(vals))
    if scale > 0:
        vals = vals * (amplitude / scale)
    return Field(grid, vals, PHYSICAL, kind)


def project_mean_free(f: Field) -> Field:
    """Zero the xi = 0 mode (callers of singular symbols must project)."""
    s = f.spectral()
    vals = s.values.copy()
    vals[f.grid.zero_index] = 0.0
    return Field(f.grid, vals, SPECTRAL, f.value_kind).as_repr(f.repr)


def conjugate_symmetry_defect(f: Field) -> float:
    """Relative size of f_hat(-xi) - conj(f_hat(xi)); ~0 for real-valued fields.

    The unpaired Nyquist rows (index 0 per axis in centered order) are left
    out of the reflection, as they have no lattice partner.
    """
    s = f.spectral().values
    core = s[(slice(1, None),) * f.grid.d]
    refl = np.conj(core[(slice(None, None, -1),) * f.grid.d])
    denom = np.max(np.abs(s))
    if denom == 0.0:
        return 0.0
    return float(np.max(np.abs(core - refl)) / denom)


# ---------------------------------------------------------------------------
# single Fourier multipliers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Symbol1:
    """Evaluation contract xi -> C over the frequency lattice.

    ``fn(xi_axes, r)`` receives the tuple of frequency meshes and |xi| and
    must be pure; ``singular`` marks symbols undefined at xi = 0 (the output
    zero mode is then set to 0 subject to the zero-mode policy);
    ``real_even`` marks real symbols with s(-xi) = s(xi), which preserve
    real-valuedness.
    """

    name: str
    fn: Callable
    singular: bool = False
    real_even: bool = True

    def eval(self, xi_axes: tuple, r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.fn(xi_axes, r))

    def on_grid(self, grid: Grid) -> np.ndarray:
        vals = self.eval(grid.freqs(), grid.abs_xi)
        vals = np.asarray(vals, dtype=complex)
        if self.singular:
            vals[grid.zero_index] = 0.0
        return vals


def sym_one() -> Symbol1:
    return Symbol1("1", lambda xi, r: np.ones_like(r))


def sym_bracket(s: float = 1.0) -> Symbol1:
    return Symbol1(f"<xi>^{s}", lambda xi, r: bracket(r) ** s)


def sym_abs(s: float) -> Symbol1:
    """|xi|^s; singular for s < 0."""
    if s < 0:
        return Symbol1(f"|xi|^{s}", lambda xi, r: np.where(r > 0, r, 1.0) ** s, singular=True)
    return Symbol1(f"|xi|^{s}", lambda xi, r: r**s)


def sym_U(power: float = 1.0) -> Symbol1:
    """U^power with U = |xi|/<xi>; singular at 0 for power < 0."""
    if power < 0:
        return Symbol1(f"U^{power}",
                       lambda xi, r: (np.where(r > 0, r, 1.0) / bracket(r)) ** power,
                       singular=True)
    return Symbol1(f"U^{power}", lambda xi, r: u_of(r) ** power)


def sym_H(power: float = 1.0) -> Symbol1:
    if power < 0:
        return Symbol1(f"H^{power}",
                       lambda xi, r: (np.where(r > 0, r, 1.0) * bracket(r)) ** power,
                       singular=True)
    return Symbol1(f"H^{power}", lambda xi, r: h_of(r) ** power)


def sym_riesz(j: int) -> Symbol1:
    """xi_j / |xi| (a component of xi_hat); odd, hence not real_even."""
    return Symbol1(f"xi_{j}/|xi|",
                   lambda xi, r: xi[j] / np.where(r > 0, r, 1.0),
                   singular=True, real_even=False)


def sym_partial(j: int) -> Symbol1:
    """i xi_j, the spectral gradient component."""
    return Symbol1(f"i*xi_{j}", lambda xi, r: 1j * xi[j], real_even=False)


def sym_neg_laplace() -> Symbol1:
    return Symbol1("|xi|^2", lambda xi, r: r * r)


def _zero_mode_check(f_spec: Field, rtol: float):
    z = abs(f_spec.values[f_spec.grid.zero_index])
    l2 = math.sqrt(float(np.sum(np.abs(f_spec.values) ** 2)) / f_spec.grid.L**f_spec.grid.d)
    if z > rtol * max(l2, 1e-300):
        raise ZeroModeViolation(
            f"singular symbol applied to field with zero-mode {z:.3e} > {rtol:.1e} * ||f||_2")


def apply_symbol1(s: Symbol1, f: Field, out_repr: str | None = None,
                  zero_mode_rtol: float | None = None) -> Field:
    """g_hat(xi) = s(xi) * f_hat(xi), with the zero-mode policy for singular s."""
    rtol = ZERO_MODE_RTOL if zero_mode_rtol is None else zero_mode_rtol
    fs = f.spectral()
    if s.singular:
        _zero_mode_check(fs, rtol)
    vals = s.on_grid(f.grid) * fs.values
    kind = f.value_kind if s.real_even else COMPLEX
    out = Field(f.grid, vals, SPECTRAL, kind)
    if out_repr is None:
        out_repr = f.repr
    return out.as_repr(out_repr)


def apply_multiplier(f: Field, mult: np.ndarray, real_even: bool = True) -> Field:
    """Apply a precomputed lattice multiplier array (centered order)."""
    fs = f.spectral()
    kind = f.value_kind if real_even else COMPLEX
    return Field(f.grid, mult * fs.values, SPECTRAL, kind).as_repr(f.repr)


# ---------------------------------------------------------------------------
# dealiased products (zero padding to 2n per axis)
# ---------------------------------------------------------------------------

def _pad_spectrum(s: np.ndarray, n: int, d: int) -> np.ndarray:
    out = np.zeros((2 * n,) * d, dtype=complex)
    out[(slice(n // 2, 3 * n // 2),) * d] = s
    return out


def _truncate_spectrum(s: np.ndarray, n: int, d: int) -> np.ndarray:
    return s[(slice(n // 2, 3 * n // 2),) * d].copy()


def pad_field(f: Field) -> Field:
    """Same function, sampled on the 2n grid (spectral zero padding).

    Output is tagged complex even for real inputs: an unpaired Nyquist mode
    (frequency -n/2, no +n/2 partner) makes the interpolant complex at the
    new sample points.
    """
    g = f.grid
    fine = Grid(g.d, 2 * g.n, g.L)
    return Field(fine, _pad_spectrum(f.spectral().values, g.n, g.d), SPECTRAL, COMPLEX)


def truncate_field(f: Field, coarse: Grid) -> Field:
    """Restrict a 2n-grid field to the original lattice modes."""
    return Field(coarse, _truncate_spectrum(f.spectral().values, coarse.n, coarse.d),
                 SPECTRAL, f.value_kind)


def dealiased_product(f: Field, g: Field) -> Field:
    """Pointwise product computed alias-free via zero padding to 2n per axis.

    Exact for quadratic expressions; for triple products the aliased images
    on the doubled lattice land outside the retained modes, so iterating this
    (product of a product) is also alias-free on the original lattice.
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    fp = pad_field(f).physical()
    gp = pad_field(g).physical()
    kind = REAL if (f.value_kind == REAL and g.value_kind == REAL) else COMPLEX
    prod = Field(fp.grid, fp.values * gp.values, PHYSICAL, kind)
    return truncate_field(prod, f.grid).as_repr(PHYSICAL)


def dealiased_square_abs(f: Field) -> Field:
    """|f|^2 = (Re f)^2 + (Im f)^2, dealiased; the canonical |u|^2 everywhere."""
    fp = pad_field(f).physical()
    prod = Field(fp.grid, (fp.values.real**2 + fp.values.imag**2).astype(complex), PHYSICAL, REAL)
    return truncate_field(prod, f.grid).as_repr(PHYSICAL)


# ---------------------------------------------------------------------------
# Littlewood-Paley decomposition
# ---------------------------------------------------------------------------

def chi_bump(r):
    """C^inf cutoff: 1 for |r|<=1, 0 for |r|>=2, exponential blend between.

    The bridge is g(2-r)/(g(2-r)+g(r-1)) with g(t)=exp(-1/t), smooth and flat
    at both ends of (1,2).
    """
    r = np.abs(np.asarray(r, dtype=float))
    out = np.zeros_like(r)
    out[r <= 1.0] = 1.0
    mid = (r > 1.0) & (r < 2.0)
    t = r[mid]
    g1 = np.exp(-1.0 / (2.0 - t))
    g0 = np.exp(-1.0 / (t - 1.0))
    out[mid] = g1 / (g1 + g0)
    return out


def chi_shell(r, k: float):
    """chi^k(r) = chi(r/k) - chi(2r/k), supported on k/2 < r < 2k."""
    return chi_bump(np.asarray(r) / k) - chi_bump(2.0 * np.asarray(r) / k)


def lp_shells(grid: Grid) -> list:
    """Dyadic shell labels whose union partitions the resolvable annulus.

    k runs over powers of two from 2^floor(log2(xi_min)) to
    2^ceil(log2(xi_nyquist)); the partition sum chi(r/k_max)-chi(2r/k_min)
    then equals 1 for xi_min <= |xi| <= xi_nyquist.
    """
    j_lo = math.floor(math.log2(grid.xi_min))
    j_hi = math.ceil(math.log2(grid.xi_nyquist))
    return [2.0**j for j in range(j_lo, j_hi + 1)]


def littlewood_paley(f: Field, k: float) -> Field:
    """chi^k(nabla) f."""
    mult = chi_shell(f.grid.abs_xi, k)
    return apply_multiplier(f, mult)


def lp_tail(f: Field) -> Field:
    """What the resolvable shells miss: the mean plus the corner residue.

    f equals sum_k littlewood_paley(f, k) + lp_tail(f) exactly on the lattice.
    """
    ks = lp_shells(f.grid)
    r = f.grid.abs_xi
    covered = chi_bump(r / ks[-1]) - chi_bump(2.0 * r / ks[0])
    mult = 1.0 - covered
    return apply_multiplier(f, mult)


def freq_split(f: Field, k: float) -> tuple:
    """(f_{<k}, f_{>=k}); the mean goes with the low part; sum is exact."""
    r = f.grid.abs_xi
    lo = chi_bump(2.0 * r / k)
    lo = lo.copy()
    lo[f.grid.zero_index] = 1.0
    f_lo = apply_multiplier(f, lo)
    f_hi = apply_multiplier(f, 1.0 - lo)
    return f_lo, f_hi


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def lp_norm(f: Field, p: float) -> float:
    v = np.abs(f.physical().values)
    if math.isinf(p):
        return float(np.max(v))
    return float((f.grid.h**f.grid.d * np.sum(v**p)) ** (1.0 / p))


def l2_norm(f: Field) -> float:
    """L2 via spectral Plancherel when already spectral, quadrature otherwise."""
    if f.repr == SPECTRAL:
        return float(math.sqrt(np.sum(np.abs(f.values) ** 2) / f.grid.L**f.grid.d))
    return lp_norm(f, 2)


def sobolev_norm(f: Field, s: float, p: float = 2.0, homogeneous: bool = False,
                 zero_mode_rtol: float | None = None) -> float:
    """H^{s,p} norm ||<grad>^s f||_p, or homogeneous || |grad|^s f ||_p.

    Homogeneous weights with s < 0 require mean-free input (zero-mode policy).
    """
    if homogeneous:
        w = sym_abs(s)
    else:
        w = sym_bracket(s)
    g = apply_symbol1(w, f, zero_mode_rtol=zero_mode_rtol)
    if p == 2.0:
        return l2_norm(g.spectral())
    return lp_norm(g, p)


def h1_norm(f: Field) -> float:
    return sobolev_norm(f, 1.0)


def besov_norm(f: Field, s: float, p: float, q: float) -> float:
    """Homogeneous Besov via shell sums: ||k^s ||chi^k f||_p||_{l^q over k}.

    The mean and the corner residue are excluded (homogeneous scale).
    """
    terms = []
    for k in lp_shells(f.grid):
        piece = littlewood_paley(f, k)
        val = lp_norm(piece, p)
        terms.append((k**s) * val)
    terms = np.asarray(terms)
    if math.isinf(q):
        return float(np.max(terms)) if len(terms) else 0.0
    return float(np.sum(terms**q) ** (1.0 / q))


def lorentz_norm(f: Field, p: float, q: float = 2.0) -> float:
    """Rearrangement-based discrete Lorentz norm L^{p,q}.

    Cells of measure h^d, decreasing rearrangement f*, and
    ||f||^q = sum f*_i^q * (p/q) * (t_{i+1}^{q/p} - t_i^{q/p}) with t_i = i h^d.
    A desk-scale surrogate: exact for q = p (then it equals L^p), and a
    quadrature of the continuum definition otherwise.
    """
    v = np.sort(np.abs(f.physical().values).ravel())[::-1]
    cell = f.grid.h**f.grid.d
    t = cell * np.arange(len(v) + 1)
    incr = t[1:] ** (q / p) - t[:-1] ** (q / p)
    total = float(np.sum(v**q * (p / q) * incr))
    return total ** (1.0 / q)


def norm(f: Field, spec) -> float:
    """Dispatcher over norm specs.

    Accepts tuples ('L', p), ('Lorentz', p, q), ('H', s[, p]), ('Hdot', s),
    ('Bdot', s, p, q), or strings 'L2', 'L6', 'Linf', 'H1', 'L2,2', ...
    """
    if isinstance(spec, str):
        spec = _parse_norm_string(spec)
    kind = spec[0]
    if kind == "L":
        return lp_norm(f, spec[1])
    if kind == "Lorentz":
        return lorentz_norm(f, spec[1], spec[2])
    if kind == "H":
        p = spec[2] if len(spec) > 2 else 2.0
        return sobolev_norm(f, spec[1], p)
    if kind == "Hdot":
        return sobolev_norm(f, spec[1], 2.0, homogeneous=True)
    if kind == "Bdot":
        return besov_norm(f, spec[1], spec[2], spec[3])
    raise ValueError(f"unknown norm spec {spec!r}")


def _parse_norm_string(s: str):
    s = s.strip()
    if s.lower() in ("linf", "loo"):
        return ("L", math.inf)
    if s.startswith("L"):
        body = s[1:]
        if "," in body:
            p, q = body.split(",")
            return ("Lorentz", float(p), float(q))
        return ("L", float(body))
    if s.startswith("Hdot"):
        return ("Hdot", float(s[4:]))
    if s.startswith("H"):
        body = s[1:]
        if "," in body:
            a, p = body.split(",")
            return ("H", float(a), float(p))
        return ("H", float(body))
    raise ValueError(f"cannot parse norm spec {s!r}")


# ---------------------------------------------------------------------------
# linear decay bookkeeping
# ---------------------------------------------------------------------------

def lp_decay_constants(d: int, p: float, theta: float) -> tuple:
    """Predicted decay rate (d-theta)*sigma and smoothing exponents for the
    free propagator estimate in L^{p,2}, sigma = 1/2 - 1/p.

    Returns (rate, (U_exponent, bracket_exponent)) so harnesses can build the
    weighted data norm U^{(d-2+3 theta) sigma} <grad>^{2 theta sigma}.
    """
    if p < 2:
        raise ValueError("decay estimates require p >= 2")
    if not (0.0 <= theta <= 1.0):
        raise ValueError("interpolation parameter must lie in [0, 1]")
    if d not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    sigma = 0.5 - 1.0 / p
    rate = (d - theta) * sigma
    return rate, ((d - 2 + 3 * theta) * sigma, 2 * theta * sigma)


def group_velocity_min(grid: Grid) -> float:
    """min over nonzero lattice xi of |grad H|; analytically >= sqrt(2)."""
    r = grid.abs_xi
    nz = r[r > 0]
    return float(np.min(h_prime(nz)))


def wraparound_horizon(grid: Grid, k_eff: float | None = None) -> float:
    """L / (2 v_max) with v_max = |grad H| at the effective frequency cap.

    By default the cap is the lattice maximum (most conservative); decay
    experiments pass the largest populated frequency of their data instead.
    """
    if k_eff is None:
        k_eff = float(np.max(grid.abs_xi))
    return grid.L / (2.0 * float(h_prime(k_eff)))
