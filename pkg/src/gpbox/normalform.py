"""Energy-space normal-form apparatus: the nonlinear distance, the exact
energy-mapping identity, the inverse map by contraction, and the monitored
nonlinearities of the z equation.

Every quadratic product here is dealiased (zero padding), and cubic/quartic
expressions are built as products of dealiased pairs; under that convention
the regrouping identities below hold to machine precision, not just up to
aliasing noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .multilinear import transform_M
from .spectral import (
    COMPLEX,
    PHYSICAL,
    REAL,
    Field,
    Grid,
    ZeroModeViolation,
    apply_symbol1,
    dealiased_product,
    dealiased_square_abs,
    h1_norm,
    l2_norm,
    lp_norm,
    sym_U,
    sym_bracket,
    sym_partial,
)


@dataclass(frozen=True)
class EnergyPoint:
    """A finite-energy perturbation candidate with its cached densities."""

    f: Field

    @cached_property
    def abs_sq(self) -> Field:
        return dealiased_square_abs(self.f)

    @cached_property
    def q(self) -> Field:
        """Renormalized charge density 2 Re f + |f|^2."""
        return 2.0 * self.f.real_part() + self.abs_sq

    def recompute_defect(self) -> float:
        """Max deviation between cached q and a fresh recomputation."""
        fresh = 2.0 * self.f.real_part() + dealiased_square_abs(self.f)
        return float(np.max(np.abs(fresh.physical().values - self.q.physical().values)))


def _grad_l2_sq(f: Field) -> float:
    s = f.spectral()
    return float(np.sum((s.grid.abs_xi * np.abs(s.values)) ** 2) / s.grid.L**s.grid.d)


def delta_distance(fp: EnergyPoint, gp: EnergyPoint) -> float:
    """delta(f,g)^2 = ||grad(f-g)||_2^2 + 1/2 || q(f) - q(g) ||_2^2."""
    diff = fp.f - gp.f
    qdiff = fp.q - gp.q
    return math.sqrt(_grad_l2_sq(diff) + 0.5 * l2_norm(qdiff) ** 2)


def energy_mapping_check(fp: EnergyPoint, gp: EnergyPoint) -> float:
    """Relative residual of the exact identity

        delta(f,g)^2 = ||<grad>(M(f)-M(g))||_2^2 + 1/2 ||U(|f|^2-|g|^2)||_2^2,

    which rests on the symbol identity <xi>^-2 + U^2/2 = 1/2.  Must vanish to
    rounding on dealiased grids, for any amplitude.
    """
    d2 = delta_distance(fp, gp) ** 2
    mf = transform_M(fp.f.real_part(), fp.f.imag_part())
    mg = transform_M(gp.f.real_part(), gp.f.imag_part())
    t1 = h1_norm(mf - mg) ** 2
    t2 = 0.5 * l2_norm(apply_symbol1(sym_U(), fp.abs_sq - gp.abs_sq)) ** 2
    return abs(d2 - t1 - t2) / (1.0 + d2)


# ---------------------------------------------------------------------------
# the inverse map
# ---------------------------------------------------------------------------

@dataclass
class FixedPointReport:
    iterations: int
    residual: float
    converged: bool
    contraction: float


class InversionError(RuntimeError):
    """Fixed-point iteration failed to contract (smallness bound too large)."""


def inverse_R(f: Field, tol: float = 1e-10, max_iter: int = 200,
              kappa: float = 0.1) -> tuple:
    """Solve M(g) = f by the contraction g1 <- f1 - <grad>^-2 {g1^2 + (U^-1 f2)^2},
    g2 = U^-1 f2, starting from g1 = f1.

    Requires ||f||_L6 <= kappa (the smallness window of the inverse) and a
    mean-free imaginary part (the zero-mode policy of U^-1).
    Returns (EnergyPoint g, FixedPointReport).
    """
    l6 = lp_norm(f, 6)
    if l6 > kappa:
        raise InversionError(f"||f||_L6 = {l6:.3g} exceeds the smallness bound {kappa}")
    f1 = f.real_part()
    f2 = f.imag_part()
    g2 = apply_symbol1(sym_U(-1.0), f2)  # raises ZeroModeViolation on a mean
    g2sq = dealiased_product(g2, g2)
    inv_br2 = sym_bracket(-2.0)

    g1 = f1
    prev_step = None
    contraction = 0.0
    for it in range(1, max_iter + 1):
        new_g1 = f1 - apply_symbol1(inv_br2, dealiased_product(g1, g1) + g2sq)
        step = h1_norm(new_g1 - g1)
        g1 = new_g1
        if prev_step is not None and prev_step > 0:
            contraction = step / prev_step
        prev_step = step
        if step <= tol:
            g = EnergyPoint(g1 + 1j * g2)
            return g, FixedPointReport(iterations=it, residual=step,
                                       converged=True, contraction=contraction)
    raise InversionError(
        f"no convergence in {max_iter} iterations (last step {prev_step:.3e}); "
        "the smallness bound kappa is likely too large")


def roundtrip_defect(f: Field, **kw) -> float:
    """|| M(R(f)) - f ||_H1, the inverse-map quality measure."""
    g, _ = inverse_R(f, **kw)
    mf = transform_M(g.f.real_part(), g.f.imag_part())
    return h1_norm(mf - f)


# ---------------------------------------------------------------------------
# nonlinearities of the z equation
# ---------------------------------------------------------------------------

def _grad_fields(f: Field) -> list:
    return [apply_symbol1(sym_partial(j), f) for j in range(f.grid.d)]


def _div_inv_br2(vec: list) -> Field:
    """<grad>^-2 div of a vector of fields (spectral)."""
    total = apply_symbol1(sym_partial(0), vec[0])
    for j in range(1, len(vec)):
        total = total + apply_symbol1(sym_partial(j), vec[j])
    return apply_symbol1(sym_bracket(-2.0), total)


def nonlinearity_NO(u1: Field, u2: Field) -> Field:
    """N_O(u) = U{2 u1^2 + |u|^2 u1} - i <grad>^-2 div{4 u1 grad u2 + grad(|u|^2 u2)}."""
    usq = dealiased_square_abs(u1 + 1j * u2)
    re = apply_symbol1(sym_U(), 2.0 * dealiased_product(u1, u1)
                       + dealiased_product(usq, u1))
    du2 = _grad_fields(u2)
    flux = [4.0 * dealiased_product(u1, d) for d in du2]
    cubic = dealiased_product(usq, u2)
    grad_cubic = _grad_fields(cubic)
    vec = [flux[j] + grad_cubic[j] for j in range(u1.grid.d)]
    return re - 1j * _div_inv_br2(vec)


def nonlinearity_NO_split(u1: Field, u2: Field) -> tuple:
    """The two-part regrouping via the charge density q = 2 u1 + |u|^2:

    N_O^1 = (U/2)(q^2 - |u|^4 - 2 u1^3)
            - i grad <grad>^-2 . {2 q grad u2 + u1 (2 u2 grad u1 - u1 grad u2)}
    N_O^2 = -U(u2^2 u1) - i <grad>^-2 div(u2^2 grad u2)

    Their sum equals nonlinearity_NO exactly under the dealiasing convention.
    """
    usq = dealiased_square_abs(u1 + 1j * u2)
    q = 2.0 * u1 + usq
    qsq = dealiased_product(q, q)
    u4 = dealiased_product(usq, usq)
    u1sq = dealiased_product(u1, u1)
    u1cu = dealiased_product(u1sq, u1)
    re1 = 0.5 * apply_symbol1(sym_U(), qsq - u4 - 2.0 * u1cu)

    du1 = _grad_fields(u1)
    du2 = _grad_fields(u2)
    vec1 = []
    for j in range(u1.grid.d):
        t = 2.0 * dealiased_product(q, du2[j])
        inner = 2.0 * dealiased_product(u2, du1[j]) - dealiased_product(u1, du2[j])
        t = t + dealiased_product(u1, inner)
        vec1.append(t)
    part1 = re1 - 1j * _div_inv_br2(vec1)

    u2sq = dealiased_product(u2, u2)
    re2 = -apply_symbol1(sym_U(), dealiased_product(u2sq, u1))
    vec2 = [dealiased_product(u2sq, du2[j]) for j in range(u1.grid.d)]
    part2 = re2 - 1j * _div_inv_br2(vec2)
    return part1, part2


def z_equation_residual(state_minus, state_0, state_plus, norm: str = "L2") -> float:
    """|| (z(t+h) - z(t-h)) / (2h) + i H z(t) + i N_O(u(t)) || over a centered
    triple of states; vanishes at the scheme's order along exact trajectories.
    """
    from .spectral import sym_H
    h = 0.5 * (state_plus.t - state_minus.t)
    dz = (state_plus.z - state_minus.z) * (1.0 / (2.0 * h))
    z0 = state_0.z
    resid = dz + 1j * apply_symbol1(sym_H(), z0) \
        + 1j * nonlinearity_NO(state_0.u1, state_0.u2)
    if norm == "L2":
        return l2_norm(resid.spectral())
    return h1_norm(resid)


def Z_equation_residual(state_minus, state_0, state_plus,
                        NZ_override=None) -> float:
    """Same consistency check for the derivative-friendly transform:
    || (Z(t+h) - Z(t-h)) / (2h) + i H Z(t) + i N_Z(v(t)) ||_L2.

    ``NZ_override`` substitutes the nonlinearity evaluator (used by the
    mutation fixture to confirm the residual detects a broken multiplier).
    """
    from .multilinear import nonlinearity_NZ
    from .spectral import sym_H
    h = 0.5 * (state_plus.t - state_minus.t)
    dZ = (state_plus.Z - state_minus.Z) * (1.0 / (2.0 * h))
    NZ = NZ_override or nonlinearity_NZ
    resid = dZ + 1j * apply_symbol1(sym_H(), state_0.Z) \
        + 1j * NZ(state_0.v, state_0.u1, state_0.u2)
    return l2_norm(resid.spectral())
