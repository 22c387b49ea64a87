"""Right-hand sides of the free-surface equation in nonlocal form.

    eta_t = eta_x + 7/2 eta eta_x
            + (1 - d_x^2)^{-1} d_x ( -2 eta - 5/2 eta^2 + 7/4 eta_x^2
                                     + 1/8 eta^3 - 3/64 eta^4 )

All pointwise products are formed on a 3x zero-padded grid and truncated
back, which removes aliasing for every product that appears (up to
quartic). The fixed coefficients live in :data:`COEFFS` and are shared by
the right-hand side and the f-functional; the third-order residual uses
the coefficients of the third-order form itself so that it is a real check.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal

import numpy as np

from . import spectral as sp
from .mollifier import MollifierSpec, multiplier
from .spectral import GridSpec, RealField

__all__ = [
    "COEFFS",
    "FamilyCoefficients",
    "family_coefficients",
    "RhsVariant",
    "NumericalBreakdown",
    "rhs",
    "rhs_mollified",
    "rhs_array",
    "linear_rhs",
    "third_order_residual",
    "f_functional",
    "omitted_slope_term",
]

COEFFS: dict[str, Fraction] = {
    "transport": Fraction(7, 2),   # eta eta_x
    "linear": Fraction(-2),        # eta inside the bracket
    "quadratic": Fraction(-5, 2),  # eta^2
    "slope_sq": Fraction(7, 4),    # eta_x^2
    "cubic": Fraction(1, 8),       # eta^3
    "quartic": Fraction(-3, 64),   # eta^4
}

_C = {k: float(v) for k, v in COEFFS.items()}


class NumericalBreakdown(FloatingPointError):
    """A right-hand side evaluation produced non-finite values."""


@dataclass(frozen=True)
class FamilyCoefficients:
    q: Fraction
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    delta: Fraction
    mu: Fraction
    eps_amp: Fraction

    @property
    def third_order(self) -> dict[str, Fraction]:
        """Coefficients of eta_xxx, eta_xxt, eta eta_xxx and eta_x eta_xx."""
        return {
            "eta_xxx": self.mu * self.alpha,
            "eta_xxt": self.mu * self.beta,
            "eta_eta_xxx": self.eps_amp * self.mu * self.gamma,
            "etax_etaxx": self.eps_amp * self.mu * self.delta,
        }


def family_coefficients(q, mu=12, eps_amp=1) -> FamilyCoefficients:
    """The one-parameter family consistent with the Green-Naghdi equations."""
    q = Fraction(q)
    return FamilyCoefficients(
        q=q,
        alpha=q,
        beta=q - Fraction(1, 6),
        gamma=-Fraction(3, 2) * q - Fraction(1, 6),
        delta=-Fraction(9, 2) * q - Fraction(5, 24),
        mu=Fraction(mu),
        eps_amp=Fraction(eps_amp),
    )


@dataclass(frozen=True)
class RhsVariant:
    kind: Literal["nonlocal_exact", "mollified_A", "mollified_B"] = "nonlocal_exact"
    mollifier: MollifierSpec | None = None

    def __post_init__(self):
        if self.kind not in ("nonlocal_exact", "mollified_A", "mollified_B"):
            raise ValueError(f"unknown rhs kind {self.kind!r}")
        if (self.kind == "nonlocal_exact") != (self.mollifier is None):
            raise ValueError("mollifier must be given iff kind is mollified_A/mollified_B")


EXACT = RhsVariant()

# the member of the family that the nonlocal form rewrites
THIRD_ORDER_FAMILY = family_coefficients(Fraction(1, 12), mu=12, eps_amp=1)


# ---------------------------------------------------------------------------
# padded products

class _Ops:
    """Per-grid symbols and padding geometry."""

    def __init__(self, grid: GridSpec):
        self.n = grid.n
        self.N = 3 * grid.n
        self.half = grid.n // 2
        xi = grid.xi
        self.ik = 1j * xi
        self.ik_odd = self.ik.copy()
        self.ik_odd[-1] = 0.0
        self.k2 = -xi ** 2
        self.helm = 1.0 / (1.0 + xi ** 2)
        self.dhelm = self.ik_odd * self.helm

    def pad(self, c: np.ndarray) -> np.ndarray:
        cp = np.zeros(self.N // 2 + 1, dtype=complex)
        cp[: self.half + 1] = c
        cp[self.half] *= 0.5
        return np.fft.irfft(cp * self.N, self.N)

    def trunc(self, v: np.ndarray) -> np.ndarray:
        cp = np.fft.rfft(v) / self.N
        c = cp[: self.half + 1].copy()
        c[self.half] = 2.0 * c[self.half].real
        return c


@lru_cache(maxsize=32)
def _ops(grid: GridSpec) -> _Ops:
    return _Ops(grid)


def _bracket_hat(ops: _Ops, c: np.ndarray, u: np.ndarray, ux: np.ndarray, J=None) -> np.ndarray:
    """Spectrum of -2 eta - 5/2 eta^2 + 7/4 eta_x^2 + 1/8 eta^3 - 3/64 eta^4.

    With ``J`` given every term is mollified individually.
    """
    u2 = u * u
    nonlin = ops.trunc(_C["quadratic"] * u2 + _C["slope_sq"] * ux * ux
                       + _C["cubic"] * u2 * u + _C["quartic"] * u2 * u2)
    b = _C["linear"] * c + nonlin
    return b * J if J is not None else b


def _check(v: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(v)):
        raise NumericalBreakdown("non-finite values in right-hand side")
    return v


def rhs_coeffs(c: np.ndarray, grid: GridSpec, variant: RhsVariant = EXACT) -> np.ndarray:
    """Right-hand side in coefficient space (mean-normalised half spectrum)."""
    ops = _ops(grid)
    if variant.kind == "nonlocal_exact":
        u = ops.pad(c)
        ux = ops.pad(c * ops.ik_odd)
        out = (c * ops.ik_odd
               + 0.5 * _C["transport"] * ops.ik_odd * ops.trunc(u * u)
               + ops.dhelm * _bracket_hat(ops, c, u, ux))
        return _check(out)

    J = multiplier(grid, variant.mollifier)
    Jc = c * J
    Jcx = Jc * ops.ik_odd
    transport = ops.trunc(ops.pad(Jc) * ops.pad(Jcx))
    u = ops.pad(c)
    ux = ops.pad(c * ops.ik_odd)
    nonlocal_part = J * ops.dhelm * _bracket_hat(ops, c, u, ux, J)
    if variant.kind == "mollified_A":
        out = Jcx + _C["transport"] * transport + nonlocal_part
    else:
        out = c * ops.ik_odd + _C["transport"] * J * transport + nonlocal_part
    return _check(out)


def rhs_array(samples: np.ndarray, grid: GridSpec, variant: RhsVariant = EXACT) -> np.ndarray:
    return sp.to_samples(rhs_coeffs(sp.to_coeffs(samples), grid, variant), grid.n)


def rhs(eta: RealField) -> RealField:
    """Time derivative of eta for the nonlocal Cauchy problem."""
    return RealField(eta.grid, rhs_array(eta.samples, eta.grid))


def rhs_mollified(eta: RealField, variant: RhsVariant) -> RealField:
    """Right-hand side of a mollified approximate system.

    ``mollified_A`` mollifies every occurrence of eta as written in the
    approximate system; ``mollified_B`` is its ODE-system form with a bare
    ``eta_x`` and an outer mollifier on the transport product.
    """
    if variant.kind == "nonlocal_exact":
        return rhs(eta)
    return RealField(eta.grid, rhs_array(eta.samples, eta.grid, variant))


def linear_rhs(eta: RealField) -> RealField:
    """Linearisation about zero: symbol ``i xi (xi^2 - 1)/(xi^2 + 1)``."""
    g = eta.grid
    ops = _ops(g)
    c = sp.to_coeffs(eta.samples)
    return RealField(g, sp.to_samples(c * ops.ik_odd + _C["linear"] * ops.dhelm * c, g.n))


def third_order_residual(eta: RealField) -> RealField:
    """Residual of the third-order form with eta_t taken from :func:`rhs`.

        eta_t + eta_x + 3/2 eta eta_x - 3/8 eta^2 eta_x + 3/16 eta^3 eta_x
        + eta_xxx - eta_xxt + 7/2 eta eta_xxx + 7 eta_x eta_xx

    The dispersive and cross-derivative coefficients come from
    :func:`family_coefficients` at q = 1/12, mu = 12, unit amplitude, not
    from :data:`COEFFS`; ``eta_xxt`` is d_x^2 of the nonlocal rhs.
    """
    g = eta.grid
    ops = _ops(g)
    fam = THIRD_ORDER_FAMILY.third_order
    c = sp.to_coeffs(eta.samples)
    ct = rhs_coeffs(c, g)
    cx = c * ops.ik_odd
    cxx = c * ops.k2
    cxxx = cxx * ops.ik_odd
    u, ux, uxx, uxxx = ops.pad(c), ops.pad(cx), ops.pad(cxx), ops.pad(cxxx)
    u2 = u * u
    prod = ops.trunc(
        1.5 * u * ux - 0.375 * u2 * ux + 0.1875 * u2 * u * ux
        - float(fam["eta_eta_xxx"]) * u * uxxx
        - float(fam["etax_etaxx"]) * ux * uxx
    )
    res = (ct + cx + prod + float(fam["eta_xxx"]) * cxxx
           + float(fam["eta_xxt"]) * ops.k2 * ct)
    return RealField(g, sp.to_samples(res, g.n))


def f_functional(eta: RealField) -> RealField:
    """The nonlocal forcing of the slope equation,

        f = -2 g_x*eta_x - 5 g_x*(eta eta_x) + 3/8 g_x*(eta^2 eta_x)
            - 3/16 g_x*(eta^3 eta_x),

    with ``g_x*`` realised as ``d_x (1 - d_x^2)^{-1}``.
    """
    g = eta.grid
    ops = _ops(g)
    c = sp.to_coeffs(eta.samples)
    u = ops.pad(c)
    ux = ops.pad(c * ops.ik_odd)
    u2 = u * u
    h = (_C["linear"] * c * ops.ik_odd
         + ops.trunc(2 * _C["quadratic"] * u * ux
                     + 3 * _C["cubic"] * u2 * ux
                     + 4 * _C["quartic"] * u2 * u * ux))
    return RealField(g, sp.to_samples(ops.dhelm * h, g.n))


def omitted_slope_term(eta: RealField) -> RealField:
    """``7/2 g_x*(eta_x eta_xx)``, the convolution term of d/dx(rhs) left out of f.

    Equals ``7/4 (G(eta_x^2) - eta_x^2)`` with ``G = (1 - d^2)^{-1}``.
    """
    g = eta.grid
    ops = _ops(g)
    c = sp.to_coeffs(eta.samples)
    ux = ops.pad(c * ops.ik_odd)
    uxx = ops.pad(c * ops.k2)
    h = ops.trunc(2 * _C["slope_sq"] * ux * uxx)
    return RealField(g, sp.to_samples(ops.dhelm * h, g.n))
