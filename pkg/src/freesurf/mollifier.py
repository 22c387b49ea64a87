"""Mollification by the standard C_0^infinity bump, in two realisations.

``bump_convolution`` convolves the grid samples with the sampled, rescaled
bump (weights renormalised to unit discrete mass). ``spectral_cutoff``
multiplies the spectrum by the continuous Fourier transform of the bump,
which is the exact convolution of the trigonometric interpolant.

Both are Fourier multipliers on the grid, so both commute with
:func:`freesurf.spectral.derivative` up to rounding.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.integrate import quad, quad_vec

from .spectral import (
    GridSpec,
    RealField,
    derivative,
    sobolev_norm,
    to_coeffs,
    to_samples,
)

__all__ = [
    "MollifierSpec",
    "bump_normalization",
    "bump_profile",
    "bump_fourier",
    "mollify",
    "multiplier",
    "verify_mollifier_properties",
    "MollifierReport",
]

Variant = Literal["bump_convolution", "spectral_cutoff"]

_Z_lock = threading.Lock()
_Z: float | None = None


def _raw_bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


def bump_normalization() -> float:
    """``Z`` such that ``Z * exp(-1/(1-x^2))`` has unit integral (computed once)."""
    global _Z
    if _Z is None:
        with _Z_lock:
            if _Z is None:
                half, _ = quad(lambda t: math.exp(-1.0 / (1.0 - t * t)), 0.0, 1.0,
                               epsabs=1e-16, epsrel=1e-13, limit=200)
                _Z = 1.0 / (2.0 * half)
    return _Z


def bump_profile(x):
    """The normalised bump ``rho(x)``; supported in ``|x| < 1``."""
    out = bump_normalization() * _raw_bump(x)
    return out if np.ndim(x) else float(out)


_fourier_lock = threading.Lock()


@lru_cache(maxsize=64)
def _bump_fourier_cached(s_key: tuple) -> np.ndarray:
    s = np.asarray(s_key, dtype=float)
    Z = bump_normalization()
    # rho is even: rho_hat(s) = 2 int_0^1 rho(x) cos(s x) dx
    val, _ = quad_vec(lambda x: 2.0 * Z * _raw_bump(x) * np.cos(s * x), 0.0, 1.0,
                      epsabs=1e-15, epsrel=1e-13, limit=2000)
    val = np.asarray(val, dtype=float)
    val.flags.writeable = False
    return val


def bump_fourier(s) -> np.ndarray:
    """``rho_hat(s) = int rho(x) exp(-i s x) dx`` (real, even), by adaptive quadrature."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    with _fourier_lock:
        return _bump_fourier_cached(tuple(s.tolist()))


@dataclass(frozen=True)
class MollifierSpec:
    epsilon: float
    variant: Variant = "bump_convolution"

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.variant not in ("bump_convolution", "spectral_cutoff"):
            raise ValueError(f"unknown mollifier variant {self.variant!r}")

    def check_grid(self, grid: GridSpec) -> None:
        if self.variant == "bump_convolution" and self.epsilon < 4 * grid.dx * (1 - 1e-12):
            raise ValueError(
                f"bump support under-resolved: epsilon={self.epsilon} < 4*dx={4 * grid.dx}"
            )


@lru_cache(maxsize=128)
def _multiplier(grid: GridSpec, spec: MollifierSpec) -> np.ndarray:
    if spec.variant == "spectral_cutoff":
        m = bump_fourier(spec.epsilon * grid.xi).copy()
    else:
        # discrete kernel on the circle, unit discrete mass
        offs = grid.dx * np.arange(grid.n)
        offs = np.minimum(offs, grid.period - offs)
        w = bump_profile(offs / spec.epsilon)
        w /= w.sum()
        m = np.fft.rfft(w).real
    m.flags.writeable = False
    return m


def multiplier(grid: GridSpec, spec: MollifierSpec) -> np.ndarray:
    """Half-spectrum multiplier realising ``J_eps`` on ``grid``."""
    spec.check_grid(grid)
    return _multiplier(grid, spec)


def mollify(f: RealField, spec: MollifierSpec) -> RealField:
    g = f.grid
    return RealField(g, to_samples(to_coeffs(f.samples) * multiplier(g, spec), g.n))


def _fit_order(eps, errs) -> float:
    eps = np.asarray(eps, dtype=float)
    errs = np.asarray(errs, dtype=float)
    slope, _ = np.polyfit(np.log(eps), np.log(errs), 1)
    return float(slope)


@dataclass
class MollifierReport:
    linf_ratio: float
    commutation_defect: float
    convergence_eps: list
    convergence_errors: list
    convergence_order: float
    growth_exponents: dict
    commutation_tol: float
    passed: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


DEFAULT_LADDER = (0.4, 0.2, 0.1, 0.05)


def verify_mollifier_properties(
    f: RealField,
    spec: MollifierSpec,
    m: int = 2,
    ladder=DEFAULT_LADDER,
    ks=(1, 2),
) -> MollifierReport:
    """Measure the classical mollifier properties on ``f``.

    (ii) L-infinity non-expansion, (iii) commutation with d/dx,
    (iv) H^{m-1} convergence order over the epsilon ladder,
    (v) growth exponent of ``||J_eps f||_{H^{m+k}}`` in ``1/eps``.
    """
    g = f.grid
    Jf = mollify(f, spec)
    ratio = Jf.max_abs() / f.max_abs() if f.max_abs() > 0 else 1.0

    fx = derivative(f, 1)
    defect = float(np.max(np.abs(derivative(Jf, 1).samples - mollify(fx, spec).samples)))
    if spec.variant == "spectral_cutoff":
        comm_tol = 1e-12
    else:
        comm_tol = spec.epsilon ** 2 * fx.max_abs()

    specs = [MollifierSpec(e, spec.variant) for e in ladder]
    errs = [sobolev_norm(mollify(f, s) - f, m - 1) for s in specs]
    order = _fit_order(ladder, errs)

    growth = {}
    for k in ks:
        norms = [sobolev_norm(mollify(f, s), m + k) for s in specs]
        growth[k] = _fit_order(1.0 / np.asarray(ladder), norms)

    passed = {
        "ii_linf_nonexpansion": bool(ratio <= 1 + 1e-10),
        "iii_commutation": bool(defect <= comm_tol),
        "iv_convergence_order": bool(0.9 <= order <= 1.3),
        "v_growth_exponent": bool(all(growth[k] <= k + 0.3 for k in ks)),
    }
    return MollifierReport(
        linf_ratio=float(ratio),
        commutation_defect=defect,
        convergence_eps=list(ladder),
        convergence_errors=[float(e) for e in errs],
        convergence_order=order,
        growth_exponents=growth,
        commutation_tol=float(comm_tol),
        passed=passed,
    )
