"""Fourier pseudospectral machinery on the periodic box [-L, L).

Conventions
-----------
Nodes are ``x_j = -L + j*dx`` with ``dx = 2L/n``. Coefficients are the
mean-normalised half spectrum ``c_k = rfft(f)[k] / n`` for ``k = 0..n/2``
with physical wavenumber ``xi_k = pi*k/L``, so that Parseval reads

    int |f|^2 dx = 2L * sum_{k in Z_n} |c_k|^2 .

Everything here is a pure function of its inputs. Per-grid wavenumber
tables are cached; the cache is keyed on the frozen :class:`GridSpec`.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal, NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import bernoulli, comb

__all__ = [
    "GridSpec",
    "RealField",
    "SpectralField",
    "transform",
    "inverse",
    "derivative",
    "helmholtz_inverse",
    "periodized_green_kernel",
    "green_image_sum",
    "green_kernel_convolution",
    "green_derivative_convolution",
    "sobolev_norm",
    "energy",
    "extremum_slope",
    "Extremum",
    "interpolate",
]


@dataclass(frozen=True)
class GridSpec:
    """Equispaced periodic grid on ``[-half_length, half_length)``."""

    n: int
    half_length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError(f"n must be an integer, got {self.n!r}")
        if self.n < 16 or self.n % 2:
            raise ValueError(f"n must be even and >= 16, got {self.n}")
        if not (math.isfinite(self.half_length) and self.half_length > 0):
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n

    @property
    def period(self) -> float:
        return 2.0 * self.half_length

    @property
    def x(self) -> np.ndarray:
        return _nodes(self)

    @property
    def xi(self) -> np.ndarray:
        """Physical wavenumbers of the half spectrum, ``pi*k/L``."""
        return _wavenumbers(self)

    def wrap(self, x):
        """Map positions into ``[-L, L)``."""
        L = self.half_length
        return np.mod(np.asarray(x, dtype=float) + L, 2.0 * L) - L


@lru_cache(maxsize=64)
def _nodes(grid: GridSpec) -> np.ndarray:
    x = -grid.half_length + grid.dx * np.arange(grid.n)
    x.flags.writeable = False
    return x


@lru_cache(maxsize=64)
def _wavenumbers(grid: GridSpec) -> np.ndarray:
    xi = np.pi * np.arange(grid.n // 2 + 1) / grid.half_length
    xi.flags.writeable = False
    return xi


@lru_cache(maxsize=128)
def _derivative_symbol(grid: GridSpec, order: int) -> np.ndarray:
    sym = (1j * _wavenumbers(grid)) ** order
    if order % 2:
        sym[-1] = 0.0
    sym.flags.writeable = False
    return sym


@lru_cache(maxsize=64)
def _helmholtz_symbol(grid: GridSpec) -> np.ndarray:
    sym = 1.0 / (1.0 + _wavenumbers(grid) ** 2)
    sym.flags.writeable = False
    return sym


@lru_cache(maxsize=64)
def _mode_weights(grid: GridSpec) -> np.ndarray:
    # multiplicity of each half-spectrum entry in the full spectrum
    w = np.full(grid.n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    w.flags.writeable = False
    return w


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class RealField:
    """Samples of a real function at the grid nodes."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "samples", _frozen(s))

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[[np.ndarray], np.ndarray]) -> "RealField":
        return cls(grid, np.broadcast_to(fn(grid.x), (grid.n,)))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "RealField":
        return cls(grid, np.zeros(grid.n))

    def __add__(self, other):
        if isinstance(other, RealField):
            _same_grid(self, other)
            return RealField(self.grid, self.samples + other.samples)
        return RealField(self.grid, self.samples + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, RealField):
            _same_grid(self, other)
            return RealField(self.grid, self.samples - other.samples)
        return RealField(self.grid, self.samples - other)

    def __mul__(self, a):
        if isinstance(a, RealField):
            _same_grid(self, a)
            return RealField(self.grid, self.samples * a.samples)
        return RealField(self.grid, self.samples * a)

    __rmul__ = __mul__

    def __neg__(self):
        return RealField(self.grid, -self.samples)

    def shift(self, nodes: int) -> "RealField":
        """Circular shift by a whole number of nodes."""
        return RealField(self.grid, np.roll(self.samples, nodes))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def integral(self) -> float:
        return float(np.sum(self.samples) * self.grid.dx)


def _same_grid(a: RealField, b: RealField):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Mean-normalised half spectrum of a real field (Hermitian symmetry implied)."""

    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (self.grid.n // 2 + 1,):
            raise ValueError(f"expected {self.grid.n // 2 + 1} coefficients, got {c.shape}")
        object.__setattr__(self, "coefficients", _frozen(c))

    def full(self) -> np.ndarray:
        """All ``n`` coefficients in FFT order, built from the Hermitian half."""
        c = self.coefficients
        n = self.grid.n
        out = np.empty(n, dtype=complex)
        out[: n // 2 + 1] = c
        out[n // 2 + 1:] = np.conj(c[1: n // 2][::-1])
        return out


# ---------------------------------------------------------------------------
# array-level kernels (used by the hot loops in dynamics/integrator)

def to_coeffs(samples: np.ndarray) -> np.ndarray:
    return np.fft.rfft(samples) / samples.shape[-1]


def to_samples(coeffs: np.ndarray, n: int) -> np.ndarray:
    return np.fft.irfft(coeffs * n, n)


def transform(f: RealField) -> SpectralField:
    return SpectralField(f.grid, to_coeffs(f.samples))


def inverse(F: SpectralField) -> RealField:
    return RealField(F.grid, to_samples(F.coefficients, F.grid.n))


def derivative(f: RealField, order: int = 1) -> RealField:
    """Spectral derivative of order 1, 2 or 3 (Nyquist dropped for odd orders)."""
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order!r}")
    g = f.grid
    return RealField(g, to_samples(to_coeffs(f.samples) * _derivative_symbol(g, order), g.n))


def helmholtz_inverse(f: RealField) -> RealField:
    """Apply ``(1 - d^2/dx^2)^{-1}`` as the multiplier ``1/(1 + xi^2)``."""
    g = f.grid
    return RealField(g, to_samples(to_coeffs(f.samples) * _helmholtz_symbol(g), g.n))


def sobolev_norm(f: RealField, s: float) -> float:
    """Discrete H^s norm, ``sum_k (1+xi_k^2)^s |c_k|^2 * 2L`` over the full spectrum."""
    if not s >= 0:
        raise ValueError(f"s must be >= 0, got {s}")
    g = f.grid
    c = to_coeffs(f.samples)
    weight = _mode_weights(g) * (1.0 + _wavenumbers(g) ** 2) ** s
    return math.sqrt(float(np.sum(weight * (c.real ** 2 + c.imag ** 2))) * g.period)


def energy(f: RealField) -> float:
    """Conserved energy ``1/2 int (f^2 + f_x^2) dx``."""
    return 0.5 * sobolev_norm(f, 1.0) ** 2


# ---------------------------------------------------------------------------
# trigonometric interpolation

def _interp_coeffs(coeffs: np.ndarray, order: int, grid: GridSpec) -> np.ndarray:
    c = coeffs * _mode_weights(grid)
    if order:
        c = c * (1j * _wavenumbers(grid)) ** order
    return c


def eval_trig(coeffs: np.ndarray, grid: GridSpec, x, order: int = 0) -> np.ndarray:
    """Evaluate the ``order``-th derivative of the trigonometric interpolant at ``x``.

    ``coeffs`` is a mean-normalised half spectrum. The Nyquist mode is taken
    as a pure cosine so that the interpolant is real.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c = _interp_coeffs(coeffs, order, grid)
    phase = np.outer(x + grid.half_length, _wavenumbers(grid))
    return np.real(np.exp(1j * phase) @ c)


def interpolate(f: RealField, x, order: int = 0) -> np.ndarray:
    """Trigonometric interpolant of ``f`` (or its derivative) at arbitrary points."""
    return eval_trig(to_coeffs(f.samples), f.grid, x, order)


# ---------------------------------------------------------------------------
# extremal slope

class Extremum(NamedTuple):
    value: float
    location: float
    degenerate: bool = False


def extremum_slope(
    f: RealField,
    kind: Literal["inf", "sup"] = "sup",
    near: float | None = None,
    tie_tol: float = 1e-9,
) -> Extremum:
    """Global extremum of ``f_x`` and its location, refined off the grid.

    The best node is refined by Newton iteration on ``f_xx = 0`` using the
    trigonometric interpolant, bracketed to the two neighbouring cells.
    If several nodes tie within ``tie_tol`` the one closest to ``near``
    (periodically) is used.
    """
    if kind not in ("inf", "sup"):
        raise ValueError(f"kind must be 'inf' or 'sup', got {kind!r}")
    g = f.grid
    c = to_coeffs(f.samples)
    slope = to_samples(c * _derivative_symbol(g, 1), g.n)
    sign = 1.0 if kind == "sup" else -1.0
    s = sign * slope
    spread = float(np.max(s) - np.min(s))
    scale = max(float(np.max(np.abs(slope))), 1.0)
    if spread <= 1e-13 * scale:
        return Extremum(float(slope[0]), float(g.x[0]), True)

    best = float(np.max(s))
    candidates = np.flatnonzero(s >= best - tie_tol * scale)
    if near is not None and candidates.size > 1:
        d = np.abs(g.wrap(g.x[candidates] - near))
        j = int(candidates[np.argmin(d)])
    else:
        j = int(candidates[0])

    x0 = float(g.x[j])
    lo, hi = x0 - g.dx, x0 + g.dx
    c2 = _interp_coeffs(c, 2, g)
    c3 = _interp_coeffs(c, 3, g)
    k = _wavenumbers(g)

    def d2(x):
        return float(np.real(np.exp(1j * (x + g.half_length) * k) @ c2))

    def d3(x):
        return float(np.real(np.exp(1j * (x + g.half_length) * k) @ c3))

    xi = x0
    for _ in range(8):
        h3 = d3(xi)
        if h3 == 0.0:
            break
        step = d2(xi) / h3
        nxt = xi - step
        if not lo <= nxt <= hi:
            nxt = _bracketed_root(d2, lo, hi, x0)
            xi = nxt
            break
        xi = nxt
        if abs(step) <= 1e-15 * max(1.0, abs(xi)):
            break
    value = float(eval_trig(c, g, xi, order=1)[0])
    # never report something worse than the best node
    if sign * value < sign * slope[j]:
        xi, value = x0, float(slope[j])
    return Extremum(value, float(g.wrap(xi)), False)


def _bracketed_root(fn, lo, hi, fallback):
    a, b = fn(lo), fn(hi)
    if a == 0.0:
        return lo
    if b == 0.0:
        return hi
    if a * b > 0:
        return fallback
    return brentq(fn, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


# ---------------------------------------------------------------------------
# periodised Green kernel (independent O(n^2) route for the Helmholtz inverse)

def periodized_green_kernel(x, half_length: float) -> np.ndarray:
    """``sum_m 1/2 exp(-|x - 2Lm|)`` in closed form, ``cosh(L-|x|)/(2 sinh L)``."""
    L = float(half_length)
    r = np.abs(np.mod(np.asarray(x, dtype=float) + L, 2 * L) - L)
    # cosh(L-r)/(2 sinh L) rewritten to avoid overflow for large L
    return 0.5 * (np.exp(-r) + np.exp(r - 2 * L)) / (1.0 - np.exp(-2 * L))


def periodized_green_derivative(x, half_length: float) -> np.ndarray:
    """Derivative of :func:`periodized_green_kernel`; zero at the kink by symmetry."""
    L = float(half_length)
    y = np.mod(np.asarray(x, dtype=float) + L, 2 * L) - L
    r = np.abs(y)
    mag = 0.5 * (np.exp(-r) - np.exp(r - 2 * L)) / (1.0 - np.exp(-2 * L))
    return -np.sign(y) * mag


def green_image_sum(x, half_length: float, images: int = 40) -> np.ndarray:
    """Truncated image sum of ``1/2 exp(-|x|)`` over ``|m| <= images``."""
    x = np.asarray(x, dtype=float)
    m = np.arange(-images, images + 1)
    return 0.5 * np.exp(-np.abs(x[..., None] - 2 * half_length * m)).sum(axis=-1)


_fd_lock = threading.Lock()
_fd_cache: dict[tuple[int, int], np.ndarray] = {}


def _fd_weights(max_order: int, halfwidth: int) -> np.ndarray:
    """Central finite-difference weights (rows: derivative order) on ``-p..p``."""
    key = (max_order, halfwidth)
    w = _fd_cache.get(key)
    if w is not None:
        return w
    with _fd_lock:
        w = _fd_cache.get(key)
        if w is None:
            from sympy import Integer
            from sympy.calculus.finite_diff import finite_diff_weights

            pts = [Integer(i) for i in range(-halfwidth, halfwidth + 1)]
            table = finite_diff_weights(max_order, pts, 0)
            w = np.array([[float(v) for v in table[d][-1]] for d in range(max_order + 1)])
            w.flags.writeable = False
            _fd_cache[key] = w
    return w


def _kink_corrected_convolution(
    samples: np.ndarray,
    grid: GridSpec,
    kernel_open: Callable[[np.ndarray], np.ndarray],
    endpoint_value: float,
    jumps: Callable[[int], float],
    terms: int,
    halfwidth: int,
) -> np.ndarray:
    """Periodic trapezoidal convolution with Euler-Maclaurin kink corrections.

    For node ``x_i`` the integral is taken over ``u in [0, 2L]`` with
    integrand ``K(u) f(x_i + u)``. ``K`` is smooth on the open interval;
    ``jumps(i) = K^(i)(2L-) - K^(i)(0+)``. The derivatives of ``f`` needed
    by the end corrections come from wide central finite differences, so
    nothing here touches the FFT.
    """
    n = grid.n
    dx = grid.dx
    u = dx * np.arange(1, n)
    kvals = np.empty(n)
    kvals[0] = endpoint_value
    kvals[1:] = kernel_open(u)
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    out = dx * (samples[idx] @ kvals)
    if terms <= 0:
        return out

    max_d = 2 * terms - 1
    if 2 * halfwidth + 1 > n:
        raise ValueError("finite-difference stencil wider than the grid")
    W = _fd_weights(max_d, halfwidth)
    offs = np.arange(-halfwidth, halfwidth + 1)
    window = samples[(np.arange(n)[:, None] + offs[None, :]) % n]
    derivs = window @ W.T / dx ** np.arange(max_d + 1)  # (n, max_d+1)

    B = bernoulli(2 * terms)
    corr = np.zeros(n)
    for k in range(1, terms + 1):
        acc = np.zeros(n)
        for i in range(0, 2 * k):
            J = jumps(i)
            if J:
                acc += comb(2 * k - 1, i, exact=True) * J * derivs[:, 2 * k - 1 - i]
        corr += B[2 * k] * dx ** (2 * k) / math.factorial(2 * k) * acc
    return out - corr


def green_kernel_convolution(
    f: RealField, correction_terms: int = 8, stencil_halfwidth: int = 10
) -> RealField:
    """``g_P * f`` by direct quadrature against the periodised kernel.

    ``correction_terms=0`` gives the plain periodic trapezoidal sum, which is
    only second-order accurate because of the kernel's kink at the origin.
    """
    g = f.grid
    L = g.half_length

    def kernel(u):
        return periodized_green_kernel(u, L)

    out = _kink_corrected_convolution(
        f.samples, g, kernel, float(periodized_green_kernel(0.0, L)),
        lambda i: 1.0 if i % 2 else 0.0, correction_terms, stencil_halfwidth,
    )
    return RealField(g, out)


def green_derivative_convolution(
    f: RealField, correction_terms: int = 8, stencil_halfwidth: int = 10
) -> RealField:
    """``g_P' * f`` by direct quadrature (the kernel jumps by -1 at the origin)."""
    g = f.grid
    L = g.half_length

    def kernel(u):
        # g_P'(-u) on (0, 2L): sinh(L-u)/(2 sinh L)
        return -periodized_green_derivative(u, L)

    out = _kink_corrected_convolution(
        f.samples, g, kernel, 0.0,
        lambda i: -1.0 if i % 2 == 0 else 0.0, correction_terms, stencil_halfwidth,
    )
    return RealField(g, out)
