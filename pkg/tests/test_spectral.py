import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURE_GRID, TWO_PI_GRID, band_limited, gaussian
from freesurf import spectral as sp
from freesurf.spectral import GridSpec, RealField


# ---------------------------------------------------------------------------
# grid and field types

def test_grid_invariants():
    g = GridSpec(32, 2.5)
    assert g.dx * g.n == pytest.approx(2 * g.half_length, rel=0, abs=1e-15)
    assert g.x[0] == -2.5 and len(g.x) == 32
    assert g.xi[3] == pytest.approx(3 * np.pi / 2.5)


@pytest.mark.parametrize("n", [15, 8, 0, -4])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        GridSpec(n, 1.0)


def test_grid_rejects_bad_length():
    with pytest.raises(ValueError):
        GridSpec(16, 0.0)
    with pytest.raises(TypeError):
        GridSpec(16.0, 1.0)


def test_field_rejects_nonfinite_and_wrong_length():
    g = GridSpec(16, 1.0)
    with pytest.raises(ValueError):
        RealField(g, np.full(16, np.nan))
    with pytest.raises(ValueError):
        RealField(g, np.zeros(15))


def test_field_samples_are_read_only():
    f = RealField(GridSpec(16, 1.0), np.ones(16))
    with pytest.raises(ValueError):
        f.samples[0] = 2.0


def test_transform_round_trip_and_hermitian(rng):
    f = band_limited(GridSpec(128, 3.0), rng, 20)
    F = sp.transform(f)
    back = sp.inverse(F).samples
    assert np.max(np.abs(back - f.samples)) <= 1e-12 * np.max(np.abs(f.samples))
    full = F.full()
    n = f.grid.n
    k = np.arange(1, n // 2)
    np.testing.assert_allclose(full[n - k], np.conj(full[k]), atol=1e-15)


# ---------------------------------------------------------------------------
# derivative

def test_derivative_of_sine():
    f = RealField.from_function(TWO_PI_GRID, np.sin)
    d = sp.derivative(f, 1)
    assert np.max(np.abs(d.samples - np.cos(TWO_PI_GRID.x))) <= 1e-12


@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivative_of_constant_is_zero(order):
    f = RealField(TWO_PI_GRID, np.full(64, 5.0))
    assert np.max(np.abs(sp.derivative(f, order).samples)) <= 1e-12


def test_derivative_of_exp_cos():
    x = TWO_PI_GRID.x
    f = RealField(TWO_PI_GRID, np.exp(np.cos(x)))
    d = sp.derivative(f, 1)
    assert np.max(np.abs(d.samples + np.sin(x) * np.exp(np.cos(x)))) <= 1e-10


def test_higher_derivatives_of_sine():
    f = RealField.from_function(TWO_PI_GRID, lambda x: np.sin(2 * x))
    x = TWO_PI_GRID.x
    np.testing.assert_allclose(sp.derivative(f, 2).samples, -4 * np.sin(2 * x), atol=1e-11)
    np.testing.assert_allclose(sp.derivative(f, 3).samples, -8 * np.cos(2 * x), atol=1e-11)


@pytest.mark.parametrize("order", [0, 4, -1])
def test_derivative_rejects_order(order):
    with pytest.raises(ValueError):
        sp.derivative(RealField.zeros(TWO_PI_GRID), order)


def test_odd_derivative_drops_nyquist():
    g = GridSpec(16, np.pi)
    nyq = RealField(g, np.cos(8 * g.x))   # alternating +-1: the Nyquist mode
    assert np.max(np.abs(sp.derivative(nyq, 1).samples)) == 0.0
    assert np.max(np.abs(sp.derivative(nyq, 2).samples + 64 * nyq.samples)) <= 1e-11


@given(seed=st.integers(0, 2 ** 32 - 1), shift=st.integers(-40, 40),
       a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_derivative_linear_and_shift_equivariant(seed, shift, a, b):
    rng = np.random.default_rng(seed)
    g = GridSpec(64, 2.0)
    f, h = band_limited(g, rng, 12), band_limited(g, rng, 12)
    lhs = sp.derivative(f * a + h * b, 1).samples
    rhs = a * sp.derivative(f, 1).samples + b * sp.derivative(h, 1).samples
    scale = 1 + np.max(np.abs(rhs))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale
    d_shift = sp.derivative(f.shift(shift), 1).samples
    shift_d = np.roll(sp.derivative(f, 1).samples, shift)
    assert np.max(np.abs(d_shift - shift_d)) <= 1e-12 * scale


# ---------------------------------------------------------------------------
# Helmholtz inverse and its kernel oracle

def test_helmholtz_inverse_cos3():
    f = RealField.from_function(TWO_PI_GRID, lambda x: np.cos(3 * x))
    np.testing.assert_allclose(sp.helmholtz_inverse(f).samples, np.cos(3 * TWO_PI_GRID.x) / 10,
                               atol=1e-15)


def test_helmholtz_inverse_zero():
    assert sp.helmholtz_inverse(RealField.zeros(TWO_PI_GRID)).max_abs() == 0.0


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_helmholtz_inverts_one_minus_d2(seed):
    f = band_limited(GridSpec(64, 3.0), np.random.default_rng(seed), 16)
    back = sp.helmholtz_inverse(f - sp.derivative(f, 2))
    assert np.max(np.abs(back.samples - f.samples)) <= 1e-11


@pytest.mark.parametrize("L", [np.pi, 1.0, 7.5, 40.0])
def test_periodized_kernel_matches_image_sum(L):
    x = np.linspace(-L, L, 401)
    assert np.max(np.abs(sp.periodized_green_kernel(x, L) - sp.green_image_sum(x, L, 40))) <= 1e-12


def test_periodized_kernel_derivative_by_differences():
    L, h = 2.0, 1e-5
    x = np.array([-1.7, -0.4, 0.3, 1.2, 1.9])
    fd = (sp.periodized_green_kernel(x + h, L) - sp.periodized_green_kernel(x - h, L)) / (2 * h)
    np.testing.assert_allclose(sp.periodized_green_derivative(x, L), fd, atol=1e-9)


def test_green_convolution_of_constant():
    f = RealField(TWO_PI_GRID, np.full(64, 2.5))
    np.testing.assert_allclose(sp.green_kernel_convolution(f).samples, 2.5, atol=1e-12)


def test_green_convolution_cos3():
    f = RealField.from_function(TWO_PI_GRID, lambda x: np.cos(3 * x))
    g = sp.green_kernel_convolution(f)
    assert np.max(np.abs(g.samples - np.cos(3 * TWO_PI_GRID.x) / 10)) <= 1e-8


def test_green_convolution_of_impulse_is_kernel():
    g = GridSpec(128, 4.0)
    j = 40
    u = np.zeros(g.n)
    u[j] = 1.0 / g.dx
    out = sp.green_kernel_convolution(RealField(g, u), correction_terms=0)
    expected = sp.green_image_sum(g.x - g.x[j], g.half_length)
    assert np.max(np.abs(out.samples - expected)) <= 1e-12


def test_green_convolution_matches_multiplier_on_gaussian():
    f = gaussian(FIXTURE_GRID)
    a = sp.helmholtz_inverse(f).samples
    b = sp.green_kernel_convolution(f).samples
    assert np.max(np.abs(a - b)) <= 1e-8


def test_green_derivative_convolution_matches_multiplier(rng):
    f = band_limited(GridSpec(128, 3.0), rng, 18)
    a = sp.derivative(sp.helmholtz_inverse(f), 1).samples
    b = sp.green_derivative_convolution(f).samples
    assert np.max(np.abs(a - b)) <= 1e-8


# ---------------------------------------------------------------------------
# norms

def test_sobolev_norms_of_sine():
    f = RealField.from_function(TWO_PI_GRID, np.sin)
    assert sp.sobolev_norm(f, 0) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert sp.sobolev_norm(f, 1) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-13)


def test_sobolev_norm_rejects_negative_s():
    with pytest.raises(ValueError):
        sp.sobolev_norm(RealField.zeros(TWO_PI_GRID), -0.5)


def test_sobolev_norm_refinement_oracle():
    """Explicit DFT sums (no FFT) at twice the resolution."""
    L, n, s = 8.0, 256, 1.7
    fn = lambda x: 0.7 * np.exp(-(x / 0.9) ** 2)  # noqa: E731
    f = RealField.from_function(GridSpec(n, L), fn)
    g2 = GridSpec(2 * n, L)
    x = g2.x
    k = np.arange(-n, n)
    c = np.exp(-1j * np.pi * np.outer(k, x + L) / L) @ fn(x) / (2 * n)
    oracle = math.sqrt(float(np.sum((1 + (np.pi * k / L) ** 2) ** s * np.abs(c) ** 2)) * 2 * L)
    assert sp.sobolev_norm(f, s) == pytest.approx(oracle, rel=1e-8)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_parseval(seed):
    f = band_limited(GridSpec(64, 2.0), np.random.default_rng(seed), 20)
    trap = float(np.sum(f.samples ** 2)) * f.grid.dx
    assert sp.sobolev_norm(f, 0) ** 2 == pytest.approx(trap, rel=1e-10)


def test_energy_of_sine_and_zero():
    assert sp.energy(RealField.from_function(TWO_PI_GRID, np.sin)) == pytest.approx(math.pi, rel=1e-13)
    assert sp.energy(RealField.zeros(TWO_PI_GRID)) == 0.0


def test_energy_quadrature_oracle():
    a, w = 0.5, 1.0
    g = FIXTURE_GRID
    f = gaussian(g, a, w)
    xf = np.linspace(-g.half_length, g.half_length, 200001)
    eta = a * np.exp(-(xf / w) ** 2)
    eta_x = -2 * xf / w ** 2 * eta
    oracle = 0.5 * np.trapezoid(eta ** 2 + eta_x ** 2, xf)
    assert sp.energy(f) == pytest.approx(oracle, rel=1e-10)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_energy_is_half_h1_squared(seed):
    f = band_limited(GridSpec(32, 1.0), np.random.default_rng(seed), 10)
    assert sp.energy(f) == 0.5 * sp.sobolev_norm(f, 1) ** 2


# ---------------------------------------------------------------------------
# extremal slope

def test_extremum_of_sine():
    f = RealField.from_function(TWO_PI_GRID, np.sin)
    lo = sp.extremum_slope(f, "inf")
    hi = sp.extremum_slope(f, "sup")
    assert lo.value == pytest.approx(-1.0, abs=1e-14)
    assert abs(TWO_PI_GRID.wrap(lo.location - np.pi)) <= 1e-10
    assert hi.value == pytest.approx(1.0, abs=1e-14)
    assert abs(hi.location) <= 1e-10
    assert not lo.degenerate and not hi.degenerate


def test_extremum_degenerate_field():
    f = RealField(TWO_PI_GRID, np.full(64, 3.0))
    e = sp.extremum_slope(f, "sup")
    assert e.degenerate and e.location == TWO_PI_GRID.x[0] and e.value == 0.0


def test_extremum_dense_sampling_oracle():
    """Steep off-centre gaussian: location within dx/16 of a 64x dense argmax."""
    g = GridSpec(256, 4.0)
    a, w, c = 1.0, 0.3, 0.137
    f = gaussian(g, a, w, c)
    xd = np.linspace(-g.half_length, g.half_length, 64 * g.n, endpoint=False)
    slope = -2 * (xd - c) / w ** 2 * a * np.exp(-((xd - c) / w) ** 2)
    e = sp.extremum_slope(f, "sup")
    assert abs(e.location - xd[np.argmax(slope)]) <= g.dx / 16
    assert e.value == pytest.approx(slope.max(), rel=1e-6)


def test_extremum_prefers_nearest_on_ties():
    f = RealField.from_function(TWO_PI_GRID, lambda x: np.sin(2 * x))  # maxima of slope at 0 and +-pi
    near_zero = sp.extremum_slope(f, "sup", near=0.1)
    near_pi = sp.extremum_slope(f, "sup", near=3.0)
    assert abs(near_zero.location) < 1e-8
    assert abs(TWO_PI_GRID.wrap(near_pi.location - np.pi)) < 1e-8


@given(seed=st.integers(0, 2 ** 32 - 1), kind=st.sampled_from(["inf", "sup"]))
def test_extremum_is_critical_point(seed, kind):
    f = band_limited(GridSpec(64, 3.0), np.random.default_rng(seed), 12, decay=4.0)
    e = sp.extremum_slope(f, kind)
    fxx_max = np.max(np.abs(sp.derivative(f, 2).samples))
    assert abs(sp.interpolate(f, e.location, 2)[0]) <= 1e-6 * fxx_max
    nodes = sp.derivative(f, 1).samples
    if kind == "sup":
        assert e.value >= nodes.max() - 1e-14
    else:
        assert e.value <= nodes.min() + 1e-14
