import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import TWO_PI_GRID, band_limited, gaussian
from freesurf import spectral as sp
from freesurf.mollifier import (
    MollifierSpec,
    bump_fourier,
    bump_normalization,
    bump_profile,
    mollify,
    verify_mollifier_properties,
)
from freesurf.spectral import GridSpec, RealField

FINE = GridSpec(2048, 8.0)   # 4 dx = 0.0156 admits the whole 0.4..0.05 ladder


def test_bump_support():
    assert bump_profile(1.0) == 0.0 and bump_profile(-1.0) == 0.0
    assert np.all(bump_profile(np.array([1.01, -3.0, 7.5])) == 0.0)
    assert bump_profile(0.0) > 0


def test_bump_normalisation_against_mpmath():
    mpmath.mp.dps = 30
    half = mpmath.quad(lambda t: mpmath.exp(-1 / (1 - t * t)), [0, 0.5, 0.9, 1])
    assert bump_normalization() == pytest.approx(float(1 / (2 * half)), rel=1e-13)


def test_bump_has_unit_mass():
    mpmath.mp.dps = 30
    Z = bump_normalization()
    mass = mpmath.quad(lambda t: Z * mpmath.exp(-1 / (1 - t * t)), [-1, 0, 1])
    assert abs(float(mass) - 1.0) <= 1e-12


def test_bump_fourier_values():
    mpmath.mp.dps = 25
    Z = bump_normalization()
    for s in (0.0, 1.3, 7.0):
        ref = mpmath.quad(lambda t: 2 * Z * mpmath.exp(-1 / (1 - t * t)) * mpmath.cos(s * t), [0, 1])
        assert bump_fourier(s)[0] == pytest.approx(float(ref), abs=1e-13)


@pytest.mark.parametrize("variant", ["bump_convolution", "spectral_cutoff"])
def test_mollify_preserves_constants(variant):
    g = GridSpec(256, np.pi)
    f = RealField(g, np.full(g.n, -1.75))
    np.testing.assert_allclose(mollify(f, MollifierSpec(0.2, variant)).samples, -1.75, atol=1e-12)


def test_bump_rejected_when_under_resolved():
    with pytest.raises(ValueError, match="under-resolved"):
        mollify(RealField.zeros(TWO_PI_GRID), MollifierSpec(0.2))
    # the spectral realisation has no such restriction
    mollify(RealField.zeros(TWO_PI_GRID), MollifierSpec(0.2, "spectral_cutoff"))


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_spec_rejects_bad_epsilon(bad):
    with pytest.raises(ValueError):
        MollifierSpec(bad)


def test_spec_rejects_unknown_variant():
    with pytest.raises(ValueError):
        MollifierSpec(0.1, "gaussian")


def test_spectral_cutoff_commutes_with_derivative():
    f = gaussian(FINE, 1.0, 0.7)
    spec = MollifierSpec(0.1, "spectral_cutoff")
    a = sp.derivative(mollify(f, spec), 1).samples
    b = mollify(sp.derivative(f, 1), spec).samples
    assert np.max(np.abs(a - b)) <= 1e-12


def test_bump_is_a_trapezoidal_convolution():
    g = GridSpec(256, np.pi)
    eps = 0.3
    f = band_limited(g, np.random.default_rng(1), 10)
    offs = g.wrap(g.x - g.x[0])
    w = bump_profile(offs / eps)
    w /= w.sum()
    direct = np.array([np.dot(np.roll(f.samples, -i), w[(-np.arange(g.n)) % g.n]) for i in range(g.n)])
    np.testing.assert_allclose(mollify(f, MollifierSpec(eps)).samples, direct, atol=1e-13)


def test_sine_convergence_rate():
    g = GridSpec(1024, np.pi)
    f = RealField.from_function(g, np.sin)
    eps = [0.4, 0.2, 0.1, 0.05]
    errs = [(mollify(f, MollifierSpec(e)) - f).max_abs() for e in eps]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    order = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    assert order >= 0.9


@given(seed=st.integers(0, 2 ** 32 - 1), variant=st.sampled_from(["bump_convolution", "spectral_cutoff"]))
def test_mean_preserved(seed, variant):
    g = GridSpec(128, np.pi)
    f = band_limited(g, np.random.default_rng(seed), 20)
    m = mollify(f, MollifierSpec(0.25, variant))
    assert abs(m.mean() - f.mean()) <= 1e-12 * (1 + abs(f.mean()))


@given(seed=st.integers(0, 2 ** 32 - 1), a=st.floats(-5, 5), b=st.floats(-5, 5),
       variant=st.sampled_from(["bump_convolution", "spectral_cutoff"]))
def test_linearity(seed, a, b, variant):
    g = GridSpec(128, np.pi)
    rng = np.random.default_rng(seed)
    f, h = band_limited(g, rng, 20), band_limited(g, rng, 20)
    spec = MollifierSpec(0.25, variant)
    lhs = mollify(f * a + h * b, spec).samples
    rhs = a * mollify(f, spec).samples + b * mollify(h, spec).samples
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(rhs)))


@given(seed=st.integers(0, 2 ** 32 - 1),
       e1=st.floats(0.01, 0.4), e2=st.floats(0.01, 0.4))
def test_spectral_cutoff_error_monotone_in_epsilon(seed, e1, e2):
    # modes |k| <= 5 on [-pi, pi): eps*xi stays below 2, where rho_hat decreases
    g = GridSpec(64, np.pi)
    f = band_limited(g, np.random.default_rng(seed), 5)
    lo, hi = sorted((e1, e2))
    d_lo = sp.sobolev_norm(mollify(f, MollifierSpec(lo, "spectral_cutoff")) - f, 0)
    d_hi = sp.sobolev_norm(mollify(f, MollifierSpec(hi, "spectral_cutoff")) - f, 0)
    assert d_lo <= d_hi * (1 + 1e-12) + 1e-15


def test_property_suite_on_sine_bump():
    g = GridSpec(1024, np.pi)
    rep = verify_mollifier_properties(RealField.from_function(g, np.sin), MollifierSpec(0.1))
    assert rep.linf_ratio <= 1 + 1e-10
    assert rep.passed["ii_linf_nonexpansion"]
    assert rep.passed["iii_commutation"]


def test_property_suite_spectral_commutation_and_growth():
    rep = verify_mollifier_properties(gaussian(FINE, 1.0, 1.0), MollifierSpec(0.1, "spectral_cutoff"))
    assert rep.commutation_defect <= 1e-12
    assert rep.passed["ii_linf_nonexpansion"]
    assert rep.passed["v_growth_exponent"]
    assert all(rep.growth_exponents[k] <= k + 0.3 for k in (1, 2))
    # the H^1 error of a symmetric mollifier on smooth data decays like eps^2
    assert 1.8 <= rep.convergence_order <= 2.1


def test_property_suite_bump_growth():
    rep = verify_mollifier_properties(gaussian(FINE, 1.0, 1.0), MollifierSpec(0.1))
    assert rep.passed["v_growth_exponent"]
    assert rep.commutation_defect <= rep.commutation_tol
    assert len(rep.convergence_errors) == 4
    assert all(b < a for a, b in zip(rep.convergence_errors, rep.convergence_errors[1:]))
