import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special, stats

from affine_vtln.numerics import (
    NonFiniteObjectiveError,
    OptimizerConfig,
    RngStream,
    bounded_maximize,
    gamma_fn,
    gauss_legendre_integrate,
    lower_incomplete_gamma,
    nelder_mead_minimize,
    sample_gaussian,
    sample_sigma_posterior,
    sample_sigma_posterior_inverse_cdf,
    sigma_posterior_cdf,
    upper_incomplete_gamma,
)


# -- optimizer ---------------------------------------------------------------

def test_nm_quadratic_1d():
    res = nelder_mead_minimize(lambda x: (x[0] - 3.0) ** 2, [0.0])
    assert abs(res.x[0] - 3.0) < 1e-6
    assert res.iterations > 0


def test_nm_paraboloid():
    res = nelder_mead_minimize(lambda x: x[0] ** 2 + x[1] ** 2, [1.0, 1.0])
    assert np.allclose(res.x, 0.0, atol=1e-6)


def rosen(p):
    x, y = p
    return (1 - x) ** 2 + 100 * (y - x * x) ** 2


def test_nm_rosenbrock_against_grid_refinement():
    res = nelder_mead_minimize(rosen, [-1.2, 1.0])
    # oracle: successively refined grids around (1, 1)
    cx, cy, h = 1.0, 1.0, 0.5
    for _ in range(12):
        xs = cx + h * np.linspace(-1, 1, 41)
        ys = cy + h * np.linspace(-1, 1, 41)
        vals = (1 - xs[:, None]) ** 2 + 100 * (ys[None, :] - xs[:, None] ** 2) ** 2
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        cx, cy, h = xs[i], ys[j], h / 4
    assert abs(res.x[0] - cx) < 1e-4 and abs(res.x[1] - cy) < 1e-4


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 10))
def test_nm_never_worse_than_start(x0, y0, scale):
    f = lambda p: scale * (p[0] - 1.3) ** 4 + (p[1] + 0.7) ** 2 + math.sin(3 * p[0])
    res = nelder_mead_minimize(f, [x0, y0], OptimizerConfig(max_iterations=200))
    assert res.fun <= f([x0, y0])


def test_nm_respects_iteration_cap():
    res = nelder_mead_minimize(rosen, [-1.2, 1.0], OptimizerConfig(max_iterations=5, max_restarts=0))
    assert res.iterations <= 5


def test_nm_nonfinite_reports_point():
    def f(p):
        return math.nan if p[0] > 0.5 else (p[0] - 1) ** 2

    with pytest.raises(NonFiniteObjectiveError) as info:
        nelder_mead_minimize(f, [0.0])
    assert info.value.point[0] > 0.5


def test_nm_rejects_nonfinite_start():
    with pytest.raises(NonFiniteObjectiveError):
        nelder_mead_minimize(lambda p: math.inf, [0.0])


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(x_tolerance=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(max_iterations=0)


def test_bounded_boundary_optimum():
    res = bounded_maximize(lambda x: -(x[0] - 2) ** 2, [0.0], [1.0], [0.5])
    assert res.x[0] == pytest.approx(1.0, abs=1e-9)


def test_bounded_interior_optimum():
    res = bounded_maximize(lambda x: -(x[0] - 2) ** 2, [0.0], [5.0], [0.5])
    assert res.x[0] == pytest.approx(2.0, abs=1e-6)


def test_bounded_2d():
    res = bounded_maximize(lambda x: -(x[0] - 1) ** 2 - (x[1] + 1) ** 2, [-3, -3], [3, 3], [0, 0])
    assert np.allclose(res.x, [1, -1], atol=1e-5)


def test_bounded_errors():
    with pytest.raises(ValueError):
        bounded_maximize(lambda x: -x[0] ** 2, [0.0], [1.0], [2.0])
    with pytest.raises(ValueError):
        bounded_maximize(lambda x: -x[0] ** 2, [1.0], [1.0], [1.0])
    with pytest.raises(NonFiniteObjectiveError):
        bounded_maximize(lambda x: math.nan, [0.0], [1.0], [0.5])


@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2), st.floats(0, 1), st.floats(0, 1))
def test_bounded_stays_in_box_and_improves(center, u, v):
    lo, hi = np.array([-1.0, 0.0]), np.array([1.0, 3.0])
    f = lambda p: -((p[0] - center[0]) ** 2) - (p[1] - center[1]) ** 2
    x0 = lo + np.array([u, v]) * (hi - lo)
    res = bounded_maximize(f, lo, hi, x0, OptimizerConfig(max_iterations=300))
    assert np.all(res.x >= lo) and np.all(res.x <= hi)
    assert res.fun >= f(x0)


# -- special functions -------------------------------------------------------

def test_gamma_values():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)
    with pytest.raises(ValueError):
        gamma_fn(0.0)


@pytest.mark.parametrize("s", np.arange(0.5, 21.0, 1.0))
def test_gamma_recurrence(s):
    assert gamma_fn(s + 1) == pytest.approx(s * gamma_fn(s), rel=1e-12)


def test_gamma_against_lgamma_range():
    for s in np.linspace(0.5, 170.0, 60):
        assert gamma_fn(s) == pytest.approx(special.gamma(s), rel=1e-12)


def test_incomplete_gamma_closed_forms():
    assert lower_incomplete_gamma(0.0, 3.0) == 0.0
    assert lower_incomplete_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)
    assert upper_incomplete_gamma(0.0, 2.0) == pytest.approx(1.0, rel=1e-14)
    assert upper_incomplete_gamma(1.0, 1.0) == pytest.approx(math.exp(-1), rel=1e-14)


def test_lower_incomplete_gamma_quadrature_oracle():
    oracle = integrate.quad(lambda t: t ** 1.5 * math.exp(-t), 0, 3.7, epsabs=0, epsrel=1e-13)[0]
    assert lower_incomplete_gamma(3.7, 2.5) == pytest.approx(oracle, rel=1e-10)


def test_complement_fixed_case():
    total = lower_incomplete_gamma(4.2, 7.5) + upper_incomplete_gamma(4.2, 7.5)
    assert total == pytest.approx(gamma_fn(7.5), rel=1e-10)


@given(st.floats(0, 50), st.floats(0.5, 50))
def test_complement_identity(x, s):
    total = lower_incomplete_gamma(x, s) + upper_incomplete_gamma(x, s)
    assert total == pytest.approx(gamma_fn(s), rel=1e-10)


@given(st.floats(0, 60), st.floats(0.5, 60))
def test_regularized_matches_scipy(x, s):
    assert lower_incomplete_gamma(x, s) / gamma_fn(s) == pytest.approx(special.gammainc(s, x), rel=1e-10, abs=1e-300)


def test_lower_incomplete_monotone_and_limit():
    xs = np.linspace(0, 60, 200)
    vals = [lower_incomplete_gamma(x, 4.5) for x in xs]
    assert np.all(np.diff(vals) >= 0)
    assert vals[-1] == pytest.approx(gamma_fn(4.5), rel=1e-12)


def test_incomplete_gamma_domain_errors():
    with pytest.raises(ValueError):
        lower_incomplete_gamma(-1.0, 2.0)
    with pytest.raises(ValueError):
        upper_incomplete_gamma(1.0, 0.0)


# -- quadrature --------------------------------------------------------------

def test_gl_polynomial_exactness():
    assert gauss_legendre_integrate(lambda x: x ** 2, 0, 1, 4) == pytest.approx(1 / 3, abs=1e-15)
    # degree 2n-1 with n = 3
    assert gauss_legendre_integrate(lambda x: x ** 5 - x, -1, 2, 3) == pytest.approx(10.5 - 1.5, abs=1e-13)


def test_gl_sine():
    assert gauss_legendre_integrate(np.sin, 0, math.pi, 32) == pytest.approx(2.0, abs=1e-12)


def test_gl_gaussian_series_oracle():
    # integral_0^1 exp(-x^2) = sum (-1)^k / (k! (2k+1))
    series = sum((-1) ** k / (math.factorial(k) * (2 * k + 1)) for k in range(40))
    assert gauss_legendre_integrate(lambda x: np.exp(-x * x), 0, 1, 64) == pytest.approx(series, abs=1e-12)


def test_gl_errors():
    with pytest.raises(ValueError):
        gauss_legendre_integrate(np.sin, 1, 0, 8)
    with pytest.raises(ValueError):
        gauss_legendre_integrate(np.sin, 0, 1, 1)
    with pytest.raises(NonFiniteObjectiveError):
        gauss_legendre_integrate(lambda x: np.where(x > 0.5, np.inf, x), 0, 1, 4)


# -- random streams ----------------------------------------------------------

def test_rng_reproducible():
    a = RngStream(7, 3).standard_normal(50)
    b = RngStream(7, 3).standard_normal(50)
    c = RngStream(7, 4).standard_normal(50)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)


def test_sample_gaussian_location_scale():
    a = [sample_gaussian(RngStream(1, 0), 5.0, 2.0) for _ in range(1)]
    z = RngStream(1, 0).standard_normal()
    assert a[0] == 5.0 + 2.0 * z


def test_sample_gaussian_moments():
    rng = RngStream(11, 0)
    draws = np.array([sample_gaussian(rng, 0.0, 1.0) for _ in range(100_000)])
    assert abs(draws.mean()) < 4 / math.sqrt(1e5)
    assert abs(draws.var() - 1.0) < 0.05


def test_sample_gaussian_bad_sd():
    with pytest.raises(ValueError):
        sample_gaussian(RngStream(), 0.0, 0.0)


@pytest.mark.parametrize("sampler", [sample_sigma_posterior, sample_sigma_posterior_inverse_cdf])
@pytest.mark.parametrize("args", [(50.0, 10, 1.0, 100.0), (4e5, 5, 1.0, 100.0), (1e-3, 2, 1.0, 2.0)])
def test_sigma_sampler_ks(sampler, args):
    rng = RngStream(5, 2)
    draws = np.array([sampler(rng, *args) for _ in range(20_000)])
    assert np.all((draws > args[2]) & (draws < args[3]))
    cdf = np.vectorize(lambda s: sigma_posterior_cdf(s, *args))
    assert stats.kstest(draws, cdf).pvalue > 1e-3


def test_sigma_cdf_against_quadrature():
    beta, nr, t1, t2 = 800.0, 12, 2.0, 40.0
    dens = lambda s: s ** (-nr) * math.exp(-beta / s ** 2)
    z = integrate.quad(dens, t1, t2, epsabs=0, epsrel=1e-12)[0]
    for s in (5.0, 9.0, 15.0, 30.0):
        part = integrate.quad(dens, t1, s, epsabs=0, epsrel=1e-12)[0]
        assert sigma_posterior_cdf(s, beta, nr, t1, t2) == pytest.approx(part / z, rel=1e-9, abs=1e-14)


def test_sigma_sampler_narrow_window():
    rng = RngStream(2, 0)
    t1 = 3.0
    t2 = t1 * (1 + 1e-6)
    for _ in range(200):
        s = sample_sigma_posterior(rng, 10.0, 4, t1, t2)
        assert t1 < s < t2


def test_sigma_sampler_errors():
    rng = RngStream()
    with pytest.raises(ValueError):
        sample_sigma_posterior(rng, 0.0, 4, 1.0, 2.0)
    with pytest.raises(ValueError):
        sample_sigma_posterior(rng, 1.0, 4, 0.0, 2.0)
    with pytest.raises(ValueError):
        sample_sigma_posterior(rng, 1.0, 4, 2.0, 2.0)
