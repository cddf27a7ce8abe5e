import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from proprd import spectra
from proprd.errors import DomainError
from proprd.spectra import AR1, OU, FrequencyGrid, Tabulated, White

SQRT2 = math.sqrt(2.0)


def test_ar1_density_at_zero():
    # (1 - 1/9) / (1 - 2/3 + 1/9) = (8/9) / (4/9)
    assert spectra.eval_psd(AR1(1 / 3), 0.0) == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("f", [-0.5, -0.2, 0.0, 0.13, 0.5])
def test_memoryless_ar1_is_flat(f):
    assert AR1(0.0)(f) == pytest.approx(1.0, rel=1e-15)


def test_ou_density_matches_fourier_transform_of_autocovariance():
    a, beta = 1.0, SQRT2
    psd = OU(a, beta)
    for f in (0.0, 0.3, 2.0):
        ft, _ = integrate.quad(lambda t: psd.autocovariance(t) * math.cos(2 * math.pi * f * t),
                               0, np.inf, limit=500)
        assert psd(f) == pytest.approx(2 * ft, rel=1e-7)
    assert psd(0.0) == pytest.approx(2.0, rel=1e-14)


def test_total_power_examples():
    assert spectra.total_power(AR1(1 / 3)) == 1.0
    assert spectra.total_power(OU(1.0, SQRT2)) == pytest.approx(1.0, rel=1e-15)
    assert spectra.total_power(White(2.0, 4.0)) == 2.0


@pytest.mark.parametrize("psd", [AR1(1 / 3), AR1(-0.7, 2.5), AR1(0.95), White(2.0, 4.0)])
def test_quadrature_reproduces_total_power(psd):
    grid = FrequencyGrid.for_domain(psd.domain)
    assert grid.integrate(psd(grid.frequencies)) == pytest.approx(psd.total_power(), rel=1e-6)


def test_infinite_band_quadrature_with_truncation():
    psd = OU(1.0, SQRT2)
    # truncate where the tail asymptote drops below 1e-12 S
    F = math.sqrt((psd.beta / (2 * math.pi)) ** 2 / 1e-12)
    val = 2 * integrate.quad(psd, 0, F, limit=1000, points=[1, 10, 100, 1000])[0]
    assert val == pytest.approx(psd.total_power(), rel=1e-3)
    assert spectra.SpectralDensity.total_power(psd) == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("r", [0.1, 1 / 3, -0.5, 0.7, -0.95])
def test_ar1_extrema_on_grid(r):
    psd = AR1(r, 1.7)
    vals = psd(FrequencyGrid().frequencies)
    assert vals.min() == pytest.approx(psd.S * (1 - abs(r)) / (1 + abs(r)), rel=1e-12)
    assert vals.max() == pytest.approx(psd.S * (1 + abs(r)) / (1 - abs(r)), rel=1e-12)


def test_density_is_even():
    f = np.linspace(0, 0.5, 101)
    psd = AR1(0.6)
    np.testing.assert_array_equal(psd(f), psd(-f))


def test_domain_errors():
    with pytest.raises(DomainError):
        AR1(1.0)
    with pytest.raises(DomainError):
        OU(0.0, 1.0)
    with pytest.raises(DomainError):
        AR1(0.2)(0.6)
    with pytest.raises(DomainError):
        White(1.0, 2.0)(2.5)


def test_log_integral_ar1_against_quadrature():
    # trapezoid rule at 8192 intervals on ln of the closed-form density
    f = np.linspace(-0.5, 0.5, 8193)
    numeric = integrate.trapezoid(np.log(AR1(1 / 3)(f)), f)
    closed = spectra.log_spectrum_integral(AR1(1 / 3))
    assert closed == pytest.approx(math.log(8 / 9), abs=1e-15)
    assert numeric == pytest.approx(closed, abs=1e-8)


def test_log_integral_trivial_cases():
    assert spectra.log_spectrum_integral(AR1(0.0)) == 0.0
    flat = Tabulated(np.linspace(-0.5, 0.5, 33), np.full(33, 4.0))
    assert spectra.log_spectrum_integral(flat) == pytest.approx(math.log(4.0), rel=1e-14)


@pytest.mark.parametrize("r", np.linspace(-0.95, 0.95, 9))
def test_log_integral_szego_identity(r):
    psd = AR1(float(r), 3.0)
    numeric = spectra.log_spectrum_integral(psd, analytic=False)
    assert numeric == pytest.approx(math.log(1 - r * r) + math.log(3.0), abs=1e-8)


def test_log_integral_zero_interval_is_neg_infinite():
    v = np.ones(33)
    v[10:14] = 0.0
    psd = Tabulated(np.linspace(0, 0.5, 33), v)
    assert spectra.log_spectrum_integral(psd) == -math.inf


def test_log_integral_isolated_zero_is_clamped_with_warning():
    v = np.ones(33)
    v[-1] = 0.0
    psd = Tabulated(np.linspace(0, 0.5, 33), v)
    with pytest.warns(RuntimeWarning, match="clamped"):
        val = spectra.log_spectrum_integral(psd)
    assert math.isfinite(val) and val < 0


def test_ou_tail_power_closed_form():
    psd = OU(1.0, SQRT2)
    delta = spectra.tail_power(psd, 10.0)
    numeric = 2 * integrate.quad(psd, 10.0, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert delta == pytest.approx(numeric, rel=1e-10)
    assert delta == pytest.approx(0.01013126, rel=1e-6)
    # high-frequency asymptote 2 (beta / 2 pi)**2 / B
    assert delta == pytest.approx(2 * (SQRT2 / (2 * math.pi)) ** 2 / 10, rel=1e-3)


def test_tail_power_limits():
    psd = OU(1.0, SQRT2)
    assert spectra.tail_power(psd, 0.0) == pytest.approx(psd.total_power())
    assert spectra.tail_power(psd, 1e9) < 1e-9
    ar = AR1(0.4)
    below = 2 * integrate.quad(ar, 0, 0.1)[0]
    assert spectra.tail_power(ar, 0.1) == pytest.approx(ar.total_power() - below, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1e3), st.floats(0.01, 1e3))
def test_tail_power_strictly_decreasing(b1, b2):
    psd = OU(2.0, 1.3)
    lo, hi = sorted((b1, b2))
    if hi > lo * (1 + 1e-9):
        assert spectra.tail_power(psd, hi) < spectra.tail_power(psd, lo)


def test_tail_power_times_bandwidth_limit():
    a, beta = 1.0, SQRT2
    B = 100 * a
    assert spectra.tail_power(OU(a, beta), B) * B == pytest.approx(
        2 * (beta / (2 * math.pi)) ** 2, rel=1e-2)


def test_ou_tail_asymptote_values():
    assert spectra.ou_tail_asymptote(2 * math.pi, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert spectra.ou_tail_asymptote(SQRT2, 10.0) == pytest.approx(
        1 / (2 * math.pi ** 2 * 100), rel=1e-14)
    assert spectra.ou_tail_asymptote(SQRT2, 10.0) == pytest.approx(5.066e-4, rel=1e-3)
    ratio = OU(1.0, SQRT2)(100.0) / spectra.ou_tail_asymptote(SQRT2, 100.0)
    assert ratio == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(DomainError):
        spectra.ou_tail_asymptote(1.0, 0.0)


def test_tabulated_interpolates_linearly_and_mirrors():
    psd = Tabulated([0.0, 0.25, 0.5], [2.0, 1.0, 0.0])
    assert psd(0.125) == pytest.approx(1.5)
    assert psd(-0.125) == pytest.approx(1.5)
    assert psd.total_power() == pytest.approx(2 * (0.25 * 1.5 + 0.25 * 0.5))


def test_tabulated_validation():
    with pytest.raises(ValueError):
        Tabulated([0.0, 0.0, 0.5], [1, 1, 1])
    with pytest.raises(ValueError):
        Tabulated([0.0, 0.2, 0.5], [1, -1, 1])
    with pytest.raises(ValueError):
        Tabulated([-0.5, 0.0, 0.5], [1.0, 2.0, 3.0])  # not even


def test_csv_round_trip(tmp_path):
    grid = FrequencyGrid(65)
    psd = Tabulated(grid.frequencies, AR1(0.3)(grid.frequencies))
    path = tmp_path / "psd.csv"
    spectra.save_csv(path, psd)
    back = spectra.load_csv(path)
    np.testing.assert_array_equal(back.values, psd.values)
    np.testing.assert_array_equal(back.grid, psd.grid)


def test_csv_requires_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1\n0.5,1\n")
    with pytest.raises(ValueError, match="header"):
        spectra.load_csv(path)


def test_sampling_a_bandlimited_density_preserves_power():
    tab = Tabulated(np.linspace(0, 3.0, 301), np.linspace(1.0, 0.1, 301),
                    domain=spectra.Bandlimited(3.0))
    sampled = spectra.sample(tab)
    assert isinstance(sampled.domain, spectra.DiscreteTime)
    grid = FrequencyGrid()
    assert grid.integrate(sampled(grid.frequencies)) == pytest.approx(tab.total_power(), rel=1e-6)
    assert spectra.sample(White(2.0, 5.0)) == AR1(0.0, 2.0)
