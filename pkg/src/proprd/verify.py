"""Oracle suite run by ``proprd verify``.

Each check compares a closed form with an independent computation and
records expected value, actual value and tolerance.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import oracle, ratefn, spectra, waterfill
from .spectra import AR1, OU


class Check(NamedTuple):
    name: str
    expected: float
    actual: float
    tolerance: float
    passed: bool


def _check(name, expected, actual, tol, override=None, relative=False):
    if override is not None:
        tol = override
    err = abs(actual - expected)
    if relative:
        err /= abs(expected)
    return Check(name, float(expected), float(actual), float(tol), bool(err <= tol))


def _worst(name, expected, actual, tol, override=None, relative=False):
    """Collapse element-wise comparisons into the single worst case."""
    expected = np.asarray(expected, dtype=float)
    actual = np.asarray(actual, dtype=float)
    err = np.abs(actual - expected)
    if relative:
        err = err / np.abs(expected)
    i = int(np.argmax(err))
    return _check(name, expected[i], actual[i], tol, override, relative)


def ar1_checks(override=None):
    out = []
    for r in (0.1, -0.1, 1 / 3, -1 / 3, 0.7, -0.7):
        psd = AR1(r)
        tab = waterfill.weighted_psd(psd, waterfill.Unit())
        ds = np.geomspace(1e-3 * psd.min_density, psd.min_density, 20)
        closed = [waterfill.ar1_closed_form(r, 1.0, d) for d in ds]
        solved = [waterfill.solve_at_distortion(tab, d).rate for d in ds]
        out.append(_worst(f"ar1 closed form vs water-filling r={r:+.4f}", closed, solved, 1e-6,
                          override))
    return out


def proportional_checks(override=None):
    psd = AR1(1 / 3)
    tab = waterfill.weighted_psd(psd, waterfill.Proportional())
    ds = (0.1, 0.25, 0.5, 0.7)
    expected = [0.5 * math.log(1 / d) for d in ds]
    actual = [waterfill.solve_at_distortion(tab, d).rate for d in ds]
    return [_worst("proportional closed form vs whitened water-filling", expected, actual, 1e-8,
                   override)]


def growth_checks(override=None):
    r = 1 / 3
    psd = AR1(r)
    g = ratefn.growth_ar1(r)
    tab = waterfill.weighted_psd(psd, waterfill.Unit())
    ds = np.linspace(0.01, psd.min_density, 20)
    diffs = [0.5 * math.log(1 / d) - waterfill.solve_at_distortion(tab, d).rate for d in ds]
    numeric = spectra.Tabulated(tab.grid, tab.values)
    return [
        _worst("growth identity (water-filling)", [g] * len(ds), diffs, 1e-9, override),
        _check("growth lower bound tightness", g, ratefn.growth_lower_bound(numeric), 1e-8,
               override),
    ]


def channel_checks(override=None):
    snr = ratefn.min_snr_for_distortion(0.1)
    out = [
        _check("channel example SNR_min", 9.0, round(snr, 3), 5e-4, override),
        _check("channel example dB", 9.54, round(ratefn.snr_db(snr), 2), 5e-3, override),
    ]
    errs = []
    for div in (0.0, 0.07236, 0.17649, 1.0):
        for s in (0.0, 0.5, 9.0, 100.0):
            back = ratefn.min_snr_for_distortion(ratefn.channel_distortion_bound(s, div), div)
            errs.append((s, back))
    s, back = max(errs, key=lambda p: abs(p[0] - p[1]))
    out.append(_check("channel bound round trip", s, back, 1e-12 * max(1.0, s), override))
    return out


def ba_checks(override=None):
    out = []
    g = oracle.quantize_marginal(ratefn.MarginalFamily("gaussian", 1.0))
    for D in (0.1, 0.25, 0.5):
        res = oracle.ba_at_distortion(g, D)
        ref = 0.5 * math.log(1 / res.distortion)
        out.append(_check(f"blahut-arimoto gaussian D={D}", ref, res.rate, 0.02, override,
                          relative=True))
    u = oracle.quantize_marginal(ratefn.MarginalFamily("uniform", 1.0))
    res = oracle.ba_at_distortion(u, 0.01, tol=1e-7)
    src = ratefn.SourceModel(AR1(0.0), ratefn.MarginalFamily("uniform", 1.0))
    lo, hi = ratefn.prop_rd_discrete(src, 0.01)[:2]
    # distance outside the band, zero when inside
    outside = max(lo - res.rate, res.rate - hi, 0.0)
    out.append(_check("blahut-arimoto uniform inside band", 0.0, outside, 0.02, override))
    return out


def szego_checks(override=None):
    psd = AR1(1 / 3)
    gaps = []
    for n in (64, 128, 256, 512):
        gaps.append(oracle.szego_check(oracle.toeplitz_eigen(psd, n), "log").gap)
    chk = oracle.toeplitz_eigen(psd, 512)
    log = oracle.szego_check(chk, "log")
    tr = oracle.szego_check(chk, "identity")
    steps = np.diff(gaps)
    return [
        _check("szego log gap n=512", log.spectral, log.empirical, 0.01, override),
        _check("szego gap monotone (max step)", 0.0, max(0.0, float(np.max(steps))), 0.0,
               override),
        _check("szego trace gap", tr.spectral, tr.empirical, 1e-10, override),
    ]


def test_channel_checks(seed=0, n_samples=1_000_000, n=512, override=None):
    chk = oracle.toeplitz_eigen(AR1(1 / 3), n)
    rep = oracle.test_channel_simulate(chk, 0.25, n_samples=n_samples, seed=seed)
    return [
        _worst("test channel per-coordinate MSE", rep.target_mse, rep.empirical_mse, 5e-3,
               override, relative=True),
        _check("test channel mean MSE", 0.25, rep.mean_mse, 5e-3, override, relative=True),
    ]


test_channel_checks.__test__ = False


def mixed_checks(override=None):
    psd = OU(1.0, math.sqrt(2.0))
    closed = ratefn.mixed_rd(psd, 10.0, 0.5).upper
    w = waterfill.weighted_psd(psd, waterfill.Mixed(10.0))
    solved = waterfill.solve_at_distortion(w, 0.5).rate
    out = [_check("mixed closed form vs water-filling", closed, solved, 1e-4, override)]
    B = 1000.0
    floor = ratefn.mixed_range(psd, B).floor
    ratio = ratefn.mixed_rd(psd, B, floor).upper / ratefn.example2_asymptotes(psd.beta, floor).mixed
    out.append(_check("mixed asymptote ratio B=1000a", 1.0, ratio, 0.05, override))
    return out


def fig1_checks(override=None):
    from .cli import fig1_table

    table = fig1_table(1 / 3, 1.0, 0.7)
    grid = spectra.FrequencyGrid()
    return [
        _check("fig1 nonweighted error integral", 0.7, grid.integrate(table["err_nonweighted"]),
               1e-8, override),
        _check("fig1 proportional error integral", 0.7, grid.integrate(table["err_proportional"]),
               1e-8, override),
    ]


def run_all(seed=0, mc_samples=1_000_000, mc_dim=512, override=None):
    checks = []
    checks += channel_checks(override)
    checks += ar1_checks(override)
    checks += proportional_checks(override)
    checks += growth_checks(override)
    checks += ba_checks(override)
    checks += szego_checks(override)
    checks += test_channel_checks(seed, mc_samples, mc_dim, override)
    checks += fig1_checks(override)
    checks += mixed_checks(override)
    return checks


def format_table(checks):
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  {'expected':>20}  {'actual':>20}  {'tolerance':>10}  result"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {c.expected:>20.12g}  {c.actual:>20.12g}  "
                     f"{c.tolerance:>10.3g}  {'PASS' if c.passed else 'FAIL'}")
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
