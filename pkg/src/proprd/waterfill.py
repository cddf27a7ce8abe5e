"""Reverse water-filling for weighted and plain mean-square error.

For a weighted density ``w(f) = |A(f)|**2 S(f)`` and water level ``mu``::

    D(mu) = mu * |{w >= mu}| + integral over {w < mu} of w
    R(mu) = 1/2 * integral over {w >= mu} of ln(w / mu)

Finite-band densities are integrated by the trapezoid rule on a uniform
grid (spectrally accurate for smooth periodic densities). Infinite-band
densities are integrated adaptively, piece by piece, between breakpoints
and water-level crossings.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import ConvergenceError, DomainError, NonIntegrableError, RangeError, ValidityError
from .spectra import (
    AR1, OU, Bandlimited, DiscreteTime, FrequencyGrid, InfiniteBand, SpectralDensity, Tabulated,
    Units, White,
)

BISECTION_FLOOR = 1e-15
MAX_BISECTIONS = 200


def peak_density(psd):
    """Supremum of ``psd`` over its domain."""
    if isinstance(psd, AR1):
        return psd.max_density
    if isinstance(psd, OU):
        return psd(0.0)
    if isinstance(psd, White):
        return psd.S / (2 * psd.B)
    if isinstance(psd, Tabulated):
        return float(np.max(psd.values))
    if isinstance(psd, Weighted):
        return psd.peak()
    grid = FrequencyGrid.for_domain(psd.domain)
    return float(np.max(psd(grid.frequencies)))


# -- weight functions -------------------------------------------------------

class Unit:
    """``|A(f)|**2 = 1``: plain mean-square error."""

    def __repr__(self):
        return "Unit()"

    def apply(self, psd):
        return Weighted(psd, self, psd._density, peak_density(psd), psd.breakpoints)

    def __call__(self, psd, f):
        return np.ones_like(np.asarray(f, dtype=float))


class Proportional:
    """Weight whitening the source: ``|A|**2 S = S_total`` (discrete) or ``S_total / 2B``.

    The flat weighted density is assigned on the whole band, including
    frequencies where the source density vanishes; no division by the
    source density is ever performed.
    """

    def __repr__(self):
        return "Proportional()"

    def level(self, psd):
        S = psd.total_power()
        if isinstance(psd.domain, DiscreteTime):
            return S
        if isinstance(psd.domain, Bandlimited):
            return S / (2 * psd.domain.B)
        raise DomainError("proportional weighting of an infinite-band source gives infinite rate; "
                          "use Mixed(B)")

    def apply(self, psd):
        level = self.level(psd)
        return Weighted(psd, self, lambda f: np.full_like(f, level), level, ())

    def __call__(self, psd, f):
        with np.errstate(divide="ignore"):
            return self.level(psd) / np.asarray(psd(f))


@dataclass(frozen=True)
class Mixed:
    """Proportional weighting inside ``|f| < B``, plain MSE outside.

    The weighted density is ``(S - delta) / 2B`` in band and the source
    density itself out of band, with ``delta`` the out-of-band power.
    """

    B: float

    def __post_init__(self):
        if not self.B > 0:
            raise DomainError(f"cut bandwidth must be positive, got {self.B}")

    def parts(self, psd):
        if not isinstance(psd.domain, InfiniteBand):
            raise DomainError("the mixed measure applies to infinite-band sources")
        delta = psd.tail_power(self.B)
        return (psd.total_power() - delta) / (2 * self.B), delta

    def apply(self, psd):
        level, _ = self.parts(psd)
        B = self.B

        def density(f):
            return np.where(f < B, level, psd._density(f))

        edge = float(psd(B))
        return Weighted(psd, self, density, max(level, edge), (B,), tail_from=B)

    def __call__(self, psd, f):
        level, _ = self.parts(psd)
        f = np.asarray(f, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(np.abs(f) < self.B, level / np.asarray(psd(f)), 1.0)


class TabulatedWeight:
    """``|A(f)|**2`` known on a grid (even, linear interpolation, zero off grid)."""

    def __init__(self, grid, values):
        self.table = Tabulated(grid, values, domain=InfiniteBand())

    def __repr__(self):
        return f"TabulatedWeight(n={self.table.grid.size})"

    def apply(self, psd):
        def density(f):
            return self.table._density(f) * psd._density(f)

        f = self.table.grid
        peak = float(np.max(density(np.abs(f)))) if f.size else 0.0
        bps = tuple(np.unique(np.abs(f)))
        return Weighted(psd, self, density, peak, bps, tail_from=np.inf)

    def __call__(self, psd, f):
        return self.table(f)


class Weighted(SpectralDensity):
    """Lazily evaluated product ``|A(f)|**2 S(f)``."""

    def __init__(self, psd, weight, density, peak, breakpoints, tail_from=None):
        self.source = psd
        self.weight = weight
        self.domain = psd.domain
        self._fn = density
        self._peak = float(peak)
        self.breakpoints = tuple(breakpoints)
        # weighted density equals the source density for f >= tail_from
        self.tail_from = 0.0 if isinstance(weight, Unit) else tail_from

    def __repr__(self):
        return f"Weighted({self.source!r}, {self.weight!r})"

    def _density(self, f):
        return self._fn(np.asarray(f, dtype=float))

    def peak(self):
        return self._peak

    def total_power(self):
        if isinstance(self.weight, Proportional):
            return self._peak * 2 * self.domain.half_width
        if isinstance(self.weight, (Mixed, Unit)):
            return self.source.total_power()
        return super().total_power()

    def upper_tail(self, f0):
        """``integral_{f0}^inf`` of the weighted density (one side)."""
        if self.tail_from is not None and f0 >= self.tail_from:
            return 0.5 * self.source.tail_power(f0)
        return 0.5 * self.tail_power(f0)


def weighted_psd(psd, weight, grid=None):
    """Weighted density ``|A(f)|**2 S(f)``.

    On a finite band this is tabulated on ``grid`` (default: 4097 uniform
    points across the band). Infinite-band results stay lazy and are
    integrated adaptively by the solvers.
    """
    lazy = weight.apply(psd)
    if isinstance(psd.domain, InfiniteBand):
        return lazy
    grid = grid or FrequencyGrid.for_domain(psd.domain)
    if grid.half_width > psd.domain.half_width * (1 + 1e-12):
        raise DomainError("grid extends outside the source domain")
    return Tabulated(grid.frequencies, lazy(grid.frequencies), psd.domain)


def tabulate(psd, grid):
    """Sample any density on ``grid`` (truncating an infinite band)."""
    return Tabulated(grid.frequencies, psd(grid.frequencies), psd.domain)


# -- solutions --------------------------------------------------------------

@dataclass
class WaterFillSolution:
    """One point of the parametric solution.

    ``active_mask`` marks grid nodes strictly above the water level; nodes
    exactly at the level contribute neither rate nor clipped distortion.
    Infinite-band solutions report ``active_intervals`` on ``f >= 0``
    instead.
    """

    mu: float
    rate: float
    distortion: float
    active_mask: np.ndarray | None
    units: Units
    frequencies: np.ndarray | None = None
    active_intervals: tuple = ()

    @property
    def active_measure(self):
        if self.active_mask is not None:
            return int(np.count_nonzero(self.active_mask))
        return 2 * sum(b - a for a, b in self.active_intervals)


def _trapezoid_weights(f):
    d = np.diff(f)
    w = np.zeros_like(f)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


class _GridProblem:
    def __init__(self, tab):
        self.f = tab.grid
        self.v = tab.values
        self.w = _trapezoid_weights(tab.grid) * (2.0 if tab.half_grid else 1.0)
        self.peak = float(np.max(self.v))
        self.total = float(np.dot(self.w, self.v))
        self.units = tab.domain.units

    def distortion(self, mu):
        return float(np.dot(self.w, np.minimum(mu, self.v)))

    def evaluate(self, mu):
        active = self.v > mu
        with np.errstate(divide="ignore"):
            logs = np.where(active, np.log(self.v / mu), 0.0)
        return self.distortion(mu), 0.5 * float(np.dot(self.w, logs)), active

    def solution(self, mu):
        D, R, active = self.evaluate(mu)
        return WaterFillSolution(mu, R, D, active, self.units, self.f)


class _AdaptiveProblem:
    def __init__(self, wpsd):
        if not isinstance(wpsd, Weighted):
            wpsd = Unit().apply(wpsd)
        self.psd = wpsd
        self.peak = wpsd.peak()
        self.total = wpsd.total_power()
        self.units = wpsd.domain.units
        self.breaks = sorted(b for b in set(wpsd.breakpoints) if b > 0)

    def _crossings(self, a, b, mu):
        eps = (b - a) * 1e-12
        xs = np.linspace(a + eps, b - eps, 65)
        g = self.psd._density(xs) - mu
        out = []
        for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
            fn = lambda x: float(self.psd._density(np.asarray(x))) - mu  # noqa: E731
            out.append(optimize.brentq(fn, xs[i], xs[i + 1], xtol=1e-14, rtol=1e-15))
        return out

    def segments(self, mu):
        """Pieces of ``[0, inf)`` on which ``w - mu`` keeps one sign."""
        w = self.psd._density
        last = self.breaks[-1] if self.breaks else 0.0
        hi = max(2 * last, 1.0)
        while float(w(np.asarray(hi))) >= mu:
            hi *= 2
            if hi > 1e300:
                raise NonIntegrableError("weighted density never drops below the water level")
        cuts = [0.0] + self.breaks + [hi]
        points = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            points += [a] + self._crossings(a, b, mu)
        points += [hi, math.inf]
        return list(zip(points[:-1], points[1:]))

    def evaluate(self, mu):
        w = self.psd._density
        D = R = 0.0
        active = []
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            for a, b in self.segments(mu):
                if b == math.inf:
                    D += self.psd.upper_tail(a)
                    continue
                if b <= a:
                    continue
                if float(w(np.asarray(0.5 * (a + b)))) >= mu:
                    D += mu * (b - a)
                    val, _ = integrate.quad(lambda x: math.log(float(w(np.asarray(x))) / mu),
                                            a, b, epsabs=1e-14, epsrel=1e-11, limit=200)
                    R += 0.5 * val
                    if val > 0:
                        active.append((a, b))
                else:
                    val, _ = integrate.quad(lambda x: float(w(np.asarray(x))), a, b,
                                            epsabs=0.0, epsrel=1e-11, limit=200)
                    D += val
        return 2 * D, 2 * R, tuple(active)

    def distortion(self, mu):
        return self.evaluate(mu)[0]

    def solution(self, mu):
        D, R, active = self.evaluate(mu)
        return WaterFillSolution(mu, R, D, None, self.units, None, active)


def _problem(weighted):
    if isinstance(weighted, Tabulated):
        return _GridProblem(weighted)
    if isinstance(weighted.domain, InfiniteBand):
        return _AdaptiveProblem(weighted)
    grid = FrequencyGrid.for_domain(weighted.domain)
    return _GridProblem(Tabulated(grid.frequencies, weighted(grid.frequencies), weighted.domain))


def solve_at_mu(weighted, mu):
    """``(D(mu), R(mu))`` for a weighted density at water level ``mu``."""
    if not mu > 0:
        raise RangeError(f"water level must be positive, got {mu}")
    D, R, _ = _problem(weighted).evaluate(mu)
    return D, R


def solve_at_distortion(weighted, d, tol=1e-10, max_iter=MAX_BISECTIONS):
    """Find the water level giving distortion ``d`` and return the full solution.

    Bisection on ``mu`` over ``[1e-15 * peak, peak]``; stops once
    ``|D(mu) - d| <= tol * d``.
    """
    prob = _problem(weighted)
    total = prob.total
    if not 0 < d <= total * (1 + 1e-12):
        raise RangeError(f"distortion must satisfy 0 < d <= {total:.12g}, got {d}")
    if d >= total:
        return prob.solution(prob.peak)
    lo, hi = BISECTION_FLOOR * prob.peak, prob.peak
    if prob.distortion(lo) > d:
        raise RangeError(f"distortion {d} is below the solver floor {prob.distortion(lo):.3g}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        D = prob.distortion(mid)
        if abs(D - d) <= tol * d:
            return prob.solution(mid)
        if D < d:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"bisection did not reach |D - d| <= {tol:g} d in {max_iter} steps",
                           residual=abs(D - d))


def solve_curve(weighted, d_values, max_workers=None):
    """Solve at each distortion; order matches ``d_values``.

    Points are independent, so they may be evaluated on a thread pool; each
    solve is deterministic and results match a sequential run exactly.
    """
    d_values = list(d_values)
    if max_workers in (None, 1):
        return [solve_at_distortion(weighted, d) for d in d_values]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda d: solve_at_distortion(weighted, d), d_values))


def ar1_closed_form(r, S, d):
    """Plain-MSE rate of a Gauss-Markov sequence, ``1/2 ln(S (1 - r**2) / d)``.

    Holds while the water level stays below the density minimum,
    ``d <= S (1 - |r|) / (1 + |r|)``.
    """
    psd = AR1(r, S)
    if not d > 0:
        raise RangeError(f"distortion must be positive, got {d}")
    limit = psd.min_density
    if d > limit * (1 + 1e-12):
        raise ValidityError(f"closed form needs d <= S(1-|r|)/(1+|r|) = {limit:.12g}, got {d}; "
                            "use solve_at_distortion")
    return 0.5 * math.log(S * (1 - r * r) / d)


def error_spectrum(weighted, solution, grid=None):
    """Reconstruction-error density ``min(mu, w(f))`` of a water-filling solution."""
    if isinstance(weighted, Tabulated):
        if solution.frequencies is None or not np.array_equal(solution.frequencies, weighted.grid):
            raise ValueError("solution was computed on a different grid")
        return Tabulated(weighted.grid, np.minimum(solution.mu, weighted.values), weighted.domain)
    if grid is None:
        raise ValueError("a lazily evaluated density needs an explicit grid")
    return Tabulated(grid.frequencies, np.minimum(solution.mu, weighted(grid.frequencies)),
                     weighted.domain)


def proportional_error_spectrum(psd, d, grid=None):
    """Error density ``(d / S) * S(f)`` demanded by the proportional measure."""
    S = psd.total_power()
    if not 0 < d <= S:
        raise RangeError(f"distortion must satisfy 0 < d <= {S:.12g}, got {d}")
    grid = grid or FrequencyGrid.for_domain(psd.domain)
    phi = np.asarray(psd(grid.frequencies))
    return Tabulated(grid.frequencies, (d / S) * phi, psd.domain)


def nonweighted_rate(psd, d, grid=None):
    """Plain-MSE rate of a Gaussian source with density ``psd``."""
    return solve_at_distortion(weighted_psd(psd, Unit(), grid), d).rate
