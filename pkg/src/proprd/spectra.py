"""Power spectral density models and the spectral integrals built on them.

Frequencies are in cycles per sample for discrete-time sources
(``|f| <= 1/2``) and in Hz for continuous-time ones. All densities are
two-sided and even, so the total power is the integral over the whole
frequency axis.
"""
from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .errors import DomainError, NonIntegrableError

DEFAULT_GRID_POINTS = 4097
LOG_FLOOR = 1e-300


class Units(enum.Enum):
    PER_SAMPLE = "nats/sample"
    PER_SECOND = "nats/second"

    def label(self, bits=False):
        return self.value.replace("nats", "bits") if bits else self.value


@dataclass(frozen=True)
class DiscreteTime:
    """Sampled sequence; frequencies in [-1/2, 1/2]."""

    @property
    def half_width(self):
        return 0.5

    @property
    def units(self):
        return Units.PER_SAMPLE


@dataclass(frozen=True)
class Bandlimited:
    """Continuous-time process with no power above ``B`` Hz."""

    B: float

    def __post_init__(self):
        if not self.B > 0:
            raise DomainError(f"bandwidth must be positive, got {self.B}")

    @property
    def half_width(self):
        return self.B

    @property
    def units(self):
        return Units.PER_SECOND


@dataclass(frozen=True)
class InfiniteBand:
    """Continuous-time process with power at every frequency."""

    @property
    def half_width(self):
        return math.inf

    @property
    def units(self):
        return Units.PER_SECOND


Domain = DiscreteTime | Bandlimited | InfiniteBand


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid on ``[-half_width, half_width]`` with trapezoid weights.

    The default point count is odd so that ``f = 0`` and both band edges
    are nodes.
    """

    n_points: int = DEFAULT_GRID_POINTS
    half_width: float = 0.5

    def __post_init__(self):
        if self.n_points < 16:
            raise ValueError(f"n_points must be >= 16, got {self.n_points}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError(f"half_width must be finite and positive, got {self.half_width}")

    @classmethod
    def for_domain(cls, domain, n_points=DEFAULT_GRID_POINTS, half_width=None):
        if half_width is None:
            half_width = domain.half_width
        if not math.isfinite(half_width):
            raise DomainError("an infinite-band grid needs an explicit truncation half_width")
        return cls(n_points, half_width)

    @cached_property
    def frequencies(self):
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    @cached_property
    def weights(self):
        h = 2.0 * self.half_width / (self.n_points - 1)
        w = np.full(self.n_points, h)
        w[0] = w[-1] = h / 2
        return w

    def integrate(self, values):
        return float(np.dot(self.weights, values))


class SpectralDensity:
    """Base class: an even, nonnegative power spectral density."""

    domain: Domain

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        if np.any(np.abs(f) > self.domain.half_width * (1 + 1e-12)):
            raise DomainError(
                f"frequency outside |f| <= {self.domain.half_width} for {type(self).__name__}")
        out = self._density(np.abs(f))
        return float(out) if out.ndim == 0 else out

    def _density(self, f):
        raise NotImplementedError

    # Nonnegative frequencies where the density is not smooth.
    breakpoints: tuple = ()

    def total_power(self):
        return 2.0 * _quad_half_line(self, 0.0, self.domain.half_width, self.breakpoints)

    def tail_power(self, B):
        return 2.0 * _quad_half_line(self, B, self.domain.half_width, self.breakpoints)


def _quad_half_line(psd, lo, hi, breakpoints=()):
    """Integrate ``psd`` over ``[lo, hi]`` (``hi`` may be infinite)."""
    if lo >= hi:
        return 0.0
    cuts = [lo] + [b for b in sorted(breakpoints) if lo < b < hi] + [hi]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in zip(cuts[:-1], cuts[1:]):
            try:
                val, _ = integrate.quad(psd, a, b, epsabs=0.0, epsrel=1e-10, limit=500)
            except integrate.IntegrationWarning as exc:
                raise NonIntegrableError(f"spectral integral on [{a}, {b}] failed: {exc}") from exc
            total += val
    if not math.isfinite(total):
        raise NonIntegrableError(f"spectral integral on [{lo}, {hi}] diverges")
    return total


@dataclass(frozen=True)
class AR1(SpectralDensity):
    """First-order Gauss-Markov sequence with lag-k correlation ``r**|k|``."""

    r: float
    S: float = 1.0
    domain: Domain = field(default=DiscreteTime(), init=False, repr=False)

    def __post_init__(self):
        if not -1.0 < self.r < 1.0:
            raise DomainError(f"AR(1) needs |r| < 1, got r={self.r}")
        if not self.S > 0:
            raise DomainError(f"power must be positive, got S={self.S}")

    def _density(self, f):
        r = self.r
        return self.S * (1 - r * r) / (1 - 2 * r * np.cos(2 * np.pi * f) + r * r)

    def total_power(self):
        return self.S

    def autocovariance(self, k):
        return self.S * self.r ** np.abs(np.asarray(k))

    @property
    def min_density(self):
        a = abs(self.r)
        return self.S * (1 - a) / (1 + a)

    @property
    def max_density(self):
        a = abs(self.r)
        return self.S * (1 + a) / (1 - a)


@dataclass(frozen=True)
class OU(SpectralDensity):
    """Stationary Ornstein-Uhlenbeck process ``dx = -a x dt + beta dw``.

    Autocovariance ``(beta**2 / 2a) exp(-a|tau|)``; density
    ``beta**2 / (a**2 + (2 pi f)**2)``.
    """

    a: float
    beta: float
    domain: Domain = field(default=InfiniteBand(), init=False, repr=False)

    def __post_init__(self):
        if not (self.a > 0 and self.beta > 0):
            raise DomainError(f"OU needs a > 0 and beta > 0, got a={self.a}, beta={self.beta}")

    def _density(self, f):
        return self.beta ** 2 / (self.a ** 2 + (2 * np.pi * f) ** 2)

    def total_power(self):
        return self.beta ** 2 / (2 * self.a)

    def tail_power(self, B):
        if B < 0:
            raise DomainError(f"bandwidth must be nonnegative, got {B}")
        # pi/2 - arctan(x) == arctan(1/x); the right side keeps precision for large B
        if B == 0:
            return self.total_power()
        return self.beta ** 2 / (math.pi * self.a) * math.atan(self.a / (2 * math.pi * B))

    def autocovariance(self, tau):
        return self.total_power() * np.exp(-self.a * np.abs(np.asarray(tau)))


@dataclass(frozen=True)
class White(SpectralDensity):
    """Flat density ``S / 2B`` on ``|f| <= B``."""

    S: float
    B: float

    def __post_init__(self):
        if not (self.S > 0 and self.B > 0):
            raise DomainError(f"White needs S > 0 and B > 0, got S={self.S}, B={self.B}")

    @property
    def domain(self):
        return Bandlimited(self.B)

    def _density(self, f):
        return np.full_like(f, self.S / (2 * self.B))

    def total_power(self):
        return self.S

    def tail_power(self, B):
        return self.S * max(0.0, 1.0 - B / self.B)


class Tabulated(SpectralDensity):
    """Density known on a grid, linearly interpolated, zero off the grid.

    ``grid`` may cover the full symmetric range or only ``f >= 0``; in the
    latter case the density is mirrored.
    """

    def __init__(self, grid, values, domain=DiscreteTime()):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and values must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid frequencies must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("tabulated densities must be finite and nonnegative")
        if np.max(np.abs(grid)) > domain.half_width * (1 + 1e-12):
            raise DomainError("tabulated grid extends outside the domain")
        self.half_grid = grid[0] >= 0
        if not self.half_grid:
            mirrored = np.interp(-grid, grid, values, left=np.nan, right=np.nan)
            ok = ~np.isnan(mirrored)
            if not np.allclose(mirrored[ok], values[ok], rtol=1e-9, atol=1e-300):
                raise ValueError("tabulated density must be even in f")
        self.grid = grid
        self.values = values
        self.domain = domain

    def __repr__(self):
        return f"Tabulated(n={self.grid.size}, domain={self.domain})"

    def _density(self, f):
        # f arrives as |f|; a full grid is even, so |f| interpolates the same
        return np.interp(f, self.grid, self.values, left=0.0, right=0.0)

    def total_power(self):
        p = float(integrate.trapezoid(self.values, self.grid))
        return 2.0 * p if self.half_grid else p

    def tail_power(self, B):
        if self.half_grid:
            f, v = self.grid, self.values
        else:
            keep = self.grid >= 0
            f, v = self.grid[keep], self.values[keep]
        if B >= f[-1]:
            return 0.0
        inner = f > B
        f = np.concatenate([[B], f[inner]])
        v = np.concatenate([[np.interp(B, self.grid, self.values)], v[inner]])
        return 2.0 * float(integrate.trapezoid(v, f))


class Sampled(SpectralDensity):
    """Density of ``x(k / 2B)`` for a process bandlimited to ``B``.

    Sampling at the Nyquist rate folds nothing, so
    ``Phi_X(f) = 2B S_x(2B f)`` on ``|f| <= 1/2`` with the same total power.
    """

    domain = DiscreteTime()

    def __init__(self, psd):
        if not isinstance(psd.domain, Bandlimited):
            raise DomainError("only bandlimited densities can be sampled at the Nyquist rate")
        self.source = psd
        self.B = psd.domain.B

    def __repr__(self):
        return f"Sampled({self.source!r})"

    def _density(self, f):
        return 2 * self.B * np.asarray(self.source(2 * self.B * f))

    def total_power(self):
        return self.source.total_power()


def eval_psd(psd, f):
    """Evaluate ``psd`` at ``f`` (scalar or array)."""
    return psd(f)


def total_power(psd):
    """Integrated power of ``psd`` over its whole domain."""
    return psd.total_power()


def tail_power(psd, B):
    """Power above ``B`` on both sides: ``2 * integral_B^inf psd(f) df``."""
    if B < 0:
        raise DomainError(f"bandwidth must be nonnegative, got {B}")
    return psd.tail_power(B)


def ou_tail_asymptote(beta, f):
    """High-frequency form ``(beta / 2 pi)**2 / f**2`` of the OU density."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise DomainError("the tail asymptote is defined for f > 0 only")
    out = (beta / (2 * np.pi)) ** 2 / f ** 2
    return float(out) if out.ndim == 0 else out


def sample(psd):
    """Discrete-time density of the Nyquist-rate samples of a bandlimited ``psd``."""
    if isinstance(psd, White):
        return AR1(0.0, psd.S)
    return Sampled(psd)


def log_spectrum_integral(psd, grid=None, analytic=True):
    """``integral_{-1/2}^{1/2} ln Phi(f) df`` for a discrete-time density.

    AR(1) uses the closed form ``ln S + ln(1 - r**2)`` unless ``analytic``
    is false. A density that vanishes on an interval of positive length
    gives ``-inf``; isolated zeros are clamped to ``LOG_FLOOR`` with a
    warning.
    """
    if not isinstance(psd.domain, DiscreteTime):
        raise DomainError("log_spectrum_integral needs a discrete-time density")
    if analytic and isinstance(psd, AR1):
        return math.log(psd.S) + math.log1p(-psd.r ** 2)
    if isinstance(psd, Tabulated):
        return _log_integral_nodes(psd.grid, psd.values, 2.0 if psd.half_grid else 1.0)
    grid = grid or FrequencyGrid()
    v = np.asarray(psd(grid.frequencies))
    return _log_integral_nodes(grid.frequencies, v, 1.0)


def _log_integral_nodes(f, v, scale):
    zero = v <= 0
    if np.any(zero[:-1] & zero[1:]):
        return -math.inf
    tiny = v < LOG_FLOOR
    if np.any(tiny):
        warnings.warn(f"{int(tiny.sum())} density values below {LOG_FLOOR:g} clamped "
                      "in log integral", RuntimeWarning, stacklevel=3)
    logs = np.log(np.maximum(v, LOG_FLOOR))
    return scale * float(integrate.trapezoid(logs, f))


def load_csv(path, domain=DiscreteTime()):
    """Read a tabulated density from a CSV with header ``f,phi``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["f", "phi"]:
            raise ValueError(f"{path}: expected header 'f,phi', got {header}")
        rows = [row for row in reader if row]
    try:
        data = np.array([[float(a), float(b)] for a, b in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from exc
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    return Tabulated(data[:, 0], data[:, 1], domain)


def save_csv(path, psd):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f", "phi"])
        for f, v in zip(psd.grid, psd.values):
            writer.writerow([f"{f:.17g}", f"{v:.17g}"])
