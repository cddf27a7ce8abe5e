"""Rate-distortion bounds under proportional and mixed mean-square error.

Rates are in nats; discrete-time results are per sample and continuous-time
results per second. Bounds that hold only up to a term vanishing as
``d -> 0`` carry ``asymptotic=True``.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, RangeError, UnsupportedError
from .spectra import (
    AR1, Bandlimited, DiscreteTime, InfiniteBand, Tabulated, Units, White, log_spectrum_integral,
    sample, tail_power,
)
from . import waterfill


class Marginal(enum.Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class MarginalFamily:
    kind: Marginal = Marginal.GAUSSIAN
    variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Marginal(self.kind))
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")

    def entropy(self):
        """Differential entropy in nats."""
        v = self.variance
        if self.kind is Marginal.GAUSSIAN:
            return 0.5 * math.log(2 * math.pi * math.e * v)
        if self.kind is Marginal.UNIFORM:
            return math.log(math.sqrt(12 * v))
        # Laplace with scale b has variance 2 b**2 and entropy 1 + ln(2b)
        return 1.0 + math.log(2 * math.sqrt(v / 2))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        v = self.variance
        if self.kind is Marginal.GAUSSIAN:
            return np.exp(-x * x / (2 * v)) / math.sqrt(2 * math.pi * v)
        if self.kind is Marginal.UNIFORM:
            half = math.sqrt(3 * v)
            return np.where(np.abs(x) <= half, 1 / (2 * half), 0.0)
        b = math.sqrt(v / 2)
        return np.exp(-np.abs(x) / b) / (2 * b)


def divergence_rate_iid(family):
    """``D(X || X~)`` for an i.i.d. source: Gaussian entropy minus the true entropy."""
    if family.kind is Marginal.GAUSSIAN:
        return 0.0
    return 0.5 * math.log(2 * math.pi * math.e * family.variance) - family.entropy()


def _is_white(psd):
    if isinstance(psd, White):
        return True
    if isinstance(psd, AR1):
        return psd.r == 0
    if isinstance(psd, Tabulated):
        return bool(np.ptp(psd.values) <= 1e-12 * np.max(psd.values))
    return False


@dataclass
class SourceModel:
    """Stationary source: a spectral density plus a marginal family.

    The divergence rate is derived for Gaussian sources (zero) and for
    i.i.d. non-Gaussian ones; pass ``divergence`` explicitly for anything
    else. It is in nats per sample for discrete-time and bandlimited
    sources (bandlimited rates multiply it by 2B) and nats per second for
    infinite-band ones.
    """

    spectrum: object
    marginal: MarginalFamily = field(default_factory=MarginalFamily)
    divergence: float | None = None

    def __post_init__(self):
        if self.marginal.kind is Marginal.GAUSSIAN:
            if self.divergence not in (None, 0, 0.0):
                raise ValueError("a Gaussian source has zero divergence rate")
            self.divergence = 0.0
        elif self.divergence is None:
            if not _is_white(self.spectrum):
                raise UnsupportedError("divergence rates are derived only for i.i.d. sources; "
                                       "pass divergence= for sources with memory")
            self.divergence = divergence_rate_iid(self.marginal)
        if self.divergence < 0:
            raise ValueError(f"divergence rate must be nonnegative, got {self.divergence}")

    @property
    def power(self):
        return self.spectrum.total_power()

    @property
    def divergence_rate(self):
        return self.divergence


class RateBounds(NamedTuple):
    lower: float
    upper: float
    units: Units
    asymptotic: bool = False


def prop_rd_discrete(src, d):
    """Proportional-MSE bounds ``1/2 ln(S/d) - D <= R(d) <= 1/2 ln(S/d)``, nats/sample."""
    S = src.power
    if not 0 < d <= S * (1 + 1e-12):
        raise RangeError(f"distortion must satisfy 0 < d <= S = {S:.12g}, got {d}")
    upper = max(0.0, 0.5 * math.log(S / d))
    lower = max(0.0, upper - src.divergence)
    return RateBounds(lower, upper, Units.PER_SAMPLE)


def prop_rd_bandlimited(src, B, d):
    """Proportional-MSE bounds for a source bandlimited to ``B``: ``2B`` times the per-sample ones."""
    dom = src.spectrum.domain
    if not isinstance(dom, Bandlimited) or dom.B > B * (1 + 1e-12):
        raise DomainError(f"spectrum is not bandlimited to B = {B}")
    lo, hi, _, _ = prop_rd_discrete(src, d)
    return RateBounds(2 * B * lo, 2 * B * hi, Units.PER_SECOND)


def growth_ar1(r):
    """Extra rate of proportional over plain MSE for a Gauss-Markov source."""
    if not -1 < r < 1:
        raise DomainError(f"AR(1) needs |r| < 1, got r={r}")
    return -0.5 * math.log1p(-r * r)


def growth_lower_bound(psd, grid=None, analytic=True):
    """Small-distortion lower bound on the growth of the rate.

    Discrete time: ``1/2 ln S - 1/2 integral ln Phi``. Bandlimited: the
    same for the Nyquist-rate samples, scaled by ``2B`` (nats/second).
    The bound holds up to a term that vanishes as ``d -> 0``; a density
    vanishing on an interval gives ``inf``.
    """
    dom = psd.domain
    if isinstance(dom, Bandlimited):
        return 2 * dom.B * growth_lower_bound(sample(psd), grid, analytic)
    if not isinstance(dom, DiscreteTime):
        raise DomainError("growth bound needs a discrete-time or bandlimited density")
    L = log_spectrum_integral(psd, grid, analytic=analytic)
    if L == -math.inf:
        return math.inf
    return 0.5 * math.log(psd.total_power()) - 0.5 * L


def channel_distortion_bound(snr, divergence=0.0):
    """Least achievable ``d/S`` over a bandlimited white Gaussian channel."""
    if snr < 0:
        raise RangeError(f"SNR must be nonnegative, got {snr}")
    return 1.0 / ((1.0 + snr) * math.exp(2.0 * divergence))


def min_snr_for_distortion(d_over_S, divergence=0.0):
    """Smallest SNR for which ``d/S`` is reachable; inverse of :func:`channel_distortion_bound`."""
    if not 0 < d_over_S <= 1:
        raise RangeError(f"d/S must lie in (0, 1], got {d_over_S}")
    return max(0.0, math.exp(-2.0 * divergence) / d_over_S - 1.0)


def snr_db(snr):
    return 10 * math.log10(snr) if snr > 0 else -math.inf


@dataclass(frozen=True)
class MixedRange:
    floor: float
    ceiling: float
    delta: float

    def margin(self):
        """How far the range floor sits below ``S``, as a fraction of ``S``."""
        return 1.0 - self.floor / self.ceiling


def mixed_range(psd, B):
    """Admissible distortions ``2B S(B) + delta <= d <= S`` of the mixed measure."""
    if not isinstance(psd.domain, InfiniteBand):
        raise DomainError("the mixed measure applies to infinite-band sources")
    delta = tail_power(psd, B)
    return MixedRange(2 * B * float(psd(B)) + delta, psd.total_power(), delta)


def mixed_rd(psd, B, d, divergence=0.0):
    """Rate under the mixed measure, ``B ln((S - delta) / (d - delta))`` nats/second.

    ``divergence`` is the caller's ``D(x || x~)`` per second; the lower
    bound subtracts it. Gaussian sources (divergence 0) get the exact value.
    """
    rng = mixed_range(psd, B)
    if not rng.floor <= d <= rng.ceiling * (1 + 1e-12):
        raise RangeError(f"mixed measure needs 2B S(B) + delta <= d <= S, i.e. "
                         f"{rng.floor:.6g} <= d <= {rng.ceiling:.6g}; got d = {d}")
    S, delta = rng.ceiling, rng.delta
    if d >= S * (1 - 1e-12):
        return RateBounds(0.0, 0.0, Units.PER_SECOND)
    upper = max(0.0, B * math.log((S - delta) / (d - delta)))
    return RateBounds(max(0.0, upper - divergence), upper, Units.PER_SECOND)


class Example2Rates(NamedTuple):
    mixed: float
    nonweighted: float
    asymptotic: bool = True


def example2_asymptotes(beta, d):
    """Small-``d`` rates of a diffusion with noise coefficient ``beta`` (nats/second).

    Plain MSE: ``(beta/pi)**2 * 2/d``. Mixed measure at the bottom of its
    range: that times ``ln sqrt(2/d)``.
    """
    if not d > 0:
        raise RangeError(f"distortion must be positive, got {d}")
    nonweighted = (beta / math.pi) ** 2 * 2.0 / d
    return Example2Rates(nonweighted * math.log(math.sqrt(2.0 / d)), nonweighted)


# -- curves -----------------------------------------------------------------

class Measure(enum.Enum):
    NONWEIGHTED = "nonweighted"
    PROPORTIONAL = "proportional"
    MIXED = "mixed"


@dataclass
class RdCurve:
    points: list
    units: Units
    measure: Measure
    B: float | None = None

    def tag(self):
        return f"mixed(B={self.B:g})" if self.measure is Measure.MIXED else self.measure.value

    def scaled(self, bits=False):
        k = 1.0 / math.log(2) if bits else 1.0
        return [(d, lo * k, hi * k) for d, lo, hi in self.points]

    def to_csv(self, bits=False):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "rate_lower", "rate_upper", "units", "measure"])
        for d, lo, hi in self.scaled(bits):
            w.writerow([f"{d:.12g}", f"{lo:.12g}", f"{hi:.12g}", self.units.label(bits), self.tag()])
        return buf.getvalue()

    def to_json(self, bits=False):
        doc = {
            "points": [{"d": float(f"{d:.12g}"), "rate_lower": float(f"{lo:.12g}"),
                        "rate_upper": float(f"{hi:.12g}")} for d, lo, hi in self.scaled(bits)],
            "units": self.units.label(bits),
            "measure": self.tag(),
        }
        return json.dumps(doc, indent=2) + "\n"


def rd_curve(src, d_values, measure, B=None, grid=None):
    """Assemble ``(d, lower, upper)`` points for one distortion measure."""
    measure = Measure(measure)
    psd = src.spectrum
    dom = psd.domain
    points = []
    if measure is Measure.PROPORTIONAL:
        if isinstance(dom, DiscreteTime):
            fn, units = (lambda d: prop_rd_discrete(src, d)), Units.PER_SAMPLE
        elif isinstance(dom, Bandlimited):
            fn, units = (lambda d: prop_rd_bandlimited(src, dom.B, d)), Units.PER_SECOND
        else:
            raise DomainError("proportional MSE gives infinite rate for an infinite-band source; "
                              "use the mixed measure")
    elif measure is Measure.MIXED:
        if B is None:
            raise ValueError("the mixed measure needs a cut bandwidth B")
        fn, units = (lambda d: mixed_rd(psd, B, d, src.divergence)), Units.PER_SECOND
    else:
        weighted = waterfill.weighted_psd(psd, waterfill.Unit(), grid)
        units = dom.units
        slb = _shannon_lower_bound(src, grid) if src.divergence > 0 else None

        def fn(d):
            upper = waterfill.solve_at_distortion(weighted, d).rate
            lower = upper if slb is None else min(upper, max(0.0, slb(d)))
            return RateBounds(lower, upper, units)
    for d in d_values:
        lo, hi = fn(d)[:2]
        points.append((float(d), lo, hi))
    return RdCurve(points, units, measure, B)


def _shannon_lower_bound(src, grid):
    """``1/2 ln(1/d) + 1/2 integral ln Phi - D`` (discrete) or its bandlimited analogue."""
    psd = src.spectrum
    dom = psd.domain
    if isinstance(dom, DiscreteTime):
        L = log_spectrum_integral(psd, grid)
        return lambda d: 0.5 * math.log(1 / d) + 0.5 * L - src.divergence
    if isinstance(dom, Bandlimited):
        B = dom.B
        L = log_spectrum_integral(sample(psd), grid)
        S = psd.total_power()
        return lambda d: B * math.log(S / d) - 2 * B * src.divergence + B * L - B * math.log(S)
    raise UnsupportedError("no lower bound is implemented for infinite-band non-Gaussian sources")
