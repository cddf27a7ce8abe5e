"""Brute-force verifiers for the closed forms.

* Blahut-Arimoto on a quantized scalar marginal (squared error).
* Eigenvalues of the n x n covariance matrix of a discrete-time source,
  compared with spectral integrals.
* Monte Carlo simulation of the additive test channel in the principal
  axes, ``Z_k = a X*_k + n_k`` with ``a = 1 - d/S``.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .errors import ConvergenceError, DomainError, RangeError
from .ratefn import MarginalFamily
from .spectra import AR1, DiscreteTime, FrequencyGrid, log_spectrum_integral

MC_CHUNK = 4096


def _version():
    from . import __version__
    return __version__


@dataclass(frozen=True)
class DiscreteSource:
    support: np.ndarray
    pmf: np.ndarray

    def __post_init__(self):
        if self.support.shape != self.pmf.shape:
            raise ValueError("support and pmf must have equal length")
        if np.any(np.diff(self.support) <= 0):
            raise ValueError("support must be sorted and distinct")
        if np.any(self.pmf < 0) or abs(self.pmf.sum() - 1) > 1e-12:
            raise ValueError("pmf must be nonnegative and sum to 1")

    @property
    def mean(self):
        return float(np.dot(self.pmf, self.support))

    @property
    def variance(self):
        return float(np.dot(self.pmf, (self.support - self.mean) ** 2))


def quantize_marginal(family: MarginalFamily, n_points=257, span=6.0):
    """Sample the marginal density on a uniform grid over ``[-span*sigma, span*sigma]``."""
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError(f"n_points must be odd and >= 3, got {n_points}")
    if not span > 0:
        raise ValueError(f"span must be positive, got {span}")
    sigma = math.sqrt(family.variance)
    x = np.linspace(-span * sigma, span * sigma, n_points)
    # nudge the grid edges inward so a support boundary landing on a node counts
    mass = family.density(x * (1 - 1e-12))
    total = mass.sum()
    if not total > 0 or not np.isfinite(total):
        raise ValueError("density vanishes on the quantization grid")
    return DiscreteSource(x, mass / total)


@dataclass
class BAResult:
    distortion: float
    rate: float
    slope: float
    iterations: int
    residual: float
    gap: float
    q: np.ndarray | None = field(default=None, repr=False)

    def to_json(self):
        doc = asdict(self)
        doc.pop("q")
        doc["tool_version"] = _version()
        return json.dumps(doc, indent=2) + "\n"


def blahut_arimoto(src, slope, tol=1e-10, max_iter=10_000, q0=None):
    """One point of the rate-distortion curve of ``src`` at Lagrange slope ``slope < 0``.

    Reconstruction alphabet is the source support; distortion is squared
    error. Iterates until the rate changes by at most ``tol`` nats. The
    returned ``gap`` is Blahut's bound on how far the rate can still be
    from the curve at this slope.
    """
    if not slope < 0:
        raise ValueError(f"slope must be negative, got {slope}")
    # zero-mass points can be dropped: for squared error an optimal
    # reconstruction never lies outside the hull of the support
    keep = src.pmf > 0
    x = src.support[keep]
    p = src.pmf[keep]
    dist = (x[:, None] - x[None, :]) ** 2
    A = np.exp(slope * dist)
    if q0 is None:
        q = np.full(x.size, 1.0 / x.size)
    else:
        q = np.asarray(q0, dtype=float)
        q = q[keep] if q.size == keep.size else q.copy()
    rate_prev = math.inf
    for it in range(1, max_iter + 1):
        c = A @ q
        Q = A * (q[None, :] / c[:, None])
        q = p @ Q
        live = (Q > 0) & (q > 0)[None, :]
        with np.errstate(divide="ignore"):
            logs = np.where(live, np.log(np.where(live, Q, 1.0)) - np.log(np.where(q > 0, q, 1.0)), 0.0)
        rate = float(np.sum(p[:, None] * Q * logs))
        residual = abs(rate - rate_prev)
        if residual <= tol:
            D = float(np.sum(p[:, None] * Q * dist))
            with np.errstate(divide="ignore"):
                logc = np.log(A.T @ (p / (A @ q)))
            # Blahut: rate error at this slope is at most max log c - E_q log c
            live = q > 0
            gap = float(np.max(logc) - np.dot(q[live], logc[live]))
            full_q = np.zeros(src.support.size)
            full_q[keep] = q
            return BAResult(D, max(rate, 0.0), slope, it, residual, gap, full_q)
        rate_prev = rate
    raise ConvergenceError(f"Blahut-Arimoto did not converge in {max_iter} iterations "
                           f"(last rate change {residual:.3g})", residual=residual)


def ba_at_distortion(src, target, rel_tol=1e-3, tol=1e-10, max_iter=10_000):
    """Tune the slope by bisection in ``log|slope|`` until ``D`` is within ``rel_tol`` of ``target``."""
    if not 0 < target < src.variance:
        raise RangeError(f"target distortion must lie in (0, {src.variance:.6g}), got {target}")

    def run(log_s, q0):
        return blahut_arimoto(src, -math.exp(log_s), tol=tol, max_iter=max_iter, q0=q0)

    # Gaussian slope -1/(2d) is a good starting point for any smooth marginal
    mid = math.log(0.5 / target)
    res = run(mid, None)
    lo = hi = mid
    lo_res = hi_res = res
    while lo_res.distortion < target:
        lo -= math.log(1.25)
        lo_res = run(lo, lo_res.q)
    while hi_res.distortion > target:
        hi += math.log(1.25)
        hi_res = run(hi, hi_res.q)
    best = min((lo_res, hi_res), key=lambda r: abs(r.distortion - target))
    for _ in range(60):
        if abs(best.distortion - target) <= rel_tol * target:
            return best
        mid = 0.5 * (lo + hi)
        res = run(mid, best.q)
        if res.distortion > target:
            lo = mid
        else:
            hi = mid
        best = res
    raise ConvergenceError(f"could not tune the slope to D = {target}",
                           residual=abs(best.distortion - target))


# -- covariance eigenvalues ---------------------------------------------------

@dataclass
class ToeplitzCheck:
    n: int
    eigenvalues: np.ndarray
    psd: object

    @property
    def gamma(self):
        """Per-coordinate error variances ``(d/S) lambda_k`` as a function of ``d``."""
        S = self.psd.total_power()
        return lambda d: (d / S) * self.eigenvalues


def _autocovariance(psd, n):
    if isinstance(psd, AR1):
        return psd.autocovariance(np.arange(n))
    grid = FrequencyGrid(max(8 * n + 1, 4097))
    f = grid.frequencies
    phi = np.asarray(psd(f))
    return np.array([grid.integrate(phi * np.cos(2 * np.pi * f * k)) for k in range(n)])


def toeplitz_eigen(psd, n):
    """Sorted eigenvalues of the ``n x n`` covariance matrix of a discrete-time source."""
    if not isinstance(psd.domain, DiscreteTime):
        raise DomainError("covariance matrices are formed for discrete-time sources")
    if not 2 <= n <= 1024:
        raise ValueError(f"n must satisfy 2 <= n <= 1024, got {n}")
    cov = linalg.toeplitz(_autocovariance(psd, n))
    lam = linalg.eigvalsh(cov)
    return ToeplitzCheck(n, np.sort(lam), psd)


class SzegoResult(NamedTuple):
    empirical: float
    spectral: float
    gap: float


def szego_check(check, g="identity"):
    """Compare ``(1/n) sum g(lambda_k)`` with ``integral g(Phi(f)) df`` for ``g`` in {identity, log}."""
    lam = check.eigenvalues
    if g == "identity":
        emp = float(np.mean(lam))
        spec = check.psd.total_power()
    elif g == "log":
        if np.any(lam <= 0):
            raise RangeError("log needs a positive-definite covariance matrix")
        emp = float(np.mean(np.log(lam)))
        spec = log_spectrum_integral(check.psd)
    else:
        raise ValueError(f"g must be 'identity' or 'log', got {g!r}")
    return SzegoResult(emp, spec, abs(emp - spec))


# -- test channel -----------------------------------------------------------

@dataclass
class TestChannelReport:
    __test__ = False  # not a pytest class

    n: int
    d: float
    S: float
    a: float
    n_samples: int
    seed: int
    empirical_mse: list
    target_mse: list
    rate_per_coordinate: float
    tool_version: str = field(default_factory=_version)

    def relative_errors(self):
        emp = np.asarray(self.empirical_mse)
        tgt = np.asarray(self.target_mse)
        return np.abs(emp - tgt) / tgt

    @property
    def mean_mse(self):
        return float(np.mean(self.empirical_mse))

    def to_json(self):
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _chunk_sums(i, m, sd_x, sd_n, a, seed):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))
    x = rng.standard_normal((m, sd_x.size)) * sd_x
    z = a * x + rng.standard_normal((m, sd_x.size)) * sd_n
    err = z - x
    return np.einsum("ij,ij->j", err, err)


def test_channel_simulate(check, d, n_samples=1_000_000, seed=0, max_workers=None):
    """Simulate ``Z_k = a X*_k + n_k`` in the principal axes and measure ``E(Z_k - X*_k)**2``.

    ``X*_k ~ N(0, lambda_k)`` and ``n_k ~ N(0, a lambda_k d / S)``. Samples
    are drawn in fixed-size chunks, each from its own stream keyed by
    ``(seed, chunk index)``, and summed in chunk order, so the report does
    not depend on ``max_workers``.
    """
    S = check.psd.total_power()
    if not 0 < d <= S:
        raise RangeError(f"distortion must satisfy 0 < d <= S = {S:.12g}, got {d}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    lam = check.eigenvalues
    a = 1.0 - d / S
    sd_x = np.sqrt(lam)
    sd_n = np.sqrt(a * lam * d / S)
    sizes = [MC_CHUNK] * (n_samples // MC_CHUNK)
    if n_samples % MC_CHUNK:
        sizes.append(n_samples % MC_CHUNK)

    def job(i):
        return _chunk_sums(i, sizes[i], sd_x, sd_n, a, seed)

    if max_workers in (None, 1):
        parts = map(job, range(len(sizes)))
    else:
        pool = ThreadPoolExecutor(max_workers=max_workers)
        parts = pool.map(job, range(len(sizes)))
    total = np.zeros(lam.size)
    for part in parts:
        total += part
    if max_workers not in (None, 1):
        pool.shutdown()
    return TestChannelReport(
        n=check.n, d=float(d), S=float(S), a=a, n_samples=int(n_samples), seed=int(seed),
        empirical_mse=(total / n_samples).tolist(),
        target_mse=((d / S) * lam).tolist(),
        rate_per_coordinate=0.5 * math.log(S / d),
    )


test_channel_simulate.__test__ = False
