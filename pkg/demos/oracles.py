"""
Independent checks
==================

Blahut-Arimoto on quantized marginals, Toeplitz eigenvalues, and a Monte
Carlo run of the Gaussian test channel.
"""
import math

import numpy as np

from proprd import oracle
from proprd import ratefn as rf
from proprd.spectra import AR1

g = oracle.quantize_marginal(rf.MarginalFamily("gaussian"))
for D in (0.1, 0.25, 0.5):
    res = oracle.ba_at_distortion(g, D)
    print(f"BA gaussian D={res.distortion:.4f}  R={res.rate:.6f}  1/2 ln(1/D)={0.5 * math.log(1 / D):.6f}")

u = oracle.quantize_marginal(rf.MarginalFamily("uniform"))
res = oracle.ba_at_distortion(u, 0.01, tol=1e-7)
print(f"BA uniform D=0.01  R={res.rate:.4f}  band (2.1261, 2.3026)")

# eigenvalues of the covariance matrix spread over [min Phi, max Phi]
for n in (64, 128, 256, 512):
    chk = oracle.toeplitz_eigen(AR1(1 / 3), n)
    s = oracle.szego_check(chk, "log")
    print(f"n={n:4d}  eig in [{chk.eigenvalues[0]:.4f}, {chk.eigenvalues[-1]:.4f}]  log gap {s.gap:.2e}")

# test channel in the principal axes, smaller run than the acceptance one
chk = oracle.toeplitz_eigen(AR1(1 / 3), 64)
rep = oracle.test_channel_simulate(chk, 0.25, n_samples=100_000, seed=0)
print("worst relative MSE error:", float(np.max(rep.relative_errors())))
print("mean MSE:", rep.mean_mse)
