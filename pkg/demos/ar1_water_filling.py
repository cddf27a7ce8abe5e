"""
Water-filling on a Gauss-Markov source
======================================

Rate-distortion curve of an AR(1) source under plain mean squared error,
and the two error spectra of the r = 1/3, d = 0.7 point.
"""
import numpy as np

from proprd import waterfill as wf
from proprd.cli import fig1_table
from proprd.spectra import AR1, FrequencyGrid

psd = AR1(1 / 3)
print("Phi(0) =", psd(0.0), " Phi(1/2) =", psd(0.5))

# below min Phi every frequency is active and the closed form applies
tab = wf.weighted_psd(psd, wf.Unit())
for d in (0.1, 0.25, 0.5):
    sol = wf.solve_at_distortion(tab, d)
    print(f"d={d:<5} solver {sol.rate:.10f}  closed form {wf.ar1_closed_form(1 / 3, 1.0, d):.10f}")

# above it the band edges drop out
sol = wf.solve_at_distortion(tab, 0.7)
print("d=0.7  mu =", round(sol.mu, 6), " active:", sol.active_intervals)

# error spectra: min(mu, Phi) versus 0.7 * Phi
table = fig1_table()
grid = FrequencyGrid()
print("area nonweighted  :", grid.integrate(table["err_nonweighted"]))
print("area proportional :", grid.integrate(table["err_proportional"]))
step = len(table["f"]) // 8
for i in range(0, len(table["f"]), step):
    print(f"  f={table['f'][i]:+.3f}  phi={table['phi'][i]:.4f}  "
          f"plain={table['err_nonweighted'][i]:.4f}  prop={table['err_proportional'][i]:.4f}")

# the whole curve, decreasing and convex
ds = np.linspace(0.05, 1.0, 8)
print(np.round([s.rate for s in wf.solve_curve(tab, ds)], 5))
