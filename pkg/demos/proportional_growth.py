"""
Cost of proportional distortion
===============================

Under the proportional measure every frequency is charged relative to its
own power, so the rate no longer benefits from memory in the source.
"""
import math

from proprd import ratefn as rf
from proprd import waterfill as wf
from proprd.spectra import AR1

for r in (0.0, 1 / 3, 0.7, 0.9):
    src = rf.SourceModel(AR1(r))
    d = 0.5 * src.spectrum.min_density
    prop = rf.prop_rd_discrete(src, d).upper
    plain = wf.ar1_closed_form(r, 1.0, d)
    print(f"r={r:.3f}  d={d:.4f}  proportional {prop:.6f}  plain {plain:.6f}  "
          f"difference {prop - plain:.6f}  -1/2 ln(1-r^2) {rf.growth_ar1(r):.6f}")

# the same number comes out of the log-spectrum integral
print("lower bound from spectrum:", rf.growth_lower_bound(AR1(0.9), analytic=False))

# non-Gaussian marginals open a band between the bounds
uni = rf.SourceModel(AR1(0.0), rf.MarginalFamily("uniform"))
print("uniform, d=0.01:", rf.prop_rd_discrete(uni, 0.01)[:2])
print("divergence of the uniform law:", rf.divergence_rate_iid(uni.marginal),
      "=", 0.5 * math.log(math.pi * math.e / 6))
