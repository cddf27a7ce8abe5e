"""
Mixed measure on an Ornstein-Uhlenbeck process
==============================================

Proportional below a cut bandwidth B, plain mean squared error above it.
"""
import math

from proprd import ratefn as rf
from proprd import waterfill as wf
from proprd.spectra import OU

psd = OU(1.0, math.sqrt(2.0))
print("total power", psd.total_power(), " tail power above 10:", psd.tail_power(10.0))

rng = rf.mixed_range(psd, 10.0)
print(f"valid distortions for B=10: {rng.floor:.5f} <= d <= {rng.ceiling}")

closed = rf.mixed_rd(psd, 10.0, 0.5).upper
solved = wf.solve_at_distortion(wf.weighted_psd(psd, wf.Mixed(10.0)), 0.5).rate
print(f"d=0.5: closed form {closed:.8f}, water-filling {solved:.8f} nats/s")

try:
    rf.mixed_rd(psd, 10.0, 0.02)
except rf.RangeError as exc:
    print("d=0.02 rejected:", exc)

# at the bottom of the range the rate follows the small-d asymptote
for B in (10.0, 100.0, 1000.0, 10000.0):
    d = rf.mixed_range(psd, B).floor
    exact = rf.mixed_rd(psd, B, d).upper
    asym = rf.example2_asymptotes(psd.beta, d)
    print(f"B={B:7.0f}  d={d:.3e}  mixed {exact:12.3f}  asymptote {asym.mixed:12.3f}  "
          f"ratio {exact / asym.mixed:.5f}  plain MSE {asym.nonweighted:10.1f}")
