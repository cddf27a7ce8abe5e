"""
Proportional distortion over a Gaussian channel
===============================================
"""
import numpy as np

from proprd import ratefn as rf

# smallest SNR that allows a 10% proportional error
snr = rf.min_snr_for_distortion(0.1)
print(f"Gaussian: SNR_min = {snr:.3f} ({rf.snr_db(snr):.2f} dB)")

# non-Gaussian marginals need less
for kind in ("uniform", "laplace"):
    div = rf.divergence_rate_iid(rf.MarginalFamily(kind))
    snr = rf.min_snr_for_distortion(0.1, div)
    print(f"{kind:8s}: D = {div:.5f}, SNR_min = {snr:.3f} ({rf.snr_db(snr):.2f} dB)")

# the bound as a function of SNR
for s in np.geomspace(0.1, 1000, 5):
    print(f"SNR {s:8.2f}  d/S >= {rf.channel_distortion_bound(s):.5f}")
