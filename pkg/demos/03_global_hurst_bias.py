# coding: utf-8

# # Global Hurst estimates and the choice of block sizes
#
# The global exponent is the slope of ln mean(R/sigma) against ln n over
# non-overlapping blocks.  Small blocks carry the same small-sample bias as
# the local exponent, which matters most for anti-persistent series.
#
# Run from the repository root:  python demos/03_global_hurst_bias.py

# In[1]:

import numpy as np

from intradayhurst import FgnSpec, gen_fgn, global_hurst
from intradayhurst.rs import default_lengths


# # Median estimates over 30 seeds
#
# N = 2^14.  The default grid runs 8, 16, ..., N/4.  Dropping the smallest
# blocks trades variance for bias.

# In[2]:

N = 2 ** 14
grids = {
    "8..N/4 (default)": default_lengths(N),
    "32..N/4": default_lengths(N, smallest=32),
    "64..N/4": default_lengths(N, smallest=64),
}
samples = {H: [gen_fgn(FgnSpec(H, N, seed)).values for seed in range(30)] for H in (0.3, 0.5, 0.7)}

print(f"{'grid':18s}" + "".join(f"   H={H}" for H in samples))
for label, lengths in grids.items():
    medians = [np.median([global_hurst(x, lengths).exponent_h for x in xs]) for xs in samples.values()]
    print(f"{label:18s}" + "".join(f"  {m:6.3f}" for m in medians))


# # One fit in detail
#
# The fitted points are kept so the regression can be audited.

# In[3]:

fit = global_hurst(samples[0.7][0])
print(f"H = {fit.exponent_h:.4f}, intercept = {fit.intercept:.4f}, r^2 = {fit.r_squared:.4f}")
for n, mean_rs in fit.points:
    print(f"  n = {n:5d}   mean R/sigma = {mean_rs:8.3f}")
