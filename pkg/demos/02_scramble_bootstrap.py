# coding: utf-8

# # What should h look like when there is no memory?
#
# Even for independent data the local exponent is not 0.5 at small n: the
# rescaled range has a small-sample bias.  Shuffling a series keeps its
# values and destroys their order, so the mean h over many shuffles gives the
# "no memory" baseline to test against.
#
# Run from the repository root:  python demos/02_scramble_bootstrap.py

# In[1]:

import numpy as np

from intradayhurst import BootstrapConfig, FgnSpec, bootstrap_local_hurst, gen_fgn, local_hurst_stream, z_test


# # A persistent series
#
# Fractional Gaussian noise with H = 0.7, one value every two seconds,
# about 36 hours in all so every hour of the day is covered.

# In[2]:

series = gen_fgn(FgnSpec(hurst_h=0.7, length=2 ** 16, seed=3), spacing_seconds=2).to_returns()
observed = {n: local_hurst_stream(series, n) for n in (10, 20)}
for n, s in observed.items():
    print(f"n={n}: observed mean h = {s.mean_h:.4f} over {len(s)} windows")


# # Scramble it 200 times
#
# Each iteration draws its own generator from (master_seed, iteration), so
# the result does not depend on how many worker threads run the iterations.

# In[3]:

boot = bootstrap_local_hurst(series, BootstrapConfig(iterations=200, master_seed=42, workers=2))
for n, b in boot.items():
    print(f"n={n}: E(h) = {b.mean_h:.4f}, sd over iterations = {b.std_h:.4f}, "
          f"sd of single windows = {b.window_std_h:.4f}")


# # The one-sample Z-test
#
# z = (observed mean - E(h)) / (sd / sqrt(number of windows)).  With the
# spread of the iteration means as sd the statistic is enormous; the spread
# of individual windows is the more conservative choice and is accepted as
# an explicit ``std``.

# In[4]:

for n in (10, 20):
    strict = z_test(observed[n], boot[n])
    loose = z_test(observed[n], boot[n], std=boot[n].window_std_h)
    print(f"n={n}: z = {strict.z:9.1f} (iteration sd), {loose.z:7.1f} (window sd), p = {loose.p_two_sided:.2e}")


# # Hour by hour
#
# Timestamps stay where they are while the values move, so each hour keeps
# its own bootstrap mean.

# In[5]:

from intradayhurst.session import hourly_means

mean20 = hourly_means(observed[20].h, observed[20].hour)
above = np.sum(mean20 > boot[20].per_hour_mean)
print(f"observed hourly mean h20 above its bootstrap mean in {above} of 24 hours")
