# %% [markdown]
# # Choosing delta: a wide plateau
#
# Delta interpolates between median-of-means (delta small relative to the
# block-mean spread) and the sample mean (delta = inf). Around the robust
# scale estimate sigma_hat the median error barely moves.

# %%
import math

import numpy as np

from robustmean.distributions import student_t
from robustmean.harness import run_regime_sweep

mults = [float(m) for m in 10 ** np.linspace(-1, 1, 9)] + [math.inf]
sw = run_regime_sweep(student_t(3.0), 2000, [10, 40, 200], mults, R=300, seed=8)

# %%
print("multiplier " + " ".join(f"{m:>7.3g}" for m in mults))
for k in sw.ks:
    print(f"k={k:<8} " + " ".join(f"{e:7.4f}" for e in sw.median_errors(k)))

# %% [markdown]
# The inf column is the sample mean (mean of the block means). Very small
# multipliers approach median-of-means, which pays a price at large k.
