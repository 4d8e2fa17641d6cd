# %% [markdown]
# # Permutation-invariant variant
#
# Disjoint blocks depend on how the sample is split. Averaging the score
# over all size-n subsets removes that dependence; sampling subsets gives a
# cheaper approximation.

# %%
import numpy as np

from robustmean import EstimatorConfig, estimate_block_huber, estimate_ustat
from robustmean.distributions import student_t
from robustmean.harness import run_ustat_agreement

x = np.random.default_rng(3).standard_t(3, 12)
exact = estimate_ustat(x, 3, 1.0).estimate
print(f"exact over all 220 subsets: {exact:+.6f}")
print(f"after shuffling the sample: {estimate_ustat(np.random.default_rng(4).permutation(x), 3, 1.0).estimate:+.6f}")
for seed in range(3):
    split = estimate_block_huber(x, EstimatorConfig(k=4, n=3, delta=1.0, seed=seed)).estimate
    print(f"disjoint split seed {seed}:     {split:+.6f}")

# %%
for B in (20, 100, 1000):
    print(f"incomplete B={B:<5} {estimate_ustat(x, 3, 1.0, mode='incomplete', B=B, seed=5).estimate:+.6f}")

# %% agreement report
rep = run_ustat_agreement(student_t(3.0), 12, 3, 1.0, R=50, seed=6)
print(rep.summary())
