# %% [markdown]
# # Heavy tails: block score estimator vs sample mean
#
# Student-t(3) has finite variance but no third moment. Splitting the sample
# into k blocks and solving a bounded-score equation on the block means keeps
# the far tail of the error in check while losing little in the bulk. At
# N = 2000 the gain over the sample mean is modest and sits in the 0.999
# quantile, so the comparison needs a couple of thousand paired runs.

# %%
import numpy as np

from robustmean import EstimatorConfig, estimate_block_huber
from robustmean.distributions import student_t
from robustmean.harness import run_deviation_study

# %% one sample
rng = np.random.default_rng(0)
x = student_t(3.0).sample(rng, 2000)
res = estimate_block_huber(x, EstimatorConfig(k=40, delta="auto:mom_like"))
print(f"estimate {res.estimate:+.4f}  sample mean {x.mean():+.4f}  delta used {res.delta:.3f}")

# %% paired deviation quantiles over repeated samples
rep = run_deviation_study(student_t(3.0), 2000, EstimatorConfig(k=40, delta="auto:mom_like"), R=2000, seed=7)
print("level      " + "  ".join(f"{p:>8}" for p in rep.levels))
for name in rep.estimators:
    print(f"{name:<11}" + "  ".join(f"{q:8.5f}" for q in rep.quantiles(name)))

# %% [markdown]
# The sub-Gaussian ratio divides each quantile by
# sigma * sqrt(2 log(2 / (1 - p)) / N); values near 1 mean Gaussian-like tails.

# %%
for name in rep.estimators:
    print(name, [round(r, 3) for r in rep.ratios(name)])
