# %% [markdown]
# # Multivariate estimate from directional estimates
#
# Each unit direction v gets a univariate estimate theta(v) of <mu, v>.
# The estimate is the point closest to all slabs {y : |<y, v> - theta(v)| <= eps},
# found by a small linear program; eps_star is the smallest feasible width.

# %%
import numpy as np

from robustmean import EstimatorConfig, estimate_multivariate
from robustmean.multivariate import DirectionSet, directional_estimates, solve_slab_intersection

rng = np.random.default_rng(5)
mu = np.array([1.0, -2.0, 0.5])
x = mu + rng.standard_t(3, (3000, 3))
x[:10] = 1e5  # a few gross outliers
# k > 2 * (number of outliers) keeps them in a minority of blocks
cfg = EstimatorConfig(k=100, delta="auto:mom_like")

sol = estimate_multivariate(x, cfg)
print("estimate      ", np.round(sol.mu_hat, 4))
print("sample mean   ", np.round(x.mean(axis=0), 4))
print(f"eps_star {sol.eps_star:.4f}, certified lower bound {sol.lower_bound:.4f}")

# %% with only the coordinate axes the slabs are a box and the solution is the column estimates
de = directional_estimates(x, DirectionSet.basis(3), cfg)
box = solve_slab_intersection(de)
print("basis solution", np.round(box.mu_hat, 4), "eps_star", box.eps_star)
