# %% [markdown]
# # Score functions and the CLT envelope
#
# Scores must be odd, equal the identity on [-1, 1], saturate beyond 2, be
# 1-Lipschitz and bounded by 2, with z - psi(z) nondecreasing. The validator
# reports the largest violation of each property on a grid.

# %%
from robustmean.distributions import pareto, rademacher
from robustmean.score import HUBER, smoothed_huber, validate_assumption1
from robustmean.theory import MomentProfile, g_bound, g_exact_numeric

for s in (HUBER, smoothed_huber(1.5)):
    print(s.kind, s.psi_max, validate_assumption1(s).violations)

# a score that is too steep fails the Lipschitz check
print("steep", validate_assumption1(lambda z: (2 * z).clip(-1, 1)).violations["lipschitz"])

# %% [markdown]
# The envelope bounds the CLT error of standardised block means up to an
# unspecified constant, so only the ratio to a Monte Carlo value is shown.

# %%
for dist in (rademacher(), pareto(4.0)):
    mp = MomentProfile.from_distribution(dist)
    for n in (1, 10, 100):
        r = g_exact_numeric(dist, n, 0.5, mc_budget=100_000, seed=1)
        print(f"{dist.family:<10} n={n:<4} MC {r.value:.4f} +- {r.stderr:.4f}  bound {g_bound(mp, n, 0.5):.4f}")
