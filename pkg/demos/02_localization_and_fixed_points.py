# Star-hull localization and the isomorphic fixed point.
#
# Take a finite class of nonnegative-mean functions. Scaling each member g
# down by theta in [0,1] subject to theta * Eg <= level produces the
# localized star hull; its expected empirical-process supremum, as a
# function of the level, crosses (eps/4) * level exactly once, and that
# crossing is the level above which empirical means track population means
# up to (1 +- eps) factors. We estimate the crossing by Monte Carlo plus
# bisection and check the claimed equivalence on fresh draws.

import numpy as np

from oraclebench import (
    LocalizedSupInput,
    expected_localized_sup,
    fixed_point_lambda,
    localized_star_hull_sup,
    peeling_bound,
)

rng = np.random.default_rng(7)
M, n = 6, 400
means = rng.uniform(0.1, 0.6, M)          # population risks of the class
print("population means:", np.round(means, 3))


def sampler(stream):
    # empirical means of M Bernoulli losses on n points
    emp = stream.binomial(n, means) / n
    return means, np.abs(means - emp)


print()
print("=== the localized supremum grows with the level, then saturates ===")
probe = np.random.default_rng(1)
m_, d_ = sampler(probe)
for level in (0.05, 0.15, 0.3, 0.6, 1.0):
    value = localized_star_hull_sup(LocalizedSupInput(means=m_, deviations=d_, level=level))
    print(f"level={level:4.2f}  sup over hull = {value:.5f}")

print()
print("=== Monte Carlo fixed point ===")
eps = 0.25
phi = lambda lam: expected_localized_sup(sampler, lam, replications=500, rng=42).mean
lam_star = fixed_point_lambda(phi, eps, bracket_hi=1.0, tol=1e-5)
est = expected_localized_sup(sampler, lam_star, replications=500, rng=42)
print(f"eps = {eps}: fixed point lambda* = {lam_star:.5f}")
print(f"E sup at lambda*   = {est.mean:.5f} +- {est.stderr:.5f}  (target (eps/4)*lambda* = {eps / 4 * lam_star:.5f})")

print()
print("=== equivalence of empirical and population means above lambda* ===")
hits = 0
reps = 2000
for r in range(reps):
    stream = np.random.default_rng(r + 1000)
    emp = stream.binomial(n, means) / n
    scale = np.maximum(means, lam_star)
    hits += np.all(np.abs(means - emp) <= eps * scale)
print(f"fraction of draws with |Eg - P_n g| <= eps*max(Eg, lambda*) for all g: {hits / reps:.4f}")

print()
print("=== peeling: a dyadic-shell bound on the same quantity ===")
per_level = lambda mu: float(np.sqrt(mu * np.log(M) / n))
bound = peeling_bound(per_level, lam_star, float(means.min()), i_max=40)
print(f"peeled bound at lambda* = {bound.value:.5f} using {bound.terms} shells "
      f"(direct estimate was {est.mean:.5f})")
