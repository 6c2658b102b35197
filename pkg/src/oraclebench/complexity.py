"""Localized empirical process suprema and metric complexity estimates.

The star hull of a class of nonnegative-mean functions is the set of all
down-scalings theta*g with theta in [0,1]; localizing at level lam keeps the
scalings whose mean is at most lam. For a finite class the supremum of
|(P - P_n)h| over the localized hull is exact: the deviation of theta*g is
linear in theta, so each g contributes at its largest admissible scaling.

The fixed point of lam -> E sup over the localized hull, compared against
(eps/4)*lam, is the level above which empirical and population means are
equivalent; bisection is valid because E sup / lam is nonincreasing in lam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import BracketError, InvalidInputError
from .model import RiskEstimate

__all__ = [
    "LocalizedSupInput",
    "ComplexityProfile",
    "PeelingBound",
    "sup_deviation",
    "localized_star_hull_sup",
    "expected_localized_sup",
    "fixed_point_lambda",
    "peeling_bound",
    "covering_number",
    "dudley_gamma2",
    "maurey_l1_gamma2",
    "lq_localized_bound",
    "l1_complexity_profile",
]

_DOUBLINGS = 60


@dataclass(frozen=True)
class LocalizedSupInput:
    """Per-member means and deviations of a finite class, plus a level.

    ``means[j]`` is the population mean of the j-th (nonnegative) function,
    ``deviations[j]`` the absolute gap |P g_j - P_n g_j| on one draw, and
    ``level`` the localization level.
    """

    means: np.ndarray
    deviations: np.ndarray
    level: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        devs = np.asarray(self.deviations, dtype=float)
        if means.ndim != 1 or means.size < 1 or devs.shape != means.shape:
            raise InvalidInputError("means and deviations must be nonempty equal-length vectors")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(devs))):
            raise InvalidInputError("means and deviations must be finite")
        if np.any(means < 0):
            raise InvalidInputError("means must be nonnegative (losses are nonnegative)")
        if np.any(devs < 0):
            raise InvalidInputError("deviations must be nonnegative")
        if self.level < 0:
            raise InvalidInputError("level must be nonnegative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "deviations", devs)


def sup_deviation(means, empirical_means):
    """Largest absolute gap between population and empirical means."""
    means = np.asarray(means, dtype=float)
    emp = np.asarray(empirical_means, dtype=float)
    if means.ndim != 1 or means.size < 1 or emp.shape != means.shape:
        raise InvalidInputError("inputs must be nonempty equal-length vectors")
    if not (np.all(np.isfinite(means)) and np.all(np.isfinite(emp))):
        raise InvalidInputError("inputs must be finite")
    return float(np.max(np.abs(means - emp)))


def localized_star_hull_sup(inp):
    """Exact supremum of scaled deviations over the localized star hull.

    Each member g may be scaled by theta in [0, 1] subject to
    theta * mean_g <= level; a zero-mean member is unconstrained. Since the
    scaled deviation is linear in theta, the supremum over the hull is
    max_g min(1, level / mean_g) * deviation_g.
    """
    means = inp.means
    with np.errstate(divide="ignore"):
        caps = np.where(means > 0, inp.level / np.where(means > 0, means, 1.0), np.inf)
    theta = np.minimum(1.0, caps)
    return float(np.max(theta * inp.deviations))


def expected_localized_sup(class_sampler, level, replications, rng):
    """Monte Carlo estimate of the expected localized star-hull supremum.

    ``class_sampler(rng)`` must return a ``(means, deviations)`` pair for a
    fresh draw. Replication streams are spawned deterministically from the
    seed, so the result does not depend on evaluation order; passing the same
    integer seed at different levels replays identical draws, which keeps the
    map level -> estimate pointwise monotone for fixed-point bisection.
    """
    replications = int(replications)
    if replications < 1:
        raise InvalidInputError("replications must be >= 1")
    if isinstance(rng, np.random.Generator):
        seeds = rng.integers(0, 2**63 - 1, size=replications)
        streams = [np.random.default_rng(int(s)) for s in seeds]
    else:
        streams = [np.random.default_rng(c) for c in np.random.SeedSequence(rng).spawn(replications)]
    values = np.empty(replications)
    for i, stream in enumerate(streams):
        means, deviations = class_sampler(stream)
        values[i] = localized_star_hull_sup(
            LocalizedSupInput(means=means, deviations=deviations, level=level)
        )
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(replications)) if replications > 1 else 0.0
    return RiskEstimate(mean=mean, stderr=stderr, count=replications)


def fixed_point_lambda(phi, epsilon, bracket_hi, tol=1e-9):
    """Smallest level lam (within tol) with phi(lam) <= (epsilon/4) * lam.

    ``phi`` evaluates the expected localized supremum at a level; since
    phi(lam)/lam is nonincreasing, the sign of phi(lam) - (epsilon/4)*lam
    changes once and bisection applies. The upper bracket is doubled up to
    60 times before a BracketError is raised; the lower bracket is tol.
    """
    if not 0 < epsilon < 0.5:
        raise InvalidInputError("epsilon must lie in (0, 1/2)")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    if bracket_hi <= 0:
        raise InvalidInputError("bracket_hi must be positive")
    slope = epsilon / 4.0

    hi = float(bracket_hi)
    for _ in range(_DOUBLINGS + 1):
        if phi(hi) <= slope * hi:
            break
        hi *= 2.0
    else:
        raise BracketError(
            f"phi exceeds (epsilon/4)*lam up to lam={hi:g}; enlarge bracket_hi"
        )

    lo = min(tol, hi)
    if phi(lo) <= slope * lo:
        return float(lo)
    while hi - lo > tol:
        mid = 0.5 * (hi + lo)
        if phi(mid) <= slope * mid:
            hi = mid
        else:
            lo = mid
    return float(hi)


class PeelingBound(NamedTuple):
    """Value of a peeled sum plus the dyadic levels that contributed."""

    value: float
    terms: int
    last_level: int


def peeling_bound(per_level_bound, lam, r_star, i_max):
    """Dyadic-shell bound on the expected localized supremum.

    Sums 2^{-i} * per_level_bound(2^{i+1} * lam) over shells i = 0..i_max
    whose level 2^{i+1}*lam reaches r_star, the smallest mean in the class;
    shells below r_star are empty and contribute nothing.
    """
    if lam <= 0:
        raise InvalidInputError("lam must be positive")
    if r_star < 0:
        raise InvalidInputError("r_star must be nonnegative")
    i_max = int(i_max)
    if i_max < 0:
        raise InvalidInputError("i_max must be >= 0")
    total = 0.0
    terms = 0
    last = -1
    for i in range(i_max + 1):
        mu = math.ldexp(lam, i + 1)
        if mu < r_star:
            continue
        value = per_level_bound(mu)
        if value < 0:
            raise InvalidInputError("per_level_bound must be nonnegative")
        total += math.ldexp(value, -i)
        terms += 1
        last = i
    return PeelingBound(value=total, terms=terms, last_level=last)


def _pairwise_sup_distances(points):
    # (m, m) matrix of sup-metric distances, O(m^2 d)
    diffs = points[:, None, :] - points[None, :, :]
    return np.max(np.abs(diffs), axis=2)


def _as_point_array(points):
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InvalidInputError("points must be a nonempty m x dim array")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("points contain non-finite values")
    return arr


def _farthest_point_radii(points):
    """Covering radii of the farthest-point traversal, starting at index 0.

    radii[k] is the covering radius achieved by the first k+1 centers. The
    traversal does not depend on any target radius, so the implied covering
    number is nonincreasing in the radius by construction.
    """
    m = points.shape[0]
    dist = np.max(np.abs(points - points[0]), axis=1)
    radii = np.empty(m)
    radii[0] = dist.max()
    for k in range(1, m):
        nxt = int(np.argmax(dist))
        if dist[nxt] == 0.0:
            radii[k:] = 0.0
            return radii
        dist = np.minimum(dist, np.max(np.abs(points - points[nxt]), axis=1))
        radii[k] = dist.max()
    return radii


def _prefix_radii(points):
    """Farthest-point covering radii of every index prefix of the point set.

    Taking the covering count as a max over prefixes keeps it from shrinking
    when a point is appended (greedy traversals can reroute and cover a
    superset with fewer centers, which would break monotonicity otherwise).
    """
    return [_farthest_point_radii(points[: m + 1]) for m in range(points.shape[0])]


def _count_at(prefix_radii, eps):
    best = 1
    for radii in prefix_radii:
        count = int(np.argmax(radii <= eps)) + 1
        if count > best:
            best = count
    return best


def covering_number(points, radius):
    """Greedy upper bound on the covering number in the sup metric.

    The count at a radius is the number of farthest-point-traversal centers
    needed before the residual covering radius drops to that radius,
    maximized over index prefixes of the point set. Exact when radius >=
    diameter (one ball) and when radius falls below the smallest positive
    pairwise distance (every point its own ball); nonincreasing in the
    radius and never smaller after appending a point.
    """
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    pts = _as_point_array(points)
    return _count_at(_prefix_radii(pts), radius)


def dudley_gamma2(points, scales=20):
    """Entropy-integral bound on the gamma_2 functional in the sup metric.

    Upper Riemann sum of sqrt(log N(eps)) over the dyadic grid of radii from
    the diameter down to diameter / 2^scales, refined by the covering-radius
    breakpoints of N. Because N is piecewise constant between breakpoints,
    the refined sum equals the exact integral of the step function for any
    number of scales. Returns 0 for a singleton or an all-duplicate set.
    """
    scales = int(scales)
    if scales < 1:
        raise InvalidInputError("scales must be >= 1")
    pts = _as_point_array(points)
    m = pts.shape[0]
    if m == 1:
        return 0.0
    prefix_radii = _prefix_radii(pts)
    diam = float(_pairwise_sup_distances(pts).max())
    if diam == 0.0:
        return 0.0
    cuts = {diam / 2.0**k for k in range(scales + 1)}
    cuts.update(float(r) for radii in prefix_radii for r in radii)
    cuts.add(0.0)
    grid = sorted(c for c in cuts if 0.0 <= c <= diam)
    total = 0.0
    for lo, hi in zip(grid, grid[1:]):
        count = _count_at(prefix_radii, 0.5 * (lo + hi))
        total += (hi - lo) * math.sqrt(math.log(count))
    return total


def maurey_l1_gamma2(r, max_x_inf, n, d, c0=1.0):
    """Empirical-method complexity of an l1 ball of linear predictors.

    Evaluates c0 * r * max_i ||X_i||_inf * log(d) * log(sqrt(n)/log(d)); the
    last factor is clamped below at 1 so the bound stays meaningful when
    sqrt(n) does not exceed log(d).
    """
    if r < 0 or max_x_inf < 0:
        raise InvalidInputError("r and max_x_inf must be nonnegative")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if d < 2:
        raise InvalidInputError("d must be >= 2")
    log_d = math.log(d)
    tail = max(1.0, math.log(math.sqrt(n) / log_d)) if math.sqrt(n) > log_d else 1.0
    return c0 * r * max_x_inf * log_d * tail


def lq_localized_bound(mu, un, m_psi1, n, q, c0=1.0):
    """Expected localized supremum bound for the L_q loss class.

    For q = 2 the bound is c0 * max(sqrt(mu*U/n), U/n) with U the expected
    squared chaining complexity of the localized coordinate projection. For
    q > 2 the envelope scale M enters through the factor (M log n)^{(q-2)/q}
    and an additive (M log n)/n term.
    """
    if q < 2:
        raise InvalidInputError("q must be >= 2")
    if n < 2:
        raise InvalidInputError("n must be >= 2")
    for name, value in (("mu", mu), ("un", un), ("m_psi1", m_psi1), ("c0", c0)):
        if value < 0:
            raise InvalidInputError(f"{name} must be nonnegative")
    base = math.sqrt(mu * un / n)
    if q == 2:
        return c0 * max(base, un / n)
    factor = (m_psi1 * math.log(n)) ** ((q - 2.0) / q)
    return c0 * max(base * math.sqrt(factor), (un / n) * factor, m_psi1 * math.log(n) / n)


@dataclass(frozen=True)
class ComplexityProfile:
    """Radius-indexed complexity maps for a family of nested models.

    ``lambda_star(r)`` is the isomorphic level of the radius-r model,
    ``bn(r)`` its second-moment control constant, and ``phi_n(r)`` its
    envelope psi_1 bound; all three are nondecreasing in r. The profile is
    tied to a sample size n and a localization epsilon in (0, 1/2).
    """

    n: float
    epsilon: float
    lambda_star: Callable[[float], float]
    bn: Callable[[float], float]
    phi_n: Callable[[float], float]

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise InvalidInputError("epsilon must lie in (0, 1/2)")
        if self.n < 1:
            raise InvalidInputError("n must be >= 1")


def l1_complexity_profile(n, d, q, kd, epsilon, c_lambda=1.0, c_bern=1.0, c_env=1.0):
    """Closed-form complexity profile for l1 balls under the L_q loss.

    With h(n,d) = kd^q (log n)^{(4q-2)/q} (log d)^2, the maps are

        lambda_star(r) = c_lambda * (1+r)^q * h(n,d) / (n epsilon^2),
        bn(r)          = c_bern * (2 kd)^q * (1+r)^q * log(e n),
        phi_n(r)       = c_env * kd^q * (log n) * (1+r)^q.

    All three are nondecreasing in r and homogeneous of degree q in kd.
    """
    if n < 2 or d < 2:
        raise InvalidInputError("n and d must be >= 2")
    if q < 2:
        raise InvalidInputError("q must be >= 2")
    if kd <= 0:
        raise InvalidInputError("kd must be positive")
    if not 0 < epsilon < 0.5:
        raise InvalidInputError("epsilon must lie in (0, 1/2)")
    h = kd**q * math.log(n) ** ((4.0 * q - 2.0) / q) * math.log(d) ** 2

    def lambda_star(r):
        return c_lambda * (1.0 + r) ** q * h / (n * epsilon**2)

    def bn(r):
        return c_bern * (2.0 * kd) ** q * (1.0 + r) ** q * math.log(math.e * n)

    def phi_n(r):
        return c_env * kd**q * math.log(n) * (1.0 + r) ** q

    return ComplexityProfile(n=float(n), epsilon=float(epsilon), lambda_star=lambda_star, bn=bn, phi_n=phi_n)
