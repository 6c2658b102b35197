"""Regularized least squares with l1-power penalties, plus residual builders.

The central estimator minimizes

    F(beta) = mean_i |y_i - <x_i, beta>|^q + pen * ||beta||_1^q,   q >= 2,

by radius decomposition: the outer problem min_r V(r) + pen * r^q is a
one-dimensional convex search over the l1 radius (V(r), the constrained
minimum of the smooth risk over the l1 ball of radius r, is convex and
nonincreasing in r), and each inner problem is solved by projected gradient
with a backtracking line search. The same mechanism covers every q >= 2,
so the quadratic case carries no special-purpose proximal code.

The closed-form builders at the bottom evaluate penalty levels and the
residual terms that appear in nonexact oracle inequalities for ERM and RERM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidProfileError, IterationLimitError

__all__ = [
    "RermSolution",
    "ResidualSpec",
    "project_l1_ball",
    "solve_lq_rerm",
    "solve_square_lasso",
    "solve_lasso",
    "l1_penalty_level",
    "erm_residual",
    "rerm_residual",
    "generalized_inverse",
    "criterion_bound",
    "rerm_regularizer",
    "vc_rate",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_ARMIJO = 1e-4
_RMAX_CAP = 2.0**60


@dataclass(frozen=True)
class RermSolution:
    """Solution of a penalized regression: coefficients and a certificate.

    ``objective`` is the empirical risk at ``beta`` plus the penalty term,
    ``inner_radius`` the l1 radius at which the outer search stopped, and
    ``optimality_gap`` bounds how far the objective can sit above the best
    value seen by the search.
    """

    beta: np.ndarray
    objective: float
    inner_radius: float
    optimality_gap: float

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).copy()
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        if self.inner_radius < 0 or self.optimality_gap < 0:
            raise InvalidInputError("inner_radius and optimality_gap must be nonnegative")


def project_l1_ball(v, radius):
    """Euclidean projection onto the l1 ball of the given radius.

    Points already inside are returned unchanged; otherwise the projection is
    the soft-thresholding of v at the threshold theta solving
    sum_i max(|v_i| - theta, 0) = radius, found from the sorted magnitudes.
    """
    if radius < 0:
        raise InvalidInputError("radius must be nonnegative")
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("vector contains non-finite values")
    absv = np.abs(v)
    if absv.sum() <= radius:
        return v.copy()
    if radius == 0.0:
        return np.zeros_like(v)
    u = np.sort(absv)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    candidates = (css - radius) / k
    rho = np.nonzero(u > candidates)[0][-1]
    theta = candidates[rho]
    return np.sign(v) * np.maximum(absv - theta, 0.0)


class _LqObjective:
    """Smooth part of the penalized objective: mean_i |y_i - <x_i, b>|^q.

    For q = 2 risk and gradient are evaluated through the Gram matrix, which
    makes inner iterations O(d^2) instead of O(n d). The gradient of |u|^q is
    q |u|^{q-1} sign(u), continuous for q >= 2.
    """

    def __init__(self, sample, q):
        self.X = sample.design
        self.y = sample.response
        self.n, self.d = self.X.shape
        self.q = float(q)
        if self.q == 2.0:
            self.gram = self.X.T @ self.X / self.n
            self.xty = self.X.T @ self.y / self.n
            self.y2m = float(self.y @ self.y) / self.n

    def risk_exact(self, beta):
        resid = self.y - self.X @ beta
        return float(np.mean(np.abs(resid) ** self.q))

    def value_and_grad(self, beta):
        if self.q == 2.0:
            gb = self.gram @ beta
            value = self.y2m - 2.0 * float(self.xty @ beta) + float(beta @ gb)
            return max(value, 0.0), 2.0 * (gb - self.xty)
        resid = self.y - self.X @ beta
        absr = np.abs(resid)
        value = float(np.mean(absr**self.q))
        grad = -(self.q / self.n) * (self.X.T @ (np.sign(resid) * absr ** (self.q - 1.0)))
        return value, grad

    def lipschitz_estimate(self, beta):
        """Largest Hessian eigenvalue, exact for q = 2, local probe otherwise."""
        if self.q == 2.0:
            return 2.0 * float(np.linalg.eigvalsh(self.gram)[-1])
        resid = self.y - self.X @ beta
        weights = np.abs(resid) ** (self.q - 2.0)
        hess = (self.q * (self.q - 1.0) / self.n) * (self.X.T @ (self.X * weights[:, None]))
        return float(np.linalg.eigvalsh(hess)[-1])


def _inner_solve(obj, radius, beta0, step0, decrease_tol, budget):
    """Projected gradient over the l1 ball of the given radius.

    Runs until one backtracked step decreases the objective by at most
    ``decrease_tol`` and moves the iterate by a negligible amount. Returns
    the iterate, its smooth objective value, the last observed decrease (the
    fixed-point residual in objective units), and the iterations consumed.
    """
    beta = project_l1_ball(beta0, radius)
    value, grad = obj.value_and_grad(beta)
    step = step0
    used = 0
    residual = math.inf
    while used < budget:
        used += 1
        while True:
            cand = project_l1_ball(beta - step * grad, radius)
            delta = cand - beta
            move2 = float(delta @ delta)
            cand_value, cand_grad = obj.value_and_grad(cand)
            if cand_value <= value - _ARMIJO * move2 / max(step, 1e-300) or move2 == 0.0:
                break
            step *= 0.5
            if step < 1e-280:
                break
        decrease = value - cand_value
        moved = math.sqrt(move2)
        if cand_value <= value:
            beta, value, grad = cand, cand_value, cand_grad
            residual = max(decrease, 0.0)
        else:
            residual = 0.0
            break
        step *= 1.25
        if decrease <= decrease_tol and moved <= 1e-9 * (1.0 + float(np.abs(beta).max(initial=0.0))):
            break
    return beta, value, residual, used


def solve_lq_rerm(sample, q, penalty_coef, tol=1e-8, max_iter=200_000):
    """Minimize the L_q empirical risk plus ``penalty_coef * ||beta||_1^q``.

    Outer search: golden section over the l1 radius on [0, r_max], where
    r_max starts at 1 and doubles until the outer objective stops improving
    (capped at 2^60). Inner solves start from zero and are warm-started from
    the best iterate so far; on rank-deficient designs with a vanishing
    penalty the reported minimizer is the one this initialization reaches
    (minimizers are not unique there). The returned ``optimality_gap`` is the
    larger of the final bracket's objective spread and the last inner
    fixed-point residual, and is at most ``tol`` on success; exceeding
    ``max_iter`` total inner iterations raises IterationLimitError carrying
    the best solution found.
    """
    if q < 2:
        raise InvalidInputError("q must be >= 2")
    if penalty_coef < 0:
        raise InvalidInputError("penalty_coef must be nonnegative")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    obj = _LqObjective(sample, q)
    pen = float(penalty_coef)
    lip = obj.lipschitz_estimate(np.zeros(obj.d))
    step0 = 1.0 / max(lip, 1e-12)
    decrease_tol = 0.05 * tol

    budget = [int(max_iter)]
    cache = {}
    best = {"g": math.inf, "r": 0.0, "beta": np.zeros(obj.d), "residual": 0.0}

    def outer(r):
        if r in cache:
            return cache[r]
        if budget[0] <= 0:
            raise IterationLimitError(
                "iteration budget exhausted", best=_pack(best, obj, pen, q, math.inf)
            )
        beta, value, residual, used = _inner_solve(
            obj, r, best["beta"], step0, decrease_tol, budget[0]
        )
        budget[0] -= used
        g = value + pen * r**q
        cache[r] = g
        if g < best["g"]:
            best.update(g=g, r=r, beta=beta, residual=residual)
        return g

    g_zero = outer(0.0)
    r_max = 1.0
    g_prev = g_zero
    g_curr = outer(r_max)
    while g_curr < g_prev - 1e-12 * (1.0 + abs(g_prev)) and r_max < _RMAX_CAP:
        r_max *= 2.0
        g_prev = g_curr
        g_curr = outer(r_max)

    a, b = 0.0, r_max
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    gc, gd = outer(c), outer(d)
    for _ in range(400):
        ga, gb = cache[a], cache[b]
        spread = max(ga, gb, gc, gd) - min(ga, gb, gc, gd)
        if spread <= 0.25 * tol or (b - a) <= 1e-12 * (1.0 + r_max):
            break
        if gc <= gd:
            b, gb = d, gd
            d, gd = c, gc
            c = b - _GOLDEN * (b - a)
            gc = outer(c)
        else:
            a, ga = c, gc
            c, gc = d, gd
            d = a + _GOLDEN * (b - a)
            gd = outer(d)

    # polish the winning radius at a tighter inner tolerance
    beta, value, residual, used = _inner_solve(
        obj, best["r"], best["beta"], step0, 0.02 * tol, max(budget[0], 1000)
    )
    g = value + pen * best["r"] ** q
    if g <= best["g"]:
        best.update(g=g, beta=beta, residual=residual)
    ga, gb = cache[a], cache[b]
    spread = max(ga, gb, gc, gd) - min(ga, gb, gc, gd)
    gap = max(spread, best["residual"])
    return _pack(best, obj, pen, q, gap)


def _pack(best, obj, pen, q, gap):
    beta = best["beta"]
    objective = obj.risk_exact(beta) + pen * float(np.abs(beta).sum()) ** q
    return RermSolution(
        beta=beta,
        objective=objective,
        inner_radius=float(best["r"]),
        optimality_gap=float(min(gap, math.inf)),
    )


def solve_square_lasso(sample, kappa, tol=1e-8, max_iter=200_000):
    """Least squares penalized by ``kappa * ||beta||_1^2 / n``.

    Delegates to :func:`solve_lq_rerm` with q = 2 and penalty coefficient
    kappa / n, inheriting its optimality contract.
    """
    if kappa < 0:
        raise InvalidInputError("kappa must be nonnegative")
    return solve_lq_rerm(sample, q=2.0, penalty_coef=kappa / sample.n, tol=tol, max_iter=max_iter)


def solve_lasso(sample, lambda1, tol=1e-8, max_iter=200_000):
    """Standard lasso: mean squared error plus ``lambda1 * ||beta||_1``.

    Proximal gradient with per-coordinate soft thresholding; iterates until
    the fixed-point residual of the proximal map is at most ``tol``.
    """
    if lambda1 < 0:
        raise InvalidInputError("lambda1 must be nonnegative")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    obj = _LqObjective(sample, 2.0)
    lip = obj.lipschitz_estimate(np.zeros(obj.d))
    step = 1.0 / max(lip, 1e-12)
    thresh = step * lambda1
    beta = np.zeros(obj.d)
    accel = beta.copy()
    t_momentum = 1.0
    for it in range(int(max_iter)):
        _, grad = obj.value_and_grad(accel)
        forward = accel - step * grad
        nxt = np.sign(forward) * np.maximum(np.abs(forward) - thresh, 0.0)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_momentum**2))
        accel = nxt + ((t_momentum - 1.0) / t_next) * (nxt - beta)
        beta, t_momentum = nxt, t_next
        _, grad_at = obj.value_and_grad(beta)
        fwd = beta - step * grad_at
        fixed_point = np.sign(fwd) * np.maximum(np.abs(fwd) - thresh, 0.0)
        if float(np.max(np.abs(beta - fixed_point))) <= tol:
            return beta
    raise IterationLimitError("lasso did not converge", best=beta)


def l1_penalty_level(n, d, x, q, kd, c0=1.0):
    """Theory-driven penalty level for the ||beta||_1^q regularizer.

    Evaluates c0 * kd^q * (log n)^{(4q-2)/q} * (log d)^2 * (x + log n); the
    RERM objective divides this by n * epsilon^2.
    """
    if n < 2 or d < 2:
        raise InvalidInputError("n and d must be >= 2")
    if x <= 0:
        raise InvalidInputError("x must be positive")
    if q < 2:
        raise InvalidInputError("q must be >= 2")
    if kd <= 0:
        raise InvalidInputError("kd must be positive")
    return c0 * kd**q * math.log(n) ** ((4.0 * q - 2.0) / q) * math.log(d) ** 2 * (x + math.log(n))


@dataclass(frozen=True)
class ResidualSpec:
    """Residual term of the ERM oracle inequality and its ingredients.

    ``value`` is max(lambda_star, c0 * (envelope + bernstein/epsilon) * x /
    (n * epsilon)) with ``envelope`` the psi_1 envelope bound and
    ``bernstein`` the second-moment control constant.
    """

    lambda_star: float
    envelope: float
    bernstein: float
    epsilon: float
    x: float
    n: int
    c0: float
    value: float


def erm_residual(lambda_star, bn, big_bn, epsilon, x, n, c0=1.0):
    """Residual budget for the nonexact ERM oracle inequality."""
    if not 0 < epsilon < 0.5:
        raise InvalidInputError("epsilon must lie in (0, 1/2)")
    for name, value in (("lambda_star", lambda_star), ("bn", bn), ("big_bn", big_bn), ("x", x)):
        if value < 0:
            raise InvalidInputError(f"{name} must be nonnegative")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    value = max(lambda_star, c0 * (bn + big_bn / epsilon) * x / (n * epsilon))
    return ResidualSpec(
        lambda_star=float(lambda_star),
        envelope=float(bn),
        bernstein=float(big_bn),
        epsilon=float(epsilon),
        x=float(x),
        n=int(n),
        c0=float(c0),
        value=float(value),
    )


def rerm_residual(profile, r, x, c0=1.0):
    """Radius-indexed residual for the regularized oracle inequality.

    Evaluates max(lambda_star(r), c0 * (phi_n(r) + bn(r)/eps) * (x+1) /
    (n * eps)) from a complexity profile; nondecreasing in r and in x.
    """
    if r < 0:
        raise InvalidInputError("r must be nonnegative")
    if x <= 0:
        raise InvalidInputError("x must be positive")
    eps = profile.epsilon
    deviation = c0 * (profile.phi_n(r) + profile.bn(r) / eps) * (x + 1.0) / (profile.n * eps)
    return float(max(profile.lambda_star(r), deviation))


def generalized_inverse(fn, y, tol=1e-9):
    """sup of r > 0 with fn(r) <= y, for a nondecreasing map.

    ``fn`` is either a callable or a ``(grid, values)`` pair of equal-length
    arrays tabulating a nondecreasing map. Returns 0 when fn exceeds y
    already at 0. For tabulated maps that never exceed y the largest grid
    point is returned; a callable that never exceeds y within the doubling
    budget raises InvalidProfileError.
    """
    if isinstance(fn, tuple):
        grid, values = (np.asarray(a, dtype=float) for a in fn)
        if grid.shape != values.shape or grid.ndim != 1 or grid.size < 1:
            raise InvalidInputError("tabulated map needs equal-length grid and value vectors")
        mask = values <= y
        if not mask.any():
            return 0.0
        return float(grid[np.nonzero(mask)[0][-1]])
    if fn(0.0) > y:
        return 0.0
    hi = 1.0
    for _ in range(200):
        if fn(hi) > y:
            break
        hi *= 2.0
    else:
        raise InvalidProfileError("map does not exceed the target on its range")
    lo = 0.0 if hi == 1.0 else hi / 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (hi + lo)
        if fn(mid) <= y:
            lo = mid
        else:
            hi = mid
    return float(lo)


def criterion_bound(profile, f0_risk, f0_crit, f0_bn, x, epsilon, k1=1.0, k_prime=1.0, bounded_crit=None):
    """A priori bound on the criterion of the regularized minimizer.

    When the criterion is uniformly bounded, that bound is returned directly.
    Otherwise the bound is the larger of k1 * (crit(f0) + 2) and the
    generalized inverse of lambda_star at the anchor function's empirical
    risk ceiling (1+2eps)(3 R(f0) + 2 k' (bn(f0) + bn(crit(f0))) (x+1)/n).
    """
    if bounded_crit is not None:
        return float(bounded_crit)
    if f0_risk < 0 or f0_crit < 0 or f0_bn < 0:
        raise InvalidInputError("anchor quantities must be nonnegative")
    target = (1.0 + 2.0 * epsilon) * (
        3.0 * f0_risk + 2.0 * k_prime * (f0_bn + profile.bn(f0_crit)) * (x + 1.0) / profile.n
    )
    return float(max(k1 * (f0_crit + 2.0), generalized_inverse(profile.lambda_star, target)))


def rerm_regularizer(profile, crit, x, alpha_n, epsilon, c0=1.0):
    """Regularizing function evaluated at a criterion value.

    Evaluates (2 / (1 + 2 epsilon)) * rho(crit + 1, x + log(alpha_n)), where
    rho is the radius-indexed residual of the profile and alpha_n >= 1 is the
    a priori criterion bound.
    """
    if alpha_n < 1:
        raise InvalidInputError("alpha_n must be >= 1")
    if crit < 0:
        raise InvalidInputError("crit must be nonnegative")
    rho = rerm_residual(profile, crit + 1.0, x + math.log(alpha_n), c0)
    return float(2.0 / (1.0 + 2.0 * epsilon) * rho)


def vc_rate(v, n, x, epsilon, c0=1.0):
    """Fast-rate residual for a finite-dimension class under the sign loss.

    Evaluates c0 * x * v * log(e n / v) / (epsilon^2 n) for 1 <= v <= n,
    the reference curve the harness compares empirical rates against.
    """
    if not 1 <= v <= n:
        raise InvalidInputError("need 1 <= v <= n")
    if x <= 0:
        raise InvalidInputError("x must be positive")
    if not 0 < epsilon < 0.5:
        raise InvalidInputError("epsilon must lie in (0, 1/2)")
    return c0 * x * v * math.log(math.e * n / v) / (epsilon**2 * n)
