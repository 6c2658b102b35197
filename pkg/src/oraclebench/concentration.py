"""Empirical tail-norm estimation and closed-form concentration bounds.

The psi_alpha (Orlicz) norm of a sample is the smallest scale c at which the
empirical exponential moment mean(exp(|x_i|^alpha / c^alpha)) drops to 2.
Everything downstream is plug-in: empirical moments replace expectations, and
population-level claims are left to Monte Carlo replication in the harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "PsiNormEstimate",
    "BernsteinCertificate",
    "psi_alpha_norm",
    "envelope_psi1",
    "weak_variance",
    "bernstein_from_psi1",
    "bernstein_verify",
    "adamczak_bound",
    "single_function_bound",
]

_GROWTH_LIMIT = 200


@dataclass(frozen=True)
class PsiNormEstimate:
    """Empirical psi_alpha norm: the scale, the exponent, and the sample count."""

    alpha: float
    value: float
    sample_count: int

    def __post_init__(self):
        if self.alpha < 1:
            raise InvalidInputError("alpha must be >= 1")
        if self.value < 0:
            raise InvalidInputError("value must be nonnegative")
        if self.sample_count < 1:
            raise InvalidInputError("sample_count must be >= 1")


@dataclass(frozen=True)
class BernsteinCertificate:
    """Second-moment control constant B with its additive B^2/n residual.

    ``checked`` stays False until ``bernstein_verify`` has confirmed the
    empirical moment inequality on actual data.
    """

    bn: float
    residual: float
    checked: bool = False

    def __post_init__(self):
        if self.bn < 0 or self.residual < 0:
            raise InvalidInputError("bn and residual must be nonnegative")


def _empirical_exp_moment(absx, alpha, c):
    with np.errstate(over="ignore"):
        return float(np.mean(np.exp((absx / c) ** alpha)))


def psi_alpha_norm(samples, alpha, tol=1e-9):
    """Empirical psi_alpha norm of a sample by bisection.

    The map c -> mean(exp(|x_i|^alpha / c^alpha)) is strictly decreasing, so
    the smallest c with moment <= 2 is found by growing an upper bracket
    geometrically from max|x_i| and bisecting down to ``tol``. A sample of
    all zeros has norm 0.
    """
    if alpha < 1:
        raise InvalidInputError("alpha must be >= 1")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise InvalidInputError("samples must be a nonempty vector")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("samples contain non-finite values")
    absx = np.abs(x)
    m = int(x.size)
    top = float(absx.max())
    if top == 0.0:
        return PsiNormEstimate(alpha=float(alpha), value=0.0, sample_count=m)

    hi = top
    for _ in range(_GROWTH_LIMIT):
        if _empirical_exp_moment(absx, alpha, hi) <= 2.0:
            break
        hi *= 2.0
    else:
        raise InvalidInputError("failed to bracket the psi norm from above")
    lo = hi / 2.0
    while _empirical_exp_moment(absx, alpha, lo) <= 2.0:
        lo /= 2.0
        if lo < np.finfo(float).tiny:
            lo = 0.0
            break
    while hi - lo > tol:
        mid = 0.5 * (hi + lo)
        if _empirical_exp_moment(absx, alpha, mid) <= 2.0:
            hi = mid
        else:
            lo = mid
    return PsiNormEstimate(alpha=float(alpha), value=float(hi), sample_count=m)


def envelope_psi1(class_values, tol=1e-9):
    """psi_1 norm of the per-draw envelope maxima.

    ``class_values[r, i]`` holds sup over the class of |g(Z_i)| for the i-th
    point of the r-th independent draw; the estimate is the psi_1 norm of the
    per-draw maxima over i.
    """
    try:
        arr = np.asarray(class_values, dtype=float)
    except ValueError as exc:
        raise InvalidInputError("class_values must be a rectangular replications x n matrix") from exc
    if arr.ndim != 2 or arr.size < 1:
        raise InvalidInputError("class_values must be a rectangular replications x n matrix")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("class_values contain non-finite values")
    maxima = np.max(np.abs(arr), axis=1)
    return psi_alpha_norm(maxima, alpha=1.0, tol=tol).value


def weak_variance(second_moments):
    """sqrt of the largest mean-square over the class."""
    arr = np.asarray(second_moments, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidInputError("second_moments must be a nonempty vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidInputError("second_moments must be finite and nonnegative")
    return float(np.sqrt(arr.max()))


def bernstein_from_psi1(psi1, n, c0=1.0):
    """Second-moment control constant for nonnegative subexponential losses.

    A psi_1 diameter D yields B = c0 * D * log(e n); the certificate carries
    the additive residual B^2/n and is marked unchecked until verified on
    data.
    """
    if psi1 < 0:
        raise InvalidInputError("psi1 must be nonnegative")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if c0 <= 0:
        raise InvalidInputError("c0 must be positive")
    bn = c0 * psi1 * math.log(math.e * n)
    return BernsteinCertificate(bn=bn, residual=bn * bn / n, checked=False)


def bernstein_verify(samples, psi1, z):
    """Check the empirical second-moment inequality for nonnegative data.

    Returns True iff mean(x^2) is at most
    log(ez) * psi1 * mean(x) + (4 + 6 log^2(ez) psi1^2) / (ez),
    with psi1 an upper bound on the empirical psi_1 norm of the samples.
    """
    if z < 1:
        raise InvalidInputError("z must be >= 1")
    if psi1 < 0:
        raise InvalidInputError("psi1 must be nonnegative")
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise InvalidInputError("samples must be a nonempty vector")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("samples contain non-finite values")
    if np.any(x < 0):
        raise InvalidInputError("samples must be nonnegative")
    log_ez = math.log(math.e * z)
    lhs = float(np.mean(x * x))
    rhs = log_ez * psi1 * float(np.mean(x)) + (4.0 + 6.0 * log_ez**2 * psi1**2) / (math.e * z)
    return lhs <= rhs


def adamczak_bound(exp_sup, sigma, bn, n, x, alpha, big_k=1.0):
    """High-probability bound on the supremum of an empirical process.

    Evaluates (1+a)*E sup + K*sigma*sqrt(x/n) + K*(1+1/a)*bn*x/n, the
    subexponential-envelope form of Talagrand's inequality.
    """
    for name, value in (
        ("exp_sup", exp_sup),
        ("sigma", sigma),
        ("bn", bn),
        ("x", x),
        ("big_k", big_k),
    ):
        if value < 0:
            raise InvalidInputError(f"{name} must be nonnegative")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if alpha <= 0:
        raise InvalidInputError("alpha must be positive")
    return (
        (1.0 + alpha) * exp_sup
        + big_k * sigma * math.sqrt(x / n)
        + big_k * (1.0 + 1.0 / alpha) * bn * x / n
    )


def single_function_bound(pg, bn_g, bn, n, x, alpha, k_prime=1.0):
    """Upper bound on the empirical mean of one nonnegative function.

    Evaluates (1+2a)*Pg + K'*(1+1/a)*(bn_g + B)*(x+1)/n for alpha in (0,1).
    """
    if not 0 < alpha < 1:
        raise InvalidInputError("alpha must lie in (0, 1)")
    for name, value in (
        ("pg", pg),
        ("bn_g", bn_g),
        ("bn", bn),
        ("x", x),
        ("k_prime", k_prime),
    ):
        if value < 0:
            raise InvalidInputError(f"{name} must be nonnegative")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    return (1.0 + 2.0 * alpha) * pg + k_prime * (1.0 + 1.0 / alpha) * (bn_g + bn) * (x + 1.0) / n
