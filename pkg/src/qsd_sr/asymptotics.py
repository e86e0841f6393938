"""Large-threshold asymptotics.

For small |lam| the Whittaker numerator of the exact density admits the
third-order expansion (u = 2/(mu^2 x))

    W_{1, xi(lam)/2}(u) = (2/mu^2) e^{-u/2} { 1/x + lam
                          + (2/mu^2) L(u) lam^2
                          + (2/mu^2)^2 [G(u) - 2 L(u)] lam^3 } + O(lam^4),

where G is the Laplace-log integral and L the correction kernel from
:mod:`qsd_sr.specfun`.  Truncating the eigenvalue equation at orders 1, 2, 3
yields the approximations

    lam*   = -1/A,
    lam**  = the near-zero root of  (2/mu^2) L lam^2 + lam + 1/A = 0,
    lam*** = the unique real root of the cubic with the lam^3 term included,

and substituting each truncation back into the density formula yields the
order-1/2/3 density approximations.  The expansion coefficients come from the
index-derivative identities at b = 1/2:

    d W_{1,b}/db     = e^{-x/2},
    d^2 W_{1,b}/db^2 = 2 e^{-x/2} { e^x E1(x) + x G(x) },
    d^3 W_{1,b}/db^3 = 6 e^{-x/2} G(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ThresholdTooSmallError
from .specfun import (
    ModelParams,
    SpectralIndex,
    WhittakerIndex,
    exp_scaled_e1,
    lower_bound_l,
    meijer_g_special,
    whittaker_w_scaled,
)

__all__ = [
    "ApproxSolution",
    "lambda_order1",
    "lambda_order2",
    "lambda_order3",
    "whittaker_expansion3",
    "index_derivative_identity",
    "build_approx",
    "pdf_approx",
]


@dataclass(frozen=True)
class ApproxSolution:
    """Approximation order (1, 2 or 3), the corresponding approximate
    eigenvalue, and the model parameters; exposes the approximate density."""

    order: int
    lambda_approx: float
    params: ModelParams
    denom: float

    def pdf(self, x: float) -> float:
        return _pdf_bracket(self.order, x, self.lambda_approx, self.params) / self.denom


def lambda_order1(params: ModelParams) -> float:
    """First-order eigenvalue approximation -1/A (drift-independent)."""
    return -1.0 / params.A


def lambda_order2(params: ModelParams) -> float:
    """Second-order approximation: the root closest to zero of the quadratic
    truncation.  Raises :class:`ThresholdTooSmallError` when the discriminant
    1 - (8/(mu^2 A)) L(2/(mu^2 A)) is negative (no real solutions)."""
    mu2, A = params.mu2, params.A
    ell = lower_bound_l(2.0 / (mu2 * A))
    disc = 1.0 - 8.0 / (mu2 * A) * ell
    if disc < 0.0:
        raise ThresholdTooSmallError(
            f"quadratic eigenvalue correction has no real roots at mu={params.mu}, "
            f"A={A} (discriminant {disc:.6g})"
        )
    return -0.25 * mu2 * (1.0 - math.sqrt(disc)) / ell


def _cubic_coefficients(params: ModelParams):
    mu2, A = params.mu2, params.A
    u = 2.0 / (mu2 * A)
    ell = lower_bound_l(u)
    gee = meijer_g_special(u)
    c3 = (2.0 / mu2) ** 2 * (gee - 2.0 * ell)
    c2 = 2.0 / mu2 * ell
    return c3, c2, 1.0, 1.0 / A


def lambda_order3(params: ModelParams) -> float:
    """Third-order approximation: the unique real root of the cubic
    truncation, found in closed form and polished with one Newton step.

    Raises :class:`ThresholdTooSmallError` when the cubic has three real
    roots (the truncation is then ambiguous) or degenerates.  Note the
    leading coefficient is positive for large A; uniqueness of the real root
    is decided by the discriminant, not the coefficient sign.
    """
    c3, c2, c1, c0 = _cubic_coefficients(params)
    if c3 == 0.0:
        raise ThresholdTooSmallError(
            f"cubic eigenvalue correction degenerates at mu={params.mu}, A={params.A}"
        )
    # depressed form t^3 + p t + q, lam = t - c2/(3 c3)
    shift = c2 / (3.0 * c3)
    p = (3.0 * c3 * c1 - c2 * c2) / (3.0 * c3 * c3)
    q = (2.0 * c2**3 - 9.0 * c3 * c2 * c1 + 27.0 * c3 * c3 * c0) / (27.0 * c3**3)
    disc = (q * q) / 4.0 + (p**3) / 27.0
    if disc <= 0.0:
        # three real roots (counting multiplicity): no single real solution
        raise ThresholdTooSmallError(
            f"cubic eigenvalue correction has three real roots at mu={params.mu}, "
            f"A={params.A} (discriminant {disc:.6g}, coefficients "
            f"{c3:.6g}, {c2:.6g}, {c1:.6g}, {c0:.6g})"
        )
    s = math.sqrt(disc)
    # pick the larger-magnitude cube root to avoid cancellation
    u1 = -0.5 * q + s if q <= 0.0 else -0.5 * q - s
    t1 = math.copysign(abs(u1) ** (1.0 / 3.0), u1)
    t = t1 - p / (3.0 * t1)
    lam = t - shift
    # one Newton polish on the cubic
    f = ((c3 * lam + c2) * lam + c1) * lam + c0
    df = (3.0 * c3 * lam + 2.0 * c2) * lam + c1
    if df != 0.0:
        lam -= f / df
    return lam


def whittaker_expansion3(x: float, lam: float, params: ModelParams) -> float:
    """Third-order truncation of W_{1, xi(lam)/2}(2/(mu^2 x)) around lam = 0."""
    if not (x > 0.0):
        raise DomainError(f"expansion argument must be positive, got {x}")
    mu2 = params.mu2
    u = 2.0 / (mu2 * x)
    ell = lower_bound_l(u)
    gee = meijer_g_special(u)
    bracket = (
        1.0 / x
        + lam
        + (2.0 / mu2) * ell * lam * lam
        + (2.0 / mu2) ** 2 * (gee - 2.0 * ell) * lam**3
    )
    return 2.0 / mu2 * math.exp(-1.0 / (mu2 * x)) * bracket


def index_derivative_identity(k: int, x: float) -> float:
    """Closed form of the k-th derivative of W_{1,b}(x) in b at b = 1/2."""
    if x <= 0.0:
        raise DomainError(f"argument must be positive, got {x}")
    if k == 1:
        return math.exp(-0.5 * x)
    if k == 2:
        return 2.0 * math.exp(-0.5 * x) * (exp_scaled_e1(x) + x * meijer_g_special(x))
    if k == 3:
        return 6.0 * math.exp(-0.5 * x) * meijer_g_special(x)
    raise DomainError(f"derivative order must be 1, 2 or 3, got {k}")


def _pdf_bracket(order: int, x: float, lam: float, params: ModelParams) -> float:
    """Un-normalized order-k density approximation
    (2/(mu^2 x)) e^{-2/(mu^2 x)} { 1/x + lam + ... }, zero outside (0, A]."""
    A, mu2 = params.A, params.mu2
    if x <= 0.0 or x > A:
        return 0.0
    u = 2.0 / (mu2 * x)
    bracket = 1.0 / x + lam
    if order >= 2:
        bracket += 2.0 / mu2 * lower_bound_l(u) * lam * lam
    if order >= 3:
        bracket += (2.0 / mu2) ** 2 * (meijer_g_special(u) - 2.0 * lower_bound_l(u)) * lam**3
    t = -u
    pre = u * math.exp(t) if t > -745.0 else 0.0
    return pre * bracket


def build_approx(params: ModelParams, order: int) -> ApproxSolution:
    """Assemble the order-1/2/3 approximate solution (eigenvalue plus the
    exact-law normalization denominator evaluated at that eigenvalue)."""
    if order == 1:
        lam = lambda_order1(params)
    elif order == 2:
        lam = lambda_order2(params)
    elif order == 3:
        lam = lambda_order3(params)
    else:
        raise DomainError(f"approximation order must be 1, 2 or 3, got {order}")
    se = SpectralIndex.from_lambda(min(lam, 0.0), params.mu)
    z_a = 2.0 / (params.mu2 * params.A)
    denom = math.exp(-z_a) * whittaker_w_scaled(WhittakerIndex(0, se.b), z_a)
    return ApproxSolution(order=order, lambda_approx=lam, params=params, denom=denom)


def pdf_approx(order: int, x: float, params: ModelParams) -> float:
    """Order-k approximate density at a single point.  For grid evaluation
    prefer :func:`build_approx`, which solves for the eigenvalue once."""
    return build_approx(params, order).pdf(x)
