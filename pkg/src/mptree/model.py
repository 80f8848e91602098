"""Generalized binomial step model and its classical specializations.

The tree is parameterized by a five-tuple (gamma, delta, g, v, sigma):
separate annualized drifts for the up and down branches, a base up
probability g, a probability slope v so that the one-step up probability
is p = g + v*sqrt(dt), and the volatility sigma. The one-step factors
come in two flavours:

exact (gross factors are exponentials, always positive)::

    u = exp((gamma - h_u^2/2)*dt + h_u*sqrt(dt)),  h_u = sigma*sqrt((1-p)/p)
    d = exp((delta - h_d^2/2)*dt - h_d*sqrt(dt)),  h_d = sigma*sqrt(p/(1-p))

asymptotic (first-order in dt, the form the small-dt analysis uses)::

    u = 1 + gamma*dt + h_u*sqrt(dt)
    d = 1 + delta*dt - h_d*sqrt(dt)

The two agree to O(dt^(3/2)) per factor. CRR, Jarrow-Rudd, and Tian are
specific parameter choices; constructors for all three are provided along
with the classical closed-form factors used as cross-checks.

With gamma = delta = b and v = 0 the one-step gross-return moments of the
asymptotic tree reproduce the geometric Brownian motion moments
exp(j*(b + (j-1)/2*sigma^2)*dt) up to o(dt) for every order j; the first
two moments match to O(dt^2) for every g, higher ones to O(dt^2) at
g = 1/2 and O(dt^(3/2)) otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "ModelParams",
    "StepFactors",
    "validate_params",
    "p_up",
    "step_factors_exact",
    "step_factors_asymptotic",
    "crr_params",
    "jarrow_rudd_params",
    "tian_params",
    "crr_factors",
    "jarrow_rudd_factors",
    "tian_factors",
    "step_moment",
    "gbm_moment",
    "MAX_MOMENT_ORDER",
]

# Beyond this order u**j at realistic dt either overflows or has lost all
# relative precision, so moment operations refuse rather than return noise.
MAX_MOMENT_ORDER = 64


@dataclass(frozen=True)
class ModelParams:
    """Five-parameter binomial step model.

    Attributes
    ----------
    gamma : float
        Drift of the up branch, per year.
    delta : float
        Drift of the down branch, per year.
    g : float
        Base up probability, in (0, 1).
    v : float
        Probability slope per sqrt(year); p(dt) = g + v*sqrt(dt).
    sigma : float
        Volatility per sqrt(year), positive.
    """

    gamma: float
    delta: float
    g: float
    v: float
    sigma: float

    @property
    def mean_drift(self) -> float:
        """Instantaneous mean b = g*gamma + (1-g)*delta."""
        return self.g * self.gamma + (1.0 - self.g) * self.delta


@dataclass(frozen=True)
class StepFactors:
    """One-period gross up/down factors and the up probability."""

    u: float
    d: float
    p: float

    def __post_init__(self) -> None:
        if not 0.0 < self.d < self.u:
            raise DomainError(
                f"step factors must satisfy 0 < d < u, got d={self.d}, u={self.u}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"up probability must be in (0, 1), got {self.p}")


def validate_params(params: ModelParams, dt: float) -> ModelParams:
    """Check the admissibility of ``params`` at time step ``dt``.

    Raises
    ------
    DomainError
        If g is not strictly inside (0, 1), sigma is not positive, the
        mean drift is not finite, or dt is too coarse to keep
        g + v*sqrt(dt) inside (0, 1).
    """
    if dt <= 0.0:
        raise DomainError(f"time step must be positive, got {dt}")
    if not 0.0 < params.g < 1.0:
        raise DomainError(
            f"base up probability g must lie strictly inside (0, 1), got {params.g}")
    if not params.sigma > 0.0:
        raise DomainError(f"volatility sigma must be positive, got {params.sigma}")
    if not math.isfinite(params.mean_drift):
        raise DomainError("mean drift g*gamma + (1-g)*delta must be finite")
    p = params.g + params.v * math.sqrt(dt)
    if not 0.0 < p < 1.0:
        raise DomainError(
            f"time step too coarse: up probability g + v*sqrt(dt) = {p} "
            f"falls outside (0, 1); shrink dt or adjust (g, v)")
    return params


def p_up(params: ModelParams, dt: float) -> float:
    """One-step up probability p = g + v*sqrt(dt), guaranteed in (0, 1)."""
    validate_params(params, dt)
    return params.g + params.v * math.sqrt(dt)


def step_factors_exact(params: ModelParams, dt: float) -> StepFactors:
    """Exponential-form one-step factors; gross prices stay positive."""
    p = p_up(params, dt)
    sqrt_dt = math.sqrt(dt)
    h_u = params.sigma * math.sqrt((1.0 - p) / p)
    h_d = params.sigma * math.sqrt(p / (1.0 - p))
    u = math.exp((params.gamma - h_u * h_u / 2.0) * dt + h_u * sqrt_dt)
    d = math.exp((params.delta - h_d * h_d / 2.0) * dt - h_d * sqrt_dt)
    return StepFactors(u=u, d=d, p=p)


def step_factors_asymptotic(params: ModelParams, dt: float) -> StepFactors:
    """First-order one-step factors 1 + drift*dt +/- h*sqrt(dt).

    Raises
    ------
    DomainError
        If the down factor is not positive, which signals that dt is too
        coarse for this parameter set.
    """
    p = p_up(params, dt)
    sqrt_dt = math.sqrt(dt)
    u = 1.0 + params.gamma * dt + math.sqrt((1.0 - p) / p) * params.sigma * sqrt_dt
    d = 1.0 + params.delta * dt - math.sqrt(p / (1.0 - p)) * params.sigma * sqrt_dt
    if d <= 0.0:
        raise DomainError(
            f"asymptotic down factor {d} is not positive: dt={dt} too coarse "
            f"for sigma={params.sigma}, p={p}")
    return StepFactors(u=u, d=d, p=p)


def crr_params(r: float, sigma: float) -> ModelParams:
    """Parameters reproducing the Cox-Ross-Rubinstein tree.

    gamma = delta = r, g = 1/2, v = (r - sigma^2/2) / (2*sigma); the
    factors then agree with u = exp(sigma*sqrt(dt)), d = 1/u to
    O(dt^(3/2)) and the probability with the classical one to O(dt^(3/2)).
    """
    _require_positive_sigma(sigma)
    return ModelParams(gamma=r, delta=r, g=0.5,
                       v=(r - sigma * sigma / 2.0) / (2.0 * sigma), sigma=sigma)


def jarrow_rudd_params(r: float, sigma: float) -> ModelParams:
    """Parameters reproducing the Jarrow-Rudd (equal-probability) tree.

    gamma = delta = r, g = 1/2, v = 0; the exact factors coincide with
    exp((r - sigma^2/2)*dt +/- sigma*sqrt(dt)) identically.
    """
    _require_positive_sigma(sigma)
    return ModelParams(gamma=r, delta=r, g=0.5, v=0.0, sigma=sigma)


def tian_params(r: float, sigma: float) -> ModelParams:
    """Parameters reproducing the Tian (third-moment-matched) tree.

    gamma = delta = r, g = 1/2, v = -(3/4)*sigma. With these the
    asymptotic factors agree with :func:`tian_factors` to O(dt^(3/2)) and
    the up probability to O(dt): Tian's probability expands as
    1/2 - (3/4)*sigma*sqrt(dt) + O(dt), and log u = sigma*sqrt(dt)
    + (r + sigma^2)*dt + O(dt^(3/2)), which is what gamma = r combined
    with the v-shifted radicals produces.
    """
    _require_positive_sigma(sigma)
    return ModelParams(gamma=r, delta=r, g=0.5, v=-0.75 * sigma, sigma=sigma)


def crr_factors(r: float, sigma: float, dt: float) -> StepFactors:
    """Classical CRR reference factors: u = exp(sigma*sqrt(dt)), d = 1/u."""
    _require_positive_sigma(sigma)
    if dt <= 0.0:
        raise DomainError(f"time step must be positive, got {dt}")
    u = math.exp(sigma * math.sqrt(dt))
    d = 1.0 / u
    p = (math.exp(r * dt) - d) / (u - d)
    return StepFactors(u=u, d=d, p=p)


def jarrow_rudd_factors(r: float, sigma: float, dt: float) -> StepFactors:
    """Classical Jarrow-Rudd reference factors with p = 1/2."""
    _require_positive_sigma(sigma)
    if dt <= 0.0:
        raise DomainError(f"time step must be positive, got {dt}")
    drift = (r - sigma * sigma / 2.0) * dt
    s = sigma * math.sqrt(dt)
    return StepFactors(u=math.exp(drift + s), d=math.exp(drift - s), p=0.5)


def tian_factors(r: float, sigma: float, dt: float) -> StepFactors:
    """Classical Tian reference factors.

    With V = exp(sigma^2*dt):
    u, d = (1/2)*exp(r*dt)*V*(V + 1 +/- sqrt(V^2 + 2V - 3)) and
    p = (exp(r*dt) - d)/(u - d). Matches the first three one-step
    gross-return moments of a GBM with drift r exactly.
    """
    _require_positive_sigma(sigma)
    if dt <= 0.0:
        raise DomainError(f"time step must be positive, got {dt}")
    grow = math.exp(r * dt)
    v_cap = math.exp(sigma * sigma * dt)
    radical = math.sqrt(v_cap * v_cap + 2.0 * v_cap - 3.0)
    u = 0.5 * grow * v_cap * (v_cap + 1.0 + radical)
    d = 0.5 * grow * v_cap * (v_cap + 1.0 - radical)
    p = (grow - d) / (u - d)
    return StepFactors(u=u, d=d, p=p)


def step_moment(params: ModelParams, dt: float, j: int) -> float:
    """j-th one-step gross-return moment of the asymptotic tree.

    Returns p*u^j + (1-p)*d^j with (u, d, p) from
    :func:`step_factors_asymptotic`.
    """
    _require_moment_order(j)
    f = step_factors_asymptotic(params, dt)
    return f.p * f.u ** j + (1.0 - f.p) * f.d ** j


def gbm_moment(b: float, sigma: float, dt: float, j: int) -> float:
    """j-th moment of the GBM gross return: exp(j*(b + (j-1)/2*sigma^2)*dt)."""
    if dt <= 0.0:
        raise DomainError(f"time step must be positive, got {dt}")
    _require_moment_order(j)
    return math.exp(j * (b + (j - 1) / 2.0 * sigma * sigma) * dt)


def _require_positive_sigma(sigma: float) -> None:
    if not sigma > 0.0:
        raise DomainError(f"volatility sigma must be positive, got {sigma}")


def _require_moment_order(j: int) -> None:
    if not isinstance(j, int) or j < 1:
        raise DomainError(f"moment order must be a positive integer, got {j!r}")
    if j > MAX_MOMENT_ORDER:
        raise DomainError(
            f"moment order {j} exceeds the supported maximum {MAX_MOMENT_ORDER}")
