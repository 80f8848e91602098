"""Least-squares calibration of tree models to an option chain.

Five model families share one pricing path (daily lattice, dt = 1/252,
n = days to maturity):

* ``crr``, ``jr``, ``tian`` - one free parameter, sigma; the remaining
  tree parameters come from the classical-reduction constructors.
* ``mpbin1`` - free (sigma, g) with gamma = delta = r and v = 0, so the
  up probability is g itself.
* ``mpbin2`` - free (sigma, g, p_dt, gamma) with v = (p_dt - g)/sqrt(dt)
  and delta = (r - g*gamma)/(1 - g), which pins the physical mean drift
  at r.

The objective is the sum of squared price differences; reported fit
quality is AAE, APE, ARPE and RMSE. Because every classical family is,
at a fixed dt, an exact slice of mpbin1 (gamma = delta = r with v folded
into the probability) and mpbin1 an exact slice of mpbin2, seeding a
richer model's search with a poorer model's optimum makes the optimal
errors nest monotonically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ArbitrageError, DomainError
from .model import (ModelParams, crr_params, jarrow_rudd_params,
                    step_factors_exact, tian_params, validate_params)
from .optimize import MinimizeConfig, MinimizeResult, minimize
from .pricing import risk_neutral_prob

__all__ = [
    "MODELS",
    "OptionQuote",
    "ErrorMetrics",
    "error_metrics",
    "CalibrationConfig",
    "CalibrationResult",
    "model_prices",
    "calibrate",
    "calibrate_suite",
    "calibration_report_csv",
]

MODELS = ("crr", "jr", "tian", "mpbin1", "mpbin2")

SIGMA_BOUNDS = (1e-4, 5.0)
PROB_BOUNDS = (1e-4, 1.0 - 1e-4)
GAMMA_BOUNDS = (1e-4, 5.0)

TRADING_DAYS_PER_YEAR = 252


@dataclass(frozen=True)
class OptionQuote:
    """One observed call: strike, maturity in trading days, market price."""

    strike: float
    days_to_maturity: int
    market_price: float

    def __post_init__(self) -> None:
        if self.strike <= 0.0:
            raise DomainError(f"strike must be positive, got {self.strike}")
        if self.days_to_maturity < 1:
            raise DomainError(
                f"days to maturity must be >= 1, got {self.days_to_maturity}")
        if self.market_price <= 0.0:
            raise DomainError(
                f"market price must be positive, got {self.market_price}")


@dataclass(frozen=True)
class ErrorMetrics:
    """Fit-quality summary of model against market prices."""

    aae: float
    ape: float
    arpe: float
    rmse: float


def error_metrics(model_prices: Sequence[float],
                  market_prices: Sequence[float]) -> ErrorMetrics:
    """AAE, APE, ARPE and RMSE of model prices against market prices.

    AAE = mean |P - P_hat|; APE = AAE / mean(P); ARPE = mean(|P - P_hat|/P);
    RMSE = sqrt(mean (P - P_hat)^2).
    """
    model = np.asarray(model_prices, dtype=float)
    market = np.asarray(market_prices, dtype=float)
    if model.shape != market.shape or model.ndim != 1 or model.size == 0:
        raise DomainError("price sequences must be equal-length and non-empty")
    if np.any(market <= 0.0):
        raise DomainError("market prices must all be positive")
    abs_err = np.abs(market - model)
    aae = float(abs_err.mean())
    return ErrorMetrics(
        aae=aae,
        ape=aae / float(market.mean()),
        arpe=float((abs_err / market).mean()),
        rmse=float(math.sqrt(np.mean((market - model) ** 2))),
    )


@dataclass(frozen=True)
class CalibrationConfig:
    """Calibration settings; all deterministic given the seed."""

    dt: float = 1.0 / TRADING_DAYS_PER_YEAR
    tolerance: float = 1e-10
    restarts: int = 3
    max_iterations: int = 2000
    seed: int = 0
    extra_starts: tuple[tuple[float, ...], ...] = field(default_factory=tuple)

    def minimize_config(self) -> MinimizeConfig:
        return MinimizeConfig(tolerance=self.tolerance, restarts=self.restarts,
                              max_iterations=self.max_iterations, seed=self.seed)


@dataclass(frozen=True)
class CalibrationResult:
    """Best parameters found for one model on one chain."""

    model: str
    params: ModelParams
    metrics: ErrorMetrics
    objective_evaluations: int
    converged: bool


def build_params(model: str, x: Sequence[float], r: float,
                 dt: float) -> ModelParams:
    """Map a free-parameter vector to the full five-tuple for ``model``."""
    if model == "crr":
        return crr_params(r, x[0])
    if model == "jr":
        return jarrow_rudd_params(r, x[0])
    if model == "tian":
        return tian_params(r, x[0])
    if model == "mpbin1":
        sigma, g = x
        return ModelParams(gamma=r, delta=r, g=g, v=0.0, sigma=sigma)
    if model == "mpbin2":
        sigma, g, p_dt, gamma = x
        v = (p_dt - g) / math.sqrt(dt)
        delta = (r - g * gamma) / (1.0 - g)
        return ModelParams(gamma=gamma, delta=delta, g=g, v=v, sigma=sigma)
    raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")


def free_parameter_spec(model: str) -> tuple[tuple[tuple[float, float], ...],
                                             tuple[str, ...]]:
    """Bounds and transforms of the free-parameter vector for ``model``."""
    if model in ("crr", "jr", "tian"):
        return (SIGMA_BOUNDS,), ("log",)
    if model == "mpbin1":
        return (SIGMA_BOUNDS, PROB_BOUNDS), ("log", "logit")
    if model == "mpbin2":
        return (SIGMA_BOUNDS, PROB_BOUNDS, PROB_BOUNDS, GAMMA_BOUNDS), \
            ("log", "logit", "logit", "log")
    raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")


def model_prices(model: str, params: ModelParams, quotes: Sequence[OptionQuote],
                 s0: float, r: float,
                 dt: float = 1.0 / TRADING_DAYS_PER_YEAR) -> list[float]:
    """Price every quote: n = days to maturity on a step of ``dt``.

    Quotes sharing a maturity are priced in one backward induction with a
    strike column per quote; the per-column arithmetic is identical to
    pricing each quote alone.
    """
    if model not in MODELS:
        raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")
    if len(quotes) == 0:
        raise DomainError("quote list must be non-empty")
    if s0 <= 0.0:
        raise DomainError(f"spot must be positive, got {s0}")
    try:
        factors = step_factors_exact(params, dt)
        q = risk_neutral_prob(params, r, dt)
    except (DomainError, ArbitrageError) as exc:
        raise type(exc)(f"{exc} (while pricing quote 0)") from exc
    disc = math.exp(-r * dt)
    prices = [0.0] * len(quotes)
    by_maturity: dict[int, list[int]] = {}
    for idx, quote in enumerate(quotes):
        by_maturity.setdefault(quote.days_to_maturity, []).append(idx)
    for n, idxs in by_maturity.items():
        i = np.arange(n + 1)
        terminal = s0 * factors.u ** i * factors.d ** (n - i)
        strikes = np.array([quotes[idx].strike for idx in idxs])
        values = np.maximum(terminal[:, None] - strikes[None, :], 0.0)
        for _ in range(n):
            values = disc * (q * values[1:, :] + (1.0 - q) * values[:-1, :])
        for col, idx in enumerate(idxs):
            prices[idx] = float(values[0, col])
    return prices


def implied_atm_sigma(quotes: Sequence[OptionQuote], s0: float, r: float,
                      dt: float = 1.0 / TRADING_DAYS_PER_YEAR) -> float:
    """Bisect the CRR model's sigma through the most at-the-money quote.

    Tiny sigma makes the CRR probability slope blow up, so the lower
    bracket edge is walked inward to the first admissible sigma. Falls
    back to 0.2 if the quote price cannot be bracketed.
    """
    quote = min(quotes, key=lambda q: abs(q.strike - s0))
    lo, hi = SIGMA_BOUNDS[0] * 1.01, SIGMA_BOUNDS[1] * 0.99

    def priced(sig: float) -> float | None:
        try:
            return model_prices("crr", crr_params(r, sig), [quote], s0, r, dt)[0]
        except (DomainError, ArbitrageError):
            return None

    p_lo = priced(lo)
    while p_lo is None and lo < hi:
        lo *= 2.0
        p_lo = priced(lo)
    p_hi = priced(hi)
    if p_lo is None or p_hi is None:
        return 0.2
    f_lo = p_lo - quote.market_price
    f_hi = p_hi - quote.market_price
    if f_lo * f_hi > 0.0:
        return 0.2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        p_mid = priced(mid)
        f_mid = (p_mid - quote.market_price) if p_mid is not None else math.inf
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _default_start(model: str, quotes: Sequence[OptionQuote], s0: float,
                   r: float, dt: float) -> tuple[float, ...]:
    sigma0 = implied_atm_sigma(quotes, s0, r, dt)
    sigma0 = min(max(sigma0, SIGMA_BOUNDS[0] * 2), SIGMA_BOUNDS[1] / 2)
    if model in ("crr", "jr", "tian"):
        # Keep the start admissible: the CRR slope diverges as sigma -> 0.
        while sigma0 < SIGMA_BOUNDS[1] / 2:
            try:
                validate_params(build_params(model, (sigma0,), r, dt), dt)
                break
            except DomainError:
                sigma0 *= 1.5
        return (sigma0,)
    if model == "mpbin1":
        return (sigma0, 0.5)
    gamma0 = min(max(r, GAMMA_BOUNDS[0] * 2), GAMMA_BOUNDS[1] / 2)
    return (sigma0, 0.5, 0.5, gamma0)


_PENALTY = 1e15


def calibrate(model: str, quotes: Sequence[OptionQuote], s0: float, r: float,
              config: CalibrationConfig | None = None) -> CalibrationResult:
    """Fit ``model`` to the chain by least squares on prices.

    The search starts from an at-the-money sigma inversion with neutral
    probabilities, plus any ``config.extra_starts`` (free-parameter
    vectors, e.g. a poorer model's optimum embedded in this model's
    space); each start runs a restarted Nelder-Mead and the best outcome
    wins. Non-convergence is reported through the flag, never raised.
    """
    cfg = config or CalibrationConfig()
    if len(quotes) == 0:
        raise DomainError("quote list must be non-empty")
    bounds, transforms = free_parameter_spec(model)
    market = np.array([q.market_price for q in quotes])

    def objective(x: np.ndarray) -> float:
        try:
            prices = model_prices(model, build_params(model, x, r, cfg.dt),
                                  quotes, s0, r, cfg.dt)
        except (DomainError, ArbitrageError):
            return _PENALTY
        diff = np.asarray(prices) - market
        return float(np.dot(diff, diff))

    starts = [_default_start(model, quotes, s0, r, cfg.dt)]
    for extra in cfg.extra_starts:
        if len(extra) != len(bounds):
            raise DomainError(
                f"extra start {extra!r} has wrong length for model {model!r}")
        starts.append(tuple(float(v) for v in extra))

    best: MinimizeResult | None = None
    total_evaluations = 0
    for start in starts:
        clipped = tuple(
            min(max(value, lo * (1 + 1e-9) if lo > 0 else lo + 1e-12),
                hi * (1 - 1e-9) if hi > 0 else hi - 1e-12)
            for value, (lo, hi) in zip(start, bounds))
        result = minimize(objective, bounds, clipped, transforms,
                          cfg.minimize_config())
        total_evaluations += result.evaluations
        if best is None or result.value < best.value:
            best = result
    assert best is not None
    params = build_params(model, best.x, r, cfg.dt)
    metrics = error_metrics(model_prices(model, params, quotes, s0, r, cfg.dt),
                            market)
    return CalibrationResult(model=model, params=params, metrics=metrics,
                             objective_evaluations=total_evaluations,
                             converged=best.converged)


def embed_in_mpbin1(result: CalibrationResult,
                    dt: float = 1.0 / TRADING_DAYS_PER_YEAR) -> tuple[float, float]:
    """Express a classical optimum as an (sigma, g) start for mpbin1.

    At a fixed dt the classical families all have gamma = delta = r, so
    folding v into the probability (g' = g + v*sqrt(dt)) reproduces the
    classical tree exactly.
    """
    p = result.params.g + result.params.v * math.sqrt(dt)
    p = min(max(p, PROB_BOUNDS[0]), PROB_BOUNDS[1])
    return (result.params.sigma, p)


def embed_in_mpbin2(result: CalibrationResult, r: float,
                    dt: float = 1.0 / TRADING_DAYS_PER_YEAR
                    ) -> tuple[float, float, float, float]:
    """Express an mpbin1 or classical optimum as an mpbin2 start."""
    sigma, p = embed_in_mpbin1(result, dt)
    g = result.params.g if result.model == "mpbin1" else p
    g = min(max(g, PROB_BOUNDS[0]), PROB_BOUNDS[1])
    gamma = min(max(r, GAMMA_BOUNDS[0]), GAMMA_BOUNDS[1])
    return (sigma, g, p, gamma)


def calibrate_suite(models: Sequence[str], quotes: Sequence[OptionQuote],
                    s0: float, r: float,
                    config: CalibrationConfig | None = None
                    ) -> list[CalibrationResult]:
    """Calibrate several models, seeding richer ones from poorer optima.

    Classical optima seed the mpbin1 search and classical plus mpbin1
    optima seed mpbin2, which enforces the nesting of optimal errors
    numerically.
    """
    cfg = config or CalibrationConfig()
    for model in models:
        if model not in MODELS:
            raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")
    ordered = [m for m in MODELS if m in models]
    results: list[CalibrationResult] = []
    for model in ordered:
        seeds: list[tuple[float, ...]] = []
        if model == "mpbin1":
            seeds = [embed_in_mpbin1(res, cfg.dt) for res in results
                     if res.model in ("crr", "jr", "tian")]
        elif model == "mpbin2":
            seeds = [embed_in_mpbin2(res, r, cfg.dt) for res in results]
        run_cfg = replace(cfg, extra_starts=cfg.extra_starts + tuple(seeds))
        results.append(calibrate(model, quotes, s0, r, run_cfg))
    return results


def calibration_report_csv(results: Sequence[CalibrationResult]) -> str:
    """One CSV row per model: parameters then the four error metrics."""
    lines = ["model,sigma,g,v,gamma,delta,aae,ape,arpe,rmse,evaluations,converged"]
    for res in results:
        p = res.params
        m = res.metrics
        lines.append(
            f"{res.model},{p.sigma!r},{p.g!r},{p.v!r},{p.gamma!r},{p.delta!r},"
            f"{m.aae!r},{m.ape!r},{m.arpe!r},{m.rmse!r},"
            f"{res.objective_evaluations},{res.converged}")
    return "\n".join(lines) + "\n"
