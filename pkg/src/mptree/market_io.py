"""File ingestion: option chains, dated return series, run configuration.

Formats are deliberately small and self-contained:

chain CSV::

    # spot=<float>
    # rate=<float>
    strike,days_to_maturity,market_price
    90.0,21,10.5
    ...

returns CSV: ``date,value`` rows with ISO-8601 dates (an optional literal
``date,value`` header is tolerated); config: ``key=value`` lines with
``#`` comments. Every malformed input produces a line-numbered
diagnostic rather than a crash or a silent skip.
"""

from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from .calibration import TRADING_DAYS_PER_YEAR, OptionQuote
from .errors import DataFormatError, DomainError

__all__ = [
    "ChainFile",
    "ReturnSeries",
    "RunConfig",
    "load_chain",
    "write_chain",
    "load_returns",
    "load_config",
    "MAX_CALIBRATION_DAYS",
]

# Chains used for calibration can be restricted to short-dated quotes.
MAX_CALIBRATION_DAYS = 100


@dataclass(frozen=True)
class ChainFile:
    """An option chain with its spot and annualized risk-free rate."""

    spot: float
    rate: float
    quotes: tuple[OptionQuote, ...]

    def __post_init__(self) -> None:
        if self.spot <= 0.0:
            raise DomainError(f"spot must be positive, got {self.spot}")
        if len(self.quotes) == 0:
            raise DomainError("chain must contain at least one quote")


@dataclass(frozen=True)
class ReturnSeries:
    """Dated values, either prices or simple returns."""

    rows: tuple[tuple[_dt.date, float], ...]
    value_kind: Literal["price", "return"]

    def returns(self) -> tuple[tuple[_dt.date, float], ...]:
        """Simple returns; price series are differenced, P_t/P_{t-1} - 1."""
        if self.value_kind == "return":
            return self.rows
        out = []
        for (d_prev, p_prev), (d_cur, p_cur) in zip(self.rows, self.rows[1:]):
            out.append((d_cur, p_cur / p_prev - 1.0))
        return tuple(out)


def _numeric(token: str, line_no: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataFormatError(
            f"line {line_no}: non-numeric {what}: {token!r}") from None
    if not math.isfinite(value):
        raise DataFormatError(f"line {line_no}: non-finite {what}: {token!r}")
    return value


def load_chain(path: str | Path, short_maturities_only: bool = False) -> ChainFile:
    """Parse a chain CSV; optionally drop quotes beyond 100 trading days."""
    lines = Path(path).read_text().splitlines()
    spot = rate = None
    header_seen = False
    quotes: list[OptionQuote] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                key = key.strip()
                if key == "spot":
                    spot = _numeric(value.strip(), line_no, "spot")
                elif key == "rate":
                    rate = _numeric(value.strip(), line_no, "rate")
            continue
        if not header_seen:
            columns = [c.strip() for c in line.split(",")]
            if columns != ["strike", "days_to_maturity", "market_price"]:
                raise DataFormatError(
                    f"line {line_no}: expected header "
                    f"'strike,days_to_maturity,market_price', got {line!r}")
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise DataFormatError(
                f"line {line_no}: expected 3 comma-separated fields, "
                f"got {len(fields)}")
        strike = _numeric(fields[0], line_no, "strike")
        days_raw = fields[1].strip()
        try:
            days = int(days_raw)
        except ValueError:
            raise DataFormatError(
                f"line {line_no}: non-integer days_to_maturity: "
                f"{days_raw!r}") from None
        price = _numeric(fields[2], line_no, "market_price")
        try:
            quote = OptionQuote(strike=strike, days_to_maturity=days,
                                market_price=price)
        except DomainError as exc:
            raise DataFormatError(f"line {line_no}: {exc}") from None
        if short_maturities_only and quote.days_to_maturity > MAX_CALIBRATION_DAYS:
            continue
        quotes.append(quote)
    if spot is None:
        raise DataFormatError("missing '# spot=' metadata line")
    if rate is None:
        raise DataFormatError("missing '# rate=' metadata line")
    if not header_seen:
        raise DataFormatError("missing 'strike,days_to_maturity,market_price' header")
    if not quotes:
        raise DataFormatError("chain file contains no quotes after filtering")
    return ChainFile(spot=spot, rate=rate, quotes=tuple(quotes))


def write_chain(chain: ChainFile, path: str | Path) -> None:
    """Write a chain in canonical form; loading it back round-trips bytes."""
    lines = [f"# spot={chain.spot!r}", f"# rate={chain.rate!r}",
             "strike,days_to_maturity,market_price"]
    for quote in chain.quotes:
        lines.append(
            f"{quote.strike!r},{quote.days_to_maturity},{quote.market_price!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_returns(path: str | Path,
                 value_kind: Literal["price", "return"] = "return") -> ReturnSeries:
    """Parse a ``date,value`` CSV with strictly ascending ISO dates."""
    if value_kind not in ("price", "return"):
        raise DomainError(f"value_kind must be 'price' or 'return', got {value_kind!r}")
    lines = Path(path).read_text().splitlines()
    rows: list[tuple[_dt.date, float]] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.replace(" ", "") == "date,value":
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise DataFormatError(
                f"line {line_no}: expected 'date,value', got {line!r}")
        try:
            date = _dt.date.fromisoformat(fields[0].strip())
        except ValueError:
            raise DataFormatError(
                f"line {line_no}: unparseable ISO date {fields[0].strip()!r}") from None
        value = _numeric(fields[1], line_no, "value")
        if value_kind == "price" and value <= 0.0:
            raise DataFormatError(f"line {line_no}: price must be positive, got {value}")
        if rows:
            if date == rows[-1][0]:
                raise DataFormatError(f"line {line_no}: duplicate date {date.isoformat()}")
            if date < rows[-1][0]:
                raise DataFormatError(
                    f"line {line_no}: dates must be ascending, {date.isoformat()} "
                    f"follows {rows[-1][0].isoformat()}")
        rows.append((date, value))
    if not rows:
        raise DataFormatError("returns file contains no data rows")
    return ReturnSeries(rows=tuple(rows), value_kind=value_kind)


@dataclass(frozen=True)
class RunConfig:
    """Run-wide settings parsed from a key=value file."""

    dt: float = 1.0 / TRADING_DAYS_PER_YEAR
    optimizer_tolerance: float = 1e-10
    optimizer_restarts: int = 3
    optimizer_max_iterations: int = 2000
    seed: int = 0
    maturity_filter: bool = False
    ci_level: float = 0.95


_CONFIG_PARSERS = {
    "dt": ("dt", float),
    "optimizer_tolerance": ("optimizer_tolerance", float),
    "optimizer_restarts": ("optimizer_restarts", int),
    "optimizer_max_iterations": ("optimizer_max_iterations", int),
    "seed": ("seed", int),
    "maturity_filter": ("maturity_filter", None),
    "ci_level": ("ci_level", float),
}


def load_config(path: str | Path) -> RunConfig:
    """Parse a config file; unknown keys and malformed values are rejected."""
    lines = Path(path).read_text().splitlines()
    values: dict[str, object] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError(f"line {line_no}: expected key=value, got {line!r}")
        key, _, token = line.partition("=")
        key, token = key.strip(), token.strip()
        if key not in _CONFIG_PARSERS:
            raise DataFormatError(f"line {line_no}: unknown key {key!r}")
        attr, caster = _CONFIG_PARSERS[key]
        if caster is None:
            lowered = token.lower()
            if lowered not in ("true", "false"):
                raise DataFormatError(
                    f"line {line_no}: expected true/false for {key}, got {token!r}")
            values[attr] = lowered == "true"
        else:
            try:
                values[attr] = caster(token)
            except ValueError:
                raise DataFormatError(
                    f"line {line_no}: malformed value for {key}: {token!r}") from None
    config = RunConfig(**values)
    if config.dt <= 0.0:
        raise DataFormatError(f"dt must be positive, got {config.dt}")
    if config.optimizer_tolerance <= 0.0:
        raise DataFormatError(
            f"optimizer_tolerance must be positive, got {config.optimizer_tolerance}")
    if config.optimizer_restarts < 0:
        raise DataFormatError(
            f"optimizer_restarts must be >= 0, got {config.optimizer_restarts}")
    if config.optimizer_max_iterations < 1:
        raise DataFormatError(
            f"optimizer_max_iterations must be >= 1, "
            f"got {config.optimizer_max_iterations}")
    if not 0.0 < config.ci_level < 1.0:
        raise DataFormatError(f"ci_level must be in (0, 1), got {config.ci_level}")
    return config
