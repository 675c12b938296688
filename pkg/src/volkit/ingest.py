"""Close-price ingestion, log returns, and descriptive statistics.

Input files are CSV with a header row; column names and the date format are
configurable.  Returns are natural-log differences of consecutive closes.
Skewness and kurtosis use biased (n-denominator) central moments, the form
that feeds the Jarque-Bera statistic directly.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from .errors import (
    DuplicateDateWarning,
    EmptyInputError,
    MalformedRowError,
    NonPositivePriceError,
    SeriesTooShortError,
)

Source = Union[str, Path, IO[str], IO[bytes], bytes]


@dataclass(frozen=True)
class DescriptiveStats:
    """Sample summary: mean/std use the n-1 denominator, the shape moments n."""

    n: int
    minimum: float
    maximum: float
    mean: float
    std_dev: float
    skewness: float
    excess_kurtosis: float


@dataclass(eq=False)
class PriceSeries:
    """Dated positive close prices, strictly ascending in date."""

    dates: list[dt.date]
    closes: np.ndarray

    def __post_init__(self):
        self.closes = np.asarray(self.closes, dtype=float)
        if len(self.dates) != len(self.closes):
            raise ValueError("dates and closes differ in length")
        if len(self.dates) < 2:
            raise SeriesTooShortError("price series needs at least 2 observations")
        if np.any(self.closes <= 0.0) or not np.all(np.isfinite(self.closes)):
            raise NonPositivePriceError("all closes must be positive and finite")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValueError(f"dates not strictly increasing at {cur}")

    def __len__(self) -> int:
        return len(self.dates)

    def restrict(self, start: dt.date | None = None, end: dt.date | None = None) -> "PriceSeries":
        """Sub-series with start <= date <= end."""
        keep = [
            i
            for i, d in enumerate(self.dates)
            if (start is None or d >= start) and (end is None or d <= end)
        ]
        if len(keep) < 2:
            raise SeriesTooShortError("fewer than 2 observations in the date range")
        return PriceSeries([self.dates[i] for i in keep], self.closes[keep])


@dataclass(eq=False)
class ReturnSeries:
    """Dated log returns; ``stats`` is populated when n >= 4."""

    dates: list[dt.date]
    values: np.ndarray
    stats: DescriptiveStats | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValueError(f"dates not strictly increasing at {cur}")

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_values(cls, values: Iterable[float], start: dt.date = dt.date(2014, 1, 1)) -> "ReturnSeries":
        """Wrap a bare value sequence with synthetic consecutive dates."""
        values = np.asarray(list(values), dtype=float)
        dates = [start + dt.timedelta(days=i) for i in range(len(values))]
        stats = descriptive_stats(values) if len(values) >= 4 else None
        return cls(dates, values, stats)


def _as_text_lines(source: Source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        return Path(source).open("r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        first = source.read(0)
        if isinstance(first, bytes):
            return io.TextIOWrapper(source, encoding="utf-8", newline="")
        return source
    raise TypeError(f"unsupported source type: {type(source)!r}")


def parse_price_csv(
    source: Source,
    *,
    date_col: str = "date",
    price_col: str = "close",
    date_format: str = "%Y-%m-%d",
) -> PriceSeries:
    """Parse a dated close-price CSV into a PriceSeries.

    Rows are sorted ascending by date.  Duplicate dates keep the last
    occurrence and emit a :class:`DuplicateDateWarning`.  Unparseable rows
    raise :class:`MalformedRowError` with the 1-based line number.
    """
    stream = _as_text_lines(source)
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise EmptyInputError("input has no header row")
    missing = {date_col, price_col} - set(reader.fieldnames)
    if missing:
        raise MalformedRowError(1, f"missing column(s): {', '.join(sorted(missing))}")

    rows: dict[dt.date, float] = {}
    for record in reader:
        line = reader.line_num
        raw_date = (record.get(date_col) or "").strip()
        raw_price = (record.get(price_col) or "").strip()
        try:
            day = dt.datetime.strptime(raw_date, date_format).date()
        except ValueError as exc:
            raise MalformedRowError(line, f"bad date {raw_date!r}: {exc}") from exc
        try:
            price = float(raw_price)
        except ValueError as exc:
            raise MalformedRowError(line, f"bad price {raw_price!r}") from exc
        if not math.isfinite(price) or price <= 0.0:
            raise NonPositivePriceError(f"close {raw_price!r} is not positive", line)
        if day in rows:
            warnings.warn(
                f"duplicate date {day.isoformat()} at line {line}; keeping last row",
                DuplicateDateWarning,
                stacklevel=2,
            )
        rows[day] = price

    if not rows:
        raise EmptyInputError("no data rows found")
    if len(rows) < 2:
        raise SeriesTooShortError("need at least 2 price rows")
    days = sorted(rows)
    return PriceSeries(days, np.array([rows[d] for d in days]))


def log_returns(prices: PriceSeries) -> ReturnSeries:
    """Natural-log return series; r_t is dated at the later observation."""
    if len(prices) < 2:
        raise SeriesTooShortError("need at least 2 prices for returns")
    values = np.diff(np.log(prices.closes))
    stats = descriptive_stats(values) if len(values) >= 4 else None
    return ReturnSeries(prices.dates[1:], values, stats)


def descriptive_stats(x: Union[ReturnSeries, np.ndarray, Iterable[float]]) -> DescriptiveStats:
    """Min/max/mean/std plus moment skewness and excess kurtosis.

    std_dev uses the n-1 denominator; skewness m3/m2^(3/2) and excess
    kurtosis m4/m2^2 - 3 use plain n-denominator central moments.
    """
    if isinstance(x, ReturnSeries):
        x = x.values
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        raise SeriesTooShortError(f"need at least 4 observations, got {n}")
    mean = float(np.mean(x))
    centered = x - mean
    # moment ratios are scale-free; normalizing by the peak deviation keeps
    # the powers away from under/overflow for extreme data scales
    peak = float(np.max(np.abs(centered)))
    if peak == 0.0:
        skew = 0.0
        exkurt = -3.0
    else:
        y = centered / peak
        m2 = float(np.mean(y**2))
        skew = float(np.mean(y**3) / m2**1.5)
        exkurt = float(np.mean(y**4) / m2**2 - 3.0)
    return DescriptiveStats(
        n=n,
        minimum=float(np.min(x)),
        maximum=float(np.max(x)),
        mean=mean,
        std_dev=float(np.std(x, ddof=1)),
        skewness=skew,
        excess_kurtosis=exkurt,
    )
