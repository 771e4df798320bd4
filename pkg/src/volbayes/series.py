"""Observed price data.

All models condition on log prices; returns are first differences of the
stored log prices. Dates are opaque ordered labels, never parsed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Minimum series length accepted for fitting / ingestion.
MIN_FIT_LENGTH = 10


@dataclass(frozen=True)
class PriceSeries:
    log_prices: np.ndarray
    dates: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        lp = np.asarray(self.log_prices, dtype=float)
        object.__setattr__(self, "log_prices", lp)
        if lp.ndim != 1 or lp.size < 3:
            raise ValueError("need a 1-D series of at least 3 log prices")
        if not np.all(np.isfinite(lp)):
            raise ValueError("log prices must all be finite")
        if self.dates is not None:
            dates = tuple(str(d) for d in self.dates)
            object.__setattr__(self, "dates", dates)
            if len(dates) != lp.size:
                raise ValueError("dates and log_prices must have equal length")

    def __len__(self) -> int:
        return int(self.log_prices.size)

    @property
    def returns(self) -> np.ndarray:
        """Log returns, length len(self) - 1."""
        return np.diff(self.log_prices)

    @property
    def return_sd(self) -> float:
        """Sample standard deviation of returns; sets prior scales."""
        return float(np.std(self.returns, ddof=1))

    def require_fit_length(self) -> None:
        if len(self) < MIN_FIT_LENGTH:
            raise ValueError(
                f"series has {len(self)} rows; fitting needs at least {MIN_FIT_LENGTH}"
            )
