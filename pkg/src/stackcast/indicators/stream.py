"""Appendable indicator evaluation for bar-at-a-time consumption.

The stream keeps the full (daily-scale, therefore tiny) bar history and
re-evaluates the vectorized catalog on every append, so streamed values are
exactly the batch values over the extended series rather than an approximate
recurrence.
"""

from __future__ import annotations

import pandas as pd

from stackcast.data import validate_bars
from stackcast.indicators.catalog import IndicatorSpec, compute_catalog, default_catalog, max_warmup


class StreamNotWarmedError(RuntimeError):
    """update() was called before the initial history covered every warm-up."""


class IndicatorStream:
    """Running indicator state over an append-only bar series."""

    def __init__(self, initial: pd.DataFrame, specs: list[IndicatorSpec] | None = None):
        self.specs = specs if specs is not None else default_catalog()
        self._bars = validate_bars(initial, allow_missing=False)
        self._warmup = max_warmup(self.specs)

    @property
    def warmed(self) -> bool:
        return len(self._bars) > self._warmup

    @property
    def bars(self) -> pd.DataFrame:
        return self._bars.copy()

    def update(self, timestamp, open, high, low, close, volume) -> dict[str, float]:
        """Append one bar and return the newest value of every indicator."""
        if not self.warmed:
            raise StreamNotWarmedError(
                f"need more than {self._warmup} bars before updating, have {len(self._bars)}"
            )
        ts = pd.Timestamp(timestamp)
        if ts <= self._bars.index[-1]:
            raise ValueError(f"timestamp {ts} does not extend the series")
        row = pd.DataFrame(
            {"open": [open], "high": [high], "low": [low], "close": [close], "volume": [volume]},
            index=pd.DatetimeIndex([ts], name="timestamp"),
        )
        self._bars = validate_bars(pd.concat([self._bars, row]), allow_missing=False)
        latest = compute_catalog(self._bars, self.specs).iloc[-1]
        return latest.to_dict()
