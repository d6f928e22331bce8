"""Ingestion and preparation of daily OHLCV bar series.

A bar series is a ``pandas.DataFrame`` with a strictly increasing
``DatetimeIndex`` (daily resolution, named ``timestamp``) and float columns
``open, high, low, close, volume``. Missing observations are ``NaN``; the
on-disk format is a delimited text file with header
``timestamp,open,high,low,close,volume``, ISO-8601 dates and empty fields for
missing values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

PRICE_FIELDS = ("open", "high", "low", "close")
BAR_FIELDS = PRICE_FIELDS + ("volume",)

DEFAULT_IMPUTE_ALPHA = 2.0 / (10 + 1)


class BarSchemaError(ValueError):
    """Raised when a frame does not satisfy the OHLCV bar contract."""


def validate_bars(bars: pd.DataFrame, allow_missing: bool = False) -> pd.DataFrame:
    """Check the OHLCV schema and invariants, returning a float64 copy.

    With ``allow_missing`` the price/volume cells may be NaN (pre-imputation
    data); the index must always be unique and strictly increasing.
    """
    missing = [c for c in BAR_FIELDS if c not in bars.columns]
    if missing:
        raise BarSchemaError(f"missing bar columns: {missing}")
    if not isinstance(bars.index, pd.DatetimeIndex):
        raise BarSchemaError("bar index must be a DatetimeIndex")
    if len(bars) == 0:
        raise BarSchemaError("empty bar series")
    idx = bars.index
    if idx.has_duplicates or not idx.is_monotonic_increasing or not idx.is_unique:
        raise BarSchemaError("timestamps must be strictly increasing and unique")

    out = bars.loc[:, list(BAR_FIELDS)].astype(np.float64)
    out.index = idx.rename("timestamp")
    if not allow_missing and out.isna().any().any():
        raise BarSchemaError("bar series contains missing values")

    vol = out["volume"]
    if (vol.dropna() < 0).any():
        raise BarSchemaError("volume must be nonnegative")
    complete = out.dropna()
    if len(complete):
        body_high = complete[["open", "close"]].max(axis=1)
        body_low = complete[["open", "close"]].min(axis=1)
        if (complete["low"] > body_low + 1e-12).any() or (complete["high"] < body_high - 1e-12).any():
            raise BarSchemaError("low/high must bracket open and close")
    return out


def _coherent_ohlc(frame: pd.DataFrame) -> pd.DataFrame:
    """Re-establish low <= body <= high after per-field aggregation.

    Merging and imputation treat each field independently, so a date whose
    sources reported different field subsets can end up with a body outside
    the high/low range; widening the range restores the bar invariant without
    touching open/close.
    """
    out = frame.copy()
    body_high = out[["open", "close"]].max(axis=1)
    body_low = out[["open", "close"]].min(axis=1)
    out["high"] = np.maximum(out["high"], body_high)
    out["low"] = np.minimum(out["low"], body_low)
    return out


def load_bar_csv(path) -> pd.DataFrame:
    """Read one exchange file (``timestamp,open,high,low,close,volume``)."""
    frame = pd.read_csv(path, parse_dates=["timestamp"], index_col="timestamp")
    return validate_bars(frame, allow_missing=True)


def save_bar_csv(bars: pd.DataFrame, path) -> None:
    """Write a bar series in the same delimited format it is read from."""
    bars.to_csv(path, index_label="timestamp", date_format="%Y-%m-%d")


def merge_exchanges(sources: list[pd.DataFrame]) -> pd.DataFrame:
    """Merge per-exchange series into a volume-weighted composite.

    For every date present in any source, each OHLC field is the mean of the
    sources reporting that field on that date, weighted by each source's own
    volume; composite volume is the plain sum. Dates where every reporting
    source shows zero volume fall back to an unweighted mean (with a warning)
    so the series stays continuous.
    """
    if not sources:
        raise ValueError("merge_exchanges needs at least one source series")
    frames = [validate_bars(s, allow_missing=True) for s in sources]
    if len(frames) == 1:
        return frames[0].copy()

    index = frames[0].index
    for f in frames[1:]:
        index = index.union(f.index)
    aligned = [f.reindex(index) for f in frames]

    vol = np.column_stack([f["volume"].to_numpy() for f in aligned])
    vol = np.where(np.isnan(vol), 0.0, vol)
    total_vol = vol.sum(axis=1)

    out = pd.DataFrame(index=index, columns=list(BAR_FIELDS), dtype=np.float64)
    out.index.name = "timestamp"
    out["volume"] = total_vol

    zero_weight_dates = 0
    for field in PRICE_FIELDS:
        prices = np.column_stack([f[field].to_numpy() for f in aligned])
        present = ~np.isnan(prices)
        w = np.where(present, vol, 0.0)
        wsum = w.sum(axis=1)
        weighted = np.where(present, w * np.where(present, prices, 0.0), 0.0).sum(axis=1)
        values = np.full(len(index), np.nan)
        ok = wsum > 0
        values[ok] = weighted[ok] / wsum[ok]
        # all reporting sources had zero volume: unweighted mean fallback
        fallback = (~ok) & (present.sum(axis=1) > 0)
        if fallback.any():
            zero_weight_dates += int(fallback.sum())
            values[fallback] = np.where(present[fallback], prices[fallback], np.nan).mean(
                axis=1, where=present[fallback]
            )
        out[field] = values

    if zero_weight_dates:
        warnings.warn(
            f"{zero_weight_dates} field-dates had zero total volume; "
            "used unweighted mean for those prices",
            stacklevel=2,
        )
    return _coherent_ohlc(out)


def impute_missing(bars: pd.DataFrame, alpha: float = DEFAULT_IMPUTE_ALPHA) -> pd.DataFrame:
    """Fill gaps with an exponentially weighted average of prior observations.

    Each field is treated independently: the running average seeds on the
    first observed value and updates as ``e = alpha * x + (1 - alpha) * e``
    on observed points; a missing point takes the current average. ``alpha=1``
    degenerates to last-observation-carried-forward.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    frame = validate_bars(bars, allow_missing=True)
    if frame.iloc[0].isna().any():
        raise ValueError("first bar must be fully observed before imputation")

    out = frame.copy()
    for field in BAR_FIELDS:
        col = out[field].to_numpy()
        ewa = col[0]
        for t in range(1, len(col)):
            if np.isnan(col[t]):
                col[t] = ewa
            else:
                ewa = alpha * col[t] + (1.0 - alpha) * ewa
        out[field] = col
    return validate_bars(_coherent_ohlc(out), allow_missing=False)


@dataclass(frozen=True)
class LabeledSeries:
    """A complete bar series with next-day returns and direction labels.

    ``returns`` is indexed by the day the return realizes (t+1); ``labels``
    is indexed by the feature day t and holds 1 when the next close is
    strictly higher, 0 otherwise (zero return labels 0). The last bar has no
    next day, so ``len(labels) == len(bars) - 1``.
    """

    bars: pd.DataFrame
    returns: pd.Series
    labels: pd.Series


def label_direction(bars: pd.DataFrame) -> LabeledSeries:
    """Compute close-to-close returns and up/down direction labels."""
    frame = validate_bars(bars, allow_missing=False)
    if len(frame) < 2:
        raise ValueError("need at least two bars to label direction")
    close = frame["close"]
    if (close <= 0).any():
        raise ValueError("close prices must be positive to compute returns")
    returns = close.pct_change().iloc[1:].rename("return")
    labels = pd.Series(
        (returns.to_numpy() > 0).astype(np.int64),
        index=frame.index[:-1],
        name="label",
    )
    return LabeledSeries(bars=frame, returns=returns, labels=labels)
