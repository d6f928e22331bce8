"""Feature-frame assembly: indicator columns aligned with direction labels."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from stackcast.data import label_direction
from stackcast.indicators.catalog import IndicatorSpec, compute_catalog, default_catalog

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureFrame:
    """Time-indexed feature matrix with aligned next-day direction labels.

    ``features`` rows are fully defined (warm-up rows already dropped) and
    share their index with ``labels``; row t carries the label for the move
    into t+1.
    """

    features: pd.DataFrame
    labels: pd.Series

    def __post_init__(self):
        if not self.features.index.equals(self.labels.index):
            raise ValueError("features and labels must share one timestamp index")
        if self.features.isna().any().any():
            raise ValueError("feature frame contains undefined values")
        if len(self.features.columns) != len(set(self.features.columns)):
            raise ValueError("duplicate feature column names")

    @property
    def feature_names(self) -> list[str]:
        return list(self.features.columns)

    @property
    def index(self) -> pd.DatetimeIndex:
        return self.features.index

    def __len__(self) -> int:
        return len(self.features)

    def window(self, start, end) -> "FeatureFrame":
        """Rows with start <= timestamp <= end."""
        mask = (self.index >= pd.Timestamp(start)) & (self.index <= pd.Timestamp(end))
        return FeatureFrame(self.features.loc[mask], self.labels.loc[mask])

    def to_csv(self, path) -> None:
        out = self.features.copy()
        out["label"] = self.labels
        out.to_csv(path, index_label="timestamp", date_format="%Y-%m-%d")

    @staticmethod
    def from_csv(path) -> "FeatureFrame":
        raw = pd.read_csv(path, parse_dates=["timestamp"], index_col="timestamp")
        labels = raw.pop("label").astype(np.int64)
        return FeatureFrame(raw.astype(np.float64), labels.rename("label"))


def build_feature_frame(
    bars: pd.DataFrame,
    specs: list[IndicatorSpec] | None = None,
    extra: dict[str, pd.Series] | None = None,
) -> FeatureFrame:
    """Compute the catalog on a complete series and align labels.

    Drops the union of warm-up rows plus the final bar (which has no next-day
    label); optional external columns (e.g. precomputed sentiment scores) are
    attached afterwards.
    """
    specs = specs if specs is not None else default_catalog()
    columns = compute_catalog(bars, specs)
    labeled = label_direction(bars)

    warm = max(s.warmup for s in specs)
    keep = columns.index[warm:-1]
    if len(keep) == 0:
        raise ValueError("no rows remain after dropping warm-up and label rows")
    frame = FeatureFrame(columns.loc[keep], labeled.labels.loc[keep])
    if extra:
        frame = attach_external_columns(frame, extra)
    return frame


def attach_external_columns(frame: FeatureFrame, extra: dict[str, pd.Series]) -> FeatureFrame:
    """Append pass-through columns (aligned by date), dropping uncovered rows."""
    if not extra:
        return frame
    features = frame.features.copy()
    for name, series in extra.items():
        if name in features.columns:
            raise ValueError(f"duplicate column name {name!r}")
        features[name] = pd.Series(series).astype(np.float64).reindex(features.index)
    covered = features.notna().all(axis=1)
    dropped = int((~covered).sum())
    if dropped:
        logger.info("attach_external_columns: dropped %d rows lacking external values", dropped)
    return FeatureFrame(features.loc[covered], frame.labels.loc[covered])
