"""Direction-of-move classification for daily OHLCV series.

The package covers the full workflow: merging per-exchange bar files into a
volume-weighted composite, engineering a technical-indicator feature matrix,
training a zoo of from-scratch classifiers under purged walk-forward
cross-validation, stacking them with a small neural meta-learner, and scoring
feature importance through partial dependence.
"""

__version__ = "0.1.0"

from stackcast.data import (
    impute_missing,
    label_direction,
    load_bar_csv,
    merge_exchanges,
    save_bar_csv,
)
from stackcast.indicators import FeatureFrame, compute_catalog, default_catalog

__all__ = [
    "__version__",
    "load_bar_csv",
    "save_bar_csv",
    "merge_exchanges",
    "impute_missing",
    "label_direction",
    "compute_catalog",
    "default_catalog",
    "FeatureFrame",
]
