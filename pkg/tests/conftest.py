import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def random_bars(n=250, seed=0, start="2017-01-01", base_price=100.0) -> pd.DataFrame:
    """Synthetic daily OHLCV with positive prices and realistic OHLC ordering."""
    rng = np.random.default_rng(seed)
    close = base_price * np.exp(np.cumsum(rng.normal(0.0, 0.02, n)))
    open_ = np.empty(n)
    open_[0] = base_price
    open_[1:] = close[:-1] * np.exp(rng.normal(0.0, 0.005, n - 1))
    body_high = np.maximum(open_, close)
    body_low = np.minimum(open_, close)
    high = body_high * (1.0 + np.abs(rng.normal(0.0, 0.006, n)))
    low = body_low * (1.0 - np.abs(rng.normal(0.0, 0.006, n)))
    volume = np.exp(rng.normal(3.0, 0.8, n))
    return pd.DataFrame(
        {"open": open_, "high": high, "low": low, "close": close, "volume": volume},
        index=pd.date_range(start, periods=n, freq="D", name="timestamp"),
    )


@pytest.fixture
def bars250():
    return random_bars(250, seed=7)


def gaussian_blobs(n=400, seed=0, separation=4.0):
    """Two well-separated 2-D Gaussian classes, shuffled."""
    rng = np.random.default_rng(seed)
    half = n // 2
    x0 = rng.normal(0.0, 1.0, (half, 2))
    x1 = rng.normal(separation, 1.0, (n - half, 2))
    X = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(half, dtype=int), np.ones(n - half, dtype=int)])
    order = rng.permutation(n)
    return X[order], y[order]


def write_exchange_data(directory, n_days=457, start="2017-05-01", seed=42, n_exchanges=3,
                        with_gaps=True):
    """Synthetic multi-exchange inputs covering the default config windows."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(n_exchanges):
        bars = random_bars(n_days, seed=seed + 100 + i, start=start, base_price=4000.0)
        if with_gaps:
            drop = rng.choice(n_days, size=8, replace=False)
            bars = bars.drop(bars.index[drop])
            miss = rng.choice(len(bars), size=5, replace=False)
            bars.iloc[miss, bars.columns.get_loc("close")] = np.nan
        path = directory / f"exchange_{i}.csv"
        bars.to_csv(path, index_label="timestamp", date_format="%Y-%m-%d")
        paths.append(path)
    sentiment = pd.DataFrame(
        {
            "timestamp": pd.date_range(start, periods=n_days, freq="D"),
            "sentiment_positive": np.round(rng.beta(2, 2, n_days), 6),
        }
    )
    sentiment_path = directory / "sentiment.csv"
    sentiment.to_csv(sentiment_path, index=False)
    return paths, sentiment_path


def write_mini_config(path, data_dir, out_dir, families=("knn", "nb", "lda"),
                      search_iterations=4, seed=11, n_exchanges=3, stack_mode="hard",
                      with_sentiment=True):
    """A small but complete run config against write_exchange_data outputs."""
    files = "\n".join(f"    - {data_dir}/exchange_{i}.csv" for i in range(n_exchanges))
    sentiment = (
        f"  extra_feature_files:\n    sentiment_positive: {data_dir}/sentiment.csv\n"
        if with_sentiment
        else ""
    )
    text = f"""
seed: {seed}
output_dir: {out_dir}
data:
  exchange_files:
{files}
features:
  indicators: all
{sentiment}windows:
  level0_train: {{start: 2017-08-01, end: 2018-03-31}}
  level1_train: {{start: 2018-04-01, end: 2018-05-31, name: "Apr-May 2018"}}
  holdout: {{start: 2018-06-01, end: 2018-07-31, name: "June - July 2018"}}
cv:
  first_test_month: "2017-11"
  n_folds: 5
  purge_days: 7
models:
  families: [{", ".join(families)}]
  search_iterations: {search_iterations}
stack:
  mode: {stack_mode}
  hidden_width: 6
"""
    path = Path(path)
    path.write_text(text)
    return path
