#!/usr/bin/env python3
"""Generate the synthetic multi-exchange demo inputs under data/demo/.

Writes four exchange OHLCV files (distinct calendars, a few missing fields),
a precomputed sentiment column, and leaves the bundled configs/demo.yaml
runnable out of the box:

    python3 scripts/generate_demo_data.py
    stackcast run --config configs/demo.yaml
"""

import argparse
from pathlib import Path

import numpy as np
import pandas as pd

EXCHANGES = ("north", "south", "east", "west")


def synth_bars(n, seed, start, base_price):
    rng = np.random.default_rng(seed)
    close = base_price * np.exp(np.cumsum(rng.normal(0.0002, 0.025, n)))
    open_ = np.empty(n)
    open_[0] = base_price
    open_[1:] = close[:-1] * np.exp(rng.normal(0.0, 0.004, n - 1))
    high = np.maximum(open_, close) * (1.0 + np.abs(rng.normal(0.0, 0.008, n)))
    low = np.minimum(open_, close) * (1.0 - np.abs(rng.normal(0.0, 0.008, n)))
    volume = np.exp(rng.normal(5.0, 0.9, n))
    return pd.DataFrame(
        {"open": open_, "high": high, "low": low, "close": close, "volume": volume},
        index=pd.date_range(start, periods=n, freq="D", name="timestamp"),
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=None, help="output directory (default: data/demo)")
    parser.add_argument("--seed", type=int, default=20170801)
    parser.add_argument("--start", default="2017-05-01")
    parser.add_argument("--days", type=int, default=457, help="2017-05-01..2018-07-31 by default")
    args = parser.parse_args()

    out = Path(args.out) if args.out else Path(__file__).resolve().parent.parent / "data" / "demo"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    for i, name in enumerate(EXCHANGES):
        bars = synth_bars(args.days, args.seed + i, args.start, base_price=4000.0 + 150.0 * i)
        # each venue misses a few full days and a few individual fields
        drop = rng.choice(args.days, size=8, replace=False)
        bars = bars.drop(bars.index[drop])
        for col in ("close", "volume"):
            miss = rng.choice(len(bars), size=4, replace=False)
            bars.iloc[miss, bars.columns.get_loc(col)] = np.nan
        bars.to_csv(out / f"{name}.csv", index_label="timestamp", date_format="%Y-%m-%d")

    sentiment = pd.DataFrame(
        {
            "timestamp": pd.date_range(args.start, periods=args.days, freq="D"),
            "sentiment_positive": np.round(rng.beta(2.0, 2.0, args.days), 6),
        }
    )
    sentiment.to_csv(out / "sentiment.csv", index=False)
    print(f"wrote {len(EXCHANGES)} exchange files + sentiment.csv to {out}")


if __name__ == "__main__":
    main()
