import numpy as np
import pandas as pd
import pytest

from stackcast.indicators import (
    FeatureFrame,
    attach_external_columns,
    build_feature_frame,
    catalog_names,
    compute_catalog,
    default_catalog,
    get_spec,
    max_warmup,
)
from tests.conftest import random_bars
from tests.oracle_indicators import ORACLE


def _oracle_column(name, bars):
    o, h, l, c, v = (bars[k].tolist() for k in ("open", "high", "low", "close", "volume"))
    return np.asarray(ORACLE[name](o, h, l, c, v), dtype=float)


class TestCatalogOracle:
    def test_every_indicator_has_an_oracle(self):
        assert set(catalog_names()) == set(ORACLE)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_full_catalog_matches_independent_oracle(self, seed):
        bars = random_bars(250, seed=seed)
        computed = compute_catalog(bars)
        for name in catalog_names():
            expect = _oracle_column(name, bars)
            got = computed[name].to_numpy()
            assert np.array_equal(np.isnan(got), np.isnan(expect)), f"{name}: NaN pattern"
            mask = ~np.isnan(expect)
            np.testing.assert_allclose(
                got[mask], expect[mask], rtol=1e-9, atol=1e-12, err_msg=name
            )

    def test_declared_warmup_matches_first_defined_value(self):
        bars = random_bars(300, seed=11)
        computed = compute_catalog(bars)
        for spec in default_catalog():
            col = computed[spec.name].to_numpy()
            first_valid = int(np.argmax(~np.isnan(col)))
            assert first_valid == spec.warmup, spec.name
            assert not np.isnan(col[spec.warmup :]).any(), spec.name


class TestSpotValues:
    def test_obv_hand_walk(self):
        bars = random_bars(4, seed=0)
        for col, vals in (("close", [10, 11, 11, 9]), ("volume", [5, 6, 7, 8])):
            bars[col] = np.asarray(vals, dtype=float)
        bars["open"] = bars["close"]
        bars["high"] = bars["close"] * 1.1
        bars["low"] = bars["close"] * 0.9
        obv = compute_catalog(bars, [get_spec("volume_obv")])["volume_obv"]
        np.testing.assert_allclose(obv.to_numpy(), [0.0, 6.0, 6.0, -2.0])

    def test_williams_r_zero_at_period_high(self):
        bars = random_bars(40, seed=1)
        # force the last close to be the 14-day highest high
        bars.iloc[-1, bars.columns.get_loc("close")] = bars["high"].iloc[-14:].max() * 1.05
        bars.iloc[-1, bars.columns.get_loc("high")] = bars["close"].iloc[-1]
        wr = compute_catalog(bars, [get_spec("momentum_wr")])["momentum_wr"]
        assert wr.iloc[-1] == pytest.approx(0.0, abs=1e-12)

    def test_stochastic_range_endpoints(self):
        bars = random_bars(40, seed=2)
        spec = [get_spec("momentum_stoch")]
        low_bars = bars.copy()
        low_bars.iloc[-1, low_bars.columns.get_loc("close")] = (
            low_bars["low"].iloc[-14:].min() * 0.95
        )
        low_bars.iloc[-1, low_bars.columns.get_loc("low")] = low_bars["close"].iloc[-1]
        low_bars.iloc[-1, low_bars.columns.get_loc("open")] = low_bars["close"].iloc[-1]
        assert compute_catalog(low_bars, spec)["momentum_stoch"].iloc[-1] == pytest.approx(0.0)

        high_bars = bars.copy()
        high_bars.iloc[-1, high_bars.columns.get_loc("close")] = (
            high_bars["high"].iloc[-14:].max() * 1.05
        )
        high_bars.iloc[-1, high_bars.columns.get_loc("high")] = high_bars["close"].iloc[-1]
        high_bars.iloc[-1, high_bars.columns.get_loc("open")] = high_bars["close"].iloc[-1]
        assert compute_catalog(high_bars, spec)["momentum_stoch"].iloc[-1] == pytest.approx(100.0)

    def test_bollinger_on_constant_series_collapses(self):
        n = 60
        bars = pd.DataFrame(
            {"open": 50.0, "high": 50.0, "low": 50.0, "close": 50.0, "volume": 1.0},
            index=pd.date_range("2020-01-01", periods=n, freq="D", name="timestamp"),
        )
        specs = [get_spec(n) for n in ("volatility_bbm", "volatility_bbh", "volatility_bbl")]
        out = compute_catalog(bars, specs).dropna()
        assert (out["volatility_bbm"] == 50.0).all()
        assert (out["volatility_bbh"] == 50.0).all()
        assert (out["volatility_bbl"] == 50.0).all()


class TestProperties:
    @pytest.mark.parametrize("seed", range(5))
    def test_range_bounds(self, seed):
        bars = random_bars(200, seed=seed)
        out = compute_catalog(bars)
        for name in ("momentum_rsi", "momentum_stoch", "momentum_stoch_signal"):
            col = out[name].dropna()
            assert ((col >= 0) & (col <= 100)).all(), name
        wr = out["momentum_wr"].dropna()
        assert ((wr >= -100) & (wr <= 0)).all()
        atr = out["volatility_atr"].dropna()
        assert (atr >= 0).all()
        mi = out["trend_mass_index"].dropna()
        assert (mi > 0).all()
        for name in (
            "volatility_bbhi", "volatility_bbli", "volatility_kchi",
            "volatility_kcli", "volatility_dchi", "volatility_dcli", "trend_adx_ind",
        ):
            col = out[name].dropna()
            assert col.isin([0.0, 1.0]).all(), name

    def test_bollinger_and_donchian_ordering(self):
        bars = random_bars(220, seed=9)
        out = compute_catalog(bars).dropna()
        assert (out["volatility_bbh"] >= out["volatility_bbm"] - 1e-12).all()
        assert (out["volatility_bbm"] >= out["volatility_bbl"] - 1e-12).all()
        assert (out["volatility_dch"] >= out["volatility_dcl"]).all()

    def test_shift_invariance(self):
        bars = random_bars(150, seed=4)
        shifted = bars.copy()
        for col in ("open", "high", "low", "close"):
            shifted[col] = shifted[col] + 500.0
        names = ["momentum_rsi", "momentum_stoch", "momentum_wr"]
        specs = [get_spec(n) for n in names]
        a = compute_catalog(bars, specs)
        b = compute_catalog(shifted, specs)
        for n in names:
            np.testing.assert_allclose(
                a[n].dropna().to_numpy(), b[n].dropna().to_numpy(), rtol=1e-7, atol=1e-7
            )

    def test_scale_invariance(self):
        bars = random_bars(150, seed=5)
        scaled = bars.copy()
        for col in ("open", "high", "low", "close"):
            scaled[col] = scaled[col] * 8.25
        names = ["momentum_rsi", "momentum_stoch", "momentum_wr",
                 "trend_vortex_pos", "trend_vortex_neg", "trend_trix"]
        specs = [get_spec(n) for n in names]
        a = compute_catalog(bars, specs)
        b = compute_catalog(scaled, specs)
        for n in names:
            np.testing.assert_allclose(
                a[n].dropna().to_numpy(), b[n].dropna().to_numpy(), rtol=1e-9, atol=1e-12
            )


class TestErrors:
    def test_unknown_indicator_name(self):
        with pytest.raises(KeyError, match="unknown indicator"):
            get_spec("trend_bogus")

    def test_series_shorter_than_warmup(self):
        bars = random_bars(30, seed=0)
        with pytest.raises(ValueError, match="warm-up"):
            compute_catalog(bars)  # ichimoku_b needs 78 bars


class TestFeatureFrame:
    def test_build_drops_warmup_and_label_rows(self, bars250):
        frame = build_feature_frame(bars250)
        warm = max_warmup()
        assert len(frame) == len(bars250) - warm - 1
        assert frame.index[0] == bars250.index[warm]
        assert not frame.features.isna().any().any()
        assert set(frame.labels.unique()) <= {0, 1}

    def test_attach_empty_is_identity(self, bars250):
        frame = build_feature_frame(bars250)
        same = attach_external_columns(frame, {})
        pd.testing.assert_frame_equal(same.features, frame.features)

    def test_attach_with_missing_dates_shrinks_exactly(self, bars250):
        frame = build_feature_frame(bars250)
        series = pd.Series(0.5, index=frame.index[3:], name="sentiment_positive")
        out = attach_external_columns(frame, {"sentiment_positive": series})
        assert len(out) == len(frame) - 3
        assert "sentiment_positive" in out.feature_names

    def test_attach_duplicate_name_rejected(self, bars250):
        frame = build_feature_frame(bars250)
        series = pd.Series(1.0, index=frame.index)
        with pytest.raises(ValueError, match="duplicate"):
            attach_external_columns(frame, {"momentum_rsi": series})

    def test_csv_round_trip(self, tmp_path, bars250):
        frame = build_feature_frame(bars250)
        path = tmp_path / "features.csv"
        frame.to_csv(path)
        back = FeatureFrame.from_csv(path)
        assert back.feature_names == frame.feature_names
        np.testing.assert_allclose(
            back.features.to_numpy(), frame.features.to_numpy(), rtol=1e-12
        )
        assert (back.labels == frame.labels).all()

    def test_window_selection(self, bars250):
        frame = build_feature_frame(bars250)
        start, end = frame.index[5], frame.index[25]
        sub = frame.window(start, end)
        assert len(sub) == 21
        assert sub.index[0] == start and sub.index[-1] == end
