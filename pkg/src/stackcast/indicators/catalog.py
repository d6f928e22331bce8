"""Technical-indicator catalog over daily OHLCV bars.

Every entry computes one named feature column from the composite series.
Columns are full-length float arrays whose leading ``warmup`` positions are
NaN; downstream feature frames drop the union of warm-up rows so no partial
look-back values ever reach a model.

Conventions shared by the whole catalog (and by the independent test oracle):

* ``ema(x, n)`` seeds with the simple mean of the first ``n`` defined values
  and then recurses with ``alpha = 2 / (n + 1)``.
* Rolling statistics emit a value only once the window is fully defined;
  rolling sigma is the sample standard deviation (``ddof=1``).
* Degenerate windows map to bounded neutral values: RSI 50 when both smoothed
  move averages vanish, Stochastic 50 and Williams %R 0 when the high-low
  range collapses; other zero denominators (CCI, TSI, ADX, Ultimate
  Oscillator, Ease of Movement) map to 0.
* Cumulative lines seed at their first bar: ADI and VPT at 0, OBV at 0,
  Negative Volume Index at 1000.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd

from stackcast.data import validate_bars

FAMILIES = ("volume", "volatility", "trend", "momentum")


# ---------------------------------------------------------------------------
# primitives (NaN-prefix aware)
# ---------------------------------------------------------------------------


def _series(a: np.ndarray) -> pd.Series:
    return pd.Series(a, copy=False)


def sma(a: np.ndarray, n: int) -> np.ndarray:
    return _series(a).rolling(n).mean().to_numpy()


def rolling_std(a: np.ndarray, n: int) -> np.ndarray:
    return _series(a).rolling(n).std(ddof=1).to_numpy()


def rolling_sum(a: np.ndarray, n: int) -> np.ndarray:
    return _series(a).rolling(n).sum().to_numpy()


def rolling_min(a: np.ndarray, n: int) -> np.ndarray:
    return _series(a).rolling(n).min().to_numpy()


def rolling_max(a: np.ndarray, n: int) -> np.ndarray:
    return _series(a).rolling(n).max().to_numpy()


def shift(a: np.ndarray, k: int) -> np.ndarray:
    out = np.full_like(a, np.nan)
    if k < len(a):
        out[k:] = a[: len(a) - k]
    return out


def ema(a: np.ndarray, n: int) -> np.ndarray:
    """Mean-seeded exponential moving average with ``alpha = 2/(n+1)``."""
    out = np.full_like(a, np.nan, dtype=np.float64)
    valid = ~np.isnan(a)
    if not valid.any():
        return out
    s = int(np.argmax(valid))
    if len(a) - s < n:
        return out
    alpha = 2.0 / (n + 1.0)
    start = s + n - 1
    acc = float(np.mean(a[s : s + n]))
    out[start] = acc
    for t in range(start + 1, len(a)):
        acc = alpha * a[t] + (1.0 - alpha) * acc
        out[t] = acc
    return out


def _ratio(num: np.ndarray, den: np.ndarray, degenerate: float = 0.0) -> np.ndarray:
    """Elementwise num/den; zero denominators map to ``degenerate``, NaNs pass."""
    out = np.full_like(num, np.nan, dtype=np.float64)
    defined = ~(np.isnan(num) | np.isnan(den))
    zero = defined & (den == 0.0)
    ok = defined & ~zero
    out[ok] = num[ok] / den[ok]
    out[zero] = degenerate
    return out


def _flag(cond: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """0/1 indicator that stays NaN while ``reference`` is in warm-up."""
    out = np.where(np.isnan(reference), np.nan, cond.astype(np.float64))
    return out


def _clv(h: np.ndarray, l: np.ndarray, c: np.ndarray) -> np.ndarray:
    # close-location value; zero-range bars contribute 0
    rng = h - l
    return np.where(rng == 0.0, 0.0, ((c - l) - (h - c)) / np.where(rng == 0.0, 1.0, rng))


# ---------------------------------------------------------------------------
# catalog registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndicatorSpec:
    """One catalog entry: a named, parameterized feature formula."""

    name: str
    family: str
    warmup: int
    formula: str
    fn: Callable[..., np.ndarray]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        for key, value in self.params.items():
            if isinstance(value, int) and value < 1:
                raise ValueError(f"{self.name}: window {key} must be >= 1")


_CATALOG: dict[str, IndicatorSpec] = {}


def _register(name, family, warmup, formula, params=None):
    def deco(fn):
        if name in _CATALOG:
            raise ValueError(f"duplicate indicator name {name!r}")
        _CATALOG[name] = IndicatorSpec(
            name=name, family=family, warmup=warmup, formula=formula, fn=fn,
            params=params or {},
        )
        return fn

    return deco


# -- volume ------------------------------------------------------------------


@_register("volume_adi", "volume", 0, "cumsum(volume * clv)")
def _adi(o, h, l, c, v):
    return np.cumsum(v * _clv(h, l, c))


@_register("volume_obv", "volume", 0, "cumsum(sign(diff close) * volume), seed 0")
def _obv(o, h, l, c, v):
    step = np.sign(np.diff(c)) * v[1:]
    return np.concatenate([[0.0], np.cumsum(step)])


@_register("volume_obv_mean", "volume", 9, "sma(obv, 10)", {"n": 10})
def _obv_mean(o, h, l, c, v):
    return sma(_obv(o, h, l, c, v), 10)


@_register("volume_cmf", "volume", 19, "ema(clv * volume, 20) / ema(volume, 20)", {"n": 20})
def _cmf(o, h, l, c, v):
    return _ratio(ema(_clv(h, l, c) * v, 20), ema(v, 20))


@_register("volume_fi", "volume", 1, "diff(close) * volume")
def _force_index(o, h, l, c, v):
    out = np.full_like(c, np.nan)
    out[1:] = np.diff(c) * v[1:]
    return out


@_register("volume_em", "volume", 20, "sma(midpoint-move * range / volume, 20)", {"n": 20})
def _ease_of_movement(o, h, l, c, v):
    move = (h - shift(h, 1)) + (l - shift(l, 1))
    emv = _ratio(move * (h - l), 2.0 * v)
    return sma(emv, 20)


@_register("volume_vpt", "volume", 0, "cumsum(volume * close-return), seed 0")
def _vpt(o, h, l, c, v):
    step = v[1:] * (np.diff(c) / c[:-1])
    return np.concatenate([[0.0], np.cumsum(step)])


@_register("volume_nvi", "volume", 0, "compound close-return on volume-down days, base 1000")
def _nvi(o, h, l, c, v):
    out = np.empty_like(c)
    out[0] = 1000.0
    for t in range(1, len(c)):
        if v[t] > v[t - 1]:
            out[t] = out[t - 1] * (1.0 + (c[t] - c[t - 1]) / c[t - 1])
        else:
            out[t] = out[t - 1]
    return out


# -- volatility ----------------------------------------------------------------


def _atr_range(h, l, c):
    cp = shift(c, 1)
    return np.maximum(h, cp) - np.maximum(l, cp)


@_register("volatility_atr", "volatility", 20, "ema(max(high, prev close) - max(low, prev close), 20)", {"n": 20})
def _atr(o, h, l, c, v):
    return ema(_atr_range(h, l, c), 20)


def _boll_mavg(c):
    return sma(c, 20)


@_register("volatility_bbm", "volatility", 19, "sma(close, 20)", {"n": 20})
def _bbm(o, h, l, c, v):
    return _boll_mavg(c)


@_register("volatility_bbh", "volatility", 19, "sma(close, 20) + 2 * sigma(close, 20)", {"n": 20, "k": 2})
def _bbh(o, h, l, c, v):
    return _boll_mavg(c) + 2.0 * rolling_std(c, 20)


@_register("volatility_bbl", "volatility", 19, "sma(close, 20) - 2 * sigma(close, 20)", {"n": 20, "k": 2})
def _bbl(o, h, l, c, v):
    return _boll_mavg(c) - 2.0 * rolling_std(c, 20)


@_register("volatility_bbhi", "volatility", 19, "1 if close > upper bollinger band", {"n": 20})
def _bbhi(o, h, l, c, v):
    band = _bbh(o, h, l, c, v)
    return _flag(c > band, band)


@_register("volatility_bbli", "volatility", 19, "1 if close < lower bollinger band", {"n": 20})
def _bbli(o, h, l, c, v):
    band = _bbl(o, h, l, c, v)
    return _flag(c < band, band)


@_register("volatility_kcc", "volatility", 19, "sma((high + low + close) / 3, 20)", {"n": 20})
def _kcc(o, h, l, c, v):
    return sma((h + l + c) / 3.0, 20)


@_register("volatility_kch", "volatility", 9, "sma((4*high - 2*low + close) / 3, 10)", {"n": 10})
def _kch(o, h, l, c, v):
    return sma((4.0 * h - 2.0 * l + c) / 3.0, 10)


@_register("volatility_kcl", "volatility", 9, "sma((-2*high + 4*low + close) / 3, 10)", {"n": 10})
def _kcl(o, h, l, c, v):
    return sma((-2.0 * h + 4.0 * l + c) / 3.0, 10)


@_register("volatility_kchi", "volatility", 9, "1 if close > upper keltner band", {"n": 10})
def _kchi(o, h, l, c, v):
    band = _kch(o, h, l, c, v)
    return _flag(c > band, band)


@_register("volatility_kcli", "volatility", 9, "1 if close < lower keltner band", {"n": 10})
def _kcli(o, h, l, c, v):
    band = _kcl(o, h, l, c, v)
    return _flag(c < band, band)


@_register("volatility_dch", "volatility", 19, "rolling max(close, 20)", {"n": 20})
def _dch(o, h, l, c, v):
    return rolling_max(c, 20)


@_register("volatility_dcl", "volatility", 19, "rolling min(close, 20)", {"n": 20})
def _dcl(o, h, l, c, v):
    return rolling_min(c, 20)


@_register("volatility_dchi", "volatility", 19, "1 if close sits at the 20-day close high", {"n": 20})
def _dchi(o, h, l, c, v):
    # the channel includes the current close, so a strict > would never fire
    band = _dch(o, h, l, c, v)
    return _flag(c >= band, band)


@_register("volatility_dcli", "volatility", 19, "1 if close sits at the 20-day close low", {"n": 20})
def _dcli(o, h, l, c, v):
    band = _dcl(o, h, l, c, v)
    return _flag(c <= band, band)


# -- trend ---------------------------------------------------------------------


def _macd_line(c):
    return ema(c, 12) - ema(c, 26)


@_register("trend_macd", "trend", 25, "ema(close, 12) - ema(close, 26)", {"fast": 12, "slow": 26})
def _macd(o, h, l, c, v):
    return _macd_line(c)


@_register("trend_macd_signal", "trend", 33, "ema(macd, 9)", {"n": 9})
def _macd_signal(o, h, l, c, v):
    return ema(_macd_line(c), 9)


@_register("trend_macd_diff", "trend", 33, "macd - macd signal")
def _macd_diff(o, h, l, c, v):
    macd = _macd_line(c)
    return macd - ema(macd, 9)


@_register("trend_ema", "trend", 19, "ema(close, 20)", {"n": 20})
def _trend_ema(o, h, l, c, v):
    return ema(c, 20)


def _directional(h, l, c):
    cp = shift(c, 1)
    tr = np.maximum(h, cp) - np.minimum(l, cp)
    trs = rolling_sum(tr, 20)
    up = h - shift(h, 1)
    dn = shift(l, 1) - l
    pos = np.where((up > dn) & (up > 0), up, 0.0) + np.where(np.isnan(up) | np.isnan(dn), np.nan, 0.0)
    neg = np.where((dn > up) & (dn > 0), dn, 0.0) + np.where(np.isnan(up) | np.isnan(dn), np.nan, 0.0)
    dip = 100.0 * _ratio(rolling_sum(pos, 20), trs)
    din = 100.0 * _ratio(rolling_sum(neg, 20), trs)
    return dip, din


@_register("trend_adx", "trend", 33, "ema(100 * |dip - din| / (dip + din), 14)", {"tr_window": 20, "n": 14})
def _adx(o, h, l, c, v):
    dip, din = _directional(h, l, c)
    dx = 100.0 * _ratio(np.abs(dip - din), dip + din)
    return ema(dx, 14)


@_register("trend_adx_pos", "trend", 20, "100 * sum(+dm, 20) / sum(true range, 20)", {"n": 20})
def _adx_pos(o, h, l, c, v):
    return _directional(h, l, c)[0]


@_register("trend_adx_neg", "trend", 20, "100 * sum(-dm, 20) / sum(true range, 20)", {"n": 20})
def _adx_neg(o, h, l, c, v):
    return _directional(h, l, c)[1]


@_register("trend_adx_ind", "trend", 20, "1 if dip > din")
def _adx_ind(o, h, l, c, v):
    dip, din = _directional(h, l, c)
    return _flag(dip - din > 0, dip)


def _vortex_parts(h, l, c):
    cp = shift(c, 1)
    tr = np.maximum(h, cp) - np.minimum(l, cp)
    trn = rolling_sum(tr, 14)
    vmp = np.abs(h - shift(l, 1))
    vmn = np.abs(l - shift(h, 1))
    return trn, vmp, vmn


@_register("trend_vortex_pos", "trend", 14, "sum(|high - prev low|, 14) / sum(true range, 14)", {"n": 14})
def _vortex_pos(o, h, l, c, v):
    trn, vmp, _ = _vortex_parts(h, l, c)
    return _ratio(rolling_sum(vmp, 14), trn)


@_register("trend_vortex_neg", "trend", 14, "sum(|low - prev high|, 14) / sum(true range, 14)", {"n": 14})
def _vortex_neg(o, h, l, c, v):
    trn, _, vmn = _vortex_parts(h, l, c)
    return _ratio(rolling_sum(vmn, 14), trn)


@_register("trend_trix", "trend", 40, "1-step relative change of triple ema(close, 14)", {"n": 14})
def _trix(o, h, l, c, v):
    e3 = ema(ema(ema(c, 14), 14), 14)
    return (e3 - shift(e3, 1)) / shift(e3, 1)


@_register("trend_mass_index", "trend", 57, "sum(ema(range, 9) / ema(ema(range, 9), 26), 25)", {"fast": 9, "slow": 26, "n": 25})
def _mass_index(o, h, l, c, v):
    e1 = ema(h - l, 9)
    e2 = ema(e1, 26)
    return rolling_sum(e1 / e2, 25)


@_register("trend_cci", "trend", 19, "(tp - sma(tp, 20)) / (0.015 * sigma(tp, 20))", {"n": 20, "c": 0.015})
def _cci(o, h, l, c, v):
    pp = (h + l + c) / 3.0
    return _ratio(pp - sma(pp, 20), 0.015 * rolling_std(pp, 20))


@_register("trend_dpo", "trend", 19, "close lagged 10 - sma(close, 20)", {"lag": 10, "n": 20})
def _dpo(o, h, l, c, v):
    return shift(c, 10) - sma(c, 20)


def _rocma(c, r, n):
    lagged = shift(c, r)
    return (c - lagged) / sma(lagged, n)


@_register("trend_kst", "trend", 44, "100 * weighted sum of lagged rate-of-change over ma", {"r": (10, 15, 20, 30), "n": (10, 10, 10, 15)})
def _kst(o, h, l, c, v):
    return 100.0 * (
        _rocma(c, 10, 10)
        + 2.0 * _rocma(c, 15, 10)
        + 3.0 * _rocma(c, 20, 10)
        + 4.0 * _rocma(c, 30, 15)
    )


@_register("trend_kst_sig", "trend", 52, "sma(kst, 9)", {"n": 9})
def _kst_sig(o, h, l, c, v):
    return sma(_kst(o, h, l, c, v), 9)


@_register("trend_ichimoku_a", "trend", 51, "lagged mean of 9- and 26-day midprice channels", {"n1": 9, "n2": 26})
def _ichimoku_a(o, h, l, c, v):
    conv = (rolling_max(h, 9) + rolling_min(l, 9)) / 2.0
    base = (rolling_max(h, 26) + rolling_min(l, 26)) / 2.0
    # evaluated 26 bars back so the feature never sees the future
    return shift((conv + base) / 2.0, 26)


@_register("trend_ichimoku_b", "trend", 77, "lagged 52-day midprice channel", {"n2": 26, "n3": 52})
def _ichimoku_b(o, h, l, c, v):
    spanb = (rolling_max(h, 52) + rolling_min(l, 52)) / 2.0
    return shift(spanb, 26)


# -- momentum ------------------------------------------------------------------


@_register("momentum_rsi", "momentum", 14, "100 * ema(up, 14) / (ema(up, 14) + ema(down, 14))", {"n": 14})
def _rsi(o, h, l, c, v):
    delta = np.concatenate([[np.nan], np.diff(c)])
    up = np.where(delta > 0, delta, 0.0) + delta * 0.0
    down = np.where(delta < 0, -delta, 0.0) + delta * 0.0
    eu, ed = ema(up, 14), ema(down, 14)
    return 100.0 * _ratio(eu, eu + ed, degenerate=0.5)


@_register("momentum_tsi", "momentum", 37, "100 * ema(ema(diff close, 25), 13) / ema(ema(|diff close|, 25), 13)", {"r": 25, "s": 13})
def _tsi(o, h, l, c, v):
    m = np.concatenate([[np.nan], np.diff(c)])
    m1 = ema(ema(m, 25), 13)
    m2 = ema(ema(np.abs(m), 25), 13)
    return 100.0 * _ratio(m1, m2)


@_register("momentum_uo", "momentum", 28, "100 * (4*a7 + 2*a14 + a28) / 7, a_n = sum(bp, n) / sum(tr, n)", {"windows": (7, 14, 28), "weights": (4, 2, 1)})
def _ultimate(o, h, l, c, v):
    cp = shift(c, 1)
    bp = c - np.minimum(l, cp)
    tr = np.minimum(h, cp) - np.minimum(l, cp)
    avg = lambda n: _ratio(rolling_sum(bp, n), rolling_sum(tr, n))
    return 100.0 * (4.0 * avg(7) + 2.0 * avg(14) + avg(28)) / 7.0


def _stoch_raw(h, l, c):
    smin = rolling_min(l, 14)
    smax = rolling_max(h, 14)
    return 100.0 * _ratio(c - smin, smax - smin, degenerate=0.5)


@_register("momentum_stoch", "momentum", 13, "100 * (close - min(low, 14)) / (max(high, 14) - min(low, 14))", {"n": 14})
def _stoch(o, h, l, c, v):
    return _stoch_raw(h, l, c)


@_register("momentum_stoch_signal", "momentum", 15, "sma(stoch, 3)", {"n": 3})
def _stoch_signal(o, h, l, c, v):
    return sma(_stoch_raw(h, l, c), 3)


@_register("momentum_wr", "momentum", 13, "-100 * (max(high, 14) - close) / (max(high, 14) - min(low, 14))", {"lbp": 14})
def _williams_r(o, h, l, c, v):
    hh = rolling_max(h, 14)
    ll = rolling_min(l, 14)
    return -100.0 * _ratio(hh - c, hh - ll, degenerate=0.0)


@_register("momentum_ao", "momentum", 33, "sma(midprice, 5) - sma(midprice, 34)", {"fast": 5, "slow": 34})
def _awesome(o, h, l, c, v):
    mp = (h + l) / 2.0
    return sma(mp, 5) - sma(mp, 34)


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def default_catalog() -> list[IndicatorSpec]:
    """All built-in indicator specs in registration (family) order."""
    return list(_CATALOG.values())


def catalog_names() -> list[str]:
    return list(_CATALOG)


def get_spec(name: str) -> IndicatorSpec:
    try:
        return _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown indicator {name!r}") from None


def max_warmup(specs: list[IndicatorSpec] | None = None) -> int:
    specs = specs if specs is not None else default_catalog()
    return max(s.warmup for s in specs)


def compute_catalog(
    bars: pd.DataFrame, specs: list[IndicatorSpec] | None = None
) -> pd.DataFrame:
    """Evaluate the selected indicators over a complete bar series.

    Returns a full-length frame aligned with ``bars``; each column is NaN for
    exactly its warm-up prefix. Raises if the series is shorter than any
    selected spec's warm-up.
    """
    frame = validate_bars(bars, allow_missing=False)
    specs = specs if specs is not None else default_catalog()
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("duplicate indicator names in selection")
    too_short = [s.name for s in specs if len(frame) <= s.warmup]
    if too_short:
        raise ValueError(
            f"series of length {len(frame)} is shorter than the warm-up of: {too_short}"
        )
    o, h, l, c, v = (frame[k].to_numpy() for k in ("open", "high", "low", "close", "volume"))
    data = {s.name: s.fn(o, h, l, c, v) for s in specs}
    out = pd.DataFrame(data, index=frame.index)
    return out
