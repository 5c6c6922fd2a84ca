"""Trade event streams and their bucketed regression panels."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from deleverage.errors import EstimationError, ValidationError
from deleverage.utils.validation import validate_positive, validate_square_matrix, validate_vector

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ("timestamp_s", "asset", "signed_volume", "bid_price")

# Relative slack when checking that the horizon is a whole number of buckets.
_MULTIPLE_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class TradeEvent:
    """One trade or quote: signed volume in shares, bid price after the event."""

    timestamp_s: float
    asset: int
    signed_volume: float
    bid_price: float


def events_frame(events: pd.DataFrame | Iterable[TradeEvent]) -> pd.DataFrame:
    """Normalize an event stream to a frame with the standard columns.

    Raises:
        ValidationError: If a column is missing
    """
    if isinstance(events, pd.DataFrame):
        missing = [c for c in EVENT_COLUMNS if c not in events.columns]
        if missing:
            raise ValidationError(f"event stream lacks columns {missing}", field="columns")
        frame = events.loc[:, list(EVENT_COLUMNS)].copy()
    else:
        frame = pd.DataFrame([asdict(e) for e in events], columns=list(EVENT_COLUMNS))
    return frame.astype(
        {"timestamp_s": float, "asset": int, "signed_volume": float, "bid_price": float}
    )


def read_events_csv(path: str | Path) -> pd.DataFrame:
    """Read a ``timestamp_s,asset,signed_volume,bid_price`` CSV with header."""
    return events_frame(pd.read_csv(path))


@dataclass(frozen=True, slots=True, eq=False)
class TradePanel:
    """Regression panel: one row per bucket, one column per asset.

    ``cumulative`` counts the current bucket, so it equals the running sum
    of ``volume`` within each horizon.
    """

    m: int
    horizon_count: int
    buckets_per_horizon: int
    bucket_seconds: float
    prices: NDArray[np.float64]
    """Last bid price per bucket."""

    price_change: NDArray[np.float64]
    """Bid price minus the horizon-start price."""

    cumulative: NDArray[np.float64]
    volume: NDArray[np.float64]

    @property
    def rows(self) -> int:
        """Number of buckets, the regression sample size."""
        return int(self.volume.shape[0])

    @property
    def horizon_seconds(self) -> float:
        """Length of a horizon."""
        return self.bucket_seconds * self.buckets_per_horizon

    def check(self, rtol: float = 1e-9) -> bool:
        """Whether the cumulative volume is the running sum within every horizon."""
        shape = (self.horizon_count, self.buckets_per_horizon, self.m)
        expected = np.cumsum(self.volume.reshape(shape), axis=1).reshape(self.cumulative.shape)
        scale = max(1.0, float(np.max(np.abs(expected), initial=0.0)))
        return bool(np.max(np.abs(expected - self.cumulative), initial=0.0) <= rtol * scale)

    def to_frame(self) -> pd.DataFrame:
        """Flat table with horizon and bucket indices and per-asset columns."""
        data: dict[str, NDArray[np.float64] | NDArray[np.int64]] = {
            "horizon": np.repeat(np.arange(self.horizon_count), self.buckets_per_horizon),
            "bucket": np.tile(np.arange(self.buckets_per_horizon), self.horizon_count),
        }
        for i in range(self.m):
            data[f"price_{i}"] = self.prices[:, i]
            data[f"dprice_{i}"] = self.price_change[:, i]
            data[f"cum_{i}"] = self.cumulative[:, i]
            data[f"vol_{i}"] = self.volume[:, i]
        return pd.DataFrame(data)


def _start_prices(
    frame: pd.DataFrame, m: int, starts: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Last price at or before each start time, else the first observed one."""
    out = np.empty((starts.shape[0], m))
    for asset, group in frame.groupby("asset", sort=True):
        ts = group["timestamp_s"].to_numpy()
        px = group["bid_price"].to_numpy()
        idx = np.searchsorted(ts, starts, side="right") - 1
        out[:, int(asset)] = px[np.maximum(idx, 0)]
    return out


def bucketize(
    events: pd.DataFrame | Iterable[TradeEvent],
    bucket_seconds: float,
    horizon_seconds: float,
    *,
    m: int | None = None,
    horizon_count: int | None = None,
    origin: float | None = None,
) -> TradePanel:
    """Aggregate a time-sorted event stream into a regression panel.

    Time is cut into horizons of ``horizon_seconds`` starting at ``origin``
    (the first timestamp by default), each made of buckets of
    ``bucket_seconds``. Per bucket and asset the panel records the summed
    signed volume, the last bid price (carried forward through empty
    buckets), and the horizon-cumulative volume. Price responses are taken
    against the last price at or before the horizon start.

    Args:
        events: Event frame or iterable of TradeEvent
        bucket_seconds: Bucket length
        horizon_seconds: Horizon length, a whole number of buckets
        m: Asset count (one more than the largest asset index if None)
        horizon_count: Number of horizons (enough to cover every event if None)
        origin: Start of the first horizon

    Returns:
        TradePanel with horizon_count × buckets_per_horizon rows

    Raises:
        EstimationError: If the stream is empty or an asset never trades
        ValidationError: If events are unsorted, an asset index is out of
            range, or the horizon is not a multiple of the bucket
    """
    bucket = validate_positive(bucket_seconds, field="bucket_seconds")
    horizon = validate_positive(horizon_seconds, field="horizon_seconds")
    ratio = horizon / bucket
    per_horizon = int(round(ratio))
    if per_horizon < 1 or abs(ratio - per_horizon) > _MULTIPLE_TOL * ratio:
        raise ValidationError(
            f"horizon {horizon} s is not a multiple of the bucket {bucket} s",
            field="horizon_seconds",
        )

    frame = events_frame(events)
    if frame.empty:
        raise EstimationError("event stream is empty")
    ts = frame["timestamp_s"].to_numpy()
    if np.any(np.diff(ts) < 0):
        raise ValidationError("events are not sorted by timestamp", field="timestamp_s")

    assets = frame["asset"].to_numpy()
    if m is None:
        m = int(assets.max()) + 1
    if assets.min() < 0 or assets.max() >= m:
        raise ValidationError(f"asset index outside 0..{m - 1}", field="asset")
    missing = sorted(set(range(m)) - set(int(a) for a in np.unique(assets)))
    if missing:
        raise EstimationError(f"assets {missing} have no events")

    start = float(ts[0]) if origin is None else float(origin)
    if ts[0] < start:
        raise ValidationError("events precede the origin", field="origin")
    frame = frame.assign(bucket=np.floor((ts - start) / bucket).astype(np.int64))
    if horizon_count is None:
        horizon_count = math.ceil((int(frame["bucket"].max()) + 1) / per_horizon)
    total = horizon_count * per_horizon
    frame = frame[frame["bucket"] < total]

    grid = pd.RangeIndex(total, name="bucket")
    columns = pd.RangeIndex(m, name="asset")
    grouped = frame.groupby(["bucket", "asset"], sort=True)
    volume = (
        grouped["signed_volume"].sum().unstack("asset").reindex(index=grid, columns=columns)
    ).fillna(0.0)
    prices = (
        grouped["bid_price"].last().unstack("asset").reindex(index=grid, columns=columns)
    ).ffill().bfill()

    starts = start + horizon * np.arange(horizon_count)
    start_px = np.repeat(_start_prices(frame, m, starts), per_horizon, axis=0)

    vol = volume.to_numpy(dtype=np.float64)
    cum = np.cumsum(vol.reshape(horizon_count, per_horizon, m), axis=1).reshape(total, m)
    px = prices.to_numpy(dtype=np.float64)

    logger.debug(
        "Bucketized %d events into %d horizons x %d buckets", len(frame), horizon_count, per_horizon
    )
    return TradePanel(
        m=m,
        horizon_count=horizon_count,
        buckets_per_horizon=per_horizon,
        bucket_seconds=bucket,
        prices=px,
        price_change=px - start_px,
        cumulative=cum,
        volume=vol,
    )


def simulate_events(
    lambda_: ArrayLike,
    gamma: ArrayLike,
    *,
    horizons: int,
    buckets_per_horizon: int,
    bucket_seconds: float = 10.0,
    start_prices: ArrayLike | None = None,
    volume_scale: float = 100.0,
    intercepts: ArrayLike | None = None,
    snr: float | None = None,
    seed: int = 0,
) -> pd.DataFrame:
    """Simulate an event stream whose panel follows a known linear impact model.

    Within horizon h the bid price of asset i after bucket t is the
    horizon-start price plus ``c_i + Σ_j γ_ji·cum_jt + Σ_j λ_ji·y_jt``,
    with an optional Gaussian noise term scaled to the requested
    signal-to-noise ratio. A zero-volume quote per asset opens the stream;
    every bucket then carries one trade per asset at its midpoint, so
    :func:`bucketize` with the same bucket and horizon recovers the panel
    exactly.

    Args:
        lambda_: Temporary impact matrix, entry (j, i) acting on asset i
        gamma: Permanent impact matrix, same layout
        horizons: Number of horizons
        buckets_per_horizon: Buckets per horizon
        bucket_seconds: Bucket length
        start_prices: Opening bid prices (100 each if None)
        volume_scale: Standard deviation of bucket volumes, in shares
        intercepts: Drift per bucket (zero if None)
        snr: Ratio of signal to noise standard deviation (noiseless if None)
        seed: Seed of the volume and noise draws

    Returns:
        Event frame with the standard columns
    """
    lam = validate_square_matrix(lambda_, field="lambda")
    m = lam.shape[0]
    gam = validate_square_matrix(gamma, m, field="gamma")
    base = (
        np.full(m, 100.0)
        if start_prices is None
        else validate_vector(start_prices, m, field="start_prices", positive=True)
    )
    drift = (
        np.zeros(m) if intercepts is None else validate_vector(intercepts, m, field="intercepts")
    )
    if horizons < 1 or buckets_per_horizon < 1:
        raise ValidationError("horizons and buckets_per_horizon must be positive", field="horizons")

    rng = np.random.default_rng(seed)
    total = horizons * buckets_per_horizon
    vol = rng.normal(0.0, volume_scale, size=(total, m))
    cum = np.cumsum(vol.reshape(horizons, buckets_per_horizon, m), axis=1).reshape(total, m)
    signal = drift + cum @ gam + vol @ lam
    if snr is not None:
        spread = np.std(signal, axis=0)
        signal = signal + rng.normal(0.0, 1.0, size=signal.shape) * (spread / snr)

    prices = np.empty_like(signal)
    current = base.copy()
    for h in range(horizons):
        rows = slice(h * buckets_per_horizon, (h + 1) * buckets_per_horizon)
        prices[rows] = current + signal[rows]
        current = prices[rows][-1]

    times = (np.arange(total) + 0.5) * bucket_seconds
    trades = pd.DataFrame(
        {
            "timestamp_s": np.repeat(times, m),
            "asset": np.tile(np.arange(m), total),
            "signed_volume": vol.reshape(-1),
            "bid_price": prices.reshape(-1),
        }
    )
    quotes = pd.DataFrame(
        {
            "timestamp_s": np.zeros(m),
            "asset": np.arange(m),
            "signed_volume": np.zeros(m),
            "bid_price": base,
        }
    )
    return events_frame(pd.concat([quotes, trades], ignore_index=True))
