"""
Weighted world prices and the calibration loss.
"""
import logging
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import DataError

logger = logging.getLogger(__name__)


def monthly_weighted_prices(sessions: pd.DataFrame) -> pd.DataFrame:
    """
    Quantity-weighted price per (year, month) over sessions that traded.

    Args:
        sessions: Session log with columns year, month, price, quantity
    """
    traded = sessions[sessions["quantity"] > 0]
    if traded.empty:
        return pd.DataFrame(columns=["year", "month", "price"])
    value = (traded["price"] * traded["quantity"]).groupby([traded["year"], traded["month"]]).sum()
    volume = traded.groupby(["year", "month"])["quantity"].sum()
    return (value / volume).rename("price").reset_index()


def yearly_weighted_prices(sessions: pd.DataFrame, years: Optional[Sequence[int]] = None) -> pd.Series:
    """
    Mean of the monthly weighted prices per year; months without trade are
    left out and years without any trade are NaN.
    """
    monthly = monthly_weighted_prices(sessions)
    yearly = monthly.groupby("year")["price"].mean() if not monthly.empty else pd.Series(dtype=float)
    if years is None:
        years = sorted(sessions["year"].unique())
    yearly = yearly.reindex([int(y) for y in years])
    missing = yearly[yearly.isna()].index.tolist()
    if missing:
        logger.warning(f"No trade in years {missing}; weighted price missing")
    yearly.name = "price"
    return yearly


def weighted_world_price(run_log, year: int) -> float:
    """Yearly weighted world price of ``year``; NaN when nothing traded."""
    return float(yearly_weighted_prices(run_log.session_frame(), [year]).iloc[0])


def normalize(series) -> np.ndarray:
    """
    Divide by the series' own mean.

    Raises:
        DataError: If the mean is not positive
    """
    values = np.asarray(series, dtype=float)
    mean = float(np.mean(values)) if values.size else float("nan")
    if not mean > 0:
        raise DataError(f"cannot normalize a series with mean {mean}")
    return values / mean


def price_loss(simulated: Sequence[float], observed: Sequence[float]) -> float:
    """
    Sum of squared differences of the normalized series; infinite when a
    simulated year has no price.
    """
    simulated = np.asarray(simulated, dtype=float)
    observed = np.asarray(observed, dtype=float)
    if simulated.shape != observed.shape:
        raise ValueError(f"series lengths differ: {simulated.shape} vs {observed.shape}")
    if np.isnan(simulated).any():
        return float("inf")
    try:
        gap = normalize(simulated) - normalize(observed)
    except DataError:
        return float("inf")
    return float(np.sum(gap ** 2))


def quantity_loss(simulated: Sequence[float], observed: Sequence[float]) -> float:
    """Same form as ``price_loss`` for yearly world quantities."""
    return price_loss(simulated, observed)


def observed_series(prices: Mapping[int, float], years: Sequence[int]) -> np.ndarray:
    missing = [y for y in years if y not in prices]
    if missing:
        raise DataError(f"no observed price for years {missing}", field="observedPrices")
    return np.array([float(prices[y]) for y in years])
