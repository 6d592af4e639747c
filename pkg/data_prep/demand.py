"""
Desired demand and the supplier / net-buyer partition.
"""
import logging
from typing import Mapping, Optional, Union

import numpy as np
import pandas as pd

from core.errors import DataError
from data_prep.balances import BalanceTable
from data_prep.hubs import hub_frame
from data_prep.inputs import REGION_COLUMNS, PreparedInputs

logger = logging.getLogger(__name__)

EtaLike = Union[pd.Series, Mapping[int, float], float]


def eta_series(eta: EtaLike, years) -> pd.Series:
    """Deviation per year; a scalar applies to every year."""
    years = [int(y) for y in years]
    if np.isscalar(eta):
        series = pd.Series(float(eta), index=years)
    else:
        series = pd.Series(dict(eta), dtype=float) if isinstance(eta, Mapping) else eta.astype(float)
        series.index = [int(y) for y in series.index]
        missing = [y for y in years if y not in series.index]
        if missing:
            raise DataError(f"no demand deviation for years {missing}", field="eta_d")
        series = series.loc[years]
    out_of_range = series[(series <= -1) | (series >= 1)]
    if not out_of_range.empty:
        raise DataError(f"demand deviation outside (-1, 1) in years {out_of_range.index.tolist()}", field="eta_d")
    series.name = "eta_d"
    return series


def desired_demand(demand: Union[BalanceTable, pd.DataFrame], eta: EtaLike) -> pd.DataFrame:
    """
    D~ = (1 - eta_t) D, column by column.

    Args:
        demand: Balance table or quantity used per region (rows) and year
        eta: Deviation per year
    """
    used = demand.demand() if isinstance(demand, BalanceTable) else demand.astype(float)
    series = eta_series(eta, used.columns)
    return used * (1.0 - series.to_numpy())[None, :]


def reduce_producers(
    production: Union[BalanceTable, pd.DataFrame],
    desired: pd.DataFrame,
    hubs: Optional[pd.DataFrame] = None,
    balance_demand: Optional[pd.DataFrame] = None,
    eta: Optional[EtaLike] = None,
) -> PreparedInputs:
    """
    Split regions into suppliers and net buyers.

    A region whose desired demand covers its production in every year is a
    net buyer: its production becomes zero and its demand the net demand
    D~ - Y. All other regions supply and keep Y and D~.

    Args:
        production: Balance table or production per region and year
        desired: Desired demand per region and year
        hubs: Coordinates and harvest months (defaults to the static table)
        balance_demand: Quantity used before the deviation, kept for reports
        eta: Deviation vector the desired demand was derived with
    """
    if isinstance(production, BalanceTable):
        if balance_demand is None:
            balance_demand = production.demand()
        production = production.production()
    production = production.astype(float)
    if list(production.index) != list(desired.index) or list(production.columns) != list(desired.columns):
        raise DataError("production and desired demand must cover the same regions and years")

    net_buyer = (desired >= production).all(axis=1)
    reduced_production = production.copy()
    reduced_demand = desired.copy()
    reduced_production.loc[net_buyer] = 0.0
    reduced_demand.loc[net_buyer] = desired.loc[net_buyer] - production.loc[net_buyer]

    hubs = hub_frame() if hubs is None else hubs
    hubs = hubs.set_index("id")
    unknown = [r for r in production.index if r not in hubs.index]
    if unknown:
        raise DataError(f"no hub coordinates for regions {unknown}", field="id")
    regions = hubs.loc[list(production.index)].reset_index()
    regions["supplier"] = [not bool(net_buyer[r]) for r in production.index]
    for column in ("market_lat", "market_lon"):
        if column not in regions.columns:
            regions[column] = np.nan

    years = [int(y) for y in production.columns]
    eta_d = eta_series(0.0 if eta is None else eta, years)
    suppliers = int(regions["supplier"].sum())
    logger.info(f"Partition: {suppliers} suppliers, {len(regions) - suppliers} net buyers")
    return PreparedInputs(
        regions=regions[REGION_COLUMNS],
        production=reduced_production,
        desired_demand=reduced_demand,
        eta_d=eta_d,
        balance_production=production,
        balance_demand=balance_demand.astype(float) if balance_demand is not None else desired,
    )
