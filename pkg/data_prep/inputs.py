"""
PreparedInputs: the CSV bundle a world is built from.
"""
import logging
import os
from dataclasses import dataclass
from typing import List, Optional

import pandas as pd

from core.errors import DataError

logger = logging.getLogger(__name__)

REGION_COLUMNS = ["id", "lat", "lon", "supplier", "harvest_month", "market_lat", "market_lon"]
REQUIRED_FILES = ("production.csv", "desired_demand.csv", "regions.csv", "eta_d.csv")
BALANCE_FILES = ("balance_production.csv", "balance_demand.csv")


@dataclass
class PreparedInputs:
    """
    Per-region yearly production and desired demand after the partition
    into suppliers and net buyers, plus region coordinates and the demand
    deviation per year. ``balance_production`` and ``balance_demand`` keep
    the pre-partition quantities so the partition can be redone for any
    deviation vector.
    """

    regions: pd.DataFrame
    production: pd.DataFrame
    desired_demand: pd.DataFrame
    eta_d: pd.Series
    balance_production: Optional[pd.DataFrame] = None
    balance_demand: Optional[pd.DataFrame] = None

    @property
    def years(self) -> List[int]:
        return [int(y) for y in self.production.columns]

    def supplier_ids(self) -> List[str]:
        return self.regions.loc[self.regions["supplier"].astype(bool), "id"].tolist()

    def buyer_ids(self) -> List[str]:
        return self.regions["id"].tolist()

    def hub_frame(self) -> pd.DataFrame:
        return self.regions.drop(columns=["supplier"])

    def with_eta(self, eta) -> "PreparedInputs":
        """Redo desired demand and the partition for another deviation vector."""
        from data_prep.demand import desired_demand, reduce_producers

        if self.balance_production is None or self.balance_demand is None:
            raise DataError("inputs carry no balance quantities to re-derive desired demand from")
        desired = desired_demand(self.balance_demand, eta)
        return reduce_producers(self.balance_production, desired, hubs=self.hub_frame(),
                                balance_demand=self.balance_demand, eta=eta)


def _write_wide(frame: pd.DataFrame, path: str) -> None:
    out = frame.copy()
    out.index.name = "region"
    out.columns = [str(c) for c in out.columns]
    out.to_csv(path, encoding="utf-8")


def _read_wide(path: str) -> pd.DataFrame:
    frame = pd.read_csv(path, index_col="region", encoding="utf-8")
    try:
        frame.columns = [int(c) for c in frame.columns]
    except ValueError as e:
        raise DataError("year columns must be integers", source=path, line=1) from e
    if frame.isna().to_numpy().any():
        raise DataError("missing values", source=path)
    return frame.astype(float)


def save_inputs(inputs: PreparedInputs, directory: str) -> None:
    """Write the bundle as UTF-8 CSV files with header rows."""
    os.makedirs(directory, exist_ok=True)
    _write_wide(inputs.production, os.path.join(directory, "production.csv"))
    _write_wide(inputs.desired_demand, os.path.join(directory, "desired_demand.csv"))
    inputs.regions[REGION_COLUMNS].to_csv(os.path.join(directory, "regions.csv"), index=False, encoding="utf-8")
    eta = pd.DataFrame({"year": [int(y) for y in inputs.eta_d.index], "eta_d": inputs.eta_d.to_numpy()})
    eta.to_csv(os.path.join(directory, "eta_d.csv"), index=False, encoding="utf-8")
    if inputs.balance_production is not None and inputs.balance_demand is not None:
        _write_wide(inputs.balance_production, os.path.join(directory, "balance_production.csv"))
        _write_wide(inputs.balance_demand, os.path.join(directory, "balance_demand.csv"))
    logger.info(f"Prepared inputs written to {directory}")


def load_inputs(directory: str) -> PreparedInputs:
    """
    Read a bundle written by ``save_inputs``.

    Raises:
        DataError: Missing files or columns
    """
    for name in REQUIRED_FILES:
        if not os.path.isfile(os.path.join(directory, name)):
            raise DataError(f"missing {name}", source=directory)
    regions = pd.read_csv(os.path.join(directory, "regions.csv"), encoding="utf-8")
    missing = [c for c in REGION_COLUMNS if c not in regions.columns]
    if missing:
        raise DataError(f"missing columns {missing}", source=os.path.join(directory, "regions.csv"), line=1)
    regions["id"] = regions["id"].astype(str)
    regions["supplier"] = regions["supplier"].astype(str).str.lower().isin(["true", "1"])
    eta = pd.read_csv(os.path.join(directory, "eta_d.csv"), encoding="utf-8")
    eta_d = pd.Series(eta["eta_d"].astype(float).to_numpy(), index=eta["year"].astype(int), name="eta_d")
    balance = [os.path.join(directory, name) for name in BALANCE_FILES]
    has_balance = all(os.path.isfile(path) for path in balance)
    return PreparedInputs(
        regions=regions[REGION_COLUMNS],
        production=_read_wide(os.path.join(directory, "production.csv")),
        desired_demand=_read_wide(os.path.join(directory, "desired_demand.csv")),
        eta_d=eta_d,
        balance_production=_read_wide(balance[0]) if has_balance else None,
        balance_demand=_read_wide(balance[1]) if has_balance else None,
    )
