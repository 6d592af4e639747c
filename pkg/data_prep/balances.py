"""
Yearly wheat balance sheets per region.

Each component lives in its own CSV (rows = regions, columns = years); a
JSON manifest binds component names to files. For every region and year

    production + import - export + stock_variation = food + feed + seed + other

and the right-hand side is the quantity used, D.
"""
import logging
import os
from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np
import pandas as pd

from core.config import load_json_document
from core.errors import DataError

logger = logging.getLogger(__name__)

COMPONENTS = ("production", "import", "export", "stock_variation", "food", "feed", "seed", "other")
DEMAND_COMPONENTS = ("food", "feed", "seed", "other")
SIGNED_COMPONENTS = ("stock_variation",)
MANIFEST_NAME = "manifest.json"

# Relative per-region balance residual above which a warning is logged.
BALANCE_WARNING_TOLERANCE = 1e-6


@dataclass(frozen=True)
class BalanceRecord:
    region: str
    year: int
    production: float
    imports: float
    exports: float
    stock_variation: float
    food: float
    feed: float
    seed: float
    other: float

    @property
    def demand(self) -> float:
        return self.food + self.feed + self.seed + self.other


class BalanceTable:
    """
    All balance components, one wide frame (regions x years) per component.
    """

    def __init__(self, components: Dict[str, pd.DataFrame]):
        missing = [c for c in COMPONENTS if c not in components]
        if missing:
            raise DataError(f"missing balance components {missing}")
        self.components = {name: components[name].astype(float) for name in COMPONENTS}
        reference = self.components["production"]
        self.regions: List[str] = list(reference.index)
        self.years: List[int] = [int(y) for y in reference.columns]

    def component(self, name: str) -> pd.DataFrame:
        return self.components[name]

    def production(self) -> pd.DataFrame:
        return self.components["production"]

    def demand(self) -> pd.DataFrame:
        """D = food + feed + seed + other."""
        return sum(self.components[name] for name in DEMAND_COMPONENTS)

    def net_imports(self) -> pd.DataFrame:
        return self.components["import"] - self.components["export"]

    def residuals(self) -> pd.DataFrame:
        """Per-region balance residual (supply side minus use side)."""
        return (
            self.components["production"] + self.net_imports()
            + self.components["stock_variation"] - self.demand()
        )

    def records(self) -> List[BalanceRecord]:
        c = self.components
        return [
            BalanceRecord(
                region=region,
                year=year,
                production=c["production"].at[region, year],
                imports=c["import"].at[region, year],
                exports=c["export"].at[region, year],
                stock_variation=c["stock_variation"].at[region, year],
                food=c["food"].at[region, year],
                feed=c["feed"].at[region, year],
                seed=c["seed"].at[region, year],
                other=c["other"].at[region, year],
            )
            for region in self.regions
            for year in self.years
        ]

    def __len__(self) -> int:
        return len(self.regions) * len(self.years)


def _read_component(path: str, name: str) -> pd.DataFrame:
    if not os.path.isfile(path):
        raise DataError(f"file for component '{name}' not found", source=path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if frame.columns[0] != "region":
        raise DataError("first column must be 'region'", source=path, line=1, field=frame.columns[0])
    years = []
    for column in frame.columns[1:]:
        try:
            years.append(int(column))
        except ValueError:
            raise DataError("year columns must be integers", source=path, line=1, field=column)
    frame = frame.set_index("region")
    frame.columns = years
    values = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = values.isna()
    if bad.to_numpy().any():
        row, column = np.argwhere(bad.to_numpy())[0]
        raise DataError(
            f"missing or non-numeric value for region {frame.index[row]}",
            source=path, line=int(row) + 2, field=str(years[column]),
        )
    if name not in SIGNED_COMPONENTS:
        negative = values < 0
        if negative.to_numpy().any():
            row, column = np.argwhere(negative.to_numpy())[0]
            raise DataError(
                f"negative {name} for region {frame.index[row]}",
                source=path, line=int(row) + 2, field=str(years[column]),
            )
    if frame.index.duplicated().any():
        raise DataError(f"duplicate regions {frame.index[frame.index.duplicated()].tolist()}", source=path)
    return values


def load_balances(path: str) -> BalanceTable:
    """
    Load and validate balance components.

    Args:
        path: Manifest JSON file, or a directory holding ``manifest.json``

    Raises:
        DataError: Missing cells, negative components, or components that
            disagree on regions or years
    """
    manifest_path = os.path.join(path, MANIFEST_NAME) if os.path.isdir(path) else path
    manifest = load_json_document(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    files = manifest.get("components", manifest)
    components = {}
    for name in COMPONENTS:
        if name not in files:
            raise DataError(f"manifest has no entry for component '{name}'", source=manifest_path, field=name)
        components[name] = _read_component(os.path.join(base, files[name]), name)

    reference = components["production"]
    for name, frame in components.items():
        if list(frame.index) != list(reference.index):
            raise DataError(f"regions of '{name}' differ from 'production'", source=files[name], field="region")
        if list(frame.columns) != list(reference.columns):
            raise DataError(f"years of '{name}' differ from 'production'", source=files[name])

    table = BalanceTable(components)
    residual = table.residuals().abs() / table.demand().abs().clip(lower=1.0)
    off = residual[residual > BALANCE_WARNING_TOLERANCE].stack()
    if not off.empty:
        logger.warning(f"{len(off)} region-years do not close their balance; largest relative gap {off.max():.3g}")
    logger.info(f"Loaded balances: {len(table.regions)} regions x {len(table.years)} years")
    return table


def compute_gni(table: BalanceTable, year: int) -> float:
    """Global net import: sum over regions of imports minus exports."""
    return float(table.net_imports()[year].sum())


@dataclass(frozen=True)
class WorldBalance:
    """World totals of one year. Supply counts stock variation."""

    year: int
    supply: float
    demand: float
    gni: float

    @property
    def residual(self) -> float:
        """Y - D + GNI; zero when every region's balance closes."""
        return self.supply - self.demand + self.gni


def world_balance(table: BalanceTable, year: int) -> WorldBalance:
    supply = table.production()[year] + table.component("stock_variation")[year]
    return WorldBalance(
        year=year,
        supply=float(supply.sum()),
        demand=float(table.demand()[year].sum()),
        gni=compute_gni(table, year),
    )


@dataclass(frozen=True)
class CorrectedBalance:
    supply: float
    demand: float
    eta_supply: float
    eta_demand: float


def correct_balance(supply: float, demand: float, gni: float) -> CorrectedBalance:
    """
    Remove the global net import from either side.

    supply_hat = (1 + GNI/Y) Y and demand_hat = (1 - GNI/D) D.
    """
    if supply <= 0 or demand <= 0:
        raise DataError(f"world supply and demand must be positive, got {supply} and {demand}")
    eta_supply = gni / supply
    eta_demand = -gni / demand
    return CorrectedBalance(
        supply=(1.0 + eta_supply) * supply,
        demand=(1.0 + eta_demand) * demand,
        eta_supply=eta_supply,
        eta_demand=eta_demand,
    )


def corrected_supply_demand(table: BalanceTable, year: int) -> CorrectedBalance:
    totals = world_balance(table, year)
    return correct_balance(totals.supply, totals.demand, totals.gni)


def diagnostics_frame(table: BalanceTable) -> pd.DataFrame:
    """World balance and corrections per year."""
    rows = []
    for year in table.years:
        totals = world_balance(table, year)
        corrected = correct_balance(totals.supply, totals.demand, totals.gni)
        rows.append({
            "year": year,
            "supply": totals.supply,
            "demand": totals.demand,
            "gni": totals.gni,
            "residual": totals.residual,
            "eta_supply": corrected.eta_supply,
            "eta_demand": corrected.eta_demand,
        })
    return pd.DataFrame(rows)


def production_concentration(table: BalanceTable, tops: Iterable[int] = (5, 20)) -> Dict[int, float]:
    """Share of world production (whole period) held by the top-n regions."""
    totals = table.production().sum(axis=1).sort_values(ascending=False)
    world = float(totals.sum())
    if world <= 0:
        return {n: 0.0 for n in tops}
    return {n: float(totals.head(n).sum()) / world for n in tops}
