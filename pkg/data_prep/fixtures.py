"""
Synthetic data for tests and demonstrations.

``synthetic_balance_components`` mimics the reference region table: only
the regions with an outgoing hub ever produce more than they use.
``small_world_inputs`` is a five-region world that runs in milliseconds.
"""
import json
import os
from typing import Dict, Iterable, Optional

import numpy as np
import pandas as pd

from data_prep.balances import COMPONENTS, MANIFEST_NAME, BalanceTable
from data_prep.demand import reduce_producers
from data_prep.hubs import REFERENCE_SUPPLIERS, region_ids

DEMAND_SPLIT = {"food": 0.65, "feed": 0.2, "seed": 0.05, "other": 0.1}


def synthetic_balance_components(
    years: Iterable[int] = range(1992, 2014),
    seed: int = 7,
) -> Dict[str, pd.DataFrame]:
    """
    Balance components for the 24 reference regions.

    Every region-year closes its balance; reference suppliers produce 1.2 to
    2.5 times what they use, the others at most 0.8 times.
    """
    rng = np.random.default_rng(seed)
    years = [int(y) for y in years]
    regions = region_ids()
    shape = (len(regions), len(years))
    base_use = rng.uniform(5_000.0, 60_000.0, size=len(regions))
    trend = np.linspace(1.0, 1.3, len(years))
    use = np.round(base_use[:, None] * trend[None, :] * rng.lognormal(0.0, 0.03, size=shape), 1)

    ratio = np.empty(shape)
    for i, region in enumerate(regions):
        if region in REFERENCE_SUPPLIERS:
            ratio[i] = rng.uniform(1.2, 2.5) * rng.uniform(0.95, 1.05, size=len(years))
        elif region in ("caribbean", "south_eastern_asia"):
            ratio[i] = 0.0
        else:
            ratio[i] = rng.uniform(0.1, 0.7) * rng.uniform(0.95, 1.05, size=len(years))
    production = np.round(use * ratio, 1)
    stock_variation = np.round(rng.normal(0.0, 0.01, size=shape) * use, 1)

    net = use - production - stock_variation
    slack = np.round(rng.uniform(0.0, 0.02, size=shape) * use, 1)
    imports = np.where(net > 0, net + slack, slack)
    exports = np.where(net > 0, slack, -net + slack)

    def frame(values: np.ndarray) -> pd.DataFrame:
        return pd.DataFrame(values, index=pd.Index(regions, name="region"), columns=years)

    components = {
        "production": frame(production),
        "import": frame(imports),
        "export": frame(exports),
        "stock_variation": frame(stock_variation),
    }
    # the last use component absorbs rounding so each balance closes exactly
    allocated = np.zeros(shape)
    for name, share in list(DEMAND_SPLIT.items())[:-1]:
        part = np.round(use * share, 1)
        components[name] = frame(part)
        allocated += part
    components["other"] = frame(use - allocated)
    return components


def synthetic_balance_table(years: Iterable[int] = range(1992, 2014), seed: int = 7) -> BalanceTable:
    return BalanceTable(synthetic_balance_components(years, seed))


def write_synthetic_balances(directory: str, years: Iterable[int] = range(1992, 2014), seed: int = 7) -> str:
    """
    Write one CSV per component plus the manifest.

    Returns:
        str: Path of the manifest
    """
    os.makedirs(directory, exist_ok=True)
    files = {}
    for name, values in synthetic_balance_components(years, seed).items():
        filename = f"{name}.csv"
        out = values.copy()
        out.columns = [str(c) for c in out.columns]
        out.to_csv(os.path.join(directory, filename), encoding="utf-8")
        files[name] = filename
    manifest = os.path.join(directory, MANIFEST_NAME)
    with open(manifest, "w", encoding="utf-8") as f:
        json.dump({"components": {name: files[name] for name in COMPONENTS}}, f, indent=2)
    return manifest


SMALL_WORLD_HUBS = pd.DataFrame(
    [
        # id, lat, lon, harvest_month, market_lat, market_lon
        ("south_exporter", -32.06, 115.74, 12, -32.06, 115.74),
        ("north_exporter", 45.0, -95.0, 7, 29.95, -90.07),
        ("east_exporter", 48.0, 35.0, 7, 46.48, 30.72),
        ("west_importer", 30.0, 31.0, 7, np.nan, np.nan),
        ("far_importer", 35.68, 139.69, 6, np.nan, np.nan),
    ],
    columns=["id", "lat", "lon", "harvest_month", "market_lat", "market_lon"],
)

SMALL_WORLD_PRODUCTION = {"south_exporter": 1500.0, "north_exporter": 900.0, "east_exporter": 700.0,
                          "west_importer": 0.0, "far_importer": 0.0}
SMALL_WORLD_DEMAND = {"south_exporter": 150.0, "north_exporter": 400.0, "east_exporter": 400.0,
                      "west_importer": 1000.0, "far_importer": 1050.0}


def small_world_inputs(years: int = 10, start_year: int = 2000, seed: int = 3,
                       variation: Optional[float] = 0.05):
    """
    Three exporters and two pure importers. The southern exporter is the
    largest and sits far from both importers.
    """
    rng = np.random.default_rng(seed)
    ids = list(SMALL_WORLD_HUBS["id"])
    columns = list(range(start_year, start_year + years))
    shocks = rng.lognormal(0.0, variation or 0.0, size=(len(ids), years)) if variation else np.ones((len(ids), years))
    production = pd.DataFrame(
        [[SMALL_WORLD_PRODUCTION[r] * shocks[i, j] for j in range(years)] for i, r in enumerate(ids)],
        index=ids, columns=columns,
    )
    demand = pd.DataFrame(
        [[SMALL_WORLD_DEMAND[r] * (1.0 + 0.01 * j) for j in range(years)] for r in ids],
        index=ids, columns=columns,
    )
    return reduce_producers(production, demand, hubs=SMALL_WORLD_HUBS, balance_demand=demand)
