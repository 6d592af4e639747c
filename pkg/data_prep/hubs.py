"""
Static region table: the 24 world regions, their commercial hubs and
typical harvest months.

Buyers receive wheat at the incoming hub; producers ship from the outgoing
hub. Regions without an outgoing hub never export in the reference setup.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import pandas as pd


@dataclass(frozen=True)
class RegionHub:
    id: str
    continent: str
    incoming_hub: str
    incoming: Tuple[float, float]
    harvest_month: int
    outgoing_hub: Optional[str] = None
    outgoing: Optional[Tuple[float, float]] = None


REGION_HUBS: List[RegionHub] = [
    RegionHub("eastern_africa", "Africa", "Ethiopia", (9.03, 38.74), 11),
    RegionHub("middle_africa", "Africa", "Angola", (-8.84, 13.23), 6),
    RegionHub("northern_africa", "Africa", "Egypt", (31.20, 29.92), 5),
    RegionHub("southern_africa", "Africa", "South Africa", (-29.86, 31.03), 11),
    RegionHub("western_africa", "Africa", "Nigeria", (6.45, 3.39), 3),
    RegionHub("usa", "America", "USA", (41.88, -87.63), 7, "USA", (29.95, -90.07)),
    RegionHub("northern_america_except_usa", "America", "Canada", (45.50, -73.57), 9,
              "Canada", (49.28, -123.12)),
    RegionHub("south_america", "America", "Brazil", (-23.96, -46.33), 12, "Argentina", (-34.60, -58.38)),
    RegionHub("central_america", "America", "Mexico", (19.17, -96.13), 5),
    RegionHub("caribbean", "America", "Cuba", (23.11, -82.37), 5),
    RegionHub("india", "Asia", "India", (18.95, 72.84), 4, "India", (22.47, 70.06)),
    RegionHub("pakistan", "Asia", "Pakistan", (24.86, 67.01), 5, "Pakistan", (24.86, 67.01)),
    RegionHub("southern_asia_except_india_pakistan", "Asia", "Iran", (27.18, 56.27), 6),
    RegionHub("russian_federation", "Asia", "Russian Federation", (55.76, 37.62), 8,
              "Russian Federation", (44.72, 37.77)),
    RegionHub("central_asia_except_russia", "Asia", "Uzbekistan", (41.30, 69.24), 9,
              "Kazakhstan", (51.17, 71.45)),
    RegionHub("china", "Asia", "China", (39.90, 116.40), 6, "China", (31.23, 121.47)),
    RegionHub("eastern_asia_except_china", "Asia", "Japan", (35.68, 139.69), 6),
    RegionHub("south_eastern_asia", "Asia", "Indonesia", (-6.21, 106.85), 3),
    RegionHub("western_asia", "Asia", "Iraq", (33.31, 44.36), 6),
    RegionHub("eastern_europe", "Europe", "Poland", (54.35, 18.65), 7, "Ukraine", (46.48, 30.72)),
    RegionHub("northern_europe", "Europe", "United Kingdom", (51.51, -0.13), 8,
              "United Kingdom", (53.74, -0.33)),
    RegionHub("western_europe", "Europe", "Netherlands", (51.92, 4.48), 7, "France", (49.44, 1.10)),
    RegionHub("southern_europe", "Europe", "Italy", (41.12, 16.87), 6),
    RegionHub("oceania", "Oceania", "New Zealand", (-36.85, 174.76), 12, "Australia", (-32.06, 115.74)),
]

REFERENCE_SUPPLIERS = tuple(hub.id for hub in REGION_HUBS if hub.outgoing is not None)

HUB_COLUMNS = ["id", "lat", "lon", "harvest_month", "market_lat", "market_lon"]


def hub_frame(hubs: Optional[List[RegionHub]] = None) -> pd.DataFrame:
    """Region coordinates as a frame with columns ``HUB_COLUMNS``."""
    rows = []
    for hub in hubs or REGION_HUBS:
        market = hub.outgoing or (float("nan"), float("nan"))
        rows.append({
            "id": hub.id,
            "lat": hub.incoming[0],
            "lon": hub.incoming[1],
            "harvest_month": hub.harvest_month,
            "market_lat": market[0],
            "market_lon": market[1],
        })
    return pd.DataFrame(rows, columns=HUB_COLUMNS)


def region_ids() -> List[str]:
    return [hub.id for hub in REGION_HUBS]
