"""
Yield-shock schedules: multiplicative harvest shocks inside month windows.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

import pandas as pd

from core.errors import DataError

logger = logging.getLogger(__name__)

YIELD_SHOCK_COLUMNS = ["region", "start_month", "end_month", "multiplier"]


def parse_month(value, start_year: int, months_per_year: int = 12, source: Optional[str] = None) -> int:
    """
    Convert ``"YYYY-MM"`` (or a plain step index) into a step index.
    """
    if isinstance(value, int):
        return value
    text = str(value).strip()
    if text.lstrip("-").isdigit():
        return int(text)
    try:
        year_text, month_text = text.split("-")
        year, month = int(year_text), int(month_text)
    except ValueError:
        raise DataError(f"expected YYYY-MM, got {text!r}", source=source)
    if not 1 <= month <= months_per_year:
        raise DataError(f"month out of range in {text!r}", source=source)
    return (year - start_year) * months_per_year + month - 1


@dataclass(frozen=True)
class YieldShock:
    """Harvests of ``region`` at steps in [start_step, end_step] are scaled by ``multiplier``."""

    region: str
    start_step: int
    end_step: int
    multiplier: float

    def __post_init__(self):
        if self.end_step < self.start_step:
            raise DataError(f"yield shock for {self.region} ends before it starts")
        if self.multiplier < 0:
            raise DataError(f"yield shock multiplier for {self.region} is negative", field="multiplier")

    def active(self, region: str, step: int) -> bool:
        return region == self.region and self.start_step <= step <= self.end_step


def shock_multiplier(shocks: Iterable[YieldShock], region: str, step: int) -> float:
    """Product of the multipliers of every shock active for ``region`` at ``step``."""
    multiplier = 1.0
    for shock in shocks:
        if shock.active(region, step):
            multiplier *= shock.multiplier
    return multiplier


def load_yield_shocks(path: str, start_year: int, months_per_year: int = 12) -> List[YieldShock]:
    """
    Read a schedule CSV with columns region, start_month, end_month, multiplier.
    """
    frame = pd.read_csv(path, dtype={"region": str, "start_month": str, "end_month": str})
    missing = [c for c in YIELD_SHOCK_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"missing columns {missing}", source=path)
    shocks = []
    for index, row in frame.iterrows():
        line = int(index) + 2
        try:
            multiplier = float(row["multiplier"])
        except (TypeError, ValueError):
            raise DataError("multiplier is not a number", source=path, line=line, field="multiplier")
        shocks.append(YieldShock(
            region=row["region"],
            start_step=parse_month(row["start_month"], start_year, months_per_year, source=path),
            end_step=parse_month(row["end_month"], start_year, months_per_year, source=path),
            multiplier=multiplier,
        ))
    logger.info(f"Loaded {len(shocks)} yield shocks from {path}")
    return shocks
