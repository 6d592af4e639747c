"""
Producer-side rules: harvests, the quantity offered in each session and the
adaptive target-production update.
"""
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Optional

import numpy as np

from core.errors import DataError

if TYPE_CHECKING:
    from world_model.agents import Producer

logger = logging.getLogger(__name__)

DATA_DRIVEN = "data-driven"
ADAPTIVE = "adaptive"


@dataclass
class ProductionPlan:
    """
    How much a producer harvests.

    Data-driven plans replay ``series`` (tonnes by year) and ignore the
    adaptive fields. Adaptive plans harvest ``target`` and move it by
    ``change`` when the mean remembered price leaves [low, high].
    """

    mode: str = DATA_DRIVEN
    series: Dict[int, float] = field(default_factory=dict)
    target: float = 0.0
    change: float = 0.0
    price_memory_length: int = 12
    high_price: float = 6.0
    low_price: float = 4.0

    def __post_init__(self):
        if self.mode not in (DATA_DRIVEN, ADAPTIVE):
            raise ValueError(f"unknown production mode {self.mode!r}")
        if self.mode == ADAPTIVE and self.target <= 0:
            raise ValueError("adaptive production needs a positive target")
        if self.low_price >= self.high_price:
            raise ValueError("low price threshold must be below the high one")

    def harvest_for(self, producer_id: str, year: int) -> float:
        if self.mode == ADAPTIVE:
            return self.target
        if year not in self.series:
            raise DataError(f"no production for producer {producer_id} in year {year}", field=str(year))
        return float(self.series[year])


def preload(producer: "Producer", amount: float, cycle: int = 12, sessions: Optional[int] = None) -> None:
    """
    Stock a producer at t=0 with a crop of ``amount`` tonnes.

    Only the ``sessions`` monthly quotas left before the first harvest are
    put in stock (a full crop by default), so the first harvest finds no
    stock beyond the usual unsold rollover.
    """
    sessions = cycle if sessions is None else sessions
    if not 1 <= sessions <= cycle:
        raise ValueError(f"preload must cover 1 to {cycle} sessions, got {sessions}")
    producer.monthly_quota = amount / cycle
    producer.inventory = amount if sessions == cycle else producer.monthly_quota * sessions
    producer.last_harvest = amount
    producer.rollover = 0.0


def produce(
    producer: "Producer",
    year: int,
    cycle: int = 12,
    multiplier: float = 1.0,
    rng: Optional[np.random.Generator] = None,
    noise: float = 0.0,
) -> float:
    """
    Harvest and open a new production year.

    Stock still held at harvest becomes the rollover of the new year and
    the monthly quota becomes harvest / cycle.

    Returns:
        float: Tonnes added to inventory
    """
    amount = producer.plan.harvest_for(producer.region_id, year) * multiplier
    if noise > 0 and producer.plan.mode == ADAPTIVE:
        if rng is None:
            raise ValueError("yield noise requires a random generator")
        amount *= float(rng.lognormal(mean=-0.5 * noise * noise, sigma=noise))
    producer.rollover = producer.inventory
    producer.inventory += amount
    producer.last_harvest = amount
    producer.monthly_quota = amount / cycle
    logger.debug(f"{producer.region_id} harvested {amount:.3f} t for {year}")
    return amount


def allocate_monthly_supply(producer: "Producer", month: int, mode: str = "wheat", cycle: int = 12) -> float:
    """
    Quantity offered in this month's session.

    wheat: monthly quota plus unsold stock rolled over, bounded by inventory.
    generic: inventory divided by the sessions left up to and including the
    harvest month.
    """
    if mode == "wheat":
        offer = producer.monthly_quota + producer.rollover
    elif mode == "generic":
        remaining = (producer.harvest_month - month) % cycle + 1
        offer = producer.inventory / remaining
    else:
        raise ValueError(f"unknown supply allocation {mode!r}")
    offer = max(0.0, min(offer, producer.inventory))
    producer.session_allocation = offer
    return offer


def record_unsold(producer: "Producer", unsold: float) -> None:
    """Carry what was offered but not sold into next month's offer."""
    producer.rollover = max(0.0, unsold)


def update_target_production(producer: "Producer") -> float:
    """
    Adjust the target by the mean of remembered session prices.

    Returns:
        float: The new target
    """
    plan = producer.plan
    if not producer.price_memory or plan.change == 0:
        return plan.target
    mean_price = float(np.mean(producer.price_memory))
    if mean_price > plan.high_price:
        plan.target *= 1.0 + plan.change
    elif mean_price < plan.low_price:
        plan.target *= 1.0 - plan.change
    return plan.target
