"""
Agents of the simulated wheat market.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Optional

from core.errors import DataError
from demand_engine.demand_curve import DemandCurve
from supply_engine.production import ProductionPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeoPoint:
    """A position in degrees."""

    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise DataError(f"latitude {self.latitude} outside [-90, 90]", field="lat")
        if not -180.0 < self.longitude <= 180.0:
            raise DataError(f"longitude {self.longitude} outside (-180, 180]", field="lon")


@dataclass
class Region:
    """
    Geographic shell of a buyer and possibly a producer.

    ``location`` is the incoming hub where the buyer receives wheat;
    ``market_location`` is the hub a producer ships from and defaults to
    ``location``.
    """

    id: str
    location: GeoPoint
    has_producer: bool
    has_buyer: bool = True
    harvest_month: Optional[int] = None
    market_location: Optional[GeoPoint] = None

    @property
    def hub(self) -> GeoPoint:
        return self.market_location or self.location


@dataclass
class Producer:
    """Seller of one region; owns exactly one market session."""

    region_id: str
    location: GeoPoint
    harvest_month: int
    plan: ProductionPlan
    inventory: float = 0.0
    export_allowed: bool = True
    price_memory: Deque[float] = field(default_factory=deque)
    session_allocation: float = 0.0
    monthly_quota: float = 0.0
    rollover: float = 0.0
    last_harvest: float = 0.0

    def __post_init__(self):
        if not self.price_memory.maxlen:
            self.price_memory = deque(self.price_memory, maxlen=self.plan.price_memory_length)

    @property
    def production_series(self) -> Dict[int, float]:
        return self.plan.series

    @property
    def target_production(self) -> float:
        return self.plan.target

    def record_price(self, price: float) -> None:
        self.price_memory.append(price)


@dataclass
class Buyer:
    """
    Demand side of one region.

    ``curves`` holds one demand curve per attended session; ``last_purchases``
    the quantities bought in each of those sessions during the last step.
    """

    region_id: str
    location: GeoPoint
    desired_demand: Dict[int, float]
    monthly_target: float
    demand_slope: float
    min_consumption: float
    has_producer: bool = False
    import_allowed: bool = True
    inventory: float = 0.0
    curves: Dict[str, DemandCurve] = field(default_factory=dict)
    last_purchases: Dict[str, float] = field(default_factory=dict)
    last_bought: float = 0.0
    last_consumed: float = 0.0

    @property
    def domestic_session(self) -> Optional[str]:
        return self.region_id if self.has_producer else None

    def is_domestic(self, session_id: str) -> bool:
        return self.has_producer and session_id == self.region_id

    def total_intercept(self) -> float:
        return sum(curve.intercept for curve in self.curves.values())


@dataclass
class MarketSession:
    """Session of one producer inside the single monthly market."""

    producer_id: str
    latitude: float
    last_price: float
    last_total_quantity: float = 0.0

    @property
    def id(self) -> str:
        return self.producer_id

    def open_to(self, producer: Producer, buyer: Buyer) -> bool:
        """Domestic buyer always; foreign buyers iff export and import are both allowed."""
        if buyer.region_id == producer.region_id:
            return True
        return producer.export_allowed and buyer.import_allowed


@dataclass
class Clock:
    """Monthly simulation clock; step 0 is the first month of ``start_year``."""

    start_year: int
    months_per_year: int = 12
    step: int = 0

    @property
    def year(self) -> int:
        return self.start_year + self.step // self.months_per_year

    @property
    def month(self) -> int:
        return self.step % self.months_per_year + 1

    def advance(self) -> None:
        self.step += 1

    def step_of(self, year: int, month: int) -> int:
        return (year - self.start_year) * self.months_per_year + (month - 1)
