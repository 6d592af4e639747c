"""
Linear demand schedules sent by buyers to market sessions.
"""
from dataclasses import dataclass
from typing import List


@dataclass
class DemandCurve:
    """
    q(p) = max(0, intercept - slope * p) for p <= price_cap, 0 above.

    Foreign curves carry ``floor_quantity`` (the minimum importable
    quantity): whenever the raw quantity falls below it the curve returns 0.
    """

    intercept: float
    slope: float
    price_cap: float
    floor_quantity: float = 0.0

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError(f"demand slope must be positive, got {self.slope}")
        if self.intercept < 0:
            self.intercept = 0.0

    def raw_quantity(self, price: float) -> float:
        return max(0.0, self.intercept - self.slope * price)

    def quantity(self, price: float) -> float:
        if price > self.price_cap:
            return 0.0
        q = self.raw_quantity(price)
        if self.floor_quantity > 0 and q < self.floor_quantity:
            return 0.0
        return q

    @property
    def zero_price(self) -> float:
        """Price at which the raw schedule reaches zero."""
        return self.intercept / self.slope

    @property
    def floor_price(self) -> float:
        """Highest price at which the curve still meets its floor."""
        return (self.intercept - self.floor_quantity) / self.slope

    def breakpoints(self) -> List[float]:
        """Prices where the schedule changes slope or jumps."""
        points = [self.price_cap]
        if self.floor_quantity > 0:
            if self.intercept >= self.floor_quantity:
                points.append(self.floor_price)
        else:
            points.append(self.zero_price)
        return [p for p in points if 0.0 <= p <= self.price_cap]

    def shift(self, delta: float) -> float:
        """
        Move the intercept by ``delta``, flooring at zero.

        Returns:
            float: The change actually applied
        """
        new_intercept = max(0.0, self.intercept + delta)
        applied = new_intercept - self.intercept
        self.intercept = new_intercept
        return applied

    def scale(self, ratio: float) -> None:
        self.intercept *= ratio
        self.slope *= ratio


# Keeps slopes positive for buyers whose desired demand is zero.
MIN_DEMAND_SLOPE = 1e-9


def demand_slope(monthly_target: float, slope_tuner: float, average_price: float) -> float:
    """d_b = d~ * delta_D / p_avg."""
    return monthly_target * slope_tuner / average_price


def seeded_curve(
    weight: float,
    monthly_target: float,
    slope: float,
    average_price: float,
    price_cap: float,
    intercept_tuner: float = 0.5,
    floor_quantity: float = 0.0,
) -> DemandCurve:
    """
    The ``weight`` share of a buyer's starting schedule.

    Summed over weights adding to one, and with the intercept tuner at its
    reference value 0.5, the curves demand d~ at the average price,
    d~(1+delta_D) at price zero and d~(1-delta_D) at twice the average price.

    Args:
        weight: Share of the buyer's demand sent to this session
        monthly_target: d~
        slope: The buyer's total slope d_b
        average_price: p_avg
        price_cap: p_z
        intercept_tuner: Scales the intercept as 2 * tuner
        floor_quantity: I_min for foreign sessions, 0 at home

    Returns:
        DemandCurve: The session curve
    """
    return DemandCurve(
        intercept=2.0 * intercept_tuner * weight * (monthly_target + slope * average_price),
        slope=max(weight * slope, MIN_DEMAND_SLOPE),
        price_cap=price_cap,
        floor_quantity=floor_quantity,
    )


def minimum_consumption(share: float, market_share: float, global_production: float, cycle: int) -> float:
    """C^min = c * s_b0 * P_0 / tau."""
    return share * market_share * global_production / cycle
