"""
Session clearing.

Participant curves are summed horizontally into a piecewise-linear
aggregate demand and crossed with the producer's supply: horizontal at the
reservation price up to the offered quantity, vertical after it.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import InvariantViolation
from demand_engine.demand_curve import DemandCurve

logger = logging.getLogger(__name__)

INTERIOR = "interior"
FLOOR_JUMP = "floor_jump"
CAP_JUMP = "cap_jump"


def reservation_price(a_rp: float, b_rp: float, oil_price: float) -> float:
    """rp = a_rp + b_rp * O_p."""
    return a_rp + b_rp * oil_price


@dataclass(frozen=True)
class SupplyCurve:
    """Horizontal at ``reservation_price`` up to ``quantity``, then vertical."""

    quantity: float
    reservation_price: float

    def __post_init__(self):
        if self.quantity < 0:
            raise ValueError(f"offered quantity must be non-negative, got {self.quantity}")
        if self.reservation_price < 0:
            raise ValueError(f"reservation price must be non-negative, got {self.reservation_price}")


@dataclass
class SessionOutcome:
    """Result of one session in one step."""

    session_id: str
    price: float
    total_quantity: float
    offered: float
    quantities: Dict[str, float] = field(default_factory=dict)
    producer_rationed: bool = False
    buyers_rationed: bool = False

    @property
    def label(self) -> str:
        if self.total_quantity <= 0:
            return "no_trade"
        if self.buyers_rationed:
            return "buyers_rationed"
        if self.producer_rationed:
            return "producer_rationed"
        return "equilibrium"


def _right_limit(curve: DemandCurve, price: float) -> float:
    """Quantity just above ``price``; curves are left-continuous."""
    if price >= curve.price_cap:
        return 0.0
    if curve.floor_quantity > 0 and price >= curve.floor_price:
        return 0.0
    return curve.raw_quantity(price)


class AggregateDemand:
    """Horizontal sum of participant demand curves."""

    def __init__(self, curves: Sequence[DemandCurve]):
        self.curves = list(curves)
        points = {p for curve in self.curves for p in curve.breakpoints()}
        self.breakpoints = np.array(sorted(points), dtype=float)

    def quantity(self, price: float) -> float:
        return float(sum(curve.quantity(price) for curve in self.curves))

    def quantities(self, price: float) -> List[float]:
        return [curve.quantity(price) for curve in self.curves]

    def right_quantities(self, price: float) -> List[float]:
        return [_right_limit(curve, price) for curve in self.curves]

    def solve(self, target: float, lower: float) -> Tuple[float, str]:
        """
        Lowest price >= ``lower`` at which aggregate demand falls to ``target``.

        Requires quantity(lower) > target. Returns the price and how it was
        reached: inside a linear stretch, or at a jump caused by an import
        floor or by the price cap.
        """
        start = lower
        later = [float(b) for b in self.breakpoints if b > lower]
        for end in later + [None]:
            right = self.right_quantities(start)
            if sum(right) <= target:
                at_cap = any(
                    curve.quantity(start) > 0 and start == curve.price_cap for curve in self.curves
                )
                return start, CAP_JUMP if at_cap else FLOOR_JUMP
            if end is None:
                break
            active = [c for c, q in zip(self.curves, right) if q > 0]
            intercepts = sum(c.intercept for c in active)
            slopes = sum(c.slope for c in active)
            if intercepts - slopes * end <= target:
                price = (intercepts - target) / slopes
                return min(max(price, start), end), INTERIOR
            start = end
        raise InvariantViolation(f"aggregate demand stays above {target} past every breakpoint")


def clear_session(
    supply: SupplyCurve,
    demands: Sequence[Tuple[str, DemandCurve]],
    session_id: str = "",
    last_price: Optional[float] = None,
) -> SessionOutcome:
    """
    Clear one session.

    Args:
        supply: The producer's offer
        demands: (buyer id, curve) pairs of the participants
        session_id: Session identifier carried into the outcome
        last_price: Price reported when nobody participates

    Returns:
        SessionOutcome with the price, total and per-buyer quantities
    """
    rp, offered = supply.reservation_price, supply.quantity
    buyer_ids = [buyer_id for buyer_id, _ in demands]
    if not demands:
        return SessionOutcome(
            session_id=session_id,
            price=rp if last_price is None else last_price,
            total_quantity=0.0,
            offered=offered,
            producer_rationed=offered > 0,
        )
    aggregate = AggregateDemand([curve for _, curve in demands])
    buyers_rationed = False

    if offered <= 0:
        price, quantities = rp, [0.0] * len(demands)
    elif aggregate.quantity(rp) <= offered:
        price, quantities = rp, aggregate.quantities(rp)
    else:
        price, kind = aggregate.solve(offered, rp)
        if kind == INTERIOR:
            quantities = aggregate.quantities(price)
        elif kind == FLOOR_JUMP:
            quantities = aggregate.right_quantities(price)
        else:
            demanded = aggregate.quantities(price)
            scale = offered / sum(demanded)
            quantities = [q * scale for q in demanded]
            buyers_rationed = True
            logger.warning(f"Session {session_id} cleared at the price cap {price}; buyers rationed")

    total = float(sum(quantities))
    if total > offered:
        # rounding in the linear solve
        quantities = [q * offered / total for q in quantities]
        total = float(sum(quantities))
    return SessionOutcome(
        session_id=session_id,
        price=float(price),
        total_quantity=total,
        offered=offered,
        quantities=dict(zip(buyer_ids, quantities)),
        producer_rationed=total < offered,
        buyers_rationed=buyers_rationed,
    )
