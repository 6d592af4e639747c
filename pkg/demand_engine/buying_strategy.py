"""
Buying-strategy update.

Each step a buyer revises the intercepts of the curves it sends to the
sessions: demand lost in sessions that closed moves to the cheapest open
one, part of the demand in the dearest session migrates to the cheapest,
newly accessible sessions get a cautious curve, and a buyer that consumed
less than its minimum raises every curve.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional

from demand_engine.demand_curve import DemandCurve, demand_slope
from demand_engine.unit_costs import UnitCostTable

if TYPE_CHECKING:
    from world_model.agents import Buyer
    from world_model.global_config import GlobalConfig

logger = logging.getLogger(__name__)


@dataclass
class DemandMove:
    source: str
    destination: str
    quantity: float


@dataclass
class StrategyUpdate:
    """What a buyer changed in one revision."""

    buyer_id: str
    closed: List[str] = field(default_factory=list)
    reallocated: Dict[str, float] = field(default_factory=dict)
    move: Optional[DemandMove] = None
    entered: List[str] = field(default_factory=list)
    shift: float = 0.0

    @property
    def migrated(self) -> bool:
        return self.move is not None and self.move.quantity > 0


def rank_sessions(buyer: "Buyer", table: UnitCostTable, open_sessions: Iterable[str]) -> List[str]:
    """
    Open sessions the buyer attended last step, by ascending delivered cost.
    Ties keep session-id order.
    """
    open_set = set(open_sessions)
    candidates = [
        s for s in table.attended(buyer.region_id)
        if s in open_set and s in buyer.curves
    ]
    return sorted(candidates, key=lambda s: (table.p_plus(buyer.region_id, s), s))


def reallocate_closed_sessions(
    buyer: "Buyer",
    closed: Iterable[str],
    table: UnitCostTable,
    open_sessions: Iterable[str],
) -> Dict[str, float]:
    """
    Drop the curves of closed sessions and add what was bought there to the
    intercept of the cheapest open session.

    Returns:
        Dict of destination session -> quantity added
    """
    closed = sorted(set(closed))
    ranked = rank_sessions(buyer, table, [s for s in open_sessions if s not in closed])
    added: Dict[str, float] = defaultdict(float)
    for session_id in closed:
        buyer.curves.pop(session_id, None)
        lost = buyer.last_purchases.get(session_id, 0.0)
        if lost <= 0:
            continue
        if not ranked:
            logger.debug(f"{buyer.region_id}: no open session to take {lost:.3f} t from {session_id}")
            continue
        destination = ranked[0]
        buyer.curves[destination].shift(lost)
        added[destination] += lost
    return dict(added)


def move_demand_to_cheapest(
    buyer: "Buyer",
    table: UnitCostTable,
    tolerance: float,
    share: float,
    open_sessions: Optional[Iterable[str]] = None,
) -> Optional[DemandMove]:
    """
    Move ``share`` of last step's purchase in the dearest session to the
    cheapest one when (1 + tolerance) * p+min < p+max.

    Returns:
        The move, or None when the gate does not fire
    """
    if open_sessions is None:
        open_sessions = list(buyer.curves)
    ranked = rank_sessions(buyer, table, open_sessions)
    if len(ranked) < 2:
        return None
    cheapest, dearest = ranked[0], ranked[-1]
    p_min = table.p_plus(buyer.region_id, cheapest)
    p_max = table.p_plus(buyer.region_id, dearest)
    if not (1.0 + tolerance) * p_min < p_max:
        return None
    wanted = share * buyer.last_purchases.get(dearest, 0.0)
    removed = -buyer.curves[dearest].shift(-wanted)
    buyer.curves[cheapest].shift(removed)
    return DemandMove(source=dearest, destination=cheapest, quantity=removed)


def enter_new_session(
    buyer: "Buyer",
    session_id: str,
    table: UnitCostTable,
    markdown: float,
    price_cap: float,
    floor_quantity: float = 0.0,
    p_plus_min: Optional[float] = None,
) -> DemandCurve:
    """
    Curve for a session that just became accessible.

    Demand is zero at (p+min - c_D)(1 - markdown) and grows with the buyer's
    slope below it. A buyer with no purchases to compare against uses the
    session's last observed price as the zero-demand price.
    """
    cost = table.get(buyer.region_id, session_id)
    if p_plus_min is None:
        p_plus_min = table.cheapest_attended(buyer.region_id)
    if p_plus_min is None:
        zero_price = cost.price
    else:
        zero_price = (p_plus_min - cost.transport) * (1.0 - markdown)
    curve = DemandCurve(
        intercept=max(0.0, buyer.demand_slope * zero_price),
        slope=buyer.demand_slope,
        price_cap=price_cap,
        floor_quantity=floor_quantity,
    )
    buyer.curves[session_id] = curve
    return curve


def minimum_consumption_shift(
    buyer: "Buyer",
    consumed: float,
    min_consumption: float,
    open_session_count: int,
) -> float:
    """
    Raise every intercept by max(C^min - C, 0) / #sessions.

    Returns:
        float: The per-curve shift
    """
    if open_session_count <= 0:
        return 0.0
    shift = max(min_consumption - consumed, 0.0) / open_session_count
    if shift > 0:
        for curve in buyer.curves.values():
            curve.shift(shift)
    return shift


def update_buying_strategy(
    buyer: "Buyer",
    table: UnitCostTable,
    open_sessions: Iterable[str],
    config: "GlobalConfig",
) -> StrategyUpdate:
    """
    Revise the buyer's curves for the coming sessions.

    Order: closed-session reallocation, migration to the cheapest session,
    entry into new sessions, minimum-consumption shift.
    """
    open_sessions = list(open_sessions)
    update = StrategyUpdate(buyer_id=buyer.region_id)
    p_plus_min = table.cheapest_attended(buyer.region_id)

    update.closed = sorted(s for s in buyer.curves if s not in open_sessions)
    if update.closed:
        update.reallocated = reallocate_closed_sessions(buyer, update.closed, table, open_sessions)

    update.move = move_demand_to_cheapest(
        buyer,
        table,
        config.tolerance_in_moving_demand,
        config.share_of_demand_to_be_moved,
        open_sessions,
    )

    for session_id in open_sessions:
        if session_id in buyer.curves:
            continue
        floor = 0.0 if buyer.is_domestic(session_id) else config.minimum_importable_quantity
        enter_new_session(
            buyer,
            session_id,
            table,
            config.price_mark_down,
            config.price_cap,
            floor_quantity=floor,
            p_plus_min=p_plus_min,
        )
        update.entered.append(session_id)

    update.shift = minimum_consumption_shift(
        buyer, buyer.last_consumed, buyer.min_consumption, len(buyer.curves)
    )
    return update


def rescale_demand(buyer: "Buyer", monthly_target: float, config: "GlobalConfig", min_slope: float) -> None:
    """
    Follow a new yearly desired demand: curves and slope scale with the
    ratio of the new to the old monthly target.
    """
    old = buyer.monthly_target
    if old > 0 and monthly_target > 0:
        ratio = monthly_target / old
        for curve in buyer.curves.values():
            curve.scale(ratio)
        buyer.demand_slope *= ratio
    else:
        slope = max(
            demand_slope(monthly_target, config.demand_function_slope_tuner, config.average_price),
            min_slope,
        )
        for curve in buyer.curves.values():
            curve.slope = max(slope / len(buyer.curves), min_slope)
        buyer.demand_slope = slope
    buyer.monthly_target = monthly_target
