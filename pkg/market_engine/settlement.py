"""
Settlement of cleared sessions into inventories.
"""
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Mapping

from core.errors import InvariantViolation
from market_engine.clearing import SessionOutcome

if TYPE_CHECKING:
    from world_model.agents import Buyer, Producer

logger = logging.getLogger(__name__)

# Relative slack for floating-point sums when checking the allocation bound.
ALLOCATION_TOLERANCE = 1e-9


@dataclass
class SettlementRecord:
    session_id: str
    producer_delta: float
    buyer_deltas: Dict[str, float] = field(default_factory=dict)


def settle(outcome: SessionOutcome, producer: "Producer", buyers: Mapping[str, "Buyer"]) -> SettlementRecord:
    """
    Move the sold quantities from the producer to the buyers.

    Raises:
        InvariantViolation: If more than the session allocation or the
            producer inventory was sold
    """
    limit = producer.session_allocation * (1.0 + ALLOCATION_TOLERANCE) + ALLOCATION_TOLERANCE
    if outcome.total_quantity > limit:
        raise InvariantViolation(
            f"session {outcome.session_id} sold {outcome.total_quantity} above allocation "
            f"{producer.session_allocation}"
        )
    remaining = producer.inventory - outcome.total_quantity
    if remaining < -ALLOCATION_TOLERANCE * max(1.0, producer.inventory):
        raise InvariantViolation(
            f"session {outcome.session_id} sold {outcome.total_quantity} from inventory {producer.inventory}"
        )
    record = SettlementRecord(session_id=outcome.session_id, producer_delta=0.0)
    if outcome.total_quantity <= 0:
        return record
    for buyer_id, quantity in outcome.quantities.items():
        if quantity <= 0:
            continue
        buyer = buyers[buyer_id]
        buyer.inventory += quantity
        buyer.last_purchases[outcome.session_id] = buyer.last_purchases.get(outcome.session_id, 0.0) + quantity
        record.buyer_deltas[buyer_id] = quantity
    producer.inventory = max(0.0, remaining)
    record.producer_delta = -outcome.total_quantity
    return record
