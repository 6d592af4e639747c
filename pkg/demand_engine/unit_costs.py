"""
Delivered unit costs seen by buyers when they revise their demand.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

UNIT_COST_COLUMNS = ["step", "buyer", "session", "price", "transport", "p_plus", "bought"]


@dataclass(frozen=True)
class UnitCost:
    price: float
    transport: float
    bought: float
    attended: bool

    @property
    def p_plus(self) -> float:
        return self.price + self.transport


class UnitCostTable:
    """
    Per (buyer, session): last session price, transport cost and the quantity
    bought in the previous step. Rebuilt every step.
    """

    def __init__(self, step: int = 0):
        self.step = step
        self._entries: Dict[Tuple[str, str], UnitCost] = {}

    def set(self, buyer_id: str, session_id: str, price: float, transport: float,
            bought: float = 0.0, attended: bool = False) -> None:
        self._entries[(buyer_id, session_id)] = UnitCost(price, transport, bought, attended)

    def get(self, buyer_id: str, session_id: str) -> Optional[UnitCost]:
        return self._entries.get((buyer_id, session_id))

    def p_plus(self, buyer_id: str, session_id: str) -> float:
        return self._entries[(buyer_id, session_id)].p_plus

    def transport(self, buyer_id: str, session_id: str) -> float:
        return self._entries[(buyer_id, session_id)].transport

    def attended(self, buyer_id: str) -> List[str]:
        return [s for (b, s), cost in self._entries.items() if b == buyer_id and cost.attended]

    def cheapest_attended(self, buyer_id: str) -> Optional[float]:
        """Lowest p+ among sessions the buyer attended last step."""
        costs = [self.p_plus(buyer_id, s) for s in self.attended(buyer_id)]
        return min(costs) if costs else None

    def __len__(self) -> int:
        return len(self._entries)

    def rows(self) -> Iterable[dict]:
        for (buyer_id, session_id), cost in self._entries.items():
            if not cost.attended:
                continue
            yield {
                "step": self.step,
                "buyer": buyer_id,
                "session": session_id,
                "price": cost.price,
                "transport": cost.transport,
                "p_plus": cost.p_plus,
                "bought": cost.bought,
            }
