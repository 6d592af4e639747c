"""
Completely open global market: every producer exports, every buyer imports.
"""
from typing import TYPE_CHECKING

from policies.policy_interface import PolicyInterface

if TYPE_CHECKING:
    from world_model.world import World


class OpenMarketPolicy(PolicyInterface):
    """All flags open at every decision."""

    POLICY_ID = "open_market"

    def update_export_flags(self, world: "World", step: int) -> None:
        for producer in world.producers.values():
            producer.export_allowed = True

    def update_import_flags(self, world: "World", step: int) -> None:
        for buyer in world.buyers.values():
            buyer.import_allowed = True
