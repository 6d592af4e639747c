"""
Policy Interface for CMS-Wheat.
Defines the hooks a trade policy implements for the step sequencer.
"""
import logging
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from world_model.world import World


class PolicyInterface(ABC):
    """
    Interface for trade policies.

    The world calls ``update_export_flags`` in the first phase of a step and
    ``update_import_flags`` in the second, each at its decision interval.
    """

    POLICY_ID = "base_policy"

    def __init__(self):
        self.name = self.__class__.__name__
        self.description = self.__doc__ or "No description available"
        self.logger = logging.getLogger(f"policy.{self.POLICY_ID}")

    @abstractmethod
    def update_export_flags(self, world: "World", step: int) -> None:
        """
        Set ``export_allowed`` on the world's producers.

        Args:
            world: World being stepped
            step: Current step index
        """

    @abstractmethod
    def update_import_flags(self, world: "World", step: int) -> None:
        """
        Set ``import_allowed`` on the world's buyers.

        Args:
            world: World being stepped
            step: Current step index
        """
