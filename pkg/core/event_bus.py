"""
Event Bus for CMS-Wheat.
Synchronous publish/subscribe used to instrument the simulation step.
"""
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple

logger = logging.getLogger(__name__)

EventHandler = Callable[["Event"], None]


@dataclass
class Event:
    """An event published on the bus."""

    event_type: str
    source: str
    data: Dict[str, Any] = field(default_factory=dict)
    timestamp: float = field(default_factory=time.time)


class EventBus:
    """
    In-process event bus.

    Handlers run synchronously in subscription order. A failing handler is
    logged and does not stop delivery to the others.
    """

    def __init__(self):
        self._handlers: Dict[str, List[Tuple[str, EventHandler]]] = defaultdict(list)

    def subscribe(self, event_type: str, handler: EventHandler, subscriber_id: str) -> None:
        """
        Subscribe a handler to an event type.

        Args:
            event_type: Event type to listen for, or "*" for every event
            handler: Callable receiving the event
            subscriber_id: Identifier used to unsubscribe later
        """
        self._handlers[event_type].append((subscriber_id, handler))

    def unsubscribe(self, subscriber_id: str) -> int:
        """
        Remove every handler registered under ``subscriber_id``.

        Returns:
            int: Number of handlers removed
        """
        removed = 0
        for event_type in list(self._handlers):
            kept = [(sid, h) for sid, h in self._handlers[event_type] if sid != subscriber_id]
            removed += len(self._handlers[event_type]) - len(kept)
            self._handlers[event_type] = kept
        return removed

    def publish(self, event: Event) -> None:
        """Deliver an event to its subscribers."""
        handlers = self._handlers.get(event.event_type, []) + self._handlers.get("*", [])
        for subscriber_id, handler in handlers:
            try:
                handler(event)
            except Exception as e:
                logger.exception(f"Handler {subscriber_id} failed on {event.event_type}: {str(e)}")
