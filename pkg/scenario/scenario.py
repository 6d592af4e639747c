"""
Scenario documents: timed trade-policy events, an optional projection with
frozen quantities, and yield shocks.
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.config import load_json_document
from core.errors import ConfigError, DataError, ScenarioError
from policies.policy_interface import PolicyInterface
from supply_engine.yield_shocks import YieldShock, parse_month

if TYPE_CHECKING:
    from world_model.world import World

logger = logging.getLogger(__name__)

EXPORT_ALLOWED = "export_allowed"
IMPORT_ALLOWED = "import_allowed"
# Historical window of the 2010 export ban; the lift month is configurable.
DEFAULT_BAN_START = "2010-08"
DEFAULT_BAN_END = "2011-07"

MonthRef = Union[str, int]


class PolicyEvent(BaseModel):
    """Sets ``flag`` of ``region`` to ``value`` for every step in the window."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    region: str
    flag: Literal["export_allowed", "import_allowed"]
    value: bool = False
    start_month: MonthRef = Field(alias="startMonth")
    end_month: MonthRef = Field(alias="endMonth")


class Projection(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    freeze_year: int = Field(alias="freezeYear")
    extra_months: int = Field(0, alias="extraMonths", ge=0)


class YieldShockEntry(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    region: str
    start_month: MonthRef = Field(alias="startMonth")
    end_month: MonthRef = Field(alias="endMonth")
    multiplier: float = Field(ge=0)


class Scenario(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    name: str = "baseline"
    policy_events: List[PolicyEvent] = Field(default_factory=list, alias="policyEvents")
    projection: Optional[Projection] = None
    yield_shocks: List[YieldShockEntry] = Field(default_factory=list, alias="yieldShocks")

    def without_events(self) -> "Scenario":
        """Same scenario with every policy event removed."""
        return self.model_copy(update={"name": f"{self.name}-baseline", "policy_events": []})

    def shocks(self, start_year: int, months_per_year: int = 12) -> List[YieldShock]:
        return [
            YieldShock(
                region=entry.region,
                start_step=parse_month(entry.start_month, start_year, months_per_year),
                end_step=parse_month(entry.end_month, start_year, months_per_year),
                multiplier=entry.multiplier,
            )
            for entry in self.yield_shocks
        ]


def export_ban(region: str, start_month: MonthRef = DEFAULT_BAN_START,
               end_month: MonthRef = DEFAULT_BAN_END) -> PolicyEvent:
    return PolicyEvent(region=region, flag=EXPORT_ALLOWED, value=False,
                       start_month=start_month, end_month=end_month)


def load_scenario(path: str) -> Scenario:
    """
    Raises:
        ScenarioError: Unreadable or invalid scenario document
    """
    try:
        document = load_json_document(path)
    except ConfigError as e:
        raise ScenarioError(str(e)) from e
    try:
        return Scenario.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ()))
        raise ScenarioError(first.get("msg", str(e)), source=path, field=field or None) from e


@dataclass(frozen=True)
class ScheduledEvent:
    """A policy event with its window resolved to step indices."""

    region: str
    flag: str
    value: bool
    start_step: int
    end_step: int

    def active(self, step: int) -> bool:
        return self.start_step <= step <= self.end_step


def resolve_events(scenario: Scenario, start_year: int, months_per_year: int = 12) -> List[ScheduledEvent]:
    events = []
    for index, event in enumerate(scenario.policy_events):
        try:
            start = parse_month(event.start_month, start_year, months_per_year)
            end = parse_month(event.end_month, start_year, months_per_year)
        except DataError as e:
            raise ScenarioError(str(e), field=f"policyEvents.{index}") from e
        events.append(ScheduledEvent(event.region, event.flag, event.value, start, end))
    return events


def validate_scenario(scenario: Scenario, world: "World", horizon: int) -> List[ScheduledEvent]:
    """
    Check a scenario against a world and a run horizon in steps.

    Returns:
        The events resolved to step windows

    Raises:
        ScenarioError: Unknown regions, inverted or out-of-horizon windows,
            export events on regions without a producer, contradictory
            overlapping events, or a projection outside the input years
    """
    events = resolve_events(scenario, world.clock.start_year, world.clock.months_per_year)
    for index, event in enumerate(events):
        field = f"policyEvents.{index}"
        if event.region not in world.regions:
            raise ScenarioError(f"unknown region {event.region!r}", field=field)
        if event.flag == EXPORT_ALLOWED and event.region not in world.producers:
            raise ScenarioError(f"region {event.region!r} has no producer to ban", field=field)
        if event.end_step < event.start_step:
            raise ScenarioError(f"window of {event.region!r} ends before it starts", field=field)
        if event.start_step < 0 or event.end_step >= horizon:
            raise ScenarioError(f"window of {event.region!r} lies outside the run horizon", field=field)
    by_key: Dict[Tuple[str, str], List[ScheduledEvent]] = {}
    for event in events:
        by_key.setdefault((event.region, event.flag), []).append(event)
    for (region, flag), group in by_key.items():
        group = sorted(group, key=lambda e: e.start_step)
        for first, second in zip(group, group[1:]):
            if second.start_step <= first.end_step and first.value != second.value:
                raise ScenarioError(f"contradictory overlapping {flag} events for {region!r}")
    for entry in scenario.yield_shocks:
        if entry.region not in world.regions:
            raise ScenarioError(f"unknown region {entry.region!r}", field="yieldShocks")
    if scenario.projection is not None:
        years = {year for buyer in world.buyers.values() for year in buyer.desired_demand}
        if scenario.projection.freeze_year not in years:
            raise ScenarioError(f"freeze year {scenario.projection.freeze_year} outside the input years",
                                field="projection.freezeYear")
    return events


class ScheduledPolicy(PolicyInterface):
    """
    Applies scheduled events; flags without an active event are open.
    """

    POLICY_ID = "scheduled"

    def __init__(self, events: Optional[List[ScheduledEvent]] = None):
        super().__init__()
        self.events = list(events or [])

    def _flag(self, region: str, flag: str, step: int) -> bool:
        for event in self.events:
            if event.region == region and event.flag == flag and event.active(step):
                return event.value
        return True

    def update_export_flags(self, world: "World", step: int) -> None:
        for producer in world.producers.values():
            allowed = self._flag(producer.region_id, EXPORT_ALLOWED, step)
            if allowed != producer.export_allowed:
                self.logger.info(f"Step {step}: export from {producer.region_id} "
                                 f"{'allowed' if allowed else 'banned'}")
            producer.export_allowed = allowed

    def update_import_flags(self, world: "World", step: int) -> None:
        for buyer in world.buyers.values():
            buyer.import_allowed = self._flag(buyer.region_id, IMPORT_ALLOWED, step)


def apply_policy_events(world: "World", scenario: Scenario, step: int) -> Dict[Tuple[str, str], bool]:
    """
    Set every flag of ``world`` as ``scenario`` dictates at ``step``.

    Returns:
        The flags whose value changed, keyed by (region, flag)
    """
    policy = ScheduledPolicy(resolve_events(scenario, world.clock.start_year, world.clock.months_per_year))
    before = {(p.region_id, EXPORT_ALLOWED): p.export_allowed for p in world.producers.values()}
    before.update({(b.region_id, IMPORT_ALLOWED): b.import_allowed for b in world.buyers.values()})
    policy.update_export_flags(world, step)
    policy.update_import_flags(world, step)
    after = {(p.region_id, EXPORT_ALLOWED): p.export_allowed for p in world.producers.values()}
    after.update({(b.region_id, IMPORT_ALLOWED): b.import_allowed for b in world.buyers.values()})
    return {key: value for key, value in after.items() if before[key] != value}
