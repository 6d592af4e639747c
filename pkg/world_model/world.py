"""
World construction and the monthly step sequencer.

Each step runs seven phases in a fixed order:
export flags, import flags, buying strategies, market sessions,
consumption, production, target production.
"""
import logging
from typing import Dict, Iterable, List, Optional

import numpy as np

from core.errors import ConfigError, DataError
from core.event_bus import Event, EventBus
from demand_engine.buying_strategy import rescale_demand, update_buying_strategy
from demand_engine.demand_curve import MIN_DEMAND_SLOPE, demand_slope, minimum_consumption, seeded_curve
from demand_engine.transport import distance_matrix, transport_cost_for_distance
from demand_engine.unit_costs import UnitCostTable
from market_engine.clearing import SupplyCurve, clear_session, reservation_price
from market_engine.settlement import settle
from metrics.prometheus_metrics import MetricsManager
from policies.open_market import OpenMarketPolicy
from policies.policy_interface import PolicyInterface
from supply_engine.production import (
    ADAPTIVE,
    ProductionPlan,
    allocate_monthly_supply,
    preload,
    produce,
    record_unsold,
    update_target_production,
)
from supply_engine.yield_shocks import YieldShock, shock_multiplier
from world_model.agents import Buyer, Clock, GeoPoint, MarketSession, Producer, Region
from world_model.global_config import GlobalConfig
from world_model.run_log import RunLog, StepReport

logger = logging.getLogger(__name__)

PHASES = (
    "export_flags",
    "import_flags",
    "buying_strategy",
    "market_sessions",
    "consumption",
    "production",
    "target_production",
)


class World:
    """
    A simulated wheat market.

    Single writer: ``step`` mutates the instance and must not run
    concurrently on it. Separate instances share nothing.
    """

    def __init__(
        self,
        config: GlobalConfig,
        regions: Dict[str, Region],
        producers: Dict[str, Producer],
        buyers: Dict[str, Buyer],
        sessions: Dict[str, MarketSession],
        distances: Dict[str, Dict[str, float]],
        clock: Clock,
        policy: Optional[PolicyInterface] = None,
        yield_shocks: Optional[Iterable[YieldShock]] = None,
        metrics: Optional[MetricsManager] = None,
        record_unit_costs: bool = False,
    ):
        self.config = config
        self.regions = regions
        self.producers = producers
        self.buyers = buyers
        self.sessions = sessions
        self.distances = distances
        self.clock = clock
        self.policy = policy or OpenMarketPolicy()
        self.yield_shocks: List[YieldShock] = list(yield_shocks or [])
        self.metrics = metrics
        self.record_unit_costs = record_unit_costs
        self.events = EventBus()
        self.rng = np.random.default_rng(config.seed)
        self.freeze_year: Optional[int] = None
        self.session_order: List[str] = [
            s.producer_id for s in sorted(sessions.values(), key=lambda s: (-s.latitude, s.producer_id))
        ]

    def data_year(self) -> int:
        """Year whose production and demand data drive the current step."""
        if self.freeze_year is not None:
            return min(self.clock.year, self.freeze_year)
        return self.clock.year

    def freeze(self, year: int) -> None:
        """Hold production and desired demand at ``year`` from now on."""
        self.freeze_year = year

    def _phase(self, report: StepReport, name: str) -> None:
        report.phases.append(name)
        self.events.publish(Event(
            event_type="world.phase",
            source="world",
            data={"step": report.step, "phase": name},
        ))

    def step(self) -> StepReport:
        """Advance the world by one month."""
        t = self.clock.step
        month = self.clock.month
        cycle = self.config.production_cycle
        oil_price = self.config.oil_price(t)
        report = StepReport(step=t, year=self.clock.year, month=month)

        self._phase(report, "export_flags")
        if t % self.config.export_policy_decision_interval == 0:
            self.policy.update_export_flags(self, t)

        self._phase(report, "import_flags")
        if t % self.config.import_policy_decision_interval == 0:
            self.policy.update_import_flags(self, t)

        self._phase(report, "buying_strategy")
        self._update_buying_strategies(report, oil_price)

        self._phase(report, "market_sessions")
        self._clear_sessions(report, oil_price)

        self._phase(report, "consumption")
        for buyer in self.buyers.values():
            buyer.last_bought = sum(buyer.last_purchases.values())
            buyer.last_consumed = buyer.last_bought
            buyer.inventory -= buyer.last_consumed
            report.consumption[buyer.region_id] = buyer.last_consumed

        self._phase(report, "production")
        harvested = []
        for producer in self.producers.values():
            if producer.harvest_month != month:
                continue
            multiplier = shock_multiplier(self.yield_shocks, producer.region_id, t)
            report.production[producer.region_id] = produce(
                producer,
                self.data_year(),
                cycle=cycle,
                multiplier=multiplier,
                rng=self.rng,
                noise=self.config.yield_noise,
            )
            harvested.append(producer)

        self._phase(report, "target_production")
        if self.config.production_mode == ADAPTIVE:
            for producer in harvested:
                update_target_production(producer)

        self.clock.advance()
        if self.metrics is not None:
            self.metrics.steps.inc()
        self.events.publish(Event(event_type="world.step", source="world", data={"step": t}))
        return report

    def _transport_cost(self, buyer_id: str, session_id: str, oil_price: float) -> float:
        return transport_cost_for_distance(
            self.distances[buyer_id][session_id],
            oil_price,
            self.config.transport_costs_tuner_intercept,
            self.config.transport_costs_tuner_slope,
        )

    def _update_buying_strategies(self, report: StepReport, oil_price: float) -> None:
        table = UnitCostTable(step=report.step)
        for buyer in self.buyers.values():
            for session_id in self.session_order:
                table.set(
                    buyer.region_id,
                    session_id,
                    price=self.sessions[session_id].last_price,
                    transport=self._transport_cost(buyer.region_id, session_id, oil_price),
                    bought=buyer.last_purchases.get(session_id, 0.0),
                    attended=session_id in buyer.curves,
                )

        new_year = report.month == 1 and report.step > 0
        for buyer in self.buyers.values():
            if new_year:
                rescale_demand(buyer, self._desired_demand(buyer) / self.config.production_cycle,
                               self.config, MIN_DEMAND_SLOPE)
            open_sessions = [
                s for s in self.session_order
                if self.sessions[s].open_to(self.producers[s], buyer)
            ]
            update = update_buying_strategy(buyer, table, open_sessions, self.config)
            if update.migrated:
                report.migrations += 1
                if self.metrics is not None:
                    self.metrics.migrations.inc()

        if self.record_unit_costs:
            report.unit_costs = list(table.rows())

    def _desired_demand(self, buyer: Buyer) -> float:
        year = self.data_year()
        if year not in buyer.desired_demand:
            raise DataError(f"no desired demand for buyer {buyer.region_id} in year {year}", field=str(year))
        return buyer.desired_demand[year]

    def _clear_sessions(self, report: StepReport, oil_price: float) -> None:
        for buyer in self.buyers.values():
            buyer.last_purchases = {s: 0.0 for s in buyer.curves}
        rp = reservation_price(
            self.config.reservation_price_fix_cost,
            self.config.reservation_price_slope,
            oil_price,
        )
        for session_id in self.session_order:
            session = self.sessions[session_id]
            producer = self.producers[session_id]
            offered = allocate_monthly_supply(
                producer, report.month, self.config.supply_allocation, self.config.production_cycle
            )
            participants = [
                (buyer.region_id, buyer.curves[session_id])
                for buyer in self.buyers.values()
                if session_id in buyer.curves
            ]
            outcome = clear_session(
                SupplyCurve(quantity=offered, reservation_price=rp),
                participants,
                session_id=session_id,
                last_price=session.last_price,
            )
            report.settlements.append(settle(outcome, producer, self.buyers))
            record_unsold(producer, offered - outcome.total_quantity)
            if participants:
                session.last_price = outcome.price
            session.last_total_quantity = outcome.total_quantity
            producer.record_price(session.last_price)
            report.outcomes.append(outcome)
            if self.metrics is not None:
                self.metrics.record_session(outcome.label)

    def run(self, months: int, log: Optional[RunLog] = None) -> RunLog:
        """Step ``months`` times, appending to ``log`` (a new one by default)."""
        if months < 0:
            raise ValueError(f"months must be non-negative, got {months}")
        log = log if log is not None else RunLog()
        for _ in range(months):
            log.append(self.step())
        return log


def _geo(lat, lon, region_id: str) -> GeoPoint:
    if lat is None or lon is None or np.isnan(lat) or np.isnan(lon):
        raise DataError(f"missing coordinates for region {region_id}", field="lat")
    return GeoPoint(float(lat), float(lon))


def build_world(
    inputs,
    config: GlobalConfig,
    policy: Optional[PolicyInterface] = None,
    yield_shocks: Optional[Iterable[YieldShock]] = None,
    metrics: Optional[MetricsManager] = None,
    record_unit_costs: bool = False,
) -> World:
    """
    Build a world from prepared inputs.

    Every region gets a buyer; supplier regions also get a producer and a
    session. Producers start with the monthly quotas of the start year's
    crop that remain up to their first harvest.

    Args:
        inputs: PreparedInputs from data-prep
        config: Global parameters

    Raises:
        DataError: Duplicate region ids, missing coordinates or a supplier
            without production
        ConfigError: Start year not covered by the inputs
    """
    frame = inputs.regions
    duplicated = frame["id"][frame["id"].duplicated()].tolist()
    if duplicated:
        raise DataError(f"duplicate region ids {duplicated}", field="id")
    years = inputs.years
    start_year = config.start_year if config.start_year is not None else years[0]
    if start_year not in years:
        raise ConfigError(f"start year {start_year} not covered by inputs {years[0]}-{years[-1]}",
                          field="startYear")
    cycle = config.production_cycle

    regions: Dict[str, Region] = {}
    for row in frame.itertuples(index=False):
        location = _geo(row.lat, row.lon, row.id)
        market_lat = getattr(row, "market_lat", None)
        market_lon = getattr(row, "market_lon", None)
        market = None
        if market_lat is not None and market_lon is not None and not (np.isnan(market_lat) or np.isnan(market_lon)):
            market = GeoPoint(float(market_lat), float(market_lon))
        harvest = getattr(row, "harvest_month", None)
        regions[row.id] = Region(
            id=row.id,
            location=location,
            has_producer=bool(row.supplier),
            harvest_month=None if harvest is None or np.isnan(harvest) else int(harvest),
            market_location=market,
        )

    producers: Dict[str, Producer] = {}
    for region in regions.values():
        if not region.has_producer:
            continue
        series = {}
        if region.id in inputs.production.index:
            series = {int(y): float(v) for y, v in inputs.production.loc[region.id].items() if not np.isnan(v)}
        if not series or sum(series.values()) <= 0:
            raise DataError(f"supplier {region.id} has an empty production series", field="production")
        if region.harvest_month is None or not 1 <= region.harvest_month <= cycle:
            raise DataError(f"supplier {region.id} has no valid harvest month", field="harvest_month")
        plan = ProductionPlan(
            mode=config.production_mode,
            series=series,
            target=series.get(start_year, 0.0),
            change=config.target_production_change,
            price_memory_length=config.producer_price_memory_length,
            high_price=config.high_price_threshold,
            low_price=config.low_price_threshold,
        )
        producer = Producer(
            region_id=region.id,
            location=region.hub,
            harvest_month=region.harvest_month,
            plan=plan,
        )
        preload(producer, plan.harvest_for(region.id, start_year), cycle, sessions=region.harvest_month)
        producers[region.id] = producer

    demand_frame = inputs.desired_demand
    desired = {}
    for region in regions.values():
        if region.id not in demand_frame.index:
            raise DataError(f"no desired demand for region {region.id}", field="desired_demand")
        desired[region.id] = {int(y): float(v) for y, v in demand_frame.loc[region.id].items() if not np.isnan(v)}
        if start_year not in desired[region.id]:
            raise DataError(f"no desired demand for region {region.id} in {start_year}", field=str(start_year))
    world_demand = sum(d[start_year] for d in desired.values())
    world_production = sum(p.last_harvest for p in producers.values())

    buyers: Dict[str, Buyer] = {}
    for region in regions.values():
        yearly = desired[region.id][start_year]
        target = yearly / cycle
        slope = max(
            demand_slope(target, config.demand_function_slope_tuner, config.average_price),
            MIN_DEMAND_SLOPE,
        )
        share = yearly / world_demand if world_demand > 0 else 0.0
        buyers[region.id] = Buyer(
            region_id=region.id,
            location=region.location,
            desired_demand=desired[region.id],
            monthly_target=target,
            demand_slope=slope,
            min_consumption=minimum_consumption(config.minimum_consumption_share, share, world_production, cycle),
            has_producer=region.has_producer,
            last_bought=target,
            last_consumed=target,
        )

    sessions = {
        p.region_id: MarketSession(
            producer_id=p.region_id,
            latitude=p.location.latitude,
            last_price=config.average_price,
        )
        for p in producers.values()
    }

    buyer_ids = list(buyers)
    session_ids = list(sessions)
    kkm = distance_matrix([buyers[b].location for b in buyer_ids], [producers[s].location for s in session_ids])
    distances = {b: {s: float(kkm[i, j]) for j, s in enumerate(session_ids)} for i, b in enumerate(buyer_ids)}

    for buyer in buyers.values():
        _seed_curves(buyer, producers, sessions, config)

    world = World(
        config=config,
        regions=regions,
        producers=producers,
        buyers=buyers,
        sessions=sessions,
        distances=distances,
        clock=Clock(start_year=start_year, months_per_year=cycle),
        policy=policy,
        yield_shocks=yield_shocks,
        metrics=metrics,
        record_unit_costs=record_unit_costs,
    )
    logger.info(
        f"Built world: {len(buyers)} buyers, {len(producers)} producers, start year {start_year}"
    )
    return world


def _seed_curves(
    buyer: Buyer,
    producers: Dict[str, Producer],
    sessions: Dict[str, MarketSession],
    config: GlobalConfig,
) -> None:
    """
    Spread the buyer's monthly target over the sessions open to it, in
    proportion to each producer's stock.

    Each session gets the same share of the buyer's slope, so the summed
    schedule keeps the buyer's reference geometry.
    """
    open_ids = [s for s in sorted(sessions) if sessions[s].open_to(producers[s], buyer)]
    if not open_ids:
        return
    sizes = np.array([producers[s].last_harvest for s in open_ids], dtype=float)
    weights = sizes / sizes.sum() if sizes.sum() > 0 else np.full(len(open_ids), 1.0 / len(open_ids))
    for session_id, weight in zip(open_ids, weights):
        buyer.curves[session_id] = seeded_curve(
            float(weight),
            buyer.monthly_target,
            buyer.demand_slope,
            config.average_price,
            config.price_cap,
            intercept_tuner=config.demand_function_intercept_tuner,
            floor_quantity=0.0 if buyer.is_domestic(session_id) else config.minimum_importable_quantity,
        )
        buyer.last_purchases[session_id] = float(weight) * buyer.monthly_target
