"""
Baseline / counterfactual pairs and constant-quantity projections.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from calibration.objective import yearly_weighted_prices
from core.errors import ScenarioError
from data_prep.inputs import PreparedInputs
from metrics.prometheus_metrics import MetricsManager
from scenario.scenario import Scenario, ScheduledPolicy, validate_scenario
from supply_engine.yield_shocks import YieldShock
from world_model.global_config import GlobalConfig
from world_model.run_log import RunLog
from world_model.world import World, build_world

logger = logging.getLogger(__name__)

PRICE_GAP_COLUMNS = [
    "year", "baseline_raw", "baseline_normalized",
    "counterfactual_raw", "counterfactual_normalized", "gap_pct",
]


def horizon_months(inputs: PreparedInputs, config: GlobalConfig) -> int:
    """Steps covering the input years from the start year on."""
    years = inputs.years
    start = config.start_year if config.start_year is not None else years[0]
    return len([y for y in years if y >= start]) * config.production_cycle


def project_constant_quantities(world: World, freeze_year: int, extra_months: int,
                                log: Optional[RunLog] = None) -> RunLog:
    """
    Extend a run holding production and desired demand at ``freeze_year``;
    demand migration keeps running.
    """
    if extra_months < 0:
        raise ScenarioError(f"extra months must be non-negative, got {extra_months}", field="projection.extraMonths")
    years = {year for buyer in world.buyers.values() for year in buyer.desired_demand}
    if freeze_year not in years:
        raise ScenarioError(f"freeze year {freeze_year} outside the input years", field="projection.freezeYear")
    log = log if log is not None else RunLog()
    if extra_months == 0:
        return log
    world.freeze(freeze_year)
    logger.info(f"Projecting {extra_months} months with quantities frozen at {freeze_year}")
    return world.run(extra_months, log)


def run_scenario(
    inputs: PreparedInputs,
    config: GlobalConfig,
    scenario: Scenario,
    months: Optional[int] = None,
    metrics: Optional[MetricsManager] = None,
    record_unit_costs: bool = False,
    yield_shocks: Optional[Iterable[YieldShock]] = None,
) -> RunLog:
    """Build a world for ``scenario``, run the horizon and then its projection."""
    world = build_world(inputs, config, metrics=metrics, record_unit_costs=record_unit_costs)
    world.yield_shocks = scenario.shocks(world.clock.start_year, world.clock.months_per_year)
    world.yield_shocks.extend(yield_shocks or [])
    horizon = horizon_months(inputs, config)
    world.policy = ScheduledPolicy(validate_scenario(scenario, world, horizon))
    log = world.run(horizon if months is None else months)
    if scenario.projection is not None:
        project_constant_quantities(world, scenario.projection.freeze_year, scenario.projection.extra_months, log)
    return log


def price_gap_report(baseline: RunLog, counterfactual: RunLog) -> pd.DataFrame:
    """
    Yearly weighted prices of both runs, normalized by the counterfactual
    mean, and the gap 100 * (baseline - counterfactual) / counterfactual.
    """
    years = sorted(set(baseline.years()) | set(counterfactual.years()))
    base = yearly_weighted_prices(baseline.session_frame(), years).to_numpy()
    cf = yearly_weighted_prices(counterfactual.session_frame(), years).to_numpy()
    scale = np.nanmean(cf) if np.any(~np.isnan(cf)) else np.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = 100.0 * (base - cf) / cf
    return pd.DataFrame({
        "year": years,
        "baseline_raw": base,
        "baseline_normalized": base / scale,
        "counterfactual_raw": cf,
        "counterfactual_normalized": cf / scale,
        "gap_pct": gap,
    }, columns=PRICE_GAP_COLUMNS)


def run_counterfactual_pair(
    inputs: PreparedInputs,
    config: GlobalConfig,
    scenario: Scenario,
    workers: int = 1,
    metrics: Optional[MetricsManager] = None,
) -> Tuple[RunLog, RunLog, pd.DataFrame]:
    """
    Run the scenario without its policy events (baseline) and with them
    (counterfactual) on the same inputs and seed.

    Returns:
        Baseline log, counterfactual log and the yearly price-gap report
    """
    baseline_scenario = scenario.without_events()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=2) as pool:
            baseline_future = pool.submit(run_scenario, inputs, config, baseline_scenario)
            counterfactual_future = pool.submit(run_scenario, inputs, config, scenario)
            baseline, counterfactual = baseline_future.result(), counterfactual_future.result()
        if metrics is not None:
            metrics.record_log(baseline)
            metrics.record_log(counterfactual)
    else:
        baseline = run_scenario(inputs, config, baseline_scenario, metrics=metrics)
        counterfactual = run_scenario(inputs, config, scenario, metrics=metrics)
    report = price_gap_report(baseline, counterfactual)
    logger.info(f"Scenario {scenario.name!r}: {len(baseline)} steps per run")
    return baseline, counterfactual, report
