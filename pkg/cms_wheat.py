#!/usr/bin/env python3
"""
CMS-Wheat - agent-based simulator of international wheat spot markets.
Main entry point: data preparation, runs, calibration, scenarios and reports.
"""
import argparse
import logging
import os
import sys
from functools import partial
from typing import List, Optional

import pandas as pd

from core.config import ConfigManager, config_manager
from core.errors import InputValidationError
from data_prep.balances import diagnostics_frame, load_balances, production_concentration
from data_prep.demand import desired_demand, reduce_producers
from data_prep.fixtures import synthetic_balance_table
from data_prep.inputs import load_inputs, save_inputs
from metrics.prometheus_metrics import MetricsManager, metrics_manager
from world_model.global_config import GlobalConfig, load_global_config

logger = logging.getLogger("cms_wheat")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class CmsWheatSystem:
    """
    Main CMS-Wheat system class.
    Manages the lifecycle of the configuration and metrics components.
    """

    def __init__(self, config: Optional[ConfigManager] = None, metrics: Optional[MetricsManager] = None):
        self.config = config or config_manager
        self.metrics = metrics or metrics_manager
        self.components = []
        self.running = False

    def initialize(self, config_path: Optional[str] = None) -> bool:
        """
        Initialize the system.

        Args:
            config_path: Optional path to configuration file

        Returns:
            bool: True if initialization was successful
        """
        logger.info("Initializing CMS-Wheat")
        if not self.config.load(config_path):
            logger.error("Failed to load configuration")
            return False
        self._configure_logging()

        self.components = [
            self.config,
            self.metrics,
        ]
        for component in self.components:
            if not component.initialize():
                logger.error(f"Failed to initialize {component.name}")
                return False
            logger.debug(f"Initialized {component.name}")
        return True

    def _configure_logging(self) -> None:
        root = logging.getLogger()
        level = self.config.get("logging.level")
        if level:
            root.setLevel(str(level).upper())
        log_file = self.config.get("logging.file")
        if log_file and not any(
            isinstance(h, logging.FileHandler) and h.baseFilename == os.path.abspath(log_file)
            for h in root.handlers
        ):
            handler = logging.FileHandler(log_file)
            handler.setFormatter(logging.Formatter(LOG_FORMAT))
            root.addHandler(handler)

    def start(self) -> bool:
        if self.running:
            logger.warning("CMS-Wheat already running")
            return True
        for component in self.components:
            if not component.start():
                logger.error(f"Failed to start {component.name}")
                return False
        self.running = True
        return True

    def stop(self) -> bool:
        if not self.running:
            return True
        for component in reversed(self.components):
            if not component.stop():
                logger.error(f"Failed to stop {component.name}")
        self.running = False
        return True

    def simulation_config(self, seed: Optional[int] = None) -> GlobalConfig:
        """Global parameters from the ``simulation`` section, optionally reseeded."""
        source = self.config.config_path
        config = load_global_config(self.config.section("simulation"), source=source)
        if seed is not None:
            config = config.with_parameters({"seed": seed})
        return config

    def thread_count(self) -> int:
        return self.config.thread_count()


def _add_config(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Path to configuration file", default=os.environ.get("CMSW_CONFIG"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cms_wheat", description="CMS-Wheat - wheat spot market simulator")
    parser.add_argument("--debug", help="Enable debug logging", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)

    prepare = commands.add_parser("prepare", help="Prepare simulation inputs from balance sheets")
    source = prepare.add_mutually_exclusive_group(required=True)
    source.add_argument("--balances", help="Balance manifest or directory")
    source.add_argument("--synthetic", action="store_true", help="Use the bundled synthetic balances")
    prepare.add_argument("--eta", type=float, default=0.0, help="Demand deviation for every year")
    prepare.add_argument("--out", required=True, help="Output directory")

    run = commands.add_parser("run", help="Simulate with a configuration")
    _add_config(run)
    run.add_argument("--inputs", required=True, help="Prepared inputs directory")
    run.add_argument("--scenario", help="Scenario document")
    run.add_argument("--yield-shocks", help="Yield shock schedule CSV")
    run.add_argument("--seed", type=int, help="Override the configured seed")
    run.add_argument("--months", type=int, help="Steps to simulate (default: all input years)")
    run.add_argument("--record-unit-costs", action="store_true", help="Also write unit_costs.csv")
    run.add_argument("--out", required=True, help="Output directory")

    calibrate = commands.add_parser("calibrate", help="Fit parameters and demand deviations to prices")
    _add_config(calibrate)
    calibrate.add_argument("--inputs", required=True, help="Prepared inputs directory")
    calibrate.add_argument("--spec", required=True, help="Calibration spec document")
    calibrate.add_argument("--scenario", help="Scenario whose policy events apply during calibration")
    calibrate.add_argument("--seed", type=int, help="Override the configured seed")
    calibrate.add_argument("--out", required=True, help="Output directory")

    scenario = commands.add_parser("scenario", help="Run a baseline / counterfactual pair")
    _add_config(scenario)
    scenario.add_argument("--inputs", required=True, help="Prepared inputs directory")
    scenario.add_argument("--scenario", required=True, help="Scenario document")
    scenario.add_argument("--seed", type=int, help="Override the configured seed")
    scenario.add_argument("--out", required=True, help="Output directory")

    report = commands.add_parser("report", help="Write report files for a finished run")
    report.add_argument("--inputs", required=True, help="Prepared inputs directory")
    report.add_argument("--run", required=True, help="Run output directory")
    report.add_argument("--out", help="Report directory (default: the run directory)")
    return parser


def cmd_prepare(args: argparse.Namespace) -> int:
    table = synthetic_balance_table() if args.synthetic else load_balances(args.balances)
    inputs = reduce_producers(table, desired_demand(table, args.eta), eta=args.eta)
    save_inputs(inputs, args.out)
    diagnostics_frame(table).to_csv(os.path.join(args.out, "diagnostics.csv"), index=False, encoding="utf-8")
    shares = production_concentration(table)
    pd.DataFrame({"top": list(shares), "share": list(shares.values())}).to_csv(
        os.path.join(args.out, "concentration.csv"), index=False, encoding="utf-8"
    )
    return EXIT_OK


def cmd_run(system: CmsWheatSystem, args: argparse.Namespace) -> int:
    from scenario.counterfactual import run_scenario
    from scenario.reports import write_run_outputs
    from scenario.scenario import Scenario, load_scenario
    from supply_engine.yield_shocks import load_yield_shocks

    config = system.simulation_config(args.seed)
    inputs = load_inputs(args.inputs)
    scenario = load_scenario(args.scenario) if args.scenario else Scenario()
    shocks = None
    if args.yield_shocks:
        start_year = config.start_year if config.start_year is not None else inputs.years[0]
        shocks = load_yield_shocks(args.yield_shocks, start_year, config.production_cycle)
    log = run_scenario(inputs, config, scenario, months=args.months, metrics=system.metrics,
                       record_unit_costs=args.record_unit_costs, yield_shocks=shocks)
    write_run_outputs(log, args.out, unit_costs=args.record_unit_costs)
    system.metrics.write(args.out)
    logger.info(f"Run finished: {len(log)} steps")
    return EXIT_OK


def cmd_calibrate(system: CmsWheatSystem, args: argparse.Namespace) -> int:
    from calibration.nested import load_calibration_spec, nested_calibrate, write_calibration_outputs
    from scenario.scenario import ScheduledPolicy, load_scenario, resolve_events

    config = system.simulation_config(args.seed)
    inputs = load_inputs(args.inputs)
    spec = load_calibration_spec(args.spec)
    policy_factory = None
    if args.scenario:
        start_year = config.start_year if config.start_year is not None else inputs.years[0]
        events = resolve_events(load_scenario(args.scenario), start_year, config.production_cycle)
        policy_factory = partial(ScheduledPolicy, events)
    result = nested_calibrate(spec, inputs, config, workers=system.thread_count(),
                              policy_factory=policy_factory, metrics=system.metrics)
    write_calibration_outputs(result, args.out)
    system.metrics.write(args.out)
    logger.info(f"Calibration finished: loss {result.loss:.6g}, {result.evaluations} evaluations")
    return EXIT_OK


def cmd_scenario(system: CmsWheatSystem, args: argparse.Namespace) -> int:
    from scenario.counterfactual import run_counterfactual_pair
    from scenario.reports import write_run_outputs
    from scenario.scenario import load_scenario

    config = system.simulation_config(args.seed)
    inputs = load_inputs(args.inputs)
    scenario = load_scenario(args.scenario)
    baseline, counterfactual, report = run_counterfactual_pair(
        inputs, config, scenario, workers=system.thread_count(), metrics=system.metrics
    )
    write_run_outputs(baseline, os.path.join(args.out, "baseline"))
    write_run_outputs(counterfactual, os.path.join(args.out, "counterfactual"))
    report.to_csv(os.path.join(args.out, "price_gap.csv"), index=False, encoding="utf-8")
    system.metrics.write(args.out)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from scenario.reports import write_report

    write_report(args.run, load_inputs(args.inputs), out=args.out)
    return EXIT_OK


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Parse ``argv`` and run one subcommand.

    Returns:
        int: 0 on success, 2 on usage or validation errors, 1 otherwise
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION

    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.info("Debug logging enabled")

    try:
        if args.command == "prepare":
            return cmd_prepare(args)
        if args.command == "report":
            return cmd_report(args)

        system = CmsWheatSystem(metrics=MetricsManager())
        if not system.initialize(args.config):
            return EXIT_VALIDATION
        system.start()
        try:
            if args.command == "run":
                return cmd_run(system, args)
            if args.command == "calibrate":
                return cmd_calibrate(system, args)
            return cmd_scenario(system, args)
        finally:
            system.stop()
    except InputValidationError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        logger.exception(f"{args.command} failed: {str(e)}")
        return EXIT_FAILURE


def main():
    """Main entry point."""
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, handlers=[logging.StreamHandler()])
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
