#!/usr/bin/env python3
"""
CMS-Wheat Runner
Runs a baseline on the bundled synthetic world with the default configuration.
"""
import logging
import os
import sys
import tempfile

from cms_wheat import LOG_FORMAT, CmsWheatSystem
from data_prep.fixtures import small_world_inputs
from scenario.counterfactual import run_scenario
from scenario.reports import write_run_outputs
from scenario.scenario import Scenario


def main():
    """Simulate the synthetic world and write its outputs."""
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    system = CmsWheatSystem()
    config_path = os.path.join(os.path.dirname(__file__), "cms_wheat_config.json")
    if not system.initialize(config_path):
        print("Initialization failed, exiting")
        sys.exit(1)
    system.start()

    out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="cms_wheat_")
    log = run_scenario(small_world_inputs(), system.simulation_config(), Scenario(), metrics=system.metrics)
    write_run_outputs(log, out)
    system.metrics.write(out)
    system.stop()
    print(f"Baseline written to {out}")


if __name__ == "__main__":
    main()
