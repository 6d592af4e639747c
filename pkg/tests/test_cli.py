"""End-to-end tests of the command line."""
import contextlib
import io
import json
import os
import shutil
import tempfile
import unittest

import pandas as pd

from cms_wheat import EXIT_OK, EXIT_VALIDATION, cli_main
from data_prep.fixtures import small_world_inputs
from data_prep.inputs import save_inputs


def quiet(argv):
    with contextlib.redirect_stderr(io.StringIO()), contextlib.redirect_stdout(io.StringIO()):
        return cli_main(argv)


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


class TestCli(unittest.TestCase):
    """Test cases for the cms_wheat subcommands."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.inputs = os.path.join(self.tmp, "inputs")
        save_inputs(small_world_inputs(years=2), self.inputs)

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def path(self, *parts):
        return os.path.join(self.tmp, *parts)

    def write_json(self, name, document):
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f)
        return path

    def test_prepare_synthetic(self):
        out = self.path("prepared")
        self.assertEqual(quiet(["prepare", "--synthetic", "--out", out]), EXIT_OK)
        for name in ("production.csv", "desired_demand.csv", "regions.csv", "eta_d.csv",
                     "diagnostics.csv", "concentration.csv"):
            self.assertTrue(os.path.isfile(os.path.join(out, name)), name)
        regions = pd.read_csv(os.path.join(out, "regions.csv"))
        self.assertEqual(len(regions), 24)
        self.assertEqual(int(regions["supplier"].sum()), 12)

    def test_run_writes_outputs(self):
        out = self.path("run")
        self.assertEqual(quiet(["run", "--inputs", self.inputs, "--record-unit-costs", "--out", out]), EXIT_OK)
        for name in ("prices.csv", "sessions.csv", "allocations.csv", "production.csv",
                     "yearly_weighted_price.csv", "unit_costs.csv", "metrics.prom"):
            self.assertTrue(os.path.isfile(os.path.join(out, name)), name)
        sessions = pd.read_csv(os.path.join(out, "sessions.csv"))
        self.assertEqual(len(sessions), 24 * 3)
        with open(os.path.join(out, "metrics.prom"), encoding="utf-8") as f:
            self.assertIn("cmsw_steps_total 24.0", f.read())

    def test_run_months_and_yield_shocks(self):
        shocks = self.path("shocks.csv")
        with open(shocks, "w", encoding="utf-8") as f:
            f.write("region,start_month,end_month,multiplier\nsouth_exporter,2000-12,2000-12,0\n")
        out = self.path("run")
        argv = ["run", "--inputs", self.inputs, "--yield-shocks", shocks, "--months", "12", "--out", out]
        self.assertEqual(quiet(argv), EXIT_OK)
        production = pd.read_csv(os.path.join(out, "production.csv"))
        south = production[production["region"] == "south_exporter"]
        self.assertEqual(south["tonnes"].tolist(), [0.0])

    def test_runs_are_byte_identical(self):
        first, second = self.path("first"), self.path("second")
        self.assertEqual(quiet(["run", "--inputs", self.inputs, "--seed", "5", "--out", first]), EXIT_OK)
        self.assertEqual(quiet(["run", "--inputs", self.inputs, "--seed", "5", "--out", second]), EXIT_OK)
        for name in ("prices.csv", "sessions.csv", "allocations.csv", "flows_2001.csv"):
            self.assertEqual(read_bytes(os.path.join(first, name)), read_bytes(os.path.join(second, name)))

    def test_usage_errors(self):
        self.assertEqual(quiet(["run", "--out", self.path("run")]), EXIT_VALIDATION)
        self.assertEqual(quiet(["migrate"]), EXIT_VALIDATION)
        self.assertEqual(quiet(["--help"]), EXIT_OK)
        self.assertEqual(quiet(["run", "--inputs", self.path("nowhere"), "--out", self.path("run")]),
                         EXIT_VALIDATION)

    def test_bad_configuration(self):
        config = self.write_json("config.json", {"simulation": {"priceCap": -1}})
        argv = ["run", "--config", config, "--inputs", self.inputs, "--out", self.path("run")]
        self.assertEqual(quiet(argv), EXIT_VALIDATION)
        missing = ["run", "--config", self.path("missing.json"), "--inputs", self.inputs, "--out", self.path("run")]
        self.assertEqual(quiet(missing), EXIT_VALIDATION)

    def test_bad_scenario(self):
        scenario = self.write_json("scenario.json", {"policyEvents": [
            {"region": "atlantis", "flag": "export_allowed", "startMonth": "2000-03", "endMonth": "2000-05"},
        ]})
        argv = ["scenario", "--inputs", self.inputs, "--scenario", scenario, "--out", self.path("pair")]
        self.assertEqual(quiet(argv), EXIT_VALIDATION)

    def test_scenario_pair(self):
        scenario = self.write_json("scenario.json", {"name": "ban", "policyEvents": [
            {"region": "south_exporter", "flag": "export_allowed", "startMonth": "2001-03", "endMonth": "2001-08"},
        ]})
        out = self.path("pair")
        self.assertEqual(quiet(["scenario", "--inputs", self.inputs, "--scenario", scenario, "--out", out]), EXIT_OK)
        self.assertTrue(os.path.isfile(os.path.join(out, "baseline", "sessions.csv")))
        self.assertTrue(os.path.isfile(os.path.join(out, "counterfactual", "sessions.csv")))
        gap = pd.read_csv(os.path.join(out, "price_gap.csv"))
        self.assertEqual(list(gap["year"]), [2000, 2001])
        self.assertAlmostEqual(gap["gap_pct"].iloc[0], 0.0)

    def test_report_is_idempotent(self):
        run = self.path("run")
        self.assertEqual(quiet(["run", "--inputs", self.inputs, "--out", run]), EXIT_OK)
        report = self.path("report")
        self.assertEqual(quiet(["report", "--inputs", self.inputs, "--run", run, "--out", report]), EXIT_OK)
        first = {name: read_bytes(os.path.join(report, name)) for name in sorted(os.listdir(report))}
        self.assertEqual(quiet(["report", "--inputs", self.inputs, "--run", run, "--out", report]), EXIT_OK)
        second = {name: read_bytes(os.path.join(report, name)) for name in sorted(os.listdir(report))}
        self.assertEqual(first, second)
        self.assertIn("used_quantities_west_importer.csv", first)
        self.assertEqual(first["yearly_weighted_price.csv"], read_bytes(os.path.join(run, "yearly_weighted_price.csv")))

    def test_calibrate(self):
        spec = self.write_json("spec.json", {
            "bounds": {"shareOfDemandToBeMoved": [0.05, 0.2]},
            "observedPrices": {"2000": 5.0, "2001": 5.3},
            "populationSize": 4,
            "generations": 1,
            "outerRounds": 0,
        })
        out = self.path("calibration")
        self.assertEqual(quiet(["calibrate", "--inputs", self.inputs, "--spec", spec, "--out", out]), EXIT_OK)
        params = pd.read_csv(os.path.join(out, "calibrated_params.csv"))
        self.assertEqual(params["parameter"].tolist(), ["shareOfDemandToBeMoved"])
        self.assertTrue(0.05 <= params["value"].iloc[0] <= 0.2)
        trace = pd.read_csv(os.path.join(out, "loss_trace.csv"))
        self.assertEqual(len(trace), 2)


if __name__ == "__main__":
    unittest.main()
