"""Tests for scenario documents, policy events, counterfactual pairs and trade networks."""
import json
import os
import tempfile
import unittest

import numpy as np

from calibration.objective import weighted_world_price
from core.errors import ScenarioError
from data_prep.fixtures import small_world_inputs
from scenario.counterfactual import (
    horizon_months,
    price_gap_report,
    project_constant_quantities,
    run_counterfactual_pair,
    run_scenario,
)
from scenario.network import edge_frames, export_network, flow_matrices, trade_network
from scenario.reports import read_run_frames, write_report, write_run_outputs
from scenario.scenario import (
    EXPORT_ALLOWED,
    IMPORT_ALLOWED,
    PolicyEvent,
    Projection,
    Scenario,
    apply_policy_events,
    export_ban,
    load_scenario,
    validate_scenario,
)
from world_model.global_config import GlobalConfig
from world_model.world import build_world

BAN_START_STEP = 43
BAN_END_STEP = 54


def ban_scenario():
    return Scenario(name="south-ban", policy_events=[export_ban("south_exporter", "2003-08", "2004-07")])


class TestPolicyEvents(unittest.TestCase):
    """Test cases for applying and validating policy events."""

    def setUp(self):
        self.config = GlobalConfig()
        self.world = build_world(small_world_inputs(), self.config)

    def test_ban_window(self):
        scenario = ban_scenario()
        self.assertEqual(apply_policy_events(self.world, scenario, BAN_START_STEP - 1), {})
        changed = apply_policy_events(self.world, scenario, BAN_START_STEP)
        self.assertEqual(changed, {("south_exporter", EXPORT_ALLOWED): False})
        self.assertEqual(apply_policy_events(self.world, scenario, BAN_END_STEP), {})
        self.assertFalse(self.world.producers["south_exporter"].export_allowed)
        changed = apply_policy_events(self.world, scenario, BAN_END_STEP + 1)
        self.assertEqual(changed, {("south_exporter", EXPORT_ALLOWED): True})

    def test_empty_scenario_opens_everything(self):
        self.world.producers["north_exporter"].export_allowed = False
        self.world.buyers["far_importer"].import_allowed = False
        apply_policy_events(self.world, Scenario(), 5)
        self.assertTrue(all(p.export_allowed for p in self.world.producers.values()))
        self.assertTrue(all(b.import_allowed for b in self.world.buyers.values()))

    def test_import_event(self):
        scenario = Scenario(policy_events=[
            PolicyEvent(region="far_importer", flag=IMPORT_ALLOWED, start_month=0, end_month=11),
        ])
        changed = apply_policy_events(self.world, scenario, 3)
        self.assertEqual(changed, {("far_importer", IMPORT_ALLOWED): False})

    def test_validation(self):
        horizon = horizon_months(small_world_inputs(), self.config)
        self.assertEqual(horizon, 120)
        self.assertEqual(len(validate_scenario(ban_scenario(), self.world, horizon)), 1)
        invalid = [
            [export_ban("atlantis", "2003-01", "2003-02")],
            [export_ban("west_importer", "2003-01", "2003-02")],
            [export_ban("south_exporter", "2003-05", "2003-02")],
            [export_ban("south_exporter", "2009-06", "2012-01")],
            [export_ban("south_exporter", "2003-01", "2003-12"),
             PolicyEvent(region="south_exporter", flag=EXPORT_ALLOWED, value=True,
                         start_month="2003-06", end_month="2004-01")],
        ]
        for events in invalid:
            with self.assertRaises(ScenarioError):
                validate_scenario(Scenario(policy_events=events), self.world, horizon)
        overlapping_same_value = Scenario(policy_events=[
            export_ban("south_exporter", "2003-01", "2003-12"),
            export_ban("south_exporter", "2003-06", "2004-01"),
        ])
        self.assertEqual(len(validate_scenario(overlapping_same_value, self.world, horizon)), 2)
        with self.assertRaises(ScenarioError):
            validate_scenario(Scenario(projection=Projection(freeze_year=1990)), self.world, horizon)

    def test_load_scenario(self):
        document = {
            "name": "ban",
            "policyEvents": [{"region": "south_exporter", "flag": "export_allowed",
                              "startMonth": "2003-08", "endMonth": "2004-07"}],
            "projection": {"freezeYear": 2009, "extraMonths": 12},
        }
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "scenario.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump(document, f)
            scenario = load_scenario(path)
            document["policyEvents"][0]["flag"] = "closed"
            with open(path, "w", encoding="utf-8") as f:
                json.dump(document, f)
            with self.assertRaises(ScenarioError):
                load_scenario(path)
            with self.assertRaises(ScenarioError):
                load_scenario(os.path.join(tmp, "missing.json"))
        self.assertEqual(scenario.policy_events[0].value, False)
        self.assertEqual(scenario.projection.extra_months, 12)
        self.assertEqual(scenario.without_events().policy_events, [])


class TestCounterfactual(unittest.TestCase):
    """Test cases for baseline / counterfactual pairs."""

    @classmethod
    def setUpClass(cls):
        cls.inputs = small_world_inputs()
        cls.config = GlobalConfig()
        cls.baseline, cls.counterfactual, cls.report = run_counterfactual_pair(
            cls.inputs, cls.config, ban_scenario()
        )

    def test_runs_agree_before_the_ban(self):
        base = self.baseline.session_frame()
        cf = self.counterfactual.session_frame()
        before = base[base["step"] < BAN_START_STEP].reset_index(drop=True)
        self.assertFalse(before.empty)
        self.assertTrue(before.equals(cf[cf["step"] < BAN_START_STEP].reset_index(drop=True)))
        self.assertFalse(base.equals(cf))

    def test_report_shape(self):
        self.assertEqual(list(self.report["year"]), list(range(2000, 2010)))
        self.assertAlmostEqual(float(np.nanmean(self.report["counterfactual_normalized"])), 1.0)
        first = self.report.iloc[0]
        self.assertAlmostEqual(first["gap_pct"], 0.0)

    def test_identical_runs_have_no_gap(self):
        report = price_gap_report(self.baseline, self.baseline)
        np.testing.assert_allclose(report["gap_pct"].to_numpy(), 0.0)

    def test_parallel_pair_matches_serial(self):
        baseline, counterfactual, report = run_counterfactual_pair(
            self.inputs, self.config, ban_scenario(), workers=2
        )
        self.assertTrue(baseline.session_frame().equals(self.baseline.session_frame()))
        self.assertTrue(counterfactual.session_frame().equals(self.counterfactual.session_frame()))
        self.assertTrue(report.equals(self.report))

    def test_full_year_ban(self):
        scenario = Scenario(policy_events=[export_ban("south_exporter", "2003-01", "2003-12")])
        baseline, counterfactual, _ = run_counterfactual_pair(self.inputs, self.config, scenario)
        sales = counterfactual.allocation_frame()
        foreign = sales[(sales["year"] == 2003) & (sales["session"] == "south_exporter")
                        & (sales["buyer"] != "south_exporter")]
        self.assertEqual(float(foreign["quantity"].sum()), 0.0)
        self.assertGreater(len(list(trade_network(baseline, 2003).successors("south_exporter"))), 0)
        self.assertGreaterEqual(weighted_world_price(counterfactual, 2003), weighted_world_price(baseline, 2003))
        self.assertNotAlmostEqual(weighted_world_price(counterfactual, 2004), weighted_world_price(baseline, 2004))


class TestProjection(unittest.TestCase):
    """Test cases for constant-quantity projections."""

    def test_projection_extends_run(self):
        scenario = Scenario(projection=Projection(freeze_year=2009, extra_months=24))
        log = run_scenario(small_world_inputs(), GlobalConfig(), scenario)
        self.assertEqual(len(log), 144)
        self.assertEqual(log[-1].year, 2011)
        self.assertGreater(sum(report.migrations for report in log), 0)
        self.assertEqual(len(log.production_frame()), 36)

    def test_projection_arguments(self):
        world = build_world(small_world_inputs(years=2), GlobalConfig())
        world.run(24)
        self.assertEqual(len(project_constant_quantities(world, 2001, 0)), 0)
        with self.assertRaises(ScenarioError):
            project_constant_quantities(world, 2001, -1)
        with self.assertRaises(ScenarioError):
            project_constant_quantities(world, 1999, 12)
        self.assertEqual(len(project_constant_quantities(world, 2001, 12)), 12)


class TestNetwork(unittest.TestCase):
    """Test cases for flow matrices and edge lists."""

    @classmethod
    def setUpClass(cls):
        cls.log = build_world(small_world_inputs(years=3), GlobalConfig()).run(36)

    def test_matrix_rows_match_sessions(self):
        sessions = self.log.session_frame()
        sold = sessions.groupby(["year", "session"])["quantity"].sum()
        for year, flows in flow_matrices(self.log).items():
            for seller, tonnes in flows.row_sums().items():
                self.assertAlmostEqual(tonnes, sold.loc[(year, seller)], delta=1e-6)

    def test_graph_matches_matrix(self):
        matrix = flow_matrices(self.log)[2001]
        graph = trade_network(self.log, 2001)
        for seller, tonnes in matrix.foreign_sales().items():
            out = sum(data["tonnes"] for _, _, data in graph.out_edges(seller, data=True)) if seller in graph else 0.0
            self.assertAlmostEqual(out, tonnes, delta=1e-6)
        edges, domestic = edge_frames(graph)
        self.assertEqual(list(edges.columns), ["year", "seller", "buyer", "tonnes"])
        self.assertTrue((edges["seller"] != edges["buyer"]).all())
        self.assertTrue(set(domestic["region"]) <= {"south_exporter", "north_exporter", "east_exporter"})

    def test_autarky_year_has_no_edges(self):
        scenario = Scenario(policy_events=[
            export_ban(region, "2001-01", "2001-12")
            for region in ("south_exporter", "north_exporter", "east_exporter")
        ])
        log = run_scenario(small_world_inputs(years=3), GlobalConfig(), scenario)
        self.assertEqual(trade_network(log, 2001).number_of_edges(), 0)
        self.assertGreater(trade_network(log, 2002).number_of_edges(), 0)
        with tempfile.TemporaryDirectory() as tmp:
            edges_path, _ = export_network(log, 2001, tmp)
            with open(edges_path, encoding="utf-8") as f:
                self.assertEqual(f.read().strip(), "year,seller,buyer,tonnes")


class TestReports(unittest.TestCase):
    """Test cases for result files."""

    def test_write_and_report(self):
        inputs = small_world_inputs(years=2)
        log = build_world(inputs, GlobalConfig()).run(24)
        with tempfile.TemporaryDirectory() as tmp:
            write_run_outputs(log, tmp, unit_costs=True)
            for name in ("prices.csv", "sessions.csv", "allocations.csv", "production.csv",
                         "yearly_weighted_price.csv", "flows_2000.csv", "edges_2001.csv", "domestic_2001.csv"):
                self.assertTrue(os.path.isfile(os.path.join(tmp, name)), name)
            sessions, allocations = read_run_frames(tmp)
            self.assertEqual(len(sessions), 72)
            report_dir = os.path.join(tmp, "report")
            write_report(tmp, inputs, out=report_dir)
            with open(os.path.join(report_dir, "yearly_weighted_price.csv"), encoding="utf-8") as f:
                first = f.read()
            write_report(tmp, inputs, out=report_dir)
            with open(os.path.join(report_dir, "yearly_weighted_price.csv"), encoding="utf-8") as f:
                self.assertEqual(f.read(), first)
            self.assertTrue(os.path.isfile(os.path.join(report_dir, "used_quantities_far_importer.csv")))


if __name__ == "__main__":
    unittest.main()
