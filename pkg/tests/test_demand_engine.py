"""Tests for demand curves, transport costs and the buying strategy."""
import unittest

from demand_engine.buying_strategy import (
    enter_new_session,
    minimum_consumption_shift,
    move_demand_to_cheapest,
    rank_sessions,
    reallocate_closed_sessions,
    rescale_demand,
    update_buying_strategy,
)
from demand_engine.demand_curve import DemandCurve, demand_slope, minimum_consumption, seeded_curve
from demand_engine.transport import distance_kkm, distance_matrix, haversine_km, transport_cost, transport_cost_for_distance
from demand_engine.unit_costs import UnitCostTable
from world_model.agents import Buyer, GeoPoint
from world_model.global_config import GlobalConfig


def make_buyer(curves=None, purchases=None, slope=2.0, min_consumption=0.0, consumed=0.0):
    buyer = Buyer(
        region_id="buyer",
        location=GeoPoint(0.0, 0.0),
        desired_demand={2000: 1200.0},
        monthly_target=100.0,
        demand_slope=slope,
        min_consumption=min_consumption,
    )
    for session_id, intercept in (curves or {}).items():
        buyer.curves[session_id] = DemandCurve(intercept=intercept, slope=slope, price_cap=10.0)
    buyer.last_purchases = dict(purchases or {})
    buyer.last_consumed = consumed
    return buyer


def make_table(costs):
    """costs: session -> (price, transport, attended)"""
    table = UnitCostTable(step=1)
    for session_id, (price, transport, attended) in costs.items():
        table.set("buyer", session_id, price=price, transport=transport, attended=attended)
    return table


class TestTransport(unittest.TestCase):
    """Test cases for distances and transport costs."""

    def test_cost_formula(self):
        self.assertAlmostEqual(transport_cost_for_distance(2.0, 10.0, 0.05, 0.01), 0.30)
        self.assertEqual(transport_cost_for_distance(0.0, 80.0, 0.05, 0.01), 0.0)
        self.assertAlmostEqual(transport_cost_for_distance(1.0, 0.0, 0.05, 0.01), 0.05)

    def test_same_point_costs_nothing(self):
        point = GeoPoint(48.0, 35.0)
        self.assertEqual(transport_cost(point, point, 50.0, 0.05, 0.01), 0.0)

    def test_one_degree_on_the_equator(self):
        self.assertAlmostEqual(haversine_km(0.0, 0.0, 0.0, 1.0), 111.195, places=2)
        self.assertAlmostEqual(distance_kkm(GeoPoint(0.0, 0.0), GeoPoint(0.0, 1.0)), 0.111195, places=5)

    def test_distance_matrix_matches_pairwise(self):
        origins = [GeoPoint(-32.06, 115.74), GeoPoint(29.95, -90.07)]
        destinations = [GeoPoint(30.0, 31.0), GeoPoint(35.68, 139.69), GeoPoint(48.0, 35.0)]
        matrix = distance_matrix(origins, destinations)
        self.assertEqual(matrix.shape, (2, 3))
        for i, origin in enumerate(origins):
            for j, destination in enumerate(destinations):
                self.assertAlmostEqual(matrix[i, j], distance_kkm(origin, destination), places=9)


class TestDemandCurve(unittest.TestCase):
    """Test cases for the linear schedule."""

    def test_seeded_curves_keep_reference_geometry(self):
        slope = demand_slope(100.0, 0.15, 5.0)
        self.assertAlmostEqual(slope, 3.0)
        curves = [seeded_curve(w, 100.0, slope, 5.0, 10.0) for w in (0.5, 0.3, 0.2)]
        self.assertAlmostEqual(sum(c.quantity(5.0) for c in curves), 100.0)
        self.assertAlmostEqual(sum(c.quantity(0.0) for c in curves), 115.0)
        self.assertAlmostEqual(sum(c.quantity(10.0) for c in curves), 85.0)
        self.assertAlmostEqual(curves[0].quantity(5.0), 50.0)
        self.assertAlmostEqual(curves[2].slope, 0.6)

    def test_seeded_curve_intercept_tuner(self):
        curve = seeded_curve(1.0, 100.0, 3.0, 5.0, 10.0, intercept_tuner=0.6)
        self.assertAlmostEqual(curve.intercept, 138.0)
        self.assertEqual(seeded_curve(0.0, 100.0, 3.0, 5.0, 10.0).intercept, 0.0)

    def test_cap_and_floor(self):
        curve = DemandCurve(intercept=20.0, slope=1.0, price_cap=10.0, floor_quantity=12.0)
        self.assertEqual(curve.quantity(10.5), 0.0)
        self.assertEqual(curve.quantity(8.0), 12.0)
        self.assertEqual(curve.quantity(8.5), 0.0)
        for price in [0.0, 2.5, 7.9, 8.0, 9.0]:
            q = curve.quantity(price)
            self.assertTrue(q == 0.0 or q >= 12.0)

    def test_monotone(self):
        curve = DemandCurve(intercept=7.0, slope=0.8, price_cap=10.0)
        prices = [i * 0.25 for i in range(45)]
        quantities = [curve.quantity(p) for p in prices]
        self.assertEqual(quantities, sorted(quantities, reverse=True))

    def test_shift_floors_at_zero(self):
        curve = DemandCurve(intercept=3.0, slope=1.0, price_cap=10.0)
        self.assertEqual(curve.shift(-5.0), -3.0)
        self.assertEqual(curve.intercept, 0.0)

    def test_non_positive_slope_rejected(self):
        with self.assertRaises(ValueError):
            DemandCurve(intercept=3.0, slope=0.0, price_cap=10.0)

    def test_minimum_consumption(self):
        self.assertAlmostEqual(minimum_consumption(0.5, 0.1, 1200.0, 12), 5.0)


class TestBuyingStrategy(unittest.TestCase):
    """Test cases for the buying-strategy rules."""

    def test_rank_by_delivered_cost(self):
        buyer = make_buyer({"A": 10.0, "B": 10.0})
        table = make_table({"A": (4.0, 0.0, True), "B": (2.0, 1.0, True)})
        self.assertEqual(rank_sessions(buyer, table, ["A", "B"]), ["B", "A"])
        self.assertEqual(rank_sessions(buyer, table, ["A"]), ["A"])

    def test_rank_ties_by_session_id(self):
        buyer = make_buyer({"A": 10.0, "B": 10.0, "C": 10.0})
        first = make_table({"C": (3.0, 0.0, True), "A": (3.0, 0.0, True), "B": (3.0, 0.0, True)})
        second = make_table({"B": (3.0, 0.0, True), "C": (3.0, 0.0, True), "A": (3.0, 0.0, True)})
        self.assertEqual(rank_sessions(buyer, first, ["A", "B", "C"]), ["A", "B", "C"])
        self.assertEqual(rank_sessions(buyer, second, ["C", "B", "A"]), ["A", "B", "C"])

    def test_rank_skips_unattended_sessions(self):
        buyer = make_buyer({"A": 10.0})
        table = make_table({"A": (4.0, 0.0, True), "N": (1.0, 0.0, False)})
        self.assertEqual(rank_sessions(buyer, table, ["A", "N"]), ["A"])

    def test_reallocate_closed_session(self):
        buyer = make_buyer({"A": 10.0, "B": 10.0, "C": 10.0}, purchases={"C": 7.0})
        table = make_table({"A": (4.0, 0.0, True), "B": (3.0, 0.0, True), "C": (2.0, 0.0, True)})
        added = reallocate_closed_sessions(buyer, ["C"], table, ["A", "B"])
        self.assertEqual(added, {"B": 7.0})
        self.assertEqual(buyer.curves["B"].intercept, 17.0)
        self.assertEqual(buyer.curves["A"].intercept, 10.0)
        self.assertNotIn("C", buyer.curves)

    def test_all_sessions_closed(self):
        buyer = make_buyer({"A": 10.0, "B": 10.0}, purchases={"A": 3.0, "B": 4.0})
        table = make_table({"A": (4.0, 0.0, True), "B": (3.0, 0.0, True)})
        self.assertEqual(reallocate_closed_sessions(buyer, ["A", "B"], table, []), {})
        self.assertEqual(buyer.curves, {})

    def test_move_share_to_cheapest(self):
        buyer = make_buyer({"A": 20.0, "B": 20.0}, purchases={"A": 6.0, "B": 10.0})
        table = make_table({"A": (3.0, 0.0, True), "B": (4.0, 0.0, True)})
        move = move_demand_to_cheapest(buyer, table, tolerance=0.0, share=0.1)
        self.assertEqual((move.source, move.destination), ("B", "A"))
        self.assertAlmostEqual(move.quantity, 1.0)
        self.assertAlmostEqual(buyer.curves["B"].intercept, 19.0)
        self.assertAlmostEqual(buyer.curves["A"].intercept, 21.0)

    def test_move_gate(self):
        buyer = make_buyer({"A": 20.0, "B": 20.0}, purchases={"B": 10.0})
        table = make_table({"A": (3.0, 0.0, True), "B": (4.0, 0.0, True)})
        self.assertIsNone(move_demand_to_cheapest(buyer, table, tolerance=0.5, share=0.1))
        self.assertEqual(buyer.curves["B"].intercept, 20.0)
        self.assertIsNotNone(move_demand_to_cheapest(buyer, table, tolerance=0.3, share=0.1))

    def test_move_everything(self):
        buyer = make_buyer({"A": 20.0, "B": 20.0}, purchases={"B": 10.0})
        table = make_table({"A": (3.0, 0.0, True), "B": (4.0, 0.0, True)})
        move = move_demand_to_cheapest(buyer, table, tolerance=0.0, share=1.0)
        self.assertEqual(move.quantity, 10.0)
        self.assertEqual(buyer.curves["A"].intercept + buyer.curves["B"].intercept, 40.0)
        self.assertEqual(buyer.curves["B"].intercept, 10.0)

    def test_move_floored_at_zero(self):
        buyer = make_buyer({"A": 20.0, "B": 4.0}, purchases={"B": 10.0})
        table = make_table({"A": (3.0, 0.0, True), "B": (4.0, 0.0, True)})
        move = move_demand_to_cheapest(buyer, table, tolerance=0.0, share=1.0)
        self.assertEqual(move.quantity, 4.0)
        self.assertEqual(buyer.curves["B"].intercept, 0.0)
        self.assertEqual(buyer.curves["A"].intercept, 24.0)

    def test_enter_new_session(self):
        buyer = make_buyer({"A": 10.0})
        table = make_table({"A": (5.0, 0.0, True), "N": (4.5, 1.0, False)})
        curve = enter_new_session(buyer, "N", table, markdown=0.05, price_cap=10.0)
        self.assertAlmostEqual(curve.zero_price, 3.8)
        self.assertAlmostEqual(curve.intercept, 7.6)
        self.assertEqual(curve.quantity(curve.zero_price), 0.0)
        self.assertIs(buyer.curves["N"], curve)

    def test_enter_unattractive_session(self):
        buyer = make_buyer({"A": 10.0})
        table = make_table({"A": (5.0, 0.0, True), "N": (4.5, 6.0, False)})
        curve = enter_new_session(buyer, "N", table, markdown=0.05, price_cap=10.0)
        self.assertEqual(curve.intercept, 0.0)
        self.assertEqual(curve.quantity(0.0), 0.0)

    def test_enter_without_prior_purchases(self):
        buyer = make_buyer()
        table = make_table({"N": (4.2, 1.0, False)})
        curve = enter_new_session(buyer, "N", table, markdown=0.05, price_cap=10.0)
        self.assertAlmostEqual(curve.zero_price, 4.2)

    def test_minimum_consumption_shift(self):
        buyer = make_buyer({"A": 10.0, "B": 12.0})
        self.assertEqual(minimum_consumption_shift(buyer, 3.0, 5.0, 2), 1.0)
        self.assertEqual(buyer.curves["A"].intercept, 11.0)
        self.assertEqual(buyer.curves["B"].intercept, 13.0)
        self.assertEqual(minimum_consumption_shift(buyer, 5.0, 5.0, 2), 0.0)
        self.assertEqual(minimum_consumption_shift(buyer, 0.0, 5.0, 0), 0.0)
        self.assertEqual(buyer.curves["A"].intercept, 11.0)

    def test_equal_prices_leave_curves_unchanged(self):
        buyer = make_buyer({"A": 10.0, "B": 12.0}, purchases={"A": 2.0, "B": 3.0}, consumed=5.0)
        table = make_table({"A": (4.0, 0.0, True), "B": (4.0, 0.0, True)})
        update = update_buying_strategy(buyer, table, ["A", "B"], GlobalConfig())
        self.assertFalse(update.migrated)
        self.assertEqual(update.closed, [])
        self.assertEqual(update.entered, [])
        self.assertEqual(buyer.curves["A"].intercept, 10.0)
        self.assertEqual(buyer.curves["B"].intercept, 12.0)

    def test_close_and_enter_in_one_step(self):
        buyer = make_buyer({"A": 10.0, "B": 10.0}, purchases={"A": 2.0, "B": 5.0}, consumed=7.0)
        table = make_table({"A": (3.0, 0.0, True), "B": (4.0, 0.0, True), "N": (2.0, 1.0, False)})
        update = update_buying_strategy(buyer, table, ["A", "N"], GlobalConfig())
        self.assertEqual(update.closed, ["B"])
        self.assertEqual(update.reallocated, {"A": 5.0})
        self.assertEqual(update.entered, ["N"])
        self.assertNotIn("B", buyer.curves)
        self.assertAlmostEqual(buyer.curves["N"].zero_price, (3.0 - 1.0) * 0.95)

    def test_rationed_buyer_raises_demand(self):
        buyer = make_buyer({"A": 10.0, "B": 12.0}, purchases={"A": 2.0, "B": 2.0},
                           min_consumption=10.0, consumed=4.0)
        table = make_table({"A": (4.0, 0.0, True), "B": (4.0, 0.0, True)})
        before = buyer.total_intercept()
        update = update_buying_strategy(buyer, table, ["A", "B"], GlobalConfig())
        self.assertEqual(update.shift, 3.0)
        self.assertGreater(buyer.total_intercept(), before)

    def test_rescale_follows_new_target(self):
        buyer = make_buyer({"A": 10.0, "B": 20.0})
        rescale_demand(buyer, 110.0, GlobalConfig(), 1e-9)
        self.assertAlmostEqual(buyer.curves["A"].intercept, 11.0)
        self.assertAlmostEqual(buyer.curves["B"].slope, 2.2)
        self.assertAlmostEqual(buyer.demand_slope, 2.2)
        self.assertEqual(buyer.monthly_target, 110.0)


if __name__ == "__main__":
    unittest.main()
