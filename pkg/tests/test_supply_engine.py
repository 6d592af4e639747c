"""Tests for harvests, monthly offers, target production and yield shocks."""
import os
import tempfile
import unittest

import numpy as np

from core.errors import DataError
from supply_engine.production import (
    ADAPTIVE,
    ProductionPlan,
    allocate_monthly_supply,
    preload,
    produce,
    record_unsold,
    update_target_production,
)
from supply_engine.yield_shocks import YieldShock, load_yield_shocks, parse_month, shock_multiplier
from world_model.agents import GeoPoint, Producer


def make_producer(plan=None, harvest_month=7):
    plan = plan or ProductionPlan(series={1992: 1000.0, 1993: 1200.0})
    return Producer(region_id="p", location=GeoPoint(45.0, 30.0), harvest_month=harvest_month, plan=plan)


class TestProduction(unittest.TestCase):
    """Test cases for harvests and offers."""

    def setUp(self):
        self.producer = make_producer()

    def test_harvest_adds_series_value(self):
        self.assertEqual(produce(self.producer, 1992), 1000.0)
        self.assertEqual(self.producer.inventory, 1000.0)
        self.assertAlmostEqual(self.producer.monthly_quota, 1000.0 / 12)

    def test_missing_year_names_producer_and_year(self):
        with self.assertRaises(DataError) as raised:
            produce(self.producer, 1995)
        self.assertIn("p", str(raised.exception))
        self.assertIn("1995", str(raised.exception))

    def test_yield_shock_scales_harvest(self):
        plan = ProductionPlan(mode=ADAPTIVE, target=100.0)
        producer = make_producer(plan)
        self.assertAlmostEqual(produce(producer, 2010, multiplier=0.67), 67.0)

    def test_wheat_offer(self):
        preload(self.producer, 1200.0)
        self.assertEqual(allocate_monthly_supply(self.producer, 8), 100.0)
        record_unsold(self.producer, 20.0)
        self.assertEqual(allocate_monthly_supply(self.producer, 9), 120.0)

    def test_preload_covers_sessions_before_first_harvest(self):
        preload(self.producer, 1200.0, sessions=7)
        self.assertEqual(self.producer.monthly_quota, 100.0)
        self.assertEqual(self.producer.inventory, 700.0)
        for month in range(1, 8):
            offer = allocate_monthly_supply(self.producer, month)
            self.assertEqual(offer, 100.0)
            self.producer.inventory -= offer
            record_unsold(self.producer, 0.0)
        self.assertEqual(self.producer.inventory, 0.0)
        with self.assertRaises(ValueError):
            preload(self.producer, 1200.0, sessions=0)

    def test_generic_offer(self):
        self.producer.inventory = 600.0
        # harvest in July; from February there are six sessions up to it
        self.assertEqual(allocate_monthly_supply(self.producer, 2, mode="generic"), 100.0)

    def test_offer_never_exceeds_inventory(self):
        preload(self.producer, 1200.0)
        self.producer.inventory = 30.0
        self.assertEqual(allocate_monthly_supply(self.producer, 8), 30.0)

    def test_annual_offers_equal_harvest_plus_rollover(self):
        preload(self.producer, 1200.0)
        self.producer.inventory += 50.0
        self.producer.rollover = 50.0
        offered = 0.0
        for month in range(8, 20):
            offer = allocate_monthly_supply(self.producer, (month - 1) % 12 + 1)
            offered += offer
            self.producer.inventory -= offer
            record_unsold(self.producer, 0.0)
        self.assertEqual(offered, 1250.0)
        self.assertEqual(self.producer.inventory, 0.0)

    def test_harvest_rolls_stock_into_new_year(self):
        preload(self.producer, 1200.0)
        self.producer.inventory = 80.0
        produce(self.producer, 1993)
        self.assertEqual(self.producer.rollover, 80.0)
        self.assertEqual(self.producer.inventory, 1280.0)
        self.assertEqual(allocate_monthly_supply(self.producer, 8), 180.0)


class TestTargetProduction(unittest.TestCase):
    """Test cases for the adaptive target rule."""

    def make(self, change=0.1):
        plan = ProductionPlan(mode=ADAPTIVE, target=100.0, change=change, price_memory_length=3,
                              high_price=6.0, low_price=4.0)
        return make_producer(plan)

    def test_high_prices_raise_target(self):
        producer = self.make()
        for price in (8.0, 8.0, 8.0):
            producer.record_price(price)
        self.assertAlmostEqual(update_target_production(producer), 110.0)

    def test_band_keeps_target(self):
        producer = self.make()
        producer.record_price(5.0)
        self.assertEqual(update_target_production(producer), 100.0)

    def test_low_prices_lower_target(self):
        producer = self.make()
        producer.record_price(3.0)
        self.assertAlmostEqual(update_target_production(producer), 90.0)

    def test_zero_change_is_inert(self):
        producer = self.make(change=0.0)
        producer.record_price(9.0)
        self.assertEqual(update_target_production(producer), 100.0)

    def test_empty_memory_is_inert(self):
        self.assertEqual(update_target_production(self.make()), 100.0)

    def test_repeated_high_harvests_compound(self):
        producer = self.make(change=0.05)
        producer.record_price(7.0)
        for _ in range(4):
            update_target_production(producer)
        self.assertAlmostEqual(producer.target_production, 100.0 * 1.05 ** 4)

    def test_memory_is_bounded(self):
        producer = self.make()
        for price in range(10):
            producer.record_price(float(price))
        self.assertEqual(list(producer.price_memory), [7.0, 8.0, 9.0])

    def test_yield_noise_is_seeded(self):
        first, second = self.make(), self.make()
        a = produce(first, 2000, rng=np.random.default_rng(5), noise=0.1)
        b = produce(second, 2000, rng=np.random.default_rng(5), noise=0.1)
        self.assertEqual(a, b)
        self.assertNotEqual(a, 100.0)


class TestYieldShocks(unittest.TestCase):
    """Test cases for yield-shock schedules."""

    def test_parse_month(self):
        self.assertEqual(parse_month("2010-08", 2000), 127)
        self.assertEqual(parse_month(5, 2000), 5)
        with self.assertRaises(DataError):
            parse_month("2010-13", 2000)

    def test_multipliers_compose(self):
        shocks = [YieldShock("r", 0, 11, 0.5), YieldShock("r", 6, 20, 0.8), YieldShock("q", 0, 50, 0.1)]
        self.assertAlmostEqual(shock_multiplier(shocks, "r", 8), 0.4)
        self.assertEqual(shock_multiplier(shocks, "r", 30), 1.0)

    def test_load_schedule(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "shocks.csv")
            with open(path, "w", encoding="utf-8") as f:
                f.write("region,start_month,end_month,multiplier\n")
                f.write("russian_federation,2010-01,2010-12,0.67\n")
            shocks = load_yield_shocks(path, start_year=2010)
        self.assertEqual(shocks, [YieldShock("russian_federation", 0, 11, 0.67)])

    def test_bad_multiplier_names_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "shocks.csv")
            with open(path, "w", encoding="utf-8") as f:
                f.write("region,start_month,end_month,multiplier\n")
                f.write("usa,2010-01,2010-12,0.9\n")
                f.write("usa,2011-01,2011-12,lots\n")
            with self.assertRaises(DataError) as raised:
                load_yield_shocks(path, start_year=2010)
        self.assertEqual(raised.exception.line, 3)


if __name__ == "__main__":
    unittest.main()
