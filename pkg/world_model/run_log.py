"""
Step reports and the run log accumulated over a simulation.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional

import pandas as pd

from demand_engine.unit_costs import UNIT_COST_COLUMNS
from market_engine.clearing import SessionOutcome
from market_engine.settlement import SettlementRecord

SESSION_COLUMNS = [
    "step", "year", "month", "session", "price", "quantity", "offered",
    "producer_rationed", "buyers_rationed",
]
ALLOCATION_COLUMNS = ["step", "year", "month", "buyer", "session", "quantity"]
PRODUCTION_COLUMNS = ["step", "year", "month", "region", "tonnes"]


@dataclass
class StepReport:
    """Everything one step changed."""

    step: int
    year: int
    month: int
    outcomes: List[SessionOutcome] = field(default_factory=list)
    settlements: List[SettlementRecord] = field(default_factory=list)
    production: Dict[str, float] = field(default_factory=dict)
    consumption: Dict[str, float] = field(default_factory=dict)
    migrations: int = 0
    phases: List[str] = field(default_factory=list)
    unit_costs: List[dict] = field(default_factory=list)

    def outcome(self, session_id: str) -> Optional[SessionOutcome]:
        for outcome in self.outcomes:
            if outcome.session_id == session_id:
                return outcome
        return None


class RunLog:
    """Ordered step reports with tabular views."""

    def __init__(self, reports: Optional[List[StepReport]] = None):
        self.reports: List[StepReport] = list(reports or [])

    def append(self, report: StepReport) -> None:
        self.reports.append(report)

    def extend(self, other: "RunLog") -> None:
        self.reports.extend(other.reports)

    def __len__(self) -> int:
        return len(self.reports)

    def __iter__(self) -> Iterator[StepReport]:
        return iter(self.reports)

    def __getitem__(self, index: int) -> StepReport:
        return self.reports[index]

    def years(self) -> List[int]:
        return sorted({report.year for report in self.reports})

    def session_frame(self) -> pd.DataFrame:
        rows = [
            {
                "step": r.step,
                "year": r.year,
                "month": r.month,
                "session": o.session_id,
                "price": o.price,
                "quantity": o.total_quantity,
                "offered": o.offered,
                "producer_rationed": o.producer_rationed,
                "buyers_rationed": o.buyers_rationed,
            }
            for r in self.reports
            for o in r.outcomes
        ]
        return pd.DataFrame(rows, columns=SESSION_COLUMNS)

    def allocation_frame(self) -> pd.DataFrame:
        rows = [
            {
                "step": r.step,
                "year": r.year,
                "month": r.month,
                "buyer": buyer_id,
                "session": o.session_id,
                "quantity": quantity,
            }
            for r in self.reports
            for o in r.outcomes
            for buyer_id, quantity in o.quantities.items()
            if quantity > 0
        ]
        return pd.DataFrame(rows, columns=ALLOCATION_COLUMNS)

    def production_frame(self) -> pd.DataFrame:
        rows = [
            {"step": r.step, "year": r.year, "month": r.month, "region": region, "tonnes": tonnes}
            for r in self.reports
            for region, tonnes in r.production.items()
        ]
        return pd.DataFrame(rows, columns=PRODUCTION_COLUMNS)

    def unit_cost_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row for r in self.reports for row in r.unit_costs], columns=UNIT_COST_COLUMNS)

    def bought_by_year(self) -> pd.DataFrame:
        """Tonnes bought per buyer (rows) and year (columns)."""
        allocations = self.allocation_frame()
        if allocations.empty:
            return pd.DataFrame()
        return allocations.pivot_table(
            index="buyer", columns="year", values="quantity", aggfunc="sum", fill_value=0.0
        )
