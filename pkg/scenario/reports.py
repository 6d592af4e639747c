"""
Result files of a run: prices, sessions, allocations, flows, edge lists and
the used-quantity comparison per region.

Every writer overwrites its files with the same bytes for the same input.
"""
import logging
import os
from typing import List, Optional

import numpy as np
import pandas as pd

from calibration.objective import yearly_weighted_prices
from core.errors import DataError
from data_prep.inputs import PreparedInputs
from scenario.network import export_network, flow_matrices
from world_model.run_log import ALLOCATION_COLUMNS, SESSION_COLUMNS, RunLog

logger = logging.getLogger(__name__)

PRICE_COLUMNS = ["year", "month", "session", "price", "quantity"]
YEARLY_PRICE_COLUMNS = ["year", "raw", "normalized"]
USED_QUANTITY_COLUMNS = ["year", "fao_used", "simulated_bought", "target_demand"]


def yearly_price_frame(sessions: pd.DataFrame) -> pd.DataFrame:
    years = sorted(int(y) for y in sessions["year"].unique())
    raw = yearly_weighted_prices(sessions, years).to_numpy()
    mean = np.nanmean(raw) if np.any(~np.isnan(raw)) else np.nan
    normalized = raw / mean if mean > 0 else np.full(len(raw), np.nan)
    return pd.DataFrame({"year": years, "raw": raw, "normalized": normalized}, columns=YEARLY_PRICE_COLUMNS)


def _write(frame: pd.DataFrame, directory: str, name: str, **kwargs) -> str:
    path = os.path.join(directory, name)
    frame.to_csv(path, encoding="utf-8", **({"index": False} | kwargs))
    return path


def write_flows(allocations: pd.DataFrame, directory: str) -> List[str]:
    paths = []
    for year, flows in sorted(flow_matrices(allocations).items()):
        paths.append(_write(flows.matrix, directory, f"flows_{year}.csv", index=True))
        paths.extend(export_network(allocations, year, directory))
    return paths


def write_run_outputs(log: RunLog, directory: str, unit_costs: bool = False) -> List[str]:
    """
    Write prices.csv, sessions.csv, allocations.csv, production.csv,
    yearly_weighted_price.csv and the per-year flow and edge files.
    """
    os.makedirs(directory, exist_ok=True)
    sessions = log.session_frame()
    allocations = log.allocation_frame()
    paths = [
        _write(sessions[PRICE_COLUMNS], directory, "prices.csv"),
        _write(sessions, directory, "sessions.csv"),
        _write(allocations, directory, "allocations.csv"),
        _write(log.production_frame(), directory, "production.csv"),
        _write(yearly_price_frame(sessions), directory, "yearly_weighted_price.csv"),
    ]
    paths.extend(write_flows(allocations, directory))
    if unit_costs:
        paths.append(_write(log.unit_cost_frame(), directory, "unit_costs.csv"))
    logger.info(f"Run outputs written to {directory} ({len(paths)} files)")
    return paths


def read_run_frames(directory: str):
    """
    Session and allocation rows of a run directory written by
    ``write_run_outputs``.

    Raises:
        DataError: Missing files or columns
    """
    frames = []
    for name, columns in (("sessions.csv", SESSION_COLUMNS), ("allocations.csv", ALLOCATION_COLUMNS)):
        path = os.path.join(directory, name)
        if not os.path.isfile(path):
            raise DataError(f"missing {name}", source=directory)
        frame = pd.read_csv(path, encoding="utf-8", dtype={"session": str, "buyer": str},
                            float_precision="round_trip")
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise DataError(f"missing columns {missing}", source=path, line=1)
        frames.append(frame)
    return frames[0], frames[1]


def used_quantities(allocations: pd.DataFrame, inputs: PreparedInputs, region: str) -> pd.DataFrame:
    """FAO used quantity, simulated purchases and target demand of one region per year."""
    years = inputs.years
    used = inputs.balance_demand if inputs.balance_demand is not None else inputs.desired_demand
    bought = allocations[allocations["buyer"] == region].groupby("year")["quantity"].sum()
    return pd.DataFrame({
        "year": years,
        "fao_used": [float(used.loc[region, y]) if region in used.index else np.nan for y in years],
        "simulated_bought": [float(bought.get(y, 0.0)) for y in years],
        "target_demand": [float(inputs.desired_demand.loc[region, y]) for y in years],
    }, columns=USED_QUANTITY_COLUMNS)


def write_report(directory: str, inputs: PreparedInputs, out: Optional[str] = None,
                 sessions: Optional[pd.DataFrame] = None,
                 allocations: Optional[pd.DataFrame] = None) -> List[str]:
    """
    Write the yearly price series, the used-quantity comparison of every
    region, flow matrices and edge lists for a run.

    Args:
        directory: Run directory to read from when frames are not given
        inputs: Inputs the run was built from
        out: Report directory; defaults to ``directory``
    """
    if sessions is None or allocations is None:
        sessions, allocations = read_run_frames(directory)
    out = out or directory
    os.makedirs(out, exist_ok=True)
    paths = [_write(yearly_price_frame(sessions), out, "yearly_weighted_price.csv")]
    for region in inputs.buyer_ids():
        paths.append(_write(used_quantities(allocations, inputs, region), out, f"used_quantities_{region}.csv"))
    paths.extend(write_flows(allocations, out))
    logger.info(f"Report written to {out}")
    return paths
