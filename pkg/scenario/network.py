"""
Yearly trade flows: seller x buyer matrices and directed edge lists.
"""
import logging
import os
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import networkx as nx
import pandas as pd

from core.errors import ScenarioError
from world_model.run_log import ALLOCATION_COLUMNS, RunLog

logger = logging.getLogger(__name__)

EDGE_COLUMNS = ["year", "seller", "buyer", "tonnes"]
DOMESTIC_COLUMNS = ["year", "region", "tonnes"]

FlowSource = Union[RunLog, pd.DataFrame]


def allocations_of(source: FlowSource) -> pd.DataFrame:
    """Allocation rows of a run log, or the frame itself."""
    frame = source.allocation_frame() if isinstance(source, RunLog) else source
    missing = [c for c in ALLOCATION_COLUMNS if c not in frame.columns]
    if missing:
        raise ScenarioError(f"allocation rows lack columns {missing}")
    return frame


@dataclass
class FlowMatrix:
    """Tonnes sold by each seller (rows) to each buyer (columns) in one year."""

    year: int
    matrix: pd.DataFrame

    def row_sums(self) -> pd.Series:
        return self.matrix.sum(axis=1)

    def foreign_sales(self) -> pd.Series:
        foreign = self.matrix.copy()
        for seller in foreign.index:
            if seller in foreign.columns:
                foreign.loc[seller, seller] = 0.0
        return foreign.sum(axis=1)


def flow_matrices(source: FlowSource) -> Dict[int, FlowMatrix]:
    allocations = allocations_of(source)
    matrices = {}
    for year, rows in allocations.groupby("year"):
        matrix = rows.pivot_table(index="session", columns="buyer", values="quantity",
                                  aggfunc="sum", fill_value=0.0)
        matrix.index.name = "seller"
        matrix.columns.name = "buyer"
        matrices[int(year)] = FlowMatrix(year=int(year), matrix=matrix.sort_index().sort_index(axis=1))
    return matrices


def trade_network(source: FlowSource, year: int) -> nx.DiGraph:
    """
    Directed graph of one year's trade. Foreign flows are edges
    seller -> buyer weighted by tonnes; domestic sales are the ``domestic``
    node attribute.
    """
    allocations = allocations_of(source)
    rows = allocations[allocations["year"] == year]
    if rows.empty:
        logger.warning(f"No trade recorded in {year}")
    graph = nx.DiGraph(year=year)
    totals = rows.groupby(["session", "buyer"])["quantity"].sum()
    for (seller, buyer), tonnes in totals.items():
        if tonnes <= 0:
            continue
        if seller == buyer:
            graph.add_node(seller)
            graph.nodes[seller]["domestic"] = graph.nodes[seller].get("domestic", 0.0) + float(tonnes)
        else:
            graph.add_edge(seller, buyer, tonnes=float(tonnes))
    return graph


def edge_frames(graph: nx.DiGraph) -> Tuple[pd.DataFrame, pd.DataFrame]:
    year = graph.graph["year"]
    edges = sorted((u, v, data["tonnes"]) for u, v, data in graph.edges(data=True))
    domestic = sorted((node, data["domestic"]) for node, data in graph.nodes(data=True) if "domestic" in data)
    return (
        pd.DataFrame([(year, u, v, t) for u, v, t in edges], columns=EDGE_COLUMNS),
        pd.DataFrame([(year, n, t) for n, t in domestic], columns=DOMESTIC_COLUMNS),
    )


def export_network(source: FlowSource, year: int, directory: str) -> Tuple[str, str]:
    """
    Write ``edges_<year>.csv`` (foreign flows) and ``domestic_<year>.csv``.

    Returns:
        Paths of the two files
    """
    os.makedirs(directory, exist_ok=True)
    edges, domestic = edge_frames(trade_network(source, year))
    edges_path = os.path.join(directory, f"edges_{year}.csv")
    domestic_path = os.path.join(directory, f"domestic_{year}.csv")
    edges.to_csv(edges_path, index=False, encoding="utf-8")
    domestic.to_csv(domestic_path, index=False, encoding="utf-8")
    return edges_path, domestic_path
