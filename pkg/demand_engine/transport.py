"""
Great-circle distances and oil-indexed transport costs.
"""
from typing import Sequence

import numpy as np

EARTH_RADIUS_KM = 6371.0


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in kilometres between two points in degrees."""
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = np.sin(dlat / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
    return float(2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(min(1.0, a))))


def distance_kkm(origin, destination) -> float:
    """Distance between two GeoPoints in thousands of kilometres."""
    return haversine_km(origin.latitude, origin.longitude, destination.latitude, destination.longitude) / 1000.0


def transport_cost_for_distance(kkm: float, oil_price: float, a: float, b: float) -> float:
    """c = a * kkm + b * O_p * kkm."""
    return a * kkm + b * oil_price * kkm


def transport_cost(origin, destination, oil_price: float, a: float, b: float) -> float:
    """Cost of shipping one tonne from ``origin`` to ``destination``."""
    return transport_cost_for_distance(distance_kkm(origin, destination), oil_price, a, b)


def distance_matrix(origins: Sequence, destinations: Sequence) -> np.ndarray:
    """
    Pairwise distances in thousands of kilometres.

    Returns:
        Array of shape (len(origins), len(destinations))
    """
    lat1 = np.radians([p.latitude for p in origins])[:, None]
    lon1 = np.radians([p.longitude for p in origins])[:, None]
    lat2 = np.radians([p.latitude for p in destinations])[None, :]
    lon2 = np.radians([p.longitude for p in destinations])[None, :]
    a = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0))) / 1000.0
