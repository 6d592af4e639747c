"""
Global simulation parameters.

Keys keep the camelCase names of the published parameter table.
"""
import logging
from typing import Any, Dict, List, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.errors import ConfigError

logger = logging.getLogger(__name__)

# Structural parameters fitted by the calibrator, by configuration key.
CALIBRATED_PARAMETERS = (
    "transportCostsTunerIntercept",
    "shareOfDemandToBeMoved",
    "percentageOfPriceMarkDownInNewlyAccessibleMarkets",
    "demandFunctionInterceptTuner",
    "demandFunctionSlopeTuner",
)


class GlobalConfig(BaseModel):
    """Parameters shared by every agent of a world."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    production_cycle: int = Field(12, alias="productionCycle", ge=1)
    tolerance_in_moving_demand: float = Field(0.0, alias="toleranceInMovingDemand", ge=0)
    reservation_price_fix_cost: float = Field(1.0, alias="reservationPriceFixCost", ge=0)
    reservation_price_slope: float = Field(0.02, alias="reservationPriceSlope", ge=0)
    transport_costs_tuner_slope: float = Field(0.01, alias="transportCostsTunerSlope", ge=0)
    transport_costs_tuner_intercept: float = Field(0.05, alias="transportCostsTunerIntercept", ge=0)
    share_of_demand_to_be_moved: float = Field(0.1, alias="shareOfDemandToBeMoved", gt=0, le=1)
    price_mark_down: float = Field(
        0.05, alias="percentageOfPriceMarkDownInNewlyAccessibleMarkets", ge=0, lt=1
    )
    demand_function_intercept_tuner: float = Field(0.5, alias="demandFunctionInterceptTuner", gt=0)
    demand_function_slope_tuner: float = Field(0.15, alias="demandFunctionSlopeTuner")
    price_max: float = Field(10.0, alias="maximumPrice", gt=0)
    average_price: float = Field(5.0, alias="averagePrice", gt=0)
    price_cap: float = Field(10.0, alias="priceCap", gt=0)
    minimum_importable_quantity: float = Field(0.0, alias="minimumImportableQuantity", ge=0)
    minimum_consumption_share: float = Field(0.5, alias="minimumConsumptionShare", ge=0, le=1)
    producer_price_memory_length: int = Field(12, alias="producersPricesMemoryLength", ge=1)
    high_price_threshold: float = Field(6.0, alias="highPriceThreshold")
    low_price_threshold: float = Field(4.0, alias="lowPriceThreshold")
    target_production_change: float = Field(0.0, alias="percentageChangeOfTargetProduction", ge=0, lt=1)
    production_mode: Literal["data-driven", "adaptive"] = Field("data-driven", alias="productionMode")
    supply_allocation: Literal["wheat", "generic"] = Field("wheat", alias="supplyAllocation")
    sigmoid_steepness: float = Field(1.0, alias="sigmoidSteepness", gt=0)
    yield_noise: float = Field(0.0, alias="yieldNoise", ge=0)
    seed: int = Field(0, alias="seed")
    start_year: Optional[int] = Field(None, alias="startYear")
    oil_price_series: List[float] = Field(default_factory=list, alias="oilPriceSeries")
    export_policy_decision_interval: int = Field(1, alias="exportPolicyDecisionInterval", ge=1)
    import_policy_decision_interval: int = Field(1, alias="importPolicyDecisionInterval", ge=1)

    @field_validator("demand_function_slope_tuner")
    @classmethod
    def _slope_tuner_fraction(cls, value: float) -> float:
        # Tables quote the tuner in percent (15); the curve geometry needs a fraction.
        if value > 1:
            value = value / 100.0
        if not 0 < value < 1:
            raise ValueError("demandFunctionSlopeTuner must lie in (0, 1) or (1, 100) as percent")
        return value

    @field_validator("oil_price_series")
    @classmethod
    def _non_negative_oil(cls, value: List[float]) -> List[float]:
        if any(v < 0 for v in value):
            raise ValueError("oil prices must be non-negative")
        return value

    @model_validator(mode="after")
    def _price_levels(self) -> "GlobalConfig":
        if self.low_price_threshold >= self.high_price_threshold:
            raise ValueError("lowPriceThreshold must be below highPriceThreshold")
        if self.average_price > self.price_max:
            raise ValueError("averagePrice must not exceed maximumPrice")
        if self.price_cap > self.price_max:
            raise ValueError("priceCap must not exceed maximumPrice")
        return self

    def oil_price(self, step: int) -> float:
        """Oil price at a step; the last value is held past the series end."""
        if not self.oil_price_series:
            return 0.0
        return self.oil_price_series[min(step, len(self.oil_price_series) - 1)]

    def with_parameters(self, overrides: Mapping[str, Any]) -> "GlobalConfig":
        """Copy with configuration keys replaced, re-validated."""
        values = self.model_dump(by_alias=True)
        values.update(overrides)
        return load_global_config(values)


def load_global_config(values: Optional[Mapping[str, Any]] = None, source: Optional[str] = None) -> GlobalConfig:
    """
    Validate a mapping of configuration keys into a ``GlobalConfig``.

    Raises:
        ConfigError: On unknown keys or out-of-range values
    """
    try:
        return GlobalConfig.model_validate(dict(values or {}))
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ()))
        raise ConfigError(first.get("msg", str(e)), source=source, field=field or None) from e


def parameter_vector(config: GlobalConfig) -> Dict[str, float]:
    """Current values of the calibrated parameters."""
    dumped = config.model_dump(by_alias=True)
    return {key: float(dumped[key]) for key in CALIBRATED_PARAMETERS}
