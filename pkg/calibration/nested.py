"""
Nested calibration.

Differential evolution fits the structural parameters with the yearly
demand deviations held fixed; sigmoid-step sweeps then move the deviations
with the parameters held fixed. Rounds alternate until the budget is spent.
"""
import logging
import os
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from calibration.differential_evolution import DESettings, DifferentialEvolution
from calibration.eta_search import eta_step
from calibration.objective import normalize, observed_series, price_loss, quantity_loss, yearly_weighted_prices
from core.config import load_json_document
from core.errors import ConfigError, InputValidationError
from data_prep.demand import eta_series
from data_prep.inputs import PreparedInputs
from metrics.prometheus_metrics import MetricsManager
from policies.policy_interface import PolicyInterface
from world_model.global_config import CALIBRATED_PARAMETERS, GlobalConfig
from world_model.world import build_world

logger = logging.getLogger(__name__)

PolicyFactory = Callable[[], Optional[PolicyInterface]]
LOSS_TRACE_COLUMNS = ["round", "stage", "iteration", "loss"]


class CalibrationSpec(BaseModel):
    """Search space, observations and optimizer settings."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    bounds: Dict[str, Tuple[float, float]]
    observed_prices: Dict[int, float] = Field(alias="observedPrices")
    population_size: int = Field(30, alias="populationSize", ge=4)
    differential_weight: float = Field(0.8, alias="differentialWeight", gt=0, le=2)
    crossover_rate: float = Field(0.9, alias="crossoverRate", ge=0, le=1)
    generations: int = Field(200, alias="generations", ge=0)
    outer_rounds: int = Field(3, alias="outerRounds", ge=0)
    sweep_budget: int = Field(20, alias="sweepBudget", ge=0)
    eta_tolerance: float = Field(1e-4, alias="etaTolerance", gt=0)
    beta: float = Field(1.0, alias="beta", gt=0)
    seed: int = Field(0, alias="seed")
    quantity_weight: float = Field(0.0, alias="quantityWeight", ge=0)
    initial_guess: Optional[Dict[str, float]] = Field(None, alias="initialGuess")
    initial_eta: Optional[Dict[int, float]] = Field(None, alias="initialEta")

    @field_validator("bounds")
    @classmethod
    def _known_bounds(cls, value: Dict[str, Tuple[float, float]]) -> Dict[str, Tuple[float, float]]:
        if not value:
            raise ValueError("at least one parameter must be calibrated")
        unknown = [key for key in value if key not in CALIBRATED_PARAMETERS]
        if unknown:
            raise ValueError(f"parameters {unknown} are not calibrated; expected a subset of {CALIBRATED_PARAMETERS}")
        for key, (low, high) in value.items():
            if not (np.isfinite(low) and np.isfinite(high)) or low > high:
                raise ValueError(f"bounds of {key} must be finite with low <= high")
        return value

    @model_validator(mode="after")
    def _guess_inside_bounds(self) -> "CalibrationSpec":
        if not self.observed_prices:
            raise ValueError("observedPrices must not be empty")
        if self.initial_guess is not None:
            missing = [key for key in self.bounds if key not in self.initial_guess]
            if missing:
                raise ValueError(f"initialGuess lacks {missing}")
        return self

    @property
    def parameter_names(self) -> List[str]:
        return [key for key in CALIBRATED_PARAMETERS if key in self.bounds]

    def bound_pairs(self) -> List[Tuple[float, float]]:
        return [tuple(self.bounds[key]) for key in self.parameter_names]

    def de_settings(self, workers: int = 1) -> DESettings:
        return DESettings(
            population_size=self.population_size,
            differential_weight=self.differential_weight,
            crossover_rate=self.crossover_rate,
            generations=self.generations,
            seed=self.seed,
            workers=workers,
        )


def load_calibration_spec(path: str) -> CalibrationSpec:
    """
    Raises:
        ConfigError: Unreadable file or invalid spec
    """
    document = load_json_document(path)
    try:
        return CalibrationSpec.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ()))
        raise ConfigError(first.get("msg", str(e)), source=path, field=field or None) from e


@dataclass
class Simulation:
    """Yearly aggregates of one full run."""

    prices: pd.Series
    bought: pd.Series


@dataclass
class CalibrationResult:
    params: Dict[str, float]
    eta: pd.Series
    loss: float
    loss_trace: pd.DataFrame
    evaluations: int = 0


def simulate_yearly(
    inputs: PreparedInputs,
    config: GlobalConfig,
    policy_factory: Optional[PolicyFactory] = None,
    months: Optional[int] = None,
) -> Simulation:
    """Run a fresh world over the input years and aggregate it per year."""
    years = inputs.years
    if config.start_year is not None:
        years = [y for y in years if y >= config.start_year]
    months = months if months is not None else len(years) * config.production_cycle
    world = build_world(inputs, config, policy=policy_factory() if policy_factory else None)
    log = world.run(months)
    prices = yearly_weighted_prices(log.session_frame(), years)
    bought = log.bought_by_year()
    bought = bought.sum(axis=0).reindex(years, fill_value=0.0) if not bought.empty else pd.Series(0.0, index=years)
    return Simulation(prices=prices, bought=bought)


def simulate_yearly_prices(inputs: PreparedInputs, config: GlobalConfig,
                           policy_factory: Optional[PolicyFactory] = None,
                           months: Optional[int] = None) -> pd.Series:
    return simulate_yearly(inputs, config, policy_factory, months).prices


class CandidateLoss:
    """
    Loss of a structural-parameter vector on inputs already derived for a
    deviation vector. Picklable, so DE workers can evaluate it in other
    processes.
    """

    def __init__(
        self,
        names: Sequence[str],
        inputs: PreparedInputs,
        config: GlobalConfig,
        observed: np.ndarray,
        observed_quantities: Optional[np.ndarray] = None,
        quantity_weight: float = 0.0,
        policy_factory: Optional[PolicyFactory] = None,
    ):
        self.names = list(names)
        self.inputs = inputs
        self.config = config
        self.observed = observed
        self.observed_quantities = observed_quantities
        self.quantity_weight = quantity_weight
        self.policy_factory = policy_factory

    def params_of(self, vector: Sequence[float]) -> Dict[str, float]:
        return {key: float(v) for key, v in zip(self.names, vector)}

    def evaluate(self, params: Dict[str, float]) -> Tuple[float, Optional[pd.Series]]:
        try:
            config = self.config.with_parameters(params)
            simulation = simulate_yearly(self.inputs, config, self.policy_factory)
        except InputValidationError as e:
            logger.debug(f"Candidate {params} rejected: {str(e)}")
            return float("inf"), None
        value = price_loss(simulation.prices.to_numpy(), self.observed)
        if self.observed_quantities is not None and np.isfinite(value):
            value += self.quantity_weight * quantity_loss(simulation.bought.to_numpy(), self.observed_quantities)
        return value, simulation.prices

    def __call__(self, vector: Sequence[float]) -> float:
        return self.evaluate(self.params_of(vector))[0]


class NestedCalibrator:
    """
    Alternates differential evolution over the structural parameters with
    sweeps over the demand deviations.

    Args:
        spec: Calibration spec
        inputs: Prepared inputs carrying balance quantities
        config: Base parameters; calibrated keys are overridden
        workers: Worker processes for DE evaluations
        policy_factory: Builds a fresh policy per simulated world; must be
            picklable when ``workers`` > 1
        metrics: Optional metrics manager for evaluation counts
    """

    def __init__(
        self,
        spec: CalibrationSpec,
        inputs: PreparedInputs,
        config: Optional[GlobalConfig] = None,
        workers: int = 1,
        policy_factory: Optional[PolicyFactory] = None,
        metrics: Optional[MetricsManager] = None,
    ):
        self.spec = spec
        self.inputs = inputs
        self.config = config or GlobalConfig()
        self.workers = max(1, int(workers))
        self.policy_factory = policy_factory
        self.metrics = metrics
        self.years = [y for y in inputs.years
                      if self.config.start_year is None or y >= self.config.start_year]
        self.observed = observed_series(spec.observed_prices, self.years)
        self.observed_quantities = self._observed_quantities()
        self.evaluations = 0
        self.trace: List[dict] = []

    def _observed_quantities(self) -> Optional[np.ndarray]:
        if self.spec.quantity_weight <= 0:
            return None
        used = self.inputs.balance_demand
        if used is None:
            raise ConfigError("quantityWeight needs inputs with balance quantities", field="quantityWeight")
        return used.sum(axis=0).reindex(self.years).to_numpy(dtype=float)

    def candidate_loss(self, eta: pd.Series) -> CandidateLoss:
        return CandidateLoss(
            self.spec.parameter_names,
            self.inputs.with_eta(eta),
            self.config,
            self.observed,
            self.observed_quantities,
            self.spec.quantity_weight,
            self.policy_factory,
        )

    def _count(self, _value: float = 0.0) -> None:
        self.evaluations += 1
        if self.metrics is not None:
            self.metrics.evaluations.inc()

    def loss(self, params: Dict[str, float], eta: pd.Series) -> Tuple[float, Optional[pd.Series]]:
        """Loss of one parameter set under the deviation vector ``eta``."""
        self._count()
        return self.candidate_loss(eta).evaluate(params)

    def _record(self, round_index: int, stage: str, iteration: int, loss: float) -> None:
        self.trace.append({"round": round_index, "stage": stage, "iteration": iteration, "loss": loss})
        if self.metrics is not None and np.isfinite(loss):
            self.metrics.best_loss.set(loss)

    def de_round(self, round_index: int, eta: pd.Series,
                 guess: Optional[Dict[str, float]]) -> Tuple[Dict[str, float], float]:
        objective = self.candidate_loss(eta)
        initial = [[guess[key] for key in self.spec.parameter_names]] if guess else None
        optimizer = DifferentialEvolution(
            objective,
            self.spec.bound_pairs(),
            self.spec.de_settings(self.workers),
            initial=initial,
            on_evaluation=self._count,
        )
        result = optimizer.run()
        for generation, value in enumerate(result.history):
            self._record(round_index, "de", generation, value)
        logger.info(f"Calibration round {round_index}: DE loss {result.fun:.6g} "
                    f"after {result.evaluations} evaluations")
        return objective.params_of(result.x), result.fun

    def eta_sweeps(self, round_index: int, params: Dict[str, float], eta: pd.Series,
                   loss: float) -> Tuple[pd.Series, float]:
        """
        Step the deviations of the fitted years towards the observed prices.
        A sweep is kept only if it does not increase the loss.
        """
        current_loss, simulated = self.loss(params, eta)
        if simulated is None or not np.isfinite(current_loss):
            return eta, loss
        observed = normalize(self.observed)
        for sweep in range(self.spec.sweep_budget):
            fitted = eta.loc[self.years].to_numpy()
            updated = eta_step(fitted, observed, normalize(simulated.reindex(self.years).to_numpy()), self.spec.beta)
            change = float(np.max(np.abs(updated - fitted)))
            if change < self.spec.eta_tolerance:
                break
            candidate = eta.copy()
            candidate.loc[self.years] = updated
            candidate_loss, candidate_prices = self.loss(params, candidate)
            if candidate_prices is None or candidate_loss > current_loss:
                break
            eta, current_loss, simulated = candidate, candidate_loss, candidate_prices
            self._record(round_index, "eta", sweep, current_loss)
        return eta, current_loss

    def run(self) -> CalibrationResult:
        eta = eta_series(self.spec.initial_eta if self.spec.initial_eta is not None else 0.0, self.inputs.years)
        guess = self.spec.initial_guess
        params, loss = self.de_round(0, eta, guess)
        for round_index in range(1, self.spec.outer_rounds + 1):
            eta, loss = self.eta_sweeps(round_index, params, eta, loss)
            params, loss = self.de_round(round_index, eta, params)
        return CalibrationResult(
            params=params,
            eta=eta,
            loss=loss,
            loss_trace=pd.DataFrame(self.trace, columns=LOSS_TRACE_COLUMNS),
            evaluations=self.evaluations,
        )


def nested_calibrate(
    spec: CalibrationSpec,
    inputs: PreparedInputs,
    config: Optional[GlobalConfig] = None,
    workers: int = 1,
    policy_factory: Optional[PolicyFactory] = None,
    metrics: Optional[MetricsManager] = None,
) -> CalibrationResult:
    """Fit structural parameters and demand deviations to the observed prices."""
    return NestedCalibrator(spec, inputs, config, workers, policy_factory, metrics).run()


def write_calibration_outputs(result: CalibrationResult, directory: str) -> List[str]:
    """Write calibrated_params.csv, eta_d.csv and loss_trace.csv."""
    os.makedirs(directory, exist_ok=True)
    paths = [os.path.join(directory, name) for name in ("calibrated_params.csv", "eta_d.csv", "loss_trace.csv")]
    pd.DataFrame(
        {"parameter": list(result.params), "value": list(result.params.values())}
    ).to_csv(paths[0], index=False, encoding="utf-8")
    pd.DataFrame(
        {"year": [int(y) for y in result.eta.index], "eta_d": result.eta.to_numpy()}
    ).to_csv(paths[1], index=False, encoding="utf-8")
    result.loss_trace.to_csv(paths[2], index=False, encoding="utf-8")
    logger.info(f"Calibration outputs written to {directory}")
    return paths
