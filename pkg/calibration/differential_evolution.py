"""
Differential evolution, DE/rand/1/bin with bound clipping.

All random draws of a generation happen before its candidates are
evaluated, so results do not depend on how many workers evaluate them.
With several workers the objective runs in a process pool and must be
picklable.
"""
import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]


@dataclass
class DESettings:
    population_size: int = 30
    differential_weight: float = 0.8
    crossover_rate: float = 0.9
    generations: int = 200
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("differential evolution needs a population of at least 4")
        if not 0 < self.differential_weight <= 2:
            raise ValueError("differential weight must lie in (0, 2]")
        if not 0 <= self.crossover_rate <= 1:
            raise ValueError("crossover rate must lie in [0, 1]")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")


@dataclass
class DEResult:
    x: np.ndarray
    fun: float
    evaluations: int
    history: List[float] = field(default_factory=list)


class DifferentialEvolution:
    """
    Minimizes ``objective`` inside the box ``bounds``.

    Args:
        objective: Function of a parameter vector
        bounds: (low, high) per dimension
        settings: Population and operator settings
        initial: Optional vectors placed first in the initial population
    """

    def __init__(
        self,
        objective: Objective,
        bounds: Sequence[Tuple[float, float]],
        settings: Optional[DESettings] = None,
        initial: Optional[Sequence[Sequence[float]]] = None,
        on_evaluation: Optional[Callable[[float], None]] = None,
    ):
        self.objective = objective
        self.bounds = np.asarray(bounds, dtype=float)
        if self.bounds.ndim != 2 or self.bounds.shape[1] != 2:
            raise ValueError("bounds must be a sequence of (low, high) pairs")
        if not np.all(np.isfinite(self.bounds)) or np.any(self.bounds[:, 0] > self.bounds[:, 1]):
            raise ValueError("bounds must be finite with low <= high")
        self.settings = settings or DESettings()
        self.initial = [np.asarray(x, dtype=float) for x in (initial or [])]
        self.on_evaluation = on_evaluation
        self.rng = np.random.default_rng(self.settings.seed)
        self.evaluations = 0

    @property
    def dim(self) -> int:
        return self.bounds.shape[0]

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.bounds[:, 0], self.bounds[:, 1])

    def _evaluate(self, candidates: np.ndarray, pool=None) -> np.ndarray:
        if pool is not None:
            values = pool.map(self.objective, list(candidates))
        else:
            values = [self.objective(x) for x in candidates]
        self.evaluations += len(values)
        if self.on_evaluation is not None:
            for value in values:
                self.on_evaluation(value)
        return np.array([float(v) if np.isfinite(v) else np.inf for v in values])

    def initial_population(self) -> np.ndarray:
        low, high = self.bounds[:, 0], self.bounds[:, 1]
        population = low + (high - low) * self.rng.random((self.settings.population_size, self.dim))
        for i, x in enumerate(self.initial[: self.settings.population_size]):
            population[i] = self.clip(x)
        return population

    def trial_population(self, population: np.ndarray) -> np.ndarray:
        """rand/1 mutation followed by binomial crossover."""
        size = len(population)
        f, cr = self.settings.differential_weight, self.settings.crossover_rate
        trials = np.empty_like(population)
        for i in range(size):
            others = [j for j in range(size) if j != i]
            r1, r2, r3 = self.rng.choice(others, size=3, replace=False)
            mutant = population[r1] + f * (population[r2] - population[r3])
            cross = self.rng.random(self.dim) < cr
            cross[self.rng.integers(self.dim)] = True
            trials[i] = self.clip(np.where(cross, mutant, population[i]))
        return trials

    def _generations(self, pool) -> Tuple[np.ndarray, np.ndarray, List[float]]:
        population = self.initial_population()
        fitness = self._evaluate(population, pool)
        history = [float(fitness.min())]
        for generation in range(self.settings.generations):
            trials = self.trial_population(population)
            trial_fitness = self._evaluate(trials, pool)
            better = trial_fitness <= fitness
            population[better] = trials[better]
            fitness[better] = trial_fitness[better]
            history.append(float(fitness.min()))
            logger.debug(f"DE generation {generation + 1}: best {history[-1]:.6g}")
        return population, fitness, history

    def run(self) -> DEResult:
        if self.settings.workers > 1:
            with Pool(processes=self.settings.workers) as pool:
                population, fitness, history = self._generations(pool)
        else:
            population, fitness, history = self._generations(None)
        best = int(np.argmin(fitness))
        return DEResult(x=population[best].copy(), fun=float(fitness[best]),
                        evaluations=self.evaluations, history=history)


def differential_evolution(
    objective: Objective,
    bounds: Sequence[Tuple[float, float]],
    settings: Optional[DESettings] = None,
    initial: Optional[Sequence[Sequence[float]]] = None,
) -> DEResult:
    """Run DE/rand/1/bin and return the best vector found."""
    return DifferentialEvolution(objective, bounds, settings, initial).run()
