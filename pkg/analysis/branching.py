"""
Global branching model with finite-population depletion.

Expected infections follow I(1) = seeds and

    I(g+1) = min(I(g) * r0 * max(0, 1 - C(g)/N), N - C(g))

where C(g) is the running total and r0 = p * lambda. The min keeps the
cumulative count inside the population. The recursion stops at the first
generation whose successor would fall below eps, or at the horizon.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from config import DEFAULT_EPS, DEFAULT_HORIZON, MAX_HORIZON
from core.errors import InvalidParamsError, KOutOfRangeError, UptoZeroError
from core.series import GenerationSeries
from utils.formatter import fixed


@dataclass(frozen=True)
class ModelParams:
    p: float
    lam: float
    N: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParamsError(f"p must lie in [0, 1], got {self.p}")
        if self.lam < 0:
            raise InvalidParamsError(f"lambda must be non-negative, got {self.lam}")
        if not self.N >= 1:
            raise InvalidParamsError(f"N must be at least 1, got {self.N}")

    @property
    def r0(self) -> float:
        return self.p * self.lam

    @classmethod
    def from_r0(cls, r0: float, N: float, p: float = 1.0) -> "ModelParams":
        """Split r0 into (p, lambda) for a given p; p = 0 is only valid with r0 = 0."""
        if p <= 0:
            if r0 != 0:
                raise InvalidParamsError("p = 0 cannot carry a positive r0")
            return cls(p=0.0, lam=0.0, N=N)
        return cls(p=p, lam=r0 / p, N=N)


@dataclass(frozen=True, eq=False)
class Trajectory:
    expected_infected: np.ndarray
    extinct_at: Optional[int] = None

    @property
    def H(self) -> int:
        return len(self.expected_infected)

    @property
    def expected_cumulative(self) -> np.ndarray:
        return np.cumsum(self.expected_infected)

    @property
    def reach(self) -> float:
        return float(self.expected_cumulative[-1])

    def cumulative_upto(self, generations: int) -> np.ndarray:
        """Cumulative values for 1..generations, holding the final value past the end."""
        cum = self.expected_cumulative
        if generations <= len(cum):
            return cum[:generations]
        return np.concatenate([cum, np.full(generations - len(cum), cum[-1])])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "generation": np.arange(1, self.H + 1),
            "expected_infected": [fixed(v, 4) for v in self.expected_infected],
            "expected_cumulative": [fixed(v, 4) for v in self.expected_cumulative],
        })


def _check_projection_args(seeds: float, horizon: int, eps: float):
    if seeds <= 0:
        raise InvalidParamsError(f"seeds must be positive, got {seeds}")
    if not 1 <= horizon <= MAX_HORIZON:
        raise InvalidParamsError(f"horizon must lie in 1..{MAX_HORIZON}, got {horizon}")
    if eps <= 0:
        raise InvalidParamsError(f"eps must be positive, got {eps}")


def project(params: ModelParams, seeds: float, horizon: int = DEFAULT_HORIZON,
            eps: float = DEFAULT_EPS) -> Trajectory:
    """
    Expected infections per generation under the depletion recursion.

    Args:
        params: Model parameters; only r0 and N are used
        seeds: Infections in generation 1
        horizon: Maximum number of generations
        eps: Extinction threshold on expected infections

    Returns:
        Trajectory truncated at extinction or at the horizon
    """
    _check_projection_args(seeds, horizon, eps)
    r0, N = params.r0, float(params.N)
    infected = [float(seeds)]
    cumulative = float(seeds)
    extinct_at = None
    for g in range(1, horizon):
        nxt = infected[-1] * r0 * max(0.0, 1.0 - cumulative / N)
        nxt = min(nxt, max(0.0, N - cumulative))
        if nxt < eps:
            extinct_at = g
            break
        infected.append(nxt)
        cumulative += nxt
    return Trajectory(expected_infected=np.array(infected), extinct_at=extinct_at)


def predicted_reach(params: ModelParams, seeds: float, horizon: int = DEFAULT_HORIZON,
                    eps: float = DEFAULT_EPS) -> float:
    """Expected cumulative infections when the projection terminates."""
    return project(params, seeds, horizon, eps).reach


def trajectory_mse(traj: Trajectory, observed: GenerationSeries, upto: int) -> float:
    """
    Mean squared difference of cumulative infections over generations 1..upto.

    Model generations past extinction contribute their final cumulative value.
    """
    if upto < 1:
        raise UptoZeroError("upto must be at least 1")
    if upto > observed.G:
        raise KOutOfRangeError(f"upto={upto} exceeds observed generations G={observed.G}")
    model = traj.cumulative_upto(upto)
    actual = observed.cumulative[:upto].astype(float)
    return float(np.mean((model - actual) ** 2))


def grid_mse(r0: np.ndarray, N: np.ndarray, seeds: float, target_cumulative: np.ndarray,
             eps: float = DEFAULT_EPS, horizon: int = DEFAULT_HORIZON) -> np.ndarray:
    """
    Vectorised cumulative MSE of the projection against a target, for every
    (r0, N) pair of the broadcast inputs.

    Matches trajectory_mse(project(...), ...) over len(target_cumulative)
    generations, step for step.
    """
    r0, N = np.broadcast_arrays(np.asarray(r0, dtype=float), np.asarray(N, dtype=float))
    target = np.asarray(target_cumulative, dtype=float)
    k = len(target)

    infected = np.full(r0.shape, float(seeds))
    cumulative = infected.copy()
    alive = np.ones(r0.shape, dtype=bool)
    sq_error = (cumulative - target[0]) ** 2
    for g in range(1, k):
        nxt = infected * r0 * np.maximum(0.0, 1.0 - cumulative / N)
        nxt = np.minimum(nxt, np.maximum(0.0, N - cumulative))
        alive &= (nxt >= eps) & (g < horizon)
        nxt = np.where(alive, nxt, 0.0)
        cumulative = cumulative + nxt
        infected = nxt
        sq_error += (cumulative - target[g]) ** 2
    return sq_error / k
