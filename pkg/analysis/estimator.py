"""
Fits one global (r0, N) to the first k generations of an observed campaign
and measures how well that model predicts the whole campaign.

The mean recursion depends on p and lambda only through r0 = p * lambda, so
the search runs over (r0, N). The reported p is the aggregate decision rate
of the prefix and lambda = r0 / p.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Mapping, Optional, Tuple

import numpy as np
import pandas as pd
from dotenv import dotenv_values

import config
from analysis.branching import ModelParams, grid_mse, predicted_reach, project, trajectory_mse
from core.errors import InvalidConfigError, KOutOfRangeError
from core.series import GenerationSeries
from utils.file_io import PathLike
from utils.formatter import fixed, format_number
from utils.logger import get_logger

logger = get_logger(__name__)

FIT_REPORT_COLUMNS = [
    "k", "period_mse", "campaign_mse", "estimated_reach", "reach_error", "reach_error_pct",
]


@dataclass(frozen=True)
class SearchConfig:
    r0_min: float = config.R0_MIN
    r0_max: float = config.R0_MAX
    r0_steps: int = config.R0_STEPS
    # None means: cumulative infections of the prefix being fitted
    n_min: Optional[float] = None
    n_max: float = config.N_MAX
    n_steps: int = config.N_STEPS
    n_log: bool = True
    refine_rounds: int = config.REFINE_ROUNDS
    refine_shrink: float = config.REFINE_SHRINK
    horizon: int = config.DEFAULT_HORIZON
    eps: float = config.DEFAULT_EPS
    threads: int = config.THREADS

    def __post_init__(self):
        if not self.r0_min < self.r0_max:
            raise InvalidConfigError(f"r0_min ({self.r0_min}) must be below r0_max ({self.r0_max})")
        if self.r0_min < 0:
            raise InvalidConfigError("r0_min must be non-negative")
        if self.n_min is not None and not 1 <= self.n_min < self.n_max:
            raise InvalidConfigError(f"n_min must lie in [1, n_max), got {self.n_min}")
        if self.r0_steps < 2 or self.n_steps < 2:
            raise InvalidConfigError("grid axes need at least 2 steps")
        if self.refine_rounds < 0:
            raise InvalidConfigError("refine_rounds must be non-negative")
        if not 0 < self.refine_shrink < 1:
            raise InvalidConfigError(f"refine_shrink must lie in (0, 1), got {self.refine_shrink}")
        if self.eps <= 0 or self.horizon < 1:
            raise InvalidConfigError("eps must be positive and horizon at least 1")
        if self.threads < 1:
            raise InvalidConfigError("threads must be at least 1")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object], base: Optional["SearchConfig"] = None) -> "SearchConfig":
        """Override a base config with string or typed values; unknown keys are rejected."""
        base = base or cls()
        types = {f.name: f.type for f in fields(cls)}
        updates = {}
        for raw_key, value in values.items():
            key = raw_key.strip().lower().replace("-", "_")
            if key not in types:
                raise InvalidConfigError(f"unknown search option {raw_key!r}")
            if value is None or value == "":
                if key == "n_min":
                    updates[key] = None
                continue
            updates[key] = _coerce(key, value, getattr(base, key))
        return replace(base, **updates)

    @classmethod
    def from_file(cls, file_path: PathLike, base: Optional["SearchConfig"] = None) -> "SearchConfig":
        """Load a flat key=value file, e.g. `r0-max=20`."""
        return cls.from_mapping(dotenv_values(file_path), base)


def _coerce(key: str, value, current):
    if not isinstance(value, str):
        return value
    try:
        if key == "n_log":
            lowered = value.strip().lower()
            if lowered not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(value)
            return lowered in ("1", "true", "yes")
        if key in ("r0_steps", "n_steps", "refine_rounds", "horizon", "threads"):
            return int(value)
        return float(value)
    except ValueError:
        raise InvalidConfigError(f"invalid value for {key}: {value!r}")


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    period_mse: float
    k_used: int
    seeds: float
    trace: Tuple[float, ...] = ()
    evaluations: int = 0


@dataclass(frozen=True)
class FitRow:
    k: int
    period_mse: float
    campaign_mse: float
    estimated_reach: float
    reach_error: float
    reach_error_pct: float
    params: ModelParams


@dataclass(frozen=True)
class FitReport:
    rows: Tuple[FitRow, ...]
    actual_reach: float

    def row(self, k: int) -> FitRow:
        for row in self.rows:
            if row.k == k:
                return row
        raise KOutOfRangeError(f"report has no row for k={k}")

    def to_frame(self) -> pd.DataFrame:
        """Table with MSEs and reaches to 2 decimals and the error as a percentage."""
        return pd.DataFrame({
            "k": [r.k for r in self.rows],
            "period_mse": [fixed(r.period_mse, 2) for r in self.rows],
            "campaign_mse": [fixed(r.campaign_mse, 2) for r in self.rows],
            "estimated_reach": [fixed(r.estimated_reach, 2) for r in self.rows],
            "reach_error": [fixed(r.reach_error, 2) for r in self.rows],
            "reach_error_pct": [fixed(100.0 * r.reach_error_pct, 2) for r in self.rows],
        })

    def params_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "k": [r.k for r in self.rows],
            "r0": [fixed(r.params.r0, 6) for r in self.rows],
            "N": [fixed(r.params.N, 4) for r in self.rows],
            "p": [fixed(r.params.p, 6) for r in self.rows],
            "lambda": [fixed(r.params.lam, 6) for r in self.rows],
        })

    def reach_error_curve(self) -> pd.DataFrame:
        return pd.DataFrame({
            "k": [r.k for r in self.rows],
            "reach_error_pct": [fixed(100.0 * r.reach_error_pct, 2) for r in self.rows],
        })


def _axis(lo: float, hi: float, steps: int, log: bool) -> np.ndarray:
    if log:
        return np.geomspace(lo, hi, steps)
    return np.linspace(lo, hi, steps)


def _evaluate_grid(r0_values: np.ndarray, n_values: np.ndarray, seeds: float,
                   target: np.ndarray, search: SearchConfig) -> np.ndarray:
    """Objective over the r0 x N grid; rows follow r0, columns follow N."""
    chunks = [c for c in np.array_split(r0_values, min(search.threads, len(r0_values))) if len(c)]

    def run(chunk: np.ndarray) -> np.ndarray:
        return grid_mse(chunk[:, None], n_values[None, :], seeds, target, search.eps, search.horizon)

    if len(chunks) == 1:
        return run(chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        # map keeps chunk order, so the reduction below is deterministic
        return np.vstack(list(pool.map(run, chunks)))


def _best(objective: np.ndarray) -> Tuple[int, int]:
    # argmin returns the first minimum in row-major order: smallest r0, then smallest N
    flat = int(np.argmin(objective))
    return np.unravel_index(flat, objective.shape)


def decompose(r0: float, observed: GenerationSeries, k: int) -> Tuple[float, float]:
    """Split r0 into (p, lambda) using the prefix's aggregate decision rate."""
    infected = float(np.sum(observed.infected[:k]))
    decisions = float(np.sum(observed.decisions[:k]))
    p = decisions / infected if infected > 0 and decisions > 0 else 1.0
    p = min(p, 1.0)
    return p, r0 / p


def fit(observed: GenerationSeries, k: int, search: SearchConfig = SearchConfig()) -> FitResult:
    """
    Fit (r0, N) to generations 1..k by grid search plus local refinement.

    Args:
        observed: Observed per-generation counts; seeds are pinned to infected(1)
        k: Number of leading generations used by the objective
        search: Grid and refinement settings

    Returns:
        FitResult with the minimising parameters and their prefix MSE

    Raises:
        KOutOfRangeError: If k is outside 1..G
    """
    if not 1 <= k <= observed.G:
        raise KOutOfRangeError(f"k={k} outside 1..{observed.G}")
    seeds = float(observed.seeds)
    target = observed.cumulative[:k].astype(float)

    n_lo = search.n_min if search.n_min is not None else max(1.0, float(target[-1]))
    n_hi = search.n_max
    if n_lo >= n_hi:
        logger.warning(f"N lower bound {n_lo} reaches n_max {n_hi}; widening n_max")
        n_hi = n_lo * 10.0

    r0_values = _axis(search.r0_min, search.r0_max, search.r0_steps, log=False)
    n_values = _axis(n_lo, n_hi, search.n_steps, search.n_log)
    objective = _evaluate_grid(r0_values, n_values, seeds, target, search)
    i, j = _best(objective)
    best_r0, best_n, best_obj = float(r0_values[i]), float(n_values[j]), float(objective[i, j])
    trace = [best_obj]
    evaluations = objective.size
    logger.debug(f"k={k} coarse grid: r0={best_r0:.6g} N={best_n:.6g} mse={best_obj:.6g}")

    r0_half = (search.r0_max - search.r0_min) / 2.0
    n_half = (np.log(n_hi) - np.log(n_lo)) / 2.0 if search.n_log else (n_hi - n_lo) / 2.0
    for round_no in range(1, search.refine_rounds + 1):
        scale = search.refine_shrink ** round_no
        r0_local = np.linspace(max(search.r0_min, best_r0 - r0_half * scale),
                               min(search.r0_max, best_r0 + r0_half * scale),
                               search.r0_steps)
        if search.n_log:
            centre = np.log(best_n)
            n_local = np.exp(np.linspace(max(np.log(n_lo), centre - n_half * scale),
                                         min(np.log(n_hi), centre + n_half * scale),
                                         search.n_steps))
        else:
            n_local = np.linspace(max(n_lo, best_n - n_half * scale),
                                  min(n_hi, best_n + n_half * scale),
                                  search.n_steps)
        local = _evaluate_grid(r0_local, n_local, seeds, target, search)
        evaluations += local.size
        i, j = _best(local)
        if local[i, j] < best_obj:
            best_r0, best_n, best_obj = float(r0_local[i]), float(n_local[j]), float(local[i, j])
        trace.append(best_obj)
        logger.debug(f"k={k} refine round {round_no}: r0={best_r0:.6g} N={best_n:.6g} mse={best_obj:.6g}")

    p, lam = decompose(best_r0, observed, k)
    params = ModelParams(p=p, lam=lam, N=best_n)
    period_mse = trajectory_mse(project(params, seeds, search.horizon, search.eps), observed, k)
    return FitResult(
        params=params,
        period_mse=period_mse,
        k_used=k,
        seeds=seeds,
        trace=tuple(trace),
        evaluations=evaluations,
    )


def evaluate(result: FitResult, observed: GenerationSeries,
             search: SearchConfig = SearchConfig()) -> FitRow:
    """Score a fit against the whole campaign."""
    traj = project(result.params, result.seeds, search.horizon, search.eps)
    campaign_mse = trajectory_mse(traj, observed, observed.G)
    estimated = predicted_reach(result.params, result.seeds, search.horizon, search.eps)
    actual = float(observed.reach)
    error = abs(estimated - actual)
    return FitRow(
        k=result.k_used,
        period_mse=result.period_mse,
        campaign_mse=campaign_mse,
        estimated_reach=estimated,
        reach_error=error,
        reach_error_pct=error / actual,
        params=result.params,
    )


def sweep(observed: GenerationSeries, search: SearchConfig = SearchConfig(),
          ks: Optional[Tuple[int, ...]] = None) -> FitReport:
    """
    Fit on every prefix k = 1..G (or the given ks) and evaluate each fit.

    The k = G row is the reference model built from the whole campaign.
    """
    ks = tuple(ks) if ks is not None else tuple(range(1, observed.G + 1))
    rows = []
    for k in ks:
        row = evaluate(fit(observed, k, search), observed, search)
        logger.info(
            f"k={k}: r0={row.params.r0:.4f} N={row.params.N:.2f} "
            f"reach={row.estimated_reach:.2f} error={100 * row.reach_error_pct:.2f}%"
        )
        rows.append(row)
    return FitReport(rows=tuple(rows), actual_reach=float(observed.reach))


def trajectories_frame(report: FitReport, observed: GenerationSeries,
                       search: SearchConfig = SearchConfig()) -> pd.DataFrame:
    """
    Observed cumulative infections next to the expected cumulative of every
    fitted model, over the observed generations.

    Column `k<k>` holds the model fitted on the first k generations; a model
    that died out keeps its final value.
    """
    columns = {
        "generation": np.arange(1, observed.G + 1),
        "observed_cumulative": [format_number(v) for v in observed.cumulative],
    }
    for row in report.rows:
        traj = project(row.params, observed.seeds, search.horizon, search.eps)
        columns[f"k{row.k}"] = [fixed(v, 2) for v in traj.cumulative_upto(observed.G)]
    return pd.DataFrame(columns)
