"""
Per-generation epidemic parameters.

p(g) = decisions(g) / infected(g) is the contagion parameter, lambda(g) =
sent(g) / decisions(g) the epidemic intensity and ETP(g) = p(g) * lambda(g)
the epidemic threshold parameter. A generation without deciders gets
lambda = ETP = 0.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Tuple

import numpy as np
import pandas as pd

from core.errors import SeriesInvariantError
from core.series import GenerationSeries
from utils.formatter import fixed, format_number

REPORT_COLUMNS = [
    "generation", "infected", "cumulative", "decisions", "sent",
    "p", "lambda", "etp", "criticality",
]


class Criticality(str, Enum):
    SUB = "sub"
    CRITICAL = "critical"
    SUPER = "super"


def classify_criticality(etp: float, tol: float = 0.0) -> Criticality:
    """Critical iff |etp - 1| <= tol, Super iff etp > 1 + tol, Sub otherwise."""
    if etp < 0 or tol < 0:
        raise ValueError(f"etp and tol must be non-negative, got etp={etp}, tol={tol}")
    if abs(etp - 1.0) <= tol:
        return Criticality.CRITICAL
    if etp > 1.0 + tol:
        return Criticality.SUPER
    return Criticality.SUB


@dataclass(frozen=True, eq=False)
class GenerationParams:
    p: np.ndarray
    lam: np.ndarray
    etp: np.ndarray
    criticality: Tuple[Criticality, ...]
    tol: float = 0.0

    @property
    def G(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class CampaignSummary:
    reach: float
    generations: int
    super_set: FrozenSet[int]
    etp_ratios: Tuple[float, ...]
    peak_generation: int


def epidemic_params(series: GenerationSeries, tol: float = 0.0) -> GenerationParams:
    """
    Compute p, lambda, ETP and criticality for every generation.

    Values are kept at full precision; rounding only happens when a report
    is written.
    """
    infected = series.infected.astype(float)
    decisions = series.decisions.astype(float)
    sent = series.sent.astype(float)

    p = np.divide(decisions, infected, out=np.zeros_like(infected), where=infected > 0)
    lam = np.divide(sent, decisions, out=np.zeros_like(decisions), where=decisions > 0)
    etp = p * lam
    criticality = tuple(classify_criticality(float(e), tol) for e in etp)
    return GenerationParams(p=p, lam=lam, etp=etp, criticality=criticality, tol=tol)


def campaign_summary(series: GenerationSeries, params: GenerationParams) -> CampaignSummary:
    """Aggregate facts: reach, generation count, super-critical set, ETP ratios."""
    if params.G != series.G:
        raise SeriesInvariantError(f"params cover {params.G} generations, series {series.G}")
    super_set = frozenset(
        g for g, c in enumerate(params.criticality, start=1) if c is Criticality.SUPER
    )
    ratios = tuple(
        float(params.etp[g + 1] / params.etp[g]) if params.etp[g] > 0 else math.nan
        for g in range(series.G - 1)
    )
    return CampaignSummary(
        reach=float(series.reach),
        generations=series.G,
        super_set=super_set,
        etp_ratios=ratios,
        peak_generation=int(np.argmax(series.infected)) + 1,
    )


def metrics_frame(series: GenerationSeries, params: GenerationParams) -> pd.DataFrame:
    """Report table with p, lambda and ETP printed to 4 decimals."""
    frame = series.to_frame()
    for column in ("infected", "cumulative", "decisions", "sent"):
        frame[column] = frame[column].map(format_number)
    frame["p"] = [fixed(v, 4) for v in params.p]
    frame["lambda"] = [fixed(v, 4) for v in params.lam]
    frame["etp"] = [fixed(v, 4) for v in params.etp]
    frame["criticality"] = [c.value for c in params.criticality]
    return frame[REPORT_COLUMNS]
