"""
Time x generation structure of a campaign: the period matrix, cumulative
curves per generation, generation first occurrence and stabilization.

Periods are counted from the earliest infection; period t covers
[origin + (t-1)*period_len, origin + t*period_len).
"""
import io
import math
import re
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional

import numpy as np
import pandas as pd

from config import DEFAULT_WINDOW
from core.errors import EmptyInputError, InvalidConfigError, UnknownGenerationError
from core.forest import CascadeForest
from utils.file_io import PathLike, read_text_file
from utils.formatter import fixed, format_duration

_PERIOD_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([smhdw]?)\s*$", re.IGNORECASE)
_UNIT_SECONDS = {"": 1, "s": 1, "m": 60, "h": 3600, "d": 86400, "w": 604800}


def parse_period(text: str) -> float:
    """Parse `1d`, `6h`, `30m`, `45s` or a bare number of seconds."""
    match = _PERIOD_RE.match(str(text))
    if not match:
        raise InvalidConfigError(f"cannot parse period {text!r}; use e.g. 1d, 6h, 30m or seconds")
    seconds = float(match.group(1)) * _UNIT_SECONDS[match.group(2).lower()]
    if seconds <= 0:
        raise InvalidConfigError("period must be positive")
    return seconds


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """
    counts[g-1, t-1] = new generation-g infections during period t.

    reach is the campaign total the column fractions are taken against; for
    a matrix built from a forest it equals counts.sum().
    """
    counts: np.ndarray
    period_len: float
    origin: float
    reach: float

    @property
    def G(self) -> int:
        return self.counts.shape[0]

    @property
    def T(self) -> int:
        return self.counts.shape[1]

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def column_fractions(self) -> np.ndarray:
        return self.counts.sum(axis=0) / float(self.reach)

    def coarsen(self, factor: int = 2) -> "PeriodMatrix":
        """Merge every `factor` adjacent periods; a short last group is zero-padded."""
        if factor < 1:
            raise InvalidConfigError("factor must be at least 1")
        pad = (-self.T) % factor
        padded = np.pad(self.counts, ((0, 0), (0, pad)))
        merged = padded.reshape(self.G, -1, factor).sum(axis=2)
        return PeriodMatrix(merged, self.period_len * factor, self.origin, self.reach)

    def to_frame(self) -> pd.DataFrame:
        """Counts per generation plus a final `pct` row of column fractions."""
        columns = [f"p{t}" for t in range(1, self.T + 1)]
        frame = pd.DataFrame(self.counts, columns=columns)
        frame.insert(0, "generation", [str(g) for g in range(1, self.G + 1)])
        pct = pd.DataFrame([["pct"] + [fixed(v, 4) for v in self.column_fractions()]],
                           columns=["generation"] + columns)
        return pd.concat([frame.astype(str), pct], ignore_index=True)


@dataclass(frozen=True)
class StabilizationReport:
    stable_at: Mapping[int, Optional[int]]
    window: int

    def is_stable(self, generation: int) -> bool:
        return self.stable_at.get(generation) is not None

    def stable_prefix(self) -> int:
        """Largest k such that generations 1..k are all stable."""
        k = 0
        for g in sorted(self.stable_at):
            if self.stable_at[g] is None:
                break
            k = g
        return k

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "generation": list(self.stable_at),
            "stable_at": ["" if v is None else str(v) for v in self.stable_at.values()],
            "window": [self.window] * len(self.stable_at),
        })


def period_generation_matrix(forest: CascadeForest, period_len: float) -> PeriodMatrix:
    """
    Count new infections per (generation, period).

    Args:
        forest: A non-empty cascade forest
        period_len: Period length in seconds

    Returns:
        PeriodMatrix whose row sums equal the per-generation infected counts
    """
    if period_len <= 0:
        raise InvalidConfigError("period_len must be positive")
    if len(forest) == 0:
        raise EmptyInputError("forest has no nodes")
    nodes = list(forest.nodes.values())
    times = np.array([n.infected_at for n in nodes], dtype=float)
    gens = np.array([n.generation for n in nodes], dtype=np.int64)
    origin = float(times.min())
    periods = np.floor((times - origin) / period_len).astype(np.int64)

    counts = np.zeros((int(gens.max()), int(periods.max()) + 1), dtype=np.int64)
    np.add.at(counts, (gens - 1, periods), 1)
    return PeriodMatrix(counts, float(period_len), origin, float(len(nodes)))


def cumulative_by_generation(matrix: PeriodMatrix, generations: Iterable[int]) -> Dict[int, np.ndarray]:
    """Running totals over periods for each requested generation."""
    curves = {}
    for g in sorted(set(generations)):
        if not 1 <= g <= matrix.G:
            raise UnknownGenerationError(f"generation {g} outside 1..{matrix.G}")
        curves[g] = np.cumsum(matrix.counts[g - 1])
    return curves


def first_occurrence(forest: CascadeForest) -> np.ndarray:
    """
    Earliest infection time of each generation as an offset from the origin.

    Index g-1 holds generation g; the result is non-decreasing because a node
    is never infected before its infector.
    """
    if len(forest) == 0:
        raise EmptyInputError("forest has no nodes")
    nodes = list(forest.nodes.values())
    origin = min(n.infected_at for n in nodes)
    earliest = np.full(forest.max_generation, np.inf)
    for node in nodes:
        g = node.generation - 1
        earliest[g] = min(earliest[g], node.infected_at - origin)
    return earliest


def first_occurrence_frame(offsets: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({
        "generation": np.arange(1, len(offsets) + 1),
        "offset_seconds": [fixed(v, 0) for v in offsets],
        "offset": [format_duration(v) for v in offsets],
    })


def stabilization(matrix: PeriodMatrix, window: int = DEFAULT_WINDOW) -> StabilizationReport:
    """
    Earliest period after which a generation stays quiet for `window` periods.

    A generation is only declared stable when its quiet window lies fully
    inside the observed data and it has no infections in the final `window`
    periods; otherwise stable_at is None. A generation with no infections at
    all is stable at 0.
    """
    if window < 1:
        raise InvalidConfigError("window must be at least 1")
    stable_at: Dict[int, Optional[int]] = {}
    T = matrix.T
    for g in range(1, matrix.G + 1):
        row = matrix.counts[g - 1]
        active = np.flatnonzero(row)
        if active.size == 0:
            stable_at[g] = 0
            continue
        if row[max(0, T - window):].any():
            stable_at[g] = None
            continue
        first_active = int(active[0]) + 1
        stable_at[g] = None
        for t in range(first_active, T - window + 1):
            # periods t+1..t+window are row[t:t+window]
            if not row[t:t + window].any():
                stable_at[g] = t
                break
    return StabilizationReport(stable_at=stable_at, window=window)


def read_matrix(file_path: PathLike, reach: Optional[float] = None,
                period_len: float = 86400.0, origin: float = 0.0) -> PeriodMatrix:
    """
    Load a PeriodMatrix CSV (generation,p1..pT with an optional `pct` row).

    When reach is not given it is recovered from the `pct` row as the total
    count divided by the total printed fraction, rounded to an integer; without
    a `pct` row the matrix total is used.
    """
    frame = pd.read_csv(io.StringIO(read_text_file(file_path)), dtype=str,
                        comment="#", skipinitialspace=True)
    frame.columns = [c.strip() for c in frame.columns]
    if "generation" not in frame.columns or frame.shape[1] < 2:
        raise EmptyInputError(f"{file_path} is not a period matrix CSV")
    is_pct = frame["generation"].str.strip().str.lower() == "pct"
    body = frame[~is_pct]
    generations = body["generation"].astype(int).to_numpy()
    if not np.array_equal(generations, np.arange(1, len(generations) + 1)):
        raise UnknownGenerationError("matrix rows must be generations 1..G in order")
    counts = body.drop(columns="generation").astype(np.int64).to_numpy()

    if reach is None:
        if is_pct.any():
            fractions = frame[is_pct].drop(columns="generation").iloc[0].astype(float).to_numpy()
            # fractions may be printed as 0.1956 or as percentages like 19.56
            total_fraction = fractions.sum()
            if total_fraction > 1.0 + 1e-9:
                total_fraction /= 100.0
            reach = float(round(counts.sum() / total_fraction))
        else:
            reach = float(counts.sum())
    if math.isnan(reach) or reach <= 0:
        raise EmptyInputError(f"{file_path} has no infections")
    return PeriodMatrix(counts, float(period_len), float(origin), float(reach))


def campaign_cumulative(matrix: PeriodMatrix) -> pd.DataFrame:
    """New and cumulative infections of the whole campaign per period, with the share of the reach."""
    new = matrix.counts.sum(axis=0)
    cumulative = np.cumsum(new)
    return pd.DataFrame({
        "period": np.arange(1, matrix.T + 1),
        "new": [str(int(v)) for v in new],
        "cumulative": [str(int(v)) for v in cumulative],
        "fraction": [fixed(v / float(matrix.reach), 4) for v in cumulative],
    })
