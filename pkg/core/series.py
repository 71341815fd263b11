# core/series.py
"""
Per-generation counts: infected, cumulative, decisions and infections sent.
"""
from dataclasses import dataclass
from typing import IO, Union

import numpy as np
import pandas as pd

from core.errors import EmptyInputError, SeriesInvariantError
from core.forest import CascadeForest
from utils.file_io import PathLike, write_text_atomic
from utils.formatter import format_number

SERIES_COLUMNS = ["generation", "infected", "cumulative", "decisions", "sent"]


def _frozen(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype.kind not in "iuf":
        arr = arr.astype(float)
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GenerationSeries:
    """
    Counts indexed by generation g = 1..G (array position g - 1).

    Integer arrays come from observed forests; float arrays are allowed so
    model projections can be fed back into the estimator.
    """
    infected: np.ndarray
    decisions: np.ndarray
    sent: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "infected", _frozen(self.infected))
        object.__setattr__(self, "decisions", _frozen(self.decisions))
        object.__setattr__(self, "sent", _frozen(self.sent))
        self._validate()

    def _validate(self):
        G = len(self.infected)
        if G == 0:
            raise EmptyInputError("series has no generations")
        if len(self.decisions) != G or len(self.sent) != G:
            raise SeriesInvariantError("infected, decisions and sent must have equal length")
        for name in ("infected", "decisions", "sent"):
            if np.any(getattr(self, name) < 0):
                raise SeriesInvariantError(f"{name} has negative counts")
        if not np.allclose(self.sent[:-1], self.infected[1:], rtol=0, atol=1e-9):
            bad = int(np.argmax(~np.isclose(self.sent[:-1], self.infected[1:], rtol=0, atol=1e-9))) + 1
            raise SeriesInvariantError(
                f"sent({bad}) = {self.sent[bad - 1]} but infected({bad + 1}) = {self.infected[bad]}"
            )
        if abs(self.sent[-1]) > 1e-9:
            raise SeriesInvariantError(f"sent(G) must be 0, got {self.sent[-1]}")
        if np.any(self.decisions > self.infected + 1e-9):
            raise SeriesInvariantError("decisions exceed infected")
        orphaned = (self.decisions <= 1e-9) & (self.sent > 1e-9)
        if orphaned.any():
            g = int(np.argmax(orphaned)) + 1
            raise SeriesInvariantError(f"sent({g}) = {self.sent[g - 1]} but decisions({g}) = 0")

    @property
    def G(self) -> int:
        return len(self.infected)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.infected)

    @property
    def seeds(self) -> float:
        return self.infected[0]

    @property
    def reach(self) -> float:
        return self.cumulative[-1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GenerationSeries):
            return NotImplemented
        return (
            np.array_equal(self.infected, other.infected)
            and np.array_equal(self.decisions, other.decisions)
            and np.array_equal(self.sent, other.sent)
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "generation": np.arange(1, self.G + 1),
            "infected": self.infected,
            "cumulative": self.cumulative,
            "decisions": self.decisions,
            "sent": self.sent,
        })

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "GenerationSeries":
        missing = [c for c in SERIES_COLUMNS if c not in frame.columns]
        if missing:
            raise SeriesInvariantError(f"series CSV lacks columns {missing}")
        frame = frame.sort_values("generation")
        expected = np.arange(1, len(frame) + 1)
        if not np.array_equal(frame["generation"].to_numpy(), expected):
            raise SeriesInvariantError("generations must run 1..G without gaps")
        series = cls(
            infected=frame["infected"].to_numpy(),
            decisions=frame["decisions"].to_numpy(),
            sent=frame["sent"].to_numpy(),
        )
        if not np.allclose(series.cumulative, frame["cumulative"].to_numpy(), rtol=0, atol=1e-6):
            raise SeriesInvariantError("cumulative column does not match running sum of infected")
        return series

    @classmethod
    def from_trajectory(cls, expected_infected) -> "GenerationSeries":
        """
        Wrap expected per-generation infections as an observed series.

        Every infected individual is treated as a decider, so the aggregate
        decision rate of the result is 1.
        """
        infected = np.asarray(expected_infected, dtype=float)
        sent = np.append(infected[1:], 0.0)
        return cls(infected=infected, decisions=infected.copy(), sent=sent)


def generation_counts(forest: CascadeForest) -> GenerationSeries:
    """
    Aggregate a forest into per-generation counts.

    Args:
        forest: A forest with at least one node

    Returns:
        GenerationSeries with G equal to the deepest generation present
    """
    if len(forest) == 0:
        raise EmptyInputError("forest has no nodes")
    G = forest.max_generation
    infected = np.zeros(G, dtype=np.int64)
    decisions = np.zeros(G, dtype=np.int64)
    sent = np.zeros(G, dtype=np.int64)

    children = forest.children()
    for node in forest.nodes.values():
        g = node.generation - 1
        infected[g] += 1
        successes = len(children.get(node.actor_id, ()))
        if successes:
            decisions[g] += 1
            sent[g] += successes
    return GenerationSeries(infected=infected, decisions=decisions, sent=sent)


def read_series(file_path: Union[PathLike, IO[str]]) -> GenerationSeries:
    """Load a GenerationSeries CSV (header generation,infected,cumulative,decisions,sent)."""
    frame = pd.read_csv(file_path, comment="#", skipinitialspace=True)
    frame.columns = [c.strip() for c in frame.columns]
    if frame.empty:
        raise EmptyInputError(f"{file_path} holds no generations")
    return GenerationSeries.from_frame(frame)


def format_series(series: GenerationSeries) -> str:
    frame = series.to_frame()
    for column in SERIES_COLUMNS[1:]:
        frame[column] = frame[column].map(format_number)
    return frame.to_csv(index=False, lineterminator="\n")


def write_series(series: GenerationSeries, file_path: PathLike):
    return write_text_atomic(file_path, format_series(series))
