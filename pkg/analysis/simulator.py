"""
Synthetic viral campaigns.

`run_campaign` simulates a stochastic finite-population branching process in
continuous time: every infected member forwards with probability p, a
forwarder makes Poisson(lambda) contact attempts on uniformly drawn other
members, and each attempt lands after an exponential delay (whole seconds,
at least one). The earliest attempt to reach a member infects it; later ones
are still logged as events.

`reconstruct_campaign` builds an event log whose aggregates match given
tables, which is how fixture event files are produced for campaigns that are
only known through their published counts.
"""
import heapq
from dataclasses import asdict, dataclass, fields
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional

import numpy as np
import pandas as pd
from dotenv import dotenv_values

import config
from analysis.branching import ModelParams, project
from analysis.temporal import PeriodMatrix
from core.errors import InfeasibleReconstructionError, InvalidParamsError
from core.events import EventLog, EventRecord, write_events
from core.series import GenerationSeries
from utils.file_io import PathLike
from utils.formatter import fixed
from utils.logger import get_logger

logger = get_logger(__name__)

RNG_ALGORITHM = f"numpy.random.PCG64 (numpy {np.__version__})"


@dataclass(frozen=True)
class SimParams:
    p: float
    lam: float = config.SIM_LAMBDA
    N: int = config.SIM_POPULATION
    seeds: int = 1
    mean_delay: float = config.SIM_MEAN_DELAY
    max_generations: int = config.SIM_MAX_GENERATIONS
    rng_seed: int = 0
    start_time: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParamsError(f"p must lie in [0, 1], got {self.p}")
        if self.lam < 0:
            raise InvalidParamsError(f"lambda must be non-negative, got {self.lam}")
        if self.N < 1 or self.seeds < 1:
            raise InvalidParamsError("N and seeds must be positive")
        if self.seeds > self.N:
            raise InvalidParamsError(f"seeds ({self.seeds}) exceed population N ({self.N})")
        if self.mean_delay <= 0:
            raise InvalidParamsError("mean_delay must be positive")
        if self.max_generations < 1:
            raise InvalidParamsError("max_generations must be at least 1")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise InvalidParamsError("rng_seed must be an unsigned 64-bit value")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object], base: Optional[Dict[str, object]] = None) -> "SimParams":
        known = {f.name: f for f in fields(cls)}
        aliases = {"lambda": "lam", "n": "N"}
        merged = dict(base or {})
        for raw_key, value in values.items():
            key = raw_key.strip().replace("-", "_")
            key = aliases.get(key.lower(), key)
            if key not in known:
                raise InvalidParamsError(f"unknown simulation option {raw_key!r}")
            if value is None or value == "":
                continue
            merged[key] = value
        if "p" not in merged:
            raise InvalidParamsError("missing simulation parameter: p")
        try:
            typed = {
                k: (float(v) if k in ("p", "lam", "mean_delay") else int(v))
                for k, v in merged.items()
            }
        except (TypeError, ValueError) as e:
            raise InvalidParamsError(f"invalid simulation option: {e}")
        return cls(**typed)

    @classmethod
    def from_file(cls, file_path: PathLike, overrides: Optional[Mapping[str, object]] = None) -> "SimParams":
        values = dict(dotenv_values(file_path))
        values.update(overrides or {})
        return cls.from_mapping(values)

    def describe(self) -> str:
        """One-line record of every parameter, written as the event file's comment."""
        items = " ".join(f"{k}={v}" for k, v in asdict(self).items())
        return f"simulate {items} rng={RNG_ALGORITHM}"


@dataclass(frozen=True)
class Campaign:
    """A simulated event log together with the simulator's own ground truth."""
    log: EventLog
    generation: Mapping[str, int]
    infected_at: Mapping[str, float]
    params: SimParams

    def generation_counts(self) -> np.ndarray:
        return np.bincount(list(self.generation.values()))[1:]

    def first_occurrence(self) -> np.ndarray:
        origin = min(self.infected_at.values())
        earliest = np.full(max(self.generation.values()), np.inf)
        for actor, g in self.generation.items():
            earliest[g - 1] = min(earliest[g - 1], self.infected_at[actor] - origin)
        return earliest


def _actor(index: int) -> str:
    return f"u{index}"


def _spread(params: SimParams, rng: np.random.Generator, record: bool = True):
    """Event-driven core shared by run_campaign and the Monte-Carlo harness."""
    generation: Dict[int, int] = {}
    infected_at: Dict[int, float] = {}
    records: List[EventRecord] = []
    heap = []
    seq = 0

    for member in rng.choice(params.N, size=params.seeds, replace=False):
        heap.append((params.start_time, seq, -1, int(member)))
        seq += 1
    heapq.heapify(heap)

    while heap:
        t, _, sender, target = heapq.heappop(heap)
        if record:
            records.append(EventRecord(None if sender < 0 else _actor(sender), _actor(target), float(t)))
        if target in generation:
            continue
        g = 1 if sender < 0 else generation[sender] + 1
        generation[target] = g
        infected_at[target] = t

        if g >= params.max_generations or params.N == 1:
            continue
        if rng.random() >= params.p:
            continue
        attempts = int(rng.poisson(params.lam))
        if attempts == 0:
            continue
        targets = rng.integers(params.N - 1, size=attempts)
        targets[targets >= target] += 1
        delays = np.maximum(1, np.ceil(rng.exponential(params.mean_delay, size=attempts))).astype(np.int64)
        for other, delay in zip(targets.tolist(), delays.tolist()):
            heapq.heappush(heap, (t + delay, seq, target, other))
            seq += 1

    return generation, infected_at, records


def run_campaign(params: SimParams) -> Campaign:
    """Simulate one campaign; the result is a pure function of params."""
    rng = np.random.Generator(np.random.PCG64(params.rng_seed))
    generation, infected_at, records = _spread(params, rng)
    log = EventLog.from_records(records, comments=(params.describe(),))
    logger.debug(f"Simulated {len(generation)} infections from {len(records)} events")
    return Campaign(
        log=log,
        generation=MappingProxyType({_actor(k): v for k, v in generation.items()}),
        infected_at=MappingProxyType({_actor(k): float(v) for k, v in infected_at.items()}),
        params=params,
    )


def simulate(params: SimParams) -> EventLog:
    """Event log of one simulated campaign."""
    return run_campaign(params).log


def write_simulation(log: EventLog, params: SimParams, file_path: PathLike):
    return write_events(log, file_path, comments=(params.describe(),))


def empirical_vs_expected(params: SimParams, runs: int, eps: float = 1e-9) -> pd.DataFrame:
    """
    Mean per-generation infections over independent runs next to project().

    Runs use child seeds spawned from params.rng_seed. The projection uses a
    tiny extinction threshold so small expected counts stay comparable.
    """
    if runs < 1:
        raise InvalidParamsError("runs must be at least 1")
    totals = np.zeros(params.max_generations)
    for child in np.random.SeedSequence(params.rng_seed).spawn(runs):
        rng = np.random.Generator(np.random.PCG64(child))
        generation, _, _ = _spread(params, rng, record=False)
        counts = np.bincount(list(generation.values()), minlength=params.max_generations + 1)[1:]
        totals += counts
    empirical = totals / runs
    deepest = int(np.max(np.flatnonzero(empirical))) + 1

    traj = project(ModelParams(p=params.p, lam=params.lam, N=float(params.N)),
                   params.seeds, horizon=params.max_generations, eps=eps)
    expected = np.zeros(params.max_generations)
    expected[:traj.H] = traj.expected_infected
    H = max(deepest, traj.H)
    empirical, expected = empirical[:H], expected[:H]

    with np.errstate(divide="ignore", invalid="ignore"):
        deviation = np.where(expected > 0, (empirical - expected) / expected,
                             np.where(empirical > 0, np.inf, 0.0))
    return pd.DataFrame({
        "generation": np.arange(1, H + 1),
        "empirical_mean": empirical,
        "expected": expected,
        "rel_deviation": deviation,
        "empirical_cumulative": np.cumsum(empirical),
        "expected_cumulative": np.cumsum(expected),
    })


def comparison_frame(table: pd.DataFrame) -> pd.DataFrame:
    out = table.copy()
    for column in out.columns[1:]:
        out[column] = [fixed(v, 6) for v in out[column]]
    return out


def reconstruct_campaign(series: GenerationSeries, matrix: Optional[PeriodMatrix] = None,
                         total_periods: Optional[int] = None, period_len: float = 86400.0,
                         generation_spacing: int = 600, rng_seed: int = 0,
                         start_time: int = 0) -> EventLog:
    """
    Build an event log whose aggregates reproduce `series` exactly.

    Each generation's infections are placed in periods following `matrix`
    (rows may be fewer than series.G); infections the matrix does not cover
    are spread round-robin over periods T+1..total_periods. Inside a period a
    generation-g infection happens (g-1)*generation_spacing seconds after the
    period start plus its index, so parents precede children within a period.
    The earliest decisions(g) members of generation g become the forwarders;
    each gets at least one child no earlier than itself and the other children
    go to randomly chosen earlier forwarders.

    Raises:
        InfeasibleReconstructionError: If no log can match the tables
    """
    G = series.G
    infected = [int(round(v)) for v in series.infected]
    decisions = [int(round(v)) for v in series.decisions]
    sent = [int(round(v)) for v in series.sent]
    T = matrix.T if matrix is not None else 1
    D = total_periods if total_periods is not None else T
    if D < T:
        raise InfeasibleReconstructionError(f"total_periods ({D}) is shorter than the matrix ({T})")
    if (G - 1) * generation_spacing >= period_len:
        raise InfeasibleReconstructionError("generation_spacing too large for the period length")

    # period of every infection, per generation, in time order
    periods: List[List[int]] = []
    for g in range(1, G + 1):
        if matrix is None:
            days = [1] * infected[g - 1]
        else:
            row = matrix.counts[g - 1] if g <= matrix.G else np.zeros(T, dtype=int)
            days = [t + 1 for t in range(T) for _ in range(int(row[t]))]
        remainder = infected[g - 1] - len(days)
        if remainder < 0:
            raise InfeasibleReconstructionError(f"matrix row {g} exceeds infected({g})")
        if remainder and D == T:
            raise InfeasibleReconstructionError(
                f"generation {g} has {remainder} infections outside the matrix; pass total_periods"
            )
        days += [T + 1 + (i % (D - T)) for i in range(remainder)]
        periods.append(sorted(days))

    times: List[List[int]] = []
    for g, days in enumerate(periods, start=1):
        slot_index: Dict[int, int] = {}
        stamps = []
        for day in days:
            j = slot_index.get(day, 0)
            slot_index[day] = j + 1
            if j >= generation_spacing:
                raise InfeasibleReconstructionError(f"too many generation-{g} infections in period {day}")
            stamps.append(int(start_time + (day - 1) * period_len + (g - 1) * generation_spacing + j))
        times.append(stamps)

    ids = [[f"g{g}n{i}" for i in range(infected[g - 1])] for g in range(1, G + 1)]
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    records = [EventRecord(None, actor, float(t)) for actor, t in zip(ids[0], times[0])]

    if decisions[G - 1] > 0:
        raise InfeasibleReconstructionError(
            f"generation {G} has {decisions[G - 1]} decisions but no later generation"
        )
    for g in range(1, G):
        d, children = decisions[g - 1], infected[g]
        if d > children or (children > 0 and d == 0):
            raise InfeasibleReconstructionError(
                f"generation {g} has {d} decisions but sends {sent[g - 1]} infections"
            )
        if children == 0:
            continue
        forwarder_times = np.array(times[g - 1][:d])
        child_times = times[g]
        parent_of = [None] * children
        # latest forwarders take the latest children, one each
        for i in range(d):
            c = children - d + i
            if child_times[c] <= forwarder_times[i]:
                raise InfeasibleReconstructionError(
                    f"forwarder {i} of generation {g} has no later child available"
                )
            parent_of[c] = i
        for c in range(children - d):
            eligible = int(np.searchsorted(forwarder_times, child_times[c], side="left"))
            if eligible == 0:
                raise InfeasibleReconstructionError(
                    f"generation {g + 1} infection at {child_times[c]} precedes every forwarder"
                )
            parent_of[c] = int(rng.integers(eligible))
        for c, parent in enumerate(parent_of):
            records.append(EventRecord(ids[g - 1][parent], ids[g][c], float(child_times[c])))

    note = f"reconstructed G={G} periods={D} period_len={period_len:g} rng_seed={rng_seed}"
    return EventLog.from_records(records, comments=(note,))
