from typing import List, Optional, Tuple
from dataclasses import dataclass, field

from analysis.estimator import FitReport, SearchConfig
from analysis.metrics import CampaignSummary, GenerationParams
from analysis.simulator import SimParams
from analysis.temporal import PeriodMatrix, StabilizationReport
from config import DEFAULT_OUTPUT_DIR, DEFAULT_WINDOW
from core.events import EventLog, FormatConfig
from core.forest import CascadeForest, OrphanPolicy
from core.series import GenerationSeries


@dataclass(frozen=True)
class RunConfig:
    """Everything one subcommand needs, as parsed from the command line."""
    subcommand: str
    events: Optional[str] = None
    from_series: Optional[str] = None
    from_matrix: Optional[str] = None
    reach: Optional[float] = None
    output: str = DEFAULT_OUTPUT_DIR
    fmt: FormatConfig = FormatConfig()
    orphans: OrphanPolicy = OrphanPolicy.REJECT
    tol: float = 0.0
    search: SearchConfig = SearchConfig()
    k: Optional[int] = None
    period_len: float = 86400.0
    window: int = DEFAULT_WINDOW
    coarsen: int = 1
    generations: Tuple[int, ...] = ()
    svg: bool = False
    sim: Optional[SimParams] = None
    out: Optional[str] = None
    compare_runs: int = 0


@dataclass
class ReportState:
    config: RunConfig
    steps: Tuple[str, ...] = ()
    staging: str = ""
    log: Optional[EventLog] = None
    forest: Optional[CascadeForest] = None
    series: Optional[GenerationSeries] = None
    params: Optional[GenerationParams] = None
    summary: Optional[CampaignSummary] = None
    fit_report: Optional[FitReport] = None
    matrix: Optional[PeriodMatrix] = None
    stabilization: Optional[StabilizationReport] = None
    outputs: List[str] = field(default_factory=list)
