"""
Command line for viral-campaign analysis.

    python main.py stats    EVENTS.csv [--orphans as-seeds]
    python main.py fit      EVENTS.csv [--k 5] [--r0-max 20] [--svg]
    python main.py temporal EVENTS.csv [--period 1d] [--window 3]
    python main.py simulate --p 0.3 --lambda 4 --n 1000 --rng-seed 42 --out sim.csv
    python main.py report   EVENTS.csv --output out/
"""
import argparse
import sys
from typing import List, Optional

import config
from analysis.estimator import SearchConfig
from analysis.simulator import SimParams
from analysis.temporal import parse_period
from core.commands import COMMANDS
from core.events import TIMESTAMP_FORMATS, FormatConfig
from core.forest import OrphanPolicy
from core.state import RunConfig
from utils.logger import get_logger, set_level

logger = get_logger(__name__)

SEARCH_FLAGS = (
    "r0_min", "r0_max", "r0_steps", "n_min", "n_max", "n_steps",
    "refine_rounds", "refine_shrink", "horizon", "eps", "threads",
)
SIM_FLAGS = ("p", "lam", "N", "seeds", "mean_delay", "max_generations", "rng_seed", "start_time")


def _generation_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated generations, got {text!r}")


def _add_common(parser: argparse.ArgumentParser, inputs: str):
    parser.add_argument("events", nargs="?", metavar="EVENTS",
                        help="event CSV (sender_id,recipient_id,timestamp)")
    parser.add_argument("--output", default=config.DEFAULT_OUTPUT_DIR, metavar="DIR",
                        help="directory for report files")
    parser.add_argument("--orphans", choices=[p.value for p in OrphanPolicy], default=OrphanPolicy.REJECT.value,
                        help="records whose sender was never infected: reject them or promote the sender to a seed")
    parser.add_argument("--strict", action="store_true",
                        help="fail on the first malformed line instead of skipping it")
    parser.add_argument("--timestamp-format", choices=TIMESTAMP_FORMATS, default="auto",
                        help="timestamp format of the event file")
    parser.add_argument("--delimiter", default=",", help="field delimiter of the event file")
    if "series" in inputs:
        parser.add_argument("--from-series", metavar="CSV",
                            help="read a generation series CSV instead of events")
        parser.add_argument("--tol", type=float, default=0.0,
                            help="tolerance around ETP = 1 for the critical class")
    if "matrix" in inputs:
        parser.add_argument("--from-matrix", metavar="CSV",
                            help="read a period matrix CSV instead of events")
        parser.add_argument("--reach", type=float, default=None,
                            help="campaign reach for --from-matrix fractions (default: inferred from its pct row)")


def _add_search(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("estimator search")
    group.add_argument("--k", type=int, default=None,
                       help="fit only on the first K generations (default: sweep every K)")
    group.add_argument("--search-config", metavar="FILE",
                       help="key=value file of search options; flags override it")
    group.add_argument("--r0-min", type=float, default=None, help=f"lowest r0 (default {config.R0_MIN})")
    group.add_argument("--r0-max", type=float, default=None, help=f"highest r0 (default {config.R0_MAX})")
    group.add_argument("--r0-steps", type=int, default=None, help=f"r0 grid points (default {config.R0_STEPS})")
    group.add_argument("--n-min", type=float, default=None,
                       help="lowest N (default: cumulative infections of the fitted prefix)")
    group.add_argument("--n-max", type=float, default=None, help=f"highest N (default {config.N_MAX:g})")
    group.add_argument("--n-steps", type=int, default=None, help=f"N grid points (default {config.N_STEPS})")
    group.add_argument("--n-linear", action="store_true", help="space the N axis linearly instead of geometrically")
    group.add_argument("--refine-rounds", type=int, default=None,
                       help=f"local refinement rounds (default {config.REFINE_ROUNDS})")
    group.add_argument("--refine-shrink", type=float, default=None,
                       help=f"window shrink factor per round (default {config.REFINE_SHRINK})")
    group.add_argument("--horizon", type=int, default=None,
                       help=f"maximum projected generations (default {config.DEFAULT_HORIZON})")
    group.add_argument("--eps", type=float, default=None,
                       help=f"extinction threshold (default {config.DEFAULT_EPS})")
    group.add_argument("--threads", type=int, default=None,
                       help=f"grid worker threads (default {config.THREADS}, env CASCADE_BRANCH_THREADS)")


def _add_temporal(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("temporal analysis")
    group.add_argument("--period", default=config.DEFAULT_PERIOD,
                       help="period length: 1d, 6h, 30m, 45s or seconds")
    group.add_argument("--window", type=int, default=config.DEFAULT_WINDOW,
                       help="quiet periods needed to call a generation stable")
    group.add_argument("--coarsen", type=int, default=1, help="merge this many adjacent periods")
    group.add_argument("--generations", type=_generation_list, default=None,
                       help="comma-separated generations for cumulative curves (default: all)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description=f"Viral campaign analysis with generation-based branching models v{config.__version__}",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--log-level", default=config.LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging verbosity")
    parser.add_argument("--version", action="version", version=config.__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    stats = sub.add_parser("stats", formatter_class=fmt,
                           help="per-generation p, lambda and ETP with a campaign summary")
    _add_common(stats, "series")

    fit = sub.add_parser("fit", formatter_class=fmt,
                         help="fit a branching model on leading generations and report reach errors")
    _add_common(fit, "series")
    _add_search(fit)
    fit.add_argument("--svg", action="store_true", help="also write an SVG reach-error chart")

    temporal = sub.add_parser("temporal", formatter_class=fmt,
                              help="period x generation matrix, first occurrence and stabilization")
    _add_common(temporal, "matrix")
    _add_temporal(temporal)
    temporal.add_argument("--svg", action="store_true", help="also write SVG charts")

    report = sub.add_parser("report", formatter_class=fmt,
                            help="stats, fit and temporal into one directory with a manifest")
    _add_common(report, "series,matrix")
    _add_search(report)
    _add_temporal(report)
    report.add_argument("--svg", action="store_true", help="also write SVG charts")

    simulate = sub.add_parser("simulate", formatter_class=fmt,
                              help="simulate a campaign and write its event CSV")
    simulate.add_argument("--config", metavar="FILE", help="key=value file of simulation parameters")
    simulate.add_argument("--p", type=float, default=None, help="decision probability")
    simulate.add_argument("--lambda", dest="lam", type=float, default=None,
                          help=f"mean contact attempts per decider (default {config.SIM_LAMBDA:g})")
    simulate.add_argument("--n", dest="N", type=int, default=None,
                          help=f"population size (default {config.SIM_POPULATION})")
    simulate.add_argument("--seeds", type=int, default=None, help="initially infected members (default 1)")
    simulate.add_argument("--mean-delay", type=float, default=None,
                          help=f"mean transmission delay in seconds (default {config.SIM_MEAN_DELAY:g})")
    simulate.add_argument("--max-generations", type=int, default=None,
                          help=f"deepest generation simulated (default {config.SIM_MAX_GENERATIONS})")
    simulate.add_argument("--rng-seed", type=int, default=None, help="random seed (default 0)")
    simulate.add_argument("--start-time", type=int, default=None, help="epoch seconds of the seed events")
    simulate.add_argument("--out", metavar="CSV", default=None,
                          help="event file to write (default OUTPUT/simulated_events.csv)")
    simulate.add_argument("--output", default=config.DEFAULT_OUTPUT_DIR, metavar="DIR",
                          help="directory used when --out is not given")
    simulate.add_argument("--compare-runs", type=int, default=0,
                          help="also write a Monte-Carlo vs expected comparison over this many runs")
    return parser


def _search_config(args) -> SearchConfig:
    base = SearchConfig.from_file(args.search_config) if args.search_config else SearchConfig()
    overrides = {name: getattr(args, name) for name in SEARCH_FLAGS if getattr(args, name) is not None}
    if args.n_linear:
        overrides["n_log"] = False
    return SearchConfig.from_mapping(overrides, base)


def _sim_params(args) -> SimParams:
    flags = {name: getattr(args, name) for name in SIM_FLAGS if getattr(args, name) is not None}
    if args.config:
        return SimParams.from_file(args.config, flags)
    return SimParams.from_mapping(flags)


def build_run_config(args) -> RunConfig:
    """Translate parsed arguments into a RunConfig; raises ValueError on bad values."""
    if args.subcommand == "simulate":
        return RunConfig(subcommand="simulate", output=args.output, sim=_sim_params(args),
                         out=args.out, compare_runs=args.compare_runs)

    sources = [s for s in (args.events, getattr(args, "from_series", None),
                           getattr(args, "from_matrix", None)) if s]
    if not sources:
        raise ValueError(f"{args.subcommand} needs an EVENTS file, --from-series or --from-matrix")
    if args.events and len(sources) > 1:
        raise ValueError("give either an EVENTS file or --from-series/--from-matrix, not both")

    kwargs = dict(
        subcommand=args.subcommand,
        events=args.events,
        from_series=getattr(args, "from_series", None),
        from_matrix=getattr(args, "from_matrix", None),
        reach=getattr(args, "reach", None),
        output=args.output,
        fmt=FormatConfig(delimiter=args.delimiter, timestamp_format=args.timestamp_format, strict=args.strict),
        orphans=OrphanPolicy(args.orphans),
        tol=getattr(args, "tol", 0.0),
        svg=getattr(args, "svg", False),
    )
    if hasattr(args, "r0_min"):
        kwargs.update(search=_search_config(args), k=args.k)
    if hasattr(args, "period"):
        kwargs.update(period_len=parse_period(args.period), window=args.window,
                      coarsen=args.coarsen, generations=tuple(args.generations or ()))
    return RunConfig(**kwargs)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    set_level(args.log_level)
    logger.debug(f"Arguments: {vars(args)}")

    try:
        run_config = build_run_config(args)
    except (ValueError, OSError) as e:
        logger.error(f"Invalid arguments: {e}")
        return 1
    try:
        return COMMANDS[args.subcommand](run_config)
    except Exception as e:
        logger.error(f"Unexpected error in {args.subcommand}: {e}")
        logger.debug("Traceback", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
