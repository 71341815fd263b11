"""
Subcommand implementations. Each returns a process exit code.

Report files are written into a staging directory and only moved into the
output directory once every file of the command exists.
"""
import hashlib
import json
from pathlib import Path
from typing import Tuple

import config
from analysis.simulator import comparison_frame, empirical_vs_expected, run_campaign, write_simulation
from core.errors import InvalidConfigError
from core.state import ReportState, RunConfig
from core.supervisor import run_pipeline
from utils.file_io import staged_output, write_text_atomic
from utils.logger import get_logger

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"


def _run_steps(run_config: RunConfig, steps: Tuple[str, ...], manifest: bool = False) -> int:
    try:
        with staged_output(run_config.output) as staging:
            state = run_pipeline(ReportState(config=run_config, steps=steps, staging=str(staging)))
            if manifest:
                write_manifest(staging, state)
    except (ValueError, OSError) as e:
        logger.error(f"{run_config.subcommand} failed: {e}")
        return 1
    for name in state.outputs:
        logger.info(f"Wrote {Path(run_config.output) / name}")
    return 0


def write_manifest(directory: Path, state: ReportState) -> Path:
    """Index every report file with its size and SHA-256 digest."""
    entries = []
    for name in sorted(state.outputs):
        data = (Path(directory) / name).read_bytes()
        entries.append({"file": name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()})
    stable_prefix = state.stabilization.stable_prefix() if state.stabilization is not None else None
    manifest = {
        "version": config.__version__,
        "command": state.config.subcommand,
        "input": state.config.events or state.config.from_series or state.config.from_matrix,
        "generations": state.series.G if state.series is not None else None,
        "stable_prefix": stable_prefix,
        "files": entries,
    }
    return write_text_atomic(Path(directory) / MANIFEST_NAME,
                             json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_stats(run_config: RunConfig) -> int:
    return _run_steps(run_config, ("stats",))


def cmd_fit(run_config: RunConfig) -> int:
    return _run_steps(run_config, ("fit",))


def cmd_temporal(run_config: RunConfig) -> int:
    return _run_steps(run_config, ("temporal",))


def cmd_report(run_config: RunConfig) -> int:
    """stats, fit and temporal into one directory, plus manifest.json."""
    steps = ("stats", "fit", "temporal")
    if not run_config.events and not run_config.from_matrix:
        steps = ("stats", "fit")
    return _run_steps(run_config, steps, manifest=True)


def cmd_simulate(run_config: RunConfig) -> int:
    try:
        if run_config.sim is None:
            raise InvalidConfigError("simulate needs simulation parameters")
        out = Path(run_config.out or Path(run_config.output) / "simulated_events.csv")
        campaign = run_campaign(run_config.sim)
        write_simulation(campaign.log, run_config.sim, out)
        logger.info(f"Wrote {len(campaign.log)} events ({len(campaign.generation)} infected) to {out}")
        if run_config.compare_runs > 0:
            table = empirical_vs_expected(run_config.sim, run_config.compare_runs)
            compare_path = out.with_name(out.stem + ".comparison.csv")
            write_text_atomic(compare_path, comparison_frame(table).to_csv(index=False, lineterminator="\n"))
            logger.info(f"Wrote Monte-Carlo comparison over {run_config.compare_runs} runs to {compare_path}")
    except (ValueError, OSError) as e:
        logger.error(f"simulate failed: {e}")
        return 1
    return 0


COMMANDS = {
    "stats": cmd_stats,
    "fit": cmd_fit,
    "temporal": cmd_temporal,
    "simulate": cmd_simulate,
    "report": cmd_report,
}
