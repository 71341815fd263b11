"""
Report pipeline as a LangGraph workflow.

ingest always runs first; stats, fit and temporal each write their report
files into the staging directory. Conditional edges skip the steps that were
not requested, so one graph serves every analysis subcommand.
"""
from dataclasses import fields, replace
from pathlib import Path

from langgraph.graph import END, StateGraph

from analysis.branching import project
from analysis.estimator import sweep, trajectories_frame
from analysis.metrics import campaign_summary, epidemic_params, metrics_frame
from analysis.temporal import (
    campaign_cumulative,
    cumulative_by_generation,
    first_occurrence,
    first_occurrence_frame,
    period_generation_matrix,
    read_matrix,
    stabilization,
)
from core.errors import InvalidConfigError
from core.events import read_events
from core.forest import build_forest
from core.series import format_series, generation_counts, read_series
from core.state import ReportState
from utils.file_io import write_text_atomic
from utils.formatter import format_summary
from utils.logger import get_logger
from utils.plotting import write_line_chart

logger = get_logger(__name__)

STEPS = ("stats", "fit", "temporal")


def _write_frame(state: ReportState, name: str, frame) -> str:
    write_text_atomic(Path(state.staging) / name, frame.to_csv(index=False, lineterminator="\n"))
    return name


def ingest_node(state: ReportState) -> dict:
    cfg = state.config
    updates = {}
    if cfg.events:
        log = read_events(cfg.events, cfg.fmt)
        forest = build_forest(log, cfg.orphans)
        updates.update(log=log, forest=forest, series=generation_counts(forest),
                       matrix=period_generation_matrix(forest, cfg.period_len))
        logger.info(f"Loaded {len(log)} events, {len(forest)} infected from {len(forest.seeds)} seeds, "
                    f"{forest.max_generation} generations from {cfg.events}")
    else:
        if cfg.from_series:
            updates["series"] = read_series(cfg.from_series)
        if cfg.from_matrix:
            updates["matrix"] = read_matrix(cfg.from_matrix, reach=cfg.reach, period_len=cfg.period_len)

    needs_series = {"stats", "fit"} & set(state.steps)
    if needs_series and "series" not in updates:
        raise InvalidConfigError(f"{'/'.join(sorted(needs_series))} needs an events file or --from-series")
    if "temporal" in state.steps and "matrix" not in updates:
        raise InvalidConfigError("temporal needs an events file or --from-matrix")
    return updates


def stats_node(state: ReportState) -> dict:
    cfg = state.config
    params = epidemic_params(state.series, cfg.tol)
    summary = campaign_summary(state.series, params)
    written = [
        _write_frame(state, "generation_params.csv", metrics_frame(state.series, params)),
    ]
    write_text_atomic(Path(state.staging) / "generation_series.csv", format_series(state.series))
    written.append("generation_series.csv")

    forest, log = state.forest, state.log
    text = format_summary(
        summary,
        source=cfg.events or cfg.from_series or "",
        orphans=len(forest.orphan_records) if forest is not None else None,
        promoted=len(forest.promoted_seeds) if forest is not None else None,
        attempts=sum(forest.attempt_counts.values()) if forest is not None else None,
        diagnostics=len(log.diagnostics) if log is not None else 0,
        seed_records=len(log.seeds) if log is not None else None,
    )
    write_text_atomic(Path(state.staging) / "summary.txt", text)
    written.append("summary.txt")
    return {"params": params, "summary": summary, "outputs": state.outputs + written}


def fit_node(state: ReportState) -> dict:
    cfg = state.config
    ks = (cfg.k,) if cfg.k is not None else None
    report = sweep(state.series, cfg.search, ks)
    trajectories = trajectories_frame(report, state.series, cfg.search)
    # projection of the model fitted on the most generations
    widest = max(report.rows, key=lambda r: r.k)
    model = project(widest.params, state.series.seeds, cfg.search.horizon, cfg.search.eps)
    written = [
        _write_frame(state, "fit_report.csv", report.to_frame()),
        _write_frame(state, "reach_error_curve.csv", report.reach_error_curve()),
        _write_frame(state, "fit_params.csv", report.params_frame()),
        _write_frame(state, "fit_trajectories.csv", trajectories),
        _write_frame(state, "model_trajectory.csv", model.to_frame()),
    ]
    if cfg.svg:
        ks_used = [r.k for r in report.rows]
        errors = [100.0 * r.reach_error_pct for r in report.rows]
        write_line_chart(Path(state.staging) / "reach_error_curve.svg",
                         "Reach error by generations used", "generations used (k)",
                         "reach error [%]", {"reach error": (ks_used, errors)})
        written.append("reach_error_curve.svg")

        generations = trajectories["generation"].tolist()
        curves = {"observed": (generations, state.series.cumulative.astype(float).tolist())}
        for r in report.rows:
            curves[f"k={r.k}"] = (generations, trajectories[f"k{r.k}"].astype(float).tolist())
        write_line_chart(Path(state.staging) / "fit_trajectories.svg",
                         "Fitted models against observed infections", "generation",
                         "cumulative infections", curves)
        written.append("fit_trajectories.svg")
    return {"fit_report": report, "outputs": state.outputs + written}


def temporal_node(state: ReportState) -> dict:
    cfg = state.config
    matrix = state.matrix.coarsen(cfg.coarsen) if cfg.coarsen > 1 else state.matrix
    report = stabilization(matrix, cfg.window)
    generations = cfg.generations or tuple(range(1, matrix.G + 1))
    curves = cumulative_by_generation(matrix, generations)

    written = [
        _write_frame(state, "period_matrix.csv", matrix.to_frame()),
        _write_frame(state, "stabilization.csv", report.to_frame()),
        _write_frame(state, "campaign_cumulative.csv", campaign_cumulative(matrix)),
    ]
    lines = ["period," + ",".join(f"g{g}" for g in curves)]
    for t in range(matrix.T):
        lines.append(",".join([str(t + 1)] + [str(int(curve[t])) for curve in curves.values()]))
    write_text_atomic(Path(state.staging) / "cumulative_by_generation.csv", "\n".join(lines) + "\n")
    written.append("cumulative_by_generation.csv")

    offsets = None
    if state.forest is not None:
        offsets = first_occurrence(state.forest)
        written.append(_write_frame(state, "first_occurrence.csv", first_occurrence_frame(offsets)))

    if cfg.svg:
        periods = list(range(1, matrix.T + 1))
        write_line_chart(Path(state.staging) / "cumulative_by_generation.svg",
                         "Cumulative infections per generation", "period", "infections",
                         {f"G{g}": (periods, curve.tolist()) for g, curve in curves.items()},
                         step=True)
        written.append("cumulative_by_generation.svg")
        if offsets is not None:
            write_line_chart(Path(state.staging) / "first_occurrence.svg",
                             "First occurrence of each generation", "minutes since start",
                             "generation",
                             {"first occurrence": ((offsets / 60.0).tolist(),
                                                   list(range(1, len(offsets) + 1)))})
            written.append("first_occurrence.svg")

    logger.info(f"Stable prefix with window {report.window}: {report.stable_prefix()} generations")
    return {"matrix": matrix, "stabilization": report, "outputs": state.outputs + written}


def _route_after(node: str):
    def route(state: ReportState):
        later = STEPS[STEPS.index(node) + 1:] if node in STEPS else STEPS
        for step in later:
            if step in state.steps:
                return step
        return END
    return route


def build_report_graph():
    graph_builder = StateGraph(ReportState)

    graph_builder.add_node("ingest", ingest_node)
    graph_builder.add_node("stats", stats_node)
    graph_builder.add_node("fit", fit_node)
    graph_builder.add_node("temporal", temporal_node)

    graph_builder.add_conditional_edges("ingest", _route_after("ingest"),
                                        {"stats": "stats", "fit": "fit", "temporal": "temporal", END: END})
    graph_builder.add_conditional_edges("stats", _route_after("stats"),
                                        {"fit": "fit", "temporal": "temporal", END: END})
    graph_builder.add_conditional_edges("fit", _route_after("fit"), {"temporal": "temporal", END: END})
    graph_builder.add_edge("temporal", END)

    graph_builder.set_entry_point("ingest")
    return graph_builder.compile()


def run_pipeline(state: ReportState) -> ReportState:
    """Run the requested steps and return the final state."""
    unknown = set(state.steps) - set(STEPS)
    if unknown:
        raise InvalidConfigError(f"unknown pipeline steps {sorted(unknown)}")
    final = build_report_graph().invoke(state)
    names = {f.name for f in fields(ReportState)}
    return replace(state, **{k: v for k, v in dict(final).items() if k in names})
