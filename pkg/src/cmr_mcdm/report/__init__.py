"""Run orchestration, tables, charts and the command line interface."""
from .config import ConfigError, RunConfig, build_config
from .emit import (
    RankingTable,
    category_tables,
    emit_all,
    emit_parallel_coordinates,
    emit_radar_chart,
    emit_ranking_table,
    emit_series_plots,
    ranking_tables,
    result_bundle,
)
from .pipeline import AnalysisResult, CombinationResult, run_pipeline

__all__ = [
    "AnalysisResult", "CombinationResult", "ConfigError", "RankingTable", "RunConfig",
    "build_config", "category_tables", "emit_all", "emit_parallel_coordinates",
    "emit_radar_chart", "emit_ranking_table", "emit_series_plots", "ranking_tables",
    "result_bundle", "run_pipeline",
]
