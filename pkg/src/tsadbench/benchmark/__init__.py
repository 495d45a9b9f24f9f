from tsadbench.benchmark.history import (
    ReleaseHistory, ShiftReport, detect_shifts, history_add, load_history, release_table)
from tsadbench.benchmark.records import ExperimentRecord, read_records, write_records
from tsadbench.benchmark.runner import run_benchmark
from tsadbench.benchmark.runtime import RuntimeReport, runtime_report
from tsadbench.benchmark.summary import (
    LeaderboardRow, SummaryTable, leaderboard, spearman_matrix, spearman_rho, summarize)

__all__ = [
    "ExperimentRecord", "LeaderboardRow", "ReleaseHistory", "RuntimeReport", "ShiftReport",
    "SummaryTable", "detect_shifts", "history_add", "leaderboard", "load_history",
    "read_records", "release_table", "run_benchmark", "runtime_report", "spearman_matrix",
    "spearman_rho", "summarize", "write_records",
]
