"""Figure rendering for coresetmcmc run outputs."""

from .figures import (
    CSV_COLUMNS,
    FigureSpec,
    InputError,
    Run,
    compute_ratios,
    final_metric_median,
    group_runs,
    load_run,
    load_runs,
    render,
)

__version__ = "0.1.0"
