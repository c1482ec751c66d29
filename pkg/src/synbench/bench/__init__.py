from .aggregate import aggregate, aggregate_rows, plot_benchmark, write_csv, write_markdown
from .plan import ClassifierConfig, ExperimentPlan, GanConfig, SettingConfig, load_plan, save_plan
from .runner import ResultStore, run_benchmark, run_cell

__all__ = [
    "ClassifierConfig",
    "ExperimentPlan",
    "GanConfig",
    "ResultStore",
    "SettingConfig",
    "aggregate",
    "aggregate_rows",
    "load_plan",
    "plot_benchmark",
    "run_benchmark",
    "run_cell",
    "save_plan",
    "write_csv",
    "write_markdown",
]
