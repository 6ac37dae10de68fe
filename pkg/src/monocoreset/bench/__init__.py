"""Data ingestion, experiment driver, reports and the ``coreset`` CLI."""

from .data import (DataError, Dataset, Normalization, fold_signs, load_csv, make_synthetic,
                   make_wine_like, read_points_csv, write_points_csv)
from .experiments import (ExperimentConfig, ExperimentReport, mean_nll, run_logistic_experiment,
                          run_sigmoid_experiment, train_test_split)
from .report import SCHEMA_VERSION, emit_report, read_csv_report, report_record

__all__ = [
    "DataError", "Dataset", "Normalization", "fold_signs", "load_csv", "make_synthetic",
    "make_wine_like", "read_points_csv", "write_points_csv", "ExperimentConfig", "ExperimentReport",
    "mean_nll", "run_logistic_experiment", "run_sigmoid_experiment", "train_test_split",
    "SCHEMA_VERSION", "emit_report", "read_csv_report", "report_record",
]
