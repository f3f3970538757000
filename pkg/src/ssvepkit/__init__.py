"""SSVEP signal-processing pipeline: synthetic data, filtering, artifact
removal, spectral features, feature selection, classification, and
subject-wise evaluation."""

from .data import Dataset, DatasetParams, SynthSpec, Trial, select_channel, synthesize
from .evaluation import EvaluationReport, grid_search_welch, render_report, run_experiment
from .io import load_dataset, save_dataset
from .pipeline import PipelineConfig, default_preset, load_config, optimal_preset, save_config

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DatasetParams",
    "EvaluationReport",
    "PipelineConfig",
    "SynthSpec",
    "Trial",
    "default_preset",
    "grid_search_welch",
    "load_config",
    "load_dataset",
    "optimal_preset",
    "render_report",
    "run_experiment",
    "save_config",
    "save_dataset",
    "select_channel",
    "synthesize",
]
