"""Experiment harness: configuration, staged pipeline, analysis, reports."""

from .config import CorpusSpec, ExperimentConfig, ModelSpec
from .runner import load_questions, run_experiment

__all__ = [
    "CorpusSpec",
    "ExperimentConfig",
    "ModelSpec",
    "load_questions",
    "run_experiment",
]
