"""Core services behind the fresh-contracts command line."""

from .artifacts import ArtifactWriter
from .evaluation_service import (
    ComparisonRow,
    ComparisonSummary,
    EvaluationService,
    StateContractReport,
    SweepPoint,
)
from .shape_checks import is_unimodal, relative_range, value_range
from .training_service import TrainingRunSummary, TrainingService

__all__ = [
    "ArtifactWriter",
    "ComparisonRow",
    "ComparisonSummary",
    "EvaluationService",
    "StateContractReport",
    "SweepPoint",
    "TrainingRunSummary",
    "TrainingService",
    "is_unimodal",
    "relative_range",
    "value_range",
]
