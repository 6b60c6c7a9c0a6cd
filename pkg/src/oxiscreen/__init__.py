"""Overnight SpO2 biomarker extraction and COPD screening pipeline."""

from .config import RunConfig, load_config
from .desat import (DesatBiomarkers, DesaturationEvent, HypoxicBurden,
                    desat_biomarkers, detect_hard, detect_relative,
                    hypoxic_burden)
from .evaluate import (EvaluationReport, ModelBundle, load_model, majority_vote,
                       nested_cv)
from .features import (FeatureExtractor, FeatureMatrix, Window, build_matrix,
                       make_windows, model_columns)
from .io import ManifestError, load_manifest
from .classifiers import (DecisionTreeClassifier, LogisticRegressionGD,
                          RandomForestClassifier, feature_importance)
from .metrics import auroc, confusion, rates_from_confusion, roc_points
from .preprocess import median_smooth, preprocess, preprocess_signal, range_filter
from .records import (CopdLabel, Demographics, OximetryRecording, PsgFeatures,
                      gold_from_fev1)
from .selection import MrmrSelector, mutual_information, rank_sum_test
from .synth import CohortSpec, SynthProfile, default_profile, generate, make_cohort, plant_log

__version__ = "0.1.0"

__all__ = [
    "RunConfig", "load_config",
    "DesaturationEvent", "DesatBiomarkers", "HypoxicBurden",
    "detect_relative", "detect_hard", "desat_biomarkers", "hypoxic_burden",
    "EvaluationReport", "ModelBundle", "load_model", "majority_vote", "nested_cv",
    "FeatureExtractor", "FeatureMatrix", "Window", "build_matrix",
    "make_windows", "model_columns",
    "ManifestError", "load_manifest",
    "DecisionTreeClassifier", "LogisticRegressionGD", "RandomForestClassifier",
    "feature_importance",
    "auroc", "confusion", "rates_from_confusion", "roc_points",
    "median_smooth", "preprocess", "preprocess_signal", "range_filter",
    "CopdLabel", "Demographics", "OximetryRecording", "PsgFeatures",
    "gold_from_fev1",
    "MrmrSelector", "mutual_information", "rank_sum_test",
    "CohortSpec", "SynthProfile", "default_profile", "generate", "make_cohort",
    "plant_log",
]
