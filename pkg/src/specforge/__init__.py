"""Citation-normalized territorial scientific-specialization analytics."""

__version__ = "0.1.0"

from .config import BandConfig, RunConfig
from .corpus import Corpus, load_corpus, territories_of, validate_corpus
from .normalize import build_strata, compute_aii, compute_all_impacts
from .pipeline import run_pipeline
from .specialization import (
    SpecializationReport,
    activity_index,
    build_report,
    label_of,
    rsi,
    ssi,
    ssi_from_ratio,
)
from .strength import StrengthMatrix, build_strength, national_share, strength_share
from .synth import SynthSpec, generate, oracle_pipeline

__all__ = [
    "__version__",
    "BandConfig",
    "RunConfig",
    "Corpus",
    "load_corpus",
    "territories_of",
    "validate_corpus",
    "build_strata",
    "compute_aii",
    "compute_all_impacts",
    "StrengthMatrix",
    "build_strength",
    "strength_share",
    "national_share",
    "SpecializationReport",
    "build_report",
    "ssi",
    "ssi_from_ratio",
    "activity_index",
    "rsi",
    "label_of",
    "run_pipeline",
    "SynthSpec",
    "generate",
    "oracle_pipeline",
]
