"""Selective code generation: estimate an LLM's confidence in a requirement
from the multi-modal similarity of N sampled programs, gate whether code is
shown, and evaluate gating quality against labeled benchmarks."""

from .model import Language, Origin, Program, SampleSet, TokenSequence, tokenize
from .similarity import SimilarityBreakdown, SimilarityWeights
from .confidence import ConfidenceReport, TuningResult, estimate_confidence, tune_weights
from .gate import DEFAULT_REFUSAL_MESSAGE, GateDecision, Verdict, decide

__all__ = [
    "Language",
    "Origin",
    "Program",
    "SampleSet",
    "TokenSequence",
    "tokenize",
    "SimilarityBreakdown",
    "SimilarityWeights",
    "ConfidenceReport",
    "TuningResult",
    "estimate_confidence",
    "tune_weights",
    "GateDecision",
    "Verdict",
    "decide",
    "DEFAULT_REFUSAL_MESSAGE",
]

__version__ = "0.1.0"
