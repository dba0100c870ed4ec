"""Confidence estimation: mean hybrid similarity over all ordered pairs,
plus exhaustive-grid weight tuning on labeled training data."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .analysis import DEFAULT_SUBTREE_HEIGHT, extract_dataflow, extract_subtrees, parse_cst
from .embeddings import EmbeddingProviderConfig, embed
from .errors import DegenerateLabels, TooFewSamples
from .model import Program, SampleSet, tokenize
from .similarity import (
    SimilarityBreakdown,
    SimilarityWeights,
    sim_dataflow,
    sim_embed,
    sim_hybrid,
    sim_syntax,
    sim_text,
)

GRID_STEP = 0.05


@dataclass(frozen=True)
class ConfidenceReport:
    requirement_id: str
    n: int
    pair_sims: tuple[tuple[Optional[SimilarityBreakdown], ...], ...]
    confidence: float


@dataclass(frozen=True)
class TuningResult:
    weights: SimilarityWeights
    train_auroc: float
    grid_points_evaluated: int


@dataclass(frozen=True)
class ProgramAnalysis:
    """Everything the pairwise similarities need, computed once per program."""

    tokens: object
    subtree_bag: object
    dataflow: object
    embedding: object


def analyze_program(program: Program, provider: EmbeddingProviderConfig,
                    height: int = DEFAULT_SUBTREE_HEIGHT) -> ProgramAnalysis:
    return ProgramAnalysis(
        tokens=tokenize(program),
        subtree_bag=extract_subtrees(parse_cst(program), height),
        dataflow=extract_dataflow(program),
        embedding=embed(program, provider),
    )


def _analyze_all(programs: Sequence[Program], provider: EmbeddingProviderConfig,
                 workers: Optional[int]) -> list[ProgramAnalysis]:
    if workers is not None and workers <= 1:
        return [analyze_program(p, provider) for p in programs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: analyze_program(p, provider), programs))


def pair_breakdown(i: int, j: int, a_i: ProgramAnalysis, a_j: ProgramAnalysis,
                   weights: SimilarityWeights) -> SimilarityBreakdown:
    text = sim_text(a_i.tokens, a_j.tokens)
    syntax = sim_syntax(a_i.subtree_bag, a_j.subtree_bag)
    dataflow = sim_dataflow(a_i.dataflow, a_j.dataflow)
    embedding = sim_embed(a_i.embedding, a_j.embedding)
    hybrid = sim_hybrid(text, syntax, dataflow, embedding, weights)
    return SimilarityBreakdown(i, j, text, syntax, dataflow, embedding, hybrid)


def pairwise_confidence(values: Sequence[float]) -> float:
    """SUM(sim_list) / LEN(sim_list) over the ordered-pair similarities."""
    return sum(values) / len(values)


def estimate_confidence(samples: SampleSet, weights: SimilarityWeights,
                        provider: EmbeddingProviderConfig,
                        workers: Optional[int] = None) -> ConfidenceReport:
    """Mean hybrid similarity over all N*(N-1) ordered pairs of programs.

    Per-program analyses (tokens, subtree bag, dataflow, embedding) are
    computed once and reused across all pairs.
    """
    n = len(samples)
    if n < 2:
        raise TooFewSamples(f"need at least 2 programs, got {n}")
    analyses = _analyze_all(samples.programs, provider, workers)

    matrix: list[list[Optional[SimilarityBreakdown]]] = [[None] * n for _ in range(n)]
    values: list[float] = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            bd = pair_breakdown(i, j, analyses[i], analyses[j], weights)
            matrix[i][j] = bd
            values.append(bd.hybrid)
    return ConfidenceReport(
        requirement_id=samples.requirement_id,
        n=n,
        pair_sims=tuple(tuple(row) for row in matrix),
        confidence=pairwise_confidence(values),
    )


def modality_means(samples: SampleSet, provider: EmbeddingProviderConfig,
                   workers: Optional[int] = None) -> tuple[float, float, float, float]:
    """Per-modality mean over all ordered pairs; the hybrid confidence for any
    weight tuple is just the dot product with these means."""
    n = len(samples)
    if n < 2:
        raise TooFewSamples(f"need at least 2 programs, got {n}")
    analyses = _analyze_all(samples.programs, provider, workers)
    sums = [0.0, 0.0, 0.0, 0.0]
    count = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            sums[0] += sim_text(analyses[i].tokens, analyses[j].tokens)
            sums[1] += sim_syntax(analyses[i].subtree_bag, analyses[j].subtree_bag)
            sums[2] += sim_dataflow(analyses[i].dataflow, analyses[j].dataflow)
            sums[3] += sim_embed(analyses[i].embedding, analyses[j].embedding)
            count += 1
    return tuple(s / count for s in sums)  # type: ignore[return-value]


def weight_grid(step: float = GRID_STEP) -> list[SimilarityWeights]:
    """All non-negative weight 4-tuples on the simplex, in lexicographic order."""
    units = round(1.0 / step)
    grid = []
    for a in range(units + 1):
        for b in range(units + 1 - a):
            for c in range(units + 1 - a - b):
                d = units - a - b - c
                grid.append(SimilarityWeights(a * step, b * step, c * step, d * step))
    return grid


def tune_weights_from_modality_means(
        means: Sequence[tuple[float, float, float, float]],
        labels: Sequence[bool],
        step: float = GRID_STEP) -> TuningResult:
    """Exhaustive simplex grid search maximizing training AUROC.

    Ties go to the lexicographically smallest (alpha, beta, gamma, delta).
    """
    from .evaluation import ScoredSample, auroc

    if len(set(labels)) < 2:
        raise DegenerateLabels("training data contains a single class")
    best: Optional[SimilarityWeights] = None
    best_auroc = -1.0
    grid = weight_grid(step)
    for w in grid:
        wt = w.as_tuple()
        scored = [
            ScoredSample(id=str(k), score=sum(m * x for m, x in zip(mean, wt)),
                         label=label)
            for k, (mean, label) in enumerate(zip(means, labels))
        ]
        score = auroc(scored)
        if score > best_auroc:
            best, best_auroc = w, score
    return TuningResult(weights=best, train_auroc=best_auroc,
                        grid_points_evaluated=len(grid))


def tune_weights(train: Sequence[tuple[SampleSet, bool]],
                 provider: EmbeddingProviderConfig,
                 step: float = GRID_STEP,
                 workers: Optional[int] = None) -> TuningResult:
    """Tune (alpha, beta, gamma, delta) on labeled sample sets.

    Modality similarities are computed once per sample set and re-mixed for
    every grid point.
    """
    if len({label for _, label in train}) < 2:
        raise DegenerateLabels("training data contains a single class")
    means = [modality_means(s, provider, workers) for s, _ in train]
    labels = [label for _, label in train]
    return tune_weights_from_modality_means(means, labels, step)


def save_weights(result: TuningResult, path: str | Path) -> None:
    w = result.weights
    payload = {"alpha": w.alpha, "beta": w.beta, "gamma": w.gamma,
               "delta": w.delta, "train_auroc": result.train_auroc}
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n")


def load_weights(path: str | Path) -> SimilarityWeights:
    data = json.loads(Path(path).read_text())
    return SimilarityWeights(data["alpha"], data["beta"], data["gamma"], data["delta"])
