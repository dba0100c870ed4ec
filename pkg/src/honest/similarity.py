"""The four modality similarities and their weighted hybrid.

All four scores live in [0, 1]. Text, syntax, and dataflow similarity are
asymmetric by construction: the denominator always counts the second
argument's n-grams / subtrees / edges.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .analysis import DataflowGraph, SubtreeBag
from .embeddings import EmbeddingVector, cosine
from .errors import ComponentOutOfRange
from .model import TokenSequence

MAX_NGRAM_ORDER = 4

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class SimilarityWeights:
    alpha: float  # text
    beta: float  # syntax
    gamma: float  # dataflow
    delta: float  # embedding

    def __post_init__(self):
        for w in self.as_tuple():
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weight out of [0, 1]: {w}")
        if abs(sum(self.as_tuple()) - 1.0) > _SUM_TOL:
            raise ValueError("weights must sum to 1")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    @classmethod
    def uniform(cls) -> "SimilarityWeights":
        return cls(0.25, 0.25, 0.25, 0.25)


@dataclass(frozen=True)
class SimilarityBreakdown:
    i: int
    j: int
    text: float
    syntax: float
    dataflow: float
    embedding: float
    hybrid: float


def ngram_counts(tokens: tuple[str, ...], n: int) -> Counter:
    return Counter(tuple(tokens[k:k + n]) for k in range(len(tokens) - n + 1))


def sim_text(seq_i: TokenSequence, seq_j: TokenSequence) -> float:
    """Geometric-mean n-gram overlap ratio (orders 1..4), clipped counts.

    Orders where seq_j has no n-grams are excluded and the remaining log
    weights renormalized; a single included order with zero overlap forces
    0. Two empty sequences score 1.
    """
    ti, tj = seq_i.tokens, seq_j.tokens
    logs = []
    for n in range(1, MAX_NGRAM_ORDER + 1):
        total_j = len(tj) - n + 1
        if total_j <= 0:
            continue
        cj = ngram_counts(tj, n)
        ci = ngram_counts(ti, n)
        overlap = sum(min(ci[g], c) for g, c in cj.items())
        if overlap == 0:
            return 0.0
        logs.append(math.log(overlap / total_j))
    if not logs:
        return 1.0 if len(ti) == 0 else 0.0
    return min(1.0, math.exp(sum(logs) / len(logs)))


def _clipped_ratio(counts_i: Counter, counts_j: Counter) -> float:
    total_j = sum(counts_j.values())
    if total_j == 0:
        return 1.0 if sum(counts_i.values()) == 0 else 0.0
    overlap = sum(min(counts_i[k], c) for k, c in counts_j.items())
    return overlap / total_j


def sim_syntax(bag_i: SubtreeBag, bag_j: SubtreeBag) -> float:
    """Clipped-multiset subtree overlap over bag_j's size."""
    return _clipped_ratio(bag_i.entries, bag_j.entries)


def sim_dataflow(dfg_i: DataflowGraph, dfg_j: DataflowGraph) -> float:
    """Clipped-multiset def-use edge overlap over dfg_j's size."""
    return _clipped_ratio(dfg_i.edges, dfg_j.edges)


def sim_embed(e_i: EmbeddingVector, e_j: EmbeddingVector) -> float:
    return cosine(e_i, e_j)


def sim_hybrid(text: float, syntax: float, dataflow: float, embedding: float,
               weights: SimilarityWeights) -> float:
    for name, value in (("text", text), ("syntax", syntax),
                        ("dataflow", dataflow), ("embedding", embedding)):
        if not 0.0 <= value <= 1.0:
            raise ComponentOutOfRange(f"{name} similarity out of [0, 1]: {value}")
    mixed = (weights.alpha * text + weights.beta * syntax
             + weights.gamma * dataflow + weights.delta * embedding)
    return min(1.0, max(0.0, mixed))
