"""Non-neural baseline confidence estimators: token-probability pooling,
yes/no self-asking, and K-nearest-neighbor search over training requirements
(BM25 or embedding cosine)."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .client import (
    CODE_JUDGE_PROMPT,
    REQUIREMENT_JUDGE_PROMPT,
    GenerationRecord,
    SamplingConfig,
    ask_yes_no,
)
from .embeddings import EmbeddingProviderConfig, EmbeddingVector, cosine, embed_text
from .errors import EmptyCorpus, EmptyInput, MissingLogprobs, SingleClass, UnknownDocument
from .model import Program

BM25_K1 = 1.2
BM25_B = 0.75

K_SWEEP = (1, 3, 5, 10, 20)


def _require_probs(records: Sequence[GenerationRecord]) -> None:
    if not records:
        raise EmptyInput("no generation records")
    for r in records:
        if not r.token_probs:
            raise MissingLogprobs("record without token probabilities")


def avg_prob(records: Sequence[GenerationRecord]) -> float:
    """Mean of all token probabilities pooled across records."""
    _require_probs(records)
    probs = [p for r in records for p in r.token_probs]
    return sum(probs) / len(probs)


def product_prob(records: Sequence[GenerationRecord]) -> float:
    """Per-record probability product (log space), averaged across records."""
    _require_probs(records)
    products = [math.exp(sum(math.log(p) for p in r.token_probs)) for r in records]
    return sum(products) / len(products)


def self_ask_code(requirement: str, programs: Sequence[Program],
                  config: SamplingConfig) -> float:
    """Mean Yes-probability over per-program correctness judgments."""
    if not programs:
        raise EmptyInput("no programs to judge")
    scores = [
        ask_yes_no(CODE_JUDGE_PROMPT.format(requirement=requirement,
                                            program=p.source), config)
        for p in programs
    ]
    return sum(scores) / len(scores)


def self_ask_requirement(requirement: str, config: SamplingConfig) -> float:
    return ask_yes_no(REQUIREMENT_JUDGE_PROMPT.format(requirement=requirement),
                      config)


def text_tokens(text: str) -> list[str]:
    """Word tokenization used for requirement retrieval."""
    return re.findall(r"\w+", text.lower())


class KnnMetric(Enum):
    BM25 = "bm25"
    EMBEDDING = "embedding"


@dataclass(frozen=True)
class KnnConfig:
    k: int
    metric: KnnMetric = KnnMetric.BM25

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass
class Bm25Index:
    """Okapi BM25 over tokenized requirements with passed/failed labels."""

    documents: list[list[str]] = field(default_factory=list)
    labels: list[bool] = field(default_factory=list)
    k1: float = BM25_K1
    b: float = BM25_B

    def __post_init__(self):
        self._term_freqs = [Counter(d) for d in self.documents]
        self._doc_lens = [len(d) for d in self.documents]
        df: Counter = Counter()
        for tf in self._term_freqs:
            for term in tf:
                df[term] += 1
        self.doc_freqs = dict(df)
        self.avg_doc_len = (sum(self._doc_lens) / len(self.documents)
                            if self.documents else 0.0)

    @classmethod
    def build(cls, requirements: Sequence[str], labels: Sequence[bool],
              k1: float = BM25_K1, b: float = BM25_B) -> "Bm25Index":
        return cls(documents=[text_tokens(r) for r in requirements],
                   labels=list(labels), k1=k1, b=b)

    def __len__(self) -> int:
        return len(self.documents)

    def _idf(self, term: str) -> float:
        df = self.doc_freqs.get(term, 0)
        return math.log(1.0 + (len(self.documents) - df + 0.5) / (df + 0.5))

    def score(self, query_tokens: Sequence[str], doc_id: int) -> float:
        if not 0 <= doc_id < len(self.documents):
            raise UnknownDocument(str(doc_id))
        tf = self._term_freqs[doc_id]
        length_norm = self.k1 * (1.0 - self.b
                                 + self.b * self._doc_lens[doc_id]
                                 / (self.avg_doc_len or 1.0))
        total = 0.0
        for term in query_tokens:
            freq = tf.get(term, 0)
            if freq == 0:
                continue
            total += self._idf(term) * freq * (self.k1 + 1) / (freq + length_norm)
        return total


def bm25_score(query_tokens: Sequence[str], index: Bm25Index, doc_id: int) -> float:
    return index.score(query_tokens, doc_id)


@dataclass
class EmbeddingCorpus:
    """Pre-embedded requirements with labels for embedding K-NNS."""

    vectors: list[EmbeddingVector]
    labels: list[bool]
    provider: EmbeddingProviderConfig

    @classmethod
    def build(cls, requirements: Sequence[str], labels: Sequence[bool],
              provider: EmbeddingProviderConfig) -> "EmbeddingCorpus":
        return cls(vectors=[embed_text(r, provider) for r in requirements],
                   labels=list(labels), provider=provider)

    def __len__(self) -> int:
        return len(self.vectors)


def knn_confidence(requirement: str, index: Bm25Index | EmbeddingCorpus,
                   config: KnnConfig) -> float:
    """Fraction of passed labels among the k most similar stored requirements.

    Score ties are broken by corpus insertion order; k is clamped to the
    corpus size so tiny corpora never error.
    """
    if len(index) == 0:
        raise EmptyCorpus("no stored requirements")
    if isinstance(index, Bm25Index):
        query = text_tokens(requirement)
        scores = [index.score(query, i) for i in range(len(index))]
        labels = index.labels
    else:
        query_vec = embed_text(requirement, index.provider)
        scores = [cosine(query_vec, v) for v in index.vectors]
        labels = index.labels
    k = min(config.k, len(index))
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    retrieved = order[:k]
    return sum(1 for i in retrieved if labels[i]) / k


def tune_k(train_queries: Sequence[str], train_labels: Sequence[bool],
           index: Bm25Index | EmbeddingCorpus,
           metric: KnnMetric,
           sweep: Sequence[int] = K_SWEEP) -> int:
    """Pick k from the sweep by training AUROC, smallest k on ties."""
    from .evaluation import ScoredSample, auroc

    best_k, best_score = sweep[0], -1.0
    for k in sweep:
        cfg = KnnConfig(k=k, metric=metric)
        scored = [
            ScoredSample(id=str(i),
                         score=knn_confidence(q, index, cfg),
                         label=label)
            for i, (q, label) in enumerate(zip(train_queries, train_labels))
        ]
        try:
            score = auroc(scored)
        except SingleClass:
            score = 0.5
        if score > best_score:
            best_k, best_score = k, score
    return best_k
