"""Ranking metrics (AUROC, average-precision AUCPR), confusion quantities,
and the correct/erroneous-shown threshold sweep."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import MissingProgramCounts, NoPositives, SingleClass

SWEEP_POINTS = 100


@dataclass(frozen=True)
class ScoredSample:
    id: str
    score: float
    label: bool  # True = passed
    programs_correct: Optional[int] = None
    programs_total: Optional[int] = None

    def __post_init__(self):
        if (self.programs_correct is not None and self.programs_total is not None
                and self.programs_correct > self.programs_total):
            raise ValueError("programs_correct exceeds programs_total")


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    shown_correct: int
    shown_erroneous: int


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int
    tpr: float
    fpr: float
    precision: float
    recall: float


def auroc(scored: Sequence[ScoredSample]) -> float:
    """Mann-Whitney AUROC via average ranks; passed/failed score ties count 0.5."""
    pos = [s.score for s in scored if s.label]
    neg = [s.score for s in scored if not s.label]
    if not pos or not neg:
        raise SingleClass("AUROC needs both a passed and a failed label")
    ranked = sorted([(s, 1) for s in pos] + [(s, 0) for s in neg])
    ranks: list[float] = [0.0] * len(ranked)
    i = 0
    while i < len(ranked):
        j = i
        while j < len(ranked) and ranked[j][0] == ranked[i][0]:
            j += 1
        avg_rank = (i + 1 + j) / 2  # 1-based average over the tie group
        for k in range(i, j):
            ranks[k] = avg_rank
        i = j
    rank_sum_pos = sum(r for r, (_, is_pos) in zip(ranks, ranked) if is_pos)
    u = rank_sum_pos - len(pos) * (len(pos) + 1) / 2
    return u / (len(pos) * len(neg))


def aucpr(scored: Sequence[ScoredSample], mode: str = "average-precision") -> float:
    """Area under the precision-recall curve.

    "average-precision" (default) sums precision at each ranked positive over
    the number of positives; "trapezoid" linearly interpolates the PR points.
    Ties are broken by stable input order, descending score.
    """
    n_pos = sum(1 for s in scored if s.label)
    if n_pos == 0:
        raise NoPositives("AUCPR needs at least one passed label")
    ranked = sorted(scored, key=lambda s: -s.score)  # stable: input order on ties

    if mode == "average-precision":
        tp = 0
        total = 0.0
        for rank, sample in enumerate(ranked, start=1):
            if sample.label:
                tp += 1
                total += tp / rank
        return total / n_pos
    if mode == "trapezoid":
        points = [(0.0, 1.0)]  # (recall, precision)
        tp = 0
        for rank, sample in enumerate(ranked, start=1):
            if sample.label:
                tp += 1
            points.append((tp / n_pos, tp / rank))
        area = 0.0
        for (r0, p0), (r1, p1) in zip(points, points[1:]):
            area += (r1 - r0) * (p0 + p1) / 2
        return area
    raise ValueError(f"unknown PR mode: {mode!r}")


def threshold_sweep(scored: Sequence[ScoredSample],
                    points: int = SWEEP_POINTS) -> list[SweepPoint]:
    """Equally spaced thresholds over [min score, max score]; at each t the
    samples with score >= t contribute their correct / erroneous program
    counts. The lowest threshold therefore reproduces indiscriminate showing.
    """
    if not scored:
        raise ValueError("no scored samples")
    for s in scored:
        if s.programs_correct is None or s.programs_total is None:
            raise MissingProgramCounts(s.id)
    lo = min(s.score for s in scored)
    hi = max(s.score for s in scored)
    step = (hi - lo) / (points - 1) if points > 1 else 0.0
    sweep = []
    for k in range(points):
        t = lo + k * step
        correct = sum(s.programs_correct for s in scored if s.score >= t)
        erroneous = sum(s.programs_total - s.programs_correct
                        for s in scored if s.score >= t)
        sweep.append(SweepPoint(threshold=t, shown_correct=correct,
                                shown_erroneous=erroneous))
    return sweep


def confusion(scored: Sequence[ScoredSample], threshold: float) -> Confusion:
    """Counts and rates at one threshold; passed is predicted iff score is
    strictly greater than the threshold. 0/0 ratios come back as NaN."""
    tp = sum(1 for s in scored if s.label and s.score > threshold)
    fp = sum(1 for s in scored if not s.label and s.score > threshold)
    fn = sum(1 for s in scored if s.label and s.score <= threshold)
    tn = sum(1 for s in scored if not s.label and s.score <= threshold)

    def ratio(num: int, den: int) -> float:
        return num / den if den else math.nan

    return Confusion(
        tp=tp, fp=fp, tn=tn, fn=fn,
        tpr=ratio(tp, tp + fn),
        fpr=ratio(fp, fp + tn),
        precision=ratio(tp, tp + fp),
        recall=ratio(tp, tp + fn),
    )
