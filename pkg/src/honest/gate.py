"""Show/refuse gating on a confidence score."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .confidence import ConfidenceReport
from .errors import IdMismatch
from .model import Program, SampleSet

DEFAULT_REFUSAL_MESSAGE = "Sorry, I cannot solve this requirement."


class Verdict(Enum):
    SHOW = "show"
    REFUSE = "refuse"


@dataclass(frozen=True)
class GateDecision:
    requirement_id: str
    verdict: Verdict
    confidence: float
    threshold: float
    programs: tuple[Program, ...] = ()
    message: str = ""


def decide(report: ConfidenceReport, samples: SampleSet, threshold: float,
           refusal_message: str = DEFAULT_REFUSAL_MESSAGE) -> GateDecision:
    """Show all N sampled programs iff confidence is strictly greater than the
    threshold; otherwise refuse with the configured message. Equality refuses
    (conservative tie-break)."""
    if report.requirement_id != samples.requirement_id:
        raise IdMismatch(f"{report.requirement_id!r} vs {samples.requirement_id!r}")
    if report.confidence > threshold:
        return GateDecision(
            requirement_id=report.requirement_id,
            verdict=Verdict.SHOW,
            confidence=report.confidence,
            threshold=threshold,
            programs=samples.programs,
        )
    return GateDecision(
        requirement_id=report.requirement_id,
        verdict=Verdict.REFUSE,
        confidence=report.confidence,
        threshold=threshold,
        message=refusal_message,
    )


def decision_to_json(decision: GateDecision) -> str:
    payload = {
        "requirement_id": decision.requirement_id,
        "verdict": decision.verdict.value,
        "confidence": decision.confidence,
        "threshold": decision.threshold,
        "programs": [p.source for p in decision.programs] or None,
        "message": decision.message or None,
    }
    return json.dumps(payload, sort_keys=True)
