"""Coverage, coherence, and novelty scoring with comparison and radar exports.

Coverage asks how many input axioms are semantically reflected in the
synthesis: an axiom counts as covered when its best cosine against any
synthesis sentence clears the threshold. Coherence is the mean cosine over
unordered sentence pairs, reported as not-applicable for texts shorter than
the configured minimum. Novelty is one minus the aggregated similarity
between the whole synthesis and its inputs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from statistics import mean

from .axioms import Axiom
from .embedding import EmbeddingProvider, cosine
from .errors import InvariantError

SENTENCE_RULES = ("default_v1",)

_ABBREVIATIONS = {"e.g", "i.e", "etc", "vs", "cf", "al", "mr", "mrs", "ms",
                  "dr", "prof", "st", "no", "fig", "approx"}

_BOUNDARY = re.compile(r"([.!?]+)(\s+)")
_TRAILING_TOKEN = re.compile(r"[A-Za-z][A-Za-z.]*$")


@dataclass(frozen=True)
class EvaluationConfig:
    """Metric settings; comparisons require both reports to share one."""

    coverage_threshold: float = 0.4
    min_sentences_for_coherence: int = 2
    sentence_splitter: str = "default_v1"
    coverage_mode: str = "max_sentence"
    novelty_aggregation: str = "mean"

    def __post_init__(self) -> None:
        if not (0.0 < self.coverage_threshold < 1.0):
            raise InvariantError(
                f"coverage threshold must lie in (0, 1), got {self.coverage_threshold}")
        if self.min_sentences_for_coherence < 2:
            raise InvariantError("min_sentences_for_coherence must be >= 2")
        if self.sentence_splitter not in SENTENCE_RULES:
            raise InvariantError(
                f"unknown sentence splitter rule: {self.sentence_splitter!r}")
        if self.coverage_mode not in ("max_sentence", "whole_text"):
            raise InvariantError(f"unknown coverage mode: {self.coverage_mode!r}")
        if self.novelty_aggregation not in ("mean", "max"):
            raise InvariantError(
                f"unknown novelty aggregation: {self.novelty_aggregation!r}")

    def to_record(self) -> dict:
        return {
            "coverage_threshold": self.coverage_threshold,
            "min_sentences_for_coherence": self.min_sentences_for_coherence,
            "sentence_splitter": self.sentence_splitter,
            "coverage_mode": self.coverage_mode,
            "novelty_aggregation": self.novelty_aggregation,
        }


def evaluation_config_from_record(record: dict) -> EvaluationConfig:
    return EvaluationConfig(**{key: record[key]
                               for key in EvaluationConfig().to_record()
                               if key in record})


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation followed by whitespace.

    A fixed abbreviation list (e.g., i.e., etc., vs., ...) guards against
    false boundaries; empty fragments are dropped.
    """
    sentences = []
    start = 0
    for match in _BOUNDARY.finditer(text):
        token = _TRAILING_TOKEN.search(text[start:match.start()])
        if token and token.group(0).lower().lstrip(".") in _ABBREVIATIONS:
            continue
        sentence = text[start:match.end(1)].strip()
        if sentence:
            sentences.append(sentence)
        start = match.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class EvaluationReport:
    """The metric triple plus per-axiom coverage detail.

    ``coverage`` and ``coherence`` may be None, meaning not-applicable:
    coherence when the text has fewer sentences than the configured minimum,
    coverage only on reports transcribed without their input axioms (the
    evaluate path always computes it). ``human_depth`` is reserved for
    manually entered scores and never computed.
    """

    coverage: float | None
    coherence: float | None
    novelty: float
    per_axiom: tuple[tuple[str, float, bool], ...]
    variant_label: str = ""
    config: EvaluationConfig = field(default_factory=EvaluationConfig)
    human_depth: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_axiom",
                           tuple((str(a), float(s), bool(c))
                                 for a, s, c in self.per_axiom))
        if self.coverage is not None:
            if not (-1e-9 <= self.coverage <= 1.0 + 1e-9):
                raise InvariantError(f"coverage {self.coverage} outside [0, 1]")
            if self.per_axiom:
                covered = sum(1 for _, _, flag in self.per_axiom if flag)
                expected = covered / len(self.per_axiom)
                if abs(self.coverage - expected) > 1e-9:
                    raise InvariantError(
                        f"coverage {self.coverage} != covered/total {expected}")
        if self.coherence is not None and not (-1.0 - 1e-9 <= self.coherence <= 1.0 + 1e-9):
            raise InvariantError(f"coherence {self.coherence} outside [-1, 1]")
        if not (-1e-9 <= self.novelty <= 2.0 + 1e-9):
            raise InvariantError(f"novelty {self.novelty} outside [0, 2]")

    def to_record(self) -> dict:
        return {
            "variant_label": self.variant_label,
            "coverage": self.coverage,
            "coherence": self.coherence,
            "novelty": self.novelty,
            "per_axiom": [{"axiom_id": a, "best_similarity": s, "covered": c}
                          for a, s, c in self.per_axiom],
            "config": self.config.to_record(),
            "human_depth": self.human_depth,
        }


def report_from_record(record: dict) -> EvaluationReport:
    try:
        per_axiom = tuple((row["axiom_id"], row["best_similarity"], row["covered"])
                          for row in record.get("per_axiom", []))
        return EvaluationReport(
            coverage=record["coverage"],
            coherence=record["coherence"],
            novelty=record["novelty"],
            per_axiom=per_axiom,
            variant_label=record.get("variant_label", ""),
            config=evaluation_config_from_record(record.get("config", {})),
            human_depth=record.get("human_depth"),
        )
    except (KeyError, TypeError) as exc:
        raise InvariantError(f"malformed evaluation report record: {exc}") from exc


def coverage(synthesis: str, inputs: list[Axiom], provider: EmbeddingProvider,
             cfg: EvaluationConfig | None = None) -> tuple[float, list[tuple[str, float, bool]]]:
    """Score = covered / total; an axiom is covered when its best sentence
    similarity reaches the threshold.

    Empty synthesis text yields zero similarities and a zero score.
    """
    cfg = cfg or EvaluationConfig()
    if not inputs:
        raise InvariantError("coverage requires at least one input axiom")
    sentences = split_sentences(synthesis)
    sentence_vecs = [provider.embed(s) for s in sentences]
    whole_vec = None
    if cfg.coverage_mode == "whole_text" and synthesis.strip():
        whole_vec = provider.embed(synthesis.strip())
    detail = []
    for axiom in inputs:
        axiom_vec = provider.embed(axiom.full_text)
        if cfg.coverage_mode == "whole_text":
            best = cosine(axiom_vec, whole_vec) if whole_vec is not None else 0.0
        else:
            best = max((cosine(axiom_vec, vec) for vec in sentence_vecs),
                       default=0.0)
        detail.append((axiom.id, best, best >= cfg.coverage_threshold))
    score = sum(1 for _, _, flag in detail if flag) / len(detail)
    return score, detail


def coherence(synthesis: str, provider: EmbeddingProvider,
              cfg: EvaluationConfig | None = None) -> float | None:
    """Mean cosine over unordered sentence pairs; None below the sentence
    minimum."""
    cfg = cfg or EvaluationConfig()
    sentences = split_sentences(synthesis)
    if len(sentences) < cfg.min_sentences_for_coherence:
        return None
    vectors = [provider.embed(s) for s in sentences]
    pairs = [cosine(vectors[i], vectors[j])
             for i in range(len(vectors)) for j in range(i + 1, len(vectors))]
    return mean(pairs)


def novelty(synthesis: str, inputs: list[Axiom], provider: EmbeddingProvider,
            cfg: EvaluationConfig | None = None) -> float:
    """1 - aggregated similarity between the whole synthesis and its inputs,
    clamped to [0, 2]. Empty text counts as maximally divergent (1.0)."""
    cfg = cfg or EvaluationConfig()
    if not inputs:
        raise InvariantError("novelty requires at least one input axiom")
    text = synthesis.strip()
    if not text:
        return 1.0
    whole_vec = provider.embed(text)
    similarities = [cosine(whole_vec, provider.embed(axiom.full_text))
                    for axiom in inputs]
    if cfg.novelty_aggregation == "max":
        aggregated = max(similarities)
    else:
        aggregated = mean(similarities)
    return max(0.0, min(2.0, 1.0 - aggregated))


def evaluate(synthesis: str, inputs: list[Axiom], provider: EmbeddingProvider,
             cfg: EvaluationConfig | None = None,
             variant_label: str = "") -> EvaluationReport:
    """Assemble the full report for one synthesis variant."""
    cfg = cfg or EvaluationConfig()
    score, detail = coverage(synthesis, inputs, provider, cfg)
    return EvaluationReport(
        coverage=score,
        coherence=coherence(synthesis, provider, cfg),
        novelty=novelty(synthesis, inputs, provider, cfg),
        per_axiom=tuple(detail),
        variant_label=variant_label,
        config=cfg,
    )


_METRICS = ("coverage", "coherence", "novelty")


def compare(entangled: EvaluationReport, baseline: EvaluationReport) -> dict:
    """Per-metric deltas and percentage improvements of entangled over
    baseline; not-applicable values propagate as None."""
    if entangled.config != baseline.config:
        raise InvariantError("cannot compare reports with different metric configs")
    metrics = {}
    for name in _METRICS:
        a = getattr(entangled, name)
        b = getattr(baseline, name)
        delta = None if a is None or b is None else a - b
        pct = None
        if delta is not None and b != 0.0:
            pct = delta / abs(b) * 100.0
        metrics[name] = {"entangled": a, "baseline": b,
                         "delta": delta, "pct_improvement": pct}
    return {
        "entangled": entangled.variant_label,
        "baseline": baseline.variant_label,
        "metrics": metrics,
    }


def radar_export(reports: list[EvaluationReport]) -> dict:
    """Radar-chart record: one series per report, not-applicable as null."""
    if not reports:
        raise InvariantError("radar export requires at least one report")
    return {
        "axes": list(_METRICS),
        "series": [{"label": report.variant_label,
                    "values": [report.coverage, report.coherence, report.novelty]}
                   for report in reports],
    }
