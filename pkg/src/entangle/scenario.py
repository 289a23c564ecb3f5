"""Six-dimension strategic scenario profiles and their text encoding.

A profile scores a scenario on six capability dimensions (each 0..5 by
default). The default encoder renders the whole profile as one composite
text and embeds it once; an alternative encoder embeds each dimension name
separately and averages the vectors with the dimension values as weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import EmbeddingProvider, SemanticVector
from .errors import InvariantError, LibraryError

#: (field name, rendered dimension name), in rendering order.
DIMENSIONS: tuple[tuple[str, str], ...] = (
    ("offensive_strength", "Offensive Strength"),
    ("defensive_strength", "Defensive Strength"),
    ("relational_capacity", "Relational Capacity"),
    ("potential_energy", "Potential Energy"),
    ("temporal_availability", "Temporal Availability"),
    ("contextual_fit", "Contextual Fit"),
)


@dataclass(frozen=True)
class QualifierBuckets:
    """Value-to-qualifier mapping used when rendering a profile to text.

    Edges are upper bounds: value < low_below -> "low",
    value < moderate_below -> "moderate", value < high_below -> "high",
    anything else -> "very high".
    """

    low_below: float = 2.0
    moderate_below: float = 3.5
    high_below: float = 4.5

    def qualify(self, value: float) -> str:
        if value < self.low_below:
            return "low"
        if value < self.moderate_below:
            return "moderate"
        if value < self.high_below:
            return "high"
        return "very high"


DEFAULT_BUCKETS = QualifierBuckets()


@dataclass(frozen=True)
class SixCProfile:
    """A scenario profile: six dimension scores, a label, optional context.

    Values outside [0, scale_max] are rejected at construction, never
    clamped.
    """

    label: str
    offensive_strength: float
    defensive_strength: float
    relational_capacity: float
    potential_energy: float
    temporal_availability: float
    contextual_fit: float
    narrative_context: str | None = None
    scale_max: float = 5.0

    def __post_init__(self) -> None:
        if not self.label.strip():
            raise InvariantError("profile label must be non-empty")
        if self.scale_max <= 0:
            raise InvariantError("scale_max must be positive")
        for field_name, display in DIMENSIONS:
            value = getattr(self, field_name)
            if not isinstance(value, (int, float)) or not np.isfinite(value):
                raise InvariantError(f"{display} must be a finite number")
            if value < 0 or value > self.scale_max:
                raise InvariantError(
                    f"{display} = {value} outside [0, {self.scale_max:g}]")

    def values(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name, _ in DIMENSIONS)

    def to_record(self) -> dict:
        record: dict = {"label": self.label}
        record.update({name: float(getattr(self, name)) for name, _ in DIMENSIONS})
        if self.narrative_context is not None:
            record["narrative_context"] = self.narrative_context
        if self.scale_max != 5.0:
            record["scale_max"] = self.scale_max
        return record


def profile_from_record(record: dict) -> SixCProfile:
    if not isinstance(record, dict):
        raise InvariantError("scenario record must be an object")
    missing = [name for name, _ in DIMENSIONS if name not in record]
    if missing:
        raise InvariantError(f"scenario record missing fields {missing}")
    if "label" not in record:
        raise InvariantError("scenario record missing field 'label'")
    return SixCProfile(
        label=str(record["label"]),
        narrative_context=record.get("narrative_context"),
        scale_max=float(record.get("scale_max", 5.0)),
        **{name: float(record[name]) for name, _ in DIMENSIONS},
    )


def load_profile(path: str | Path) -> SixCProfile:
    """Load a scenario profile from its JSON file format."""
    path = Path(path)
    if not path.exists():
        raise LibraryError(f"scenario file not found: {path}")
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LibraryError(f"cannot parse {path}: {exc}") from exc
    try:
        return profile_from_record(record)
    except InvariantError as exc:
        raise LibraryError(f"{path}: {exc}") from exc


def render_scenario_text(profile: SixCProfile,
                         buckets: QualifierBuckets = DEFAULT_BUCKETS) -> str:
    """Deterministic one-clause-per-dimension rendering of a profile.

    Each clause reads ``"{name} is {qualifier} ({value} of {scale})"`` with
    the value at two decimals; the optional narrative context is appended.
    Distinct profiles (at two-decimal resolution) yield distinct texts.
    """
    clauses = []
    for field_name, display in DIMENSIONS:
        value = float(getattr(profile, field_name))
        clauses.append(
            f"{display} is {buckets.qualify(value)} ({value:.2f} of {profile.scale_max:g})")
    text = ". ".join(clauses) + "."
    if profile.narrative_context:
        text = f"{text} {profile.narrative_context.strip()}"
    return text


def embed_scenario(profile: SixCProfile, provider: EmbeddingProvider,
                   mode: str = "composite",
                   buckets: QualifierBuckets = DEFAULT_BUCKETS) -> SemanticVector:
    """Encode a profile into the shared semantic space.

    ``composite`` (default) embeds the full rendered text once.
    ``weighted_average`` embeds each dimension name separately and averages
    the vectors with the dimension values as weights; an all-zero profile is
    degenerate in this mode and rejected.
    """
    if mode == "composite":
        return provider.embed(render_scenario_text(profile, buckets))
    if mode == "weighted_average":
        weights = np.array(profile.values(), dtype=np.float64)
        total = float(weights.sum())
        if total <= 0.0:
            raise InvariantError("weighted_average encoding needs at least one positive value")
        vectors = [provider.embed(display) for _, display in DIMENSIONS]
        stacked = np.stack([v.values for v in vectors])
        return SemanticVector((weights @ stacked) / total)
    raise InvariantError(f"unknown scenario encoding mode: {mode!r}")


def bundled_profile_path() -> Path:
    """Path of the bundled case-study scenario profile."""
    from importlib import resources

    return Path(str(resources.files("entangle").joinpath("data/meta_profile.json")))


def load_bundled_profile() -> SixCProfile:
    return load_profile(bundled_profile_path())
