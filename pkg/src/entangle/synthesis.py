"""Framed prompt construction, pluggable narrative generation, and the
rule-ranking baseline.

The entangled path renders a prompt from a scenario, the selected heuristics
with their activations, and the interference sub-matrix over the selection,
then asks a text-generation provider for a single narrative. The baseline
path selects the top activations and fills a fixed concatenation template.
Both paths run under one GenerationConfig so comparisons stay fair.
"""

from __future__ import annotations

import logging
import math
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import requests

from .axioms import Axiom, AxiomLibrary
from .embedding import EmbeddingProvider
from .errors import GenerationError, InvariantError, ProviderError, ProviderTimeoutError
from .interference import ActivationSet, KappaConfig, build_interference_matrix, compute_activations
from .scenario import SixCProfile, embed_scenario, render_scenario_text

logger = logging.getLogger(__name__)

LLM_URL_ENV = "ENTANGLE_LLM_URL"
LLM_KEY_ENV = "ENTANGLE_LLM_KEY"
LLM_MODEL_ENV = "ENTANGLE_LLM_MODEL"

# Prompt length stays bounded because the matrix section grows quadratically.
SELECTION_CAP = 16

BASELINE_TEMPLATE_HEAD = "For this scenario, apply the following strategic principles: "

OUTPUT_CONTRACT = ("Output contract: write one cohesive strategic narrative in "
                   "flowing prose. Do not enumerate rules or return a list; "
                   "integrate every heuristic into a single argument.")


class FramingKind(str, Enum):
    DOMINANT = "dominant"
    CONTRARIAN = "contrarian"
    MINIMALIST = "minimalist"


def parse_framing_kind(name: str) -> FramingKind:
    normalized = name.strip().lower()
    for kind in FramingKind:
        if kind.value == normalized:
            return kind
    raise InvariantError(f"unknown framing kind: {name!r} (field: framing)")


def _load_template_file(template_id: str) -> str:
    path = resources.files("entangle").joinpath(f"templates/{template_id}.txt")
    try:
        return path.read_text(encoding="utf-8").strip()
    except FileNotFoundError:
        raise InvariantError(f"no template registered under id {template_id!r}") from None


_TEMPLATE_TEXTS: dict[str, str] = {}
_KIND_TO_TEMPLATE: dict[FramingKind, str] = {
    FramingKind.DOMINANT: "framing_dominant_v1",
    FramingKind.CONTRARIAN: "framing_contrarian_v1",
    FramingKind.MINIMALIST: "framing_minimalist_v1",
}


def template_text(template_id: str) -> str:
    if template_id not in _TEMPLATE_TEXTS:
        _TEMPLATE_TEXTS[template_id] = _load_template_file(template_id)
    return _TEMPLATE_TEXTS[template_id]


def register_framing(kind: FramingKind, template_id: str, text: str) -> None:
    """Swap in a replacement directive template for one framing kind.

    Each kind maps to exactly one template at any time.
    """
    if not text.strip():
        raise InvariantError("framing template text must be non-empty")
    _TEMPLATE_TEXTS[template_id] = text.strip()
    _KIND_TO_TEMPLATE[FramingKind(kind)] = template_id


@dataclass(frozen=True)
class Framing:
    """A rhetorical mode plus the directive template that realizes it."""

    kind: FramingKind
    template_id: str = ""

    def __post_init__(self) -> None:
        kind = self.kind
        if isinstance(kind, str) and not isinstance(kind, FramingKind):
            kind = parse_framing_kind(kind)
            object.__setattr__(self, "kind", kind)
        if not self.template_id:
            object.__setattr__(self, "template_id", _KIND_TO_TEMPLATE[kind])

    @property
    def directive(self) -> str:
        return template_text(self.template_id)

    def to_record(self) -> dict:
        return {"kind": self.kind.value, "template_id": self.template_id}


def framing_for(kind: FramingKind | str) -> Framing:
    if isinstance(kind, str):
        kind = parse_framing_kind(kind)
    return Framing(kind=kind)


def default_system_message() -> str:
    return template_text("system_v1")


@dataclass(frozen=True)
class GenerationConfig:
    """Settings shared verbatim by entangled and baseline generation."""

    temperature: float = 0.7
    max_tokens: int = 512
    system_message: str = field(default_factory=default_system_message)
    provider_kind: str = "deterministic_mock"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.temperature) and self.temperature >= 0.0):
            raise InvariantError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_tokens <= 0:
            raise InvariantError(f"max_tokens must be positive, got {self.max_tokens}")
        if self.provider_kind not in ("remote", "deterministic_mock"):
            raise InvariantError(f"unknown generation provider kind: {self.provider_kind!r}")

    def to_record(self) -> dict:
        return {
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "system_message": self.system_message,
            "provider_kind": self.provider_kind,
        }


@dataclass(frozen=True)
class SynthesisRequest:
    """Everything needed to rebuild a prompt byte for byte.

    ``selected`` is sorted by descending alpha with id tiebreak, and
    ``matrix_slice`` is the row-major flattened interference sub-matrix over
    the selected axioms in that order. ``framing`` is None on the baseline
    path, which uses the concatenation template instead of a directive.
    """

    scenario: SixCProfile
    selected: tuple[tuple[Axiom, float], ...]
    matrix_slice: tuple[float, ...]
    framing: Framing | None
    top_n: int = 3
    generation: GenerationConfig = field(default_factory=GenerationConfig)

    def __post_init__(self) -> None:
        selected = tuple((axiom, float(alpha)) for axiom, alpha in self.selected)
        object.__setattr__(self, "selected", selected)
        object.__setattr__(self, "matrix_slice",
                           tuple(float(v) for v in self.matrix_slice))
        if not selected:
            raise InvariantError("selected heuristics must be non-empty")
        if len(selected) > SELECTION_CAP:
            raise InvariantError(
                f"selection of {len(selected)} exceeds the cap of {SELECTION_CAP}")
        keys = [(-alpha, axiom.id) for axiom, alpha in selected]
        if keys != sorted(keys):
            raise InvariantError("selected heuristics must be sorted by (-alpha, id)")
        if len(self.matrix_slice) != len(selected) ** 2:
            raise InvariantError(
                f"matrix_slice length {len(self.matrix_slice)} != |selected|^2 "
                f"= {len(selected) ** 2}")
        for value in self.matrix_slice:
            if not math.isfinite(value):
                raise InvariantError("matrix_slice entries must be finite")
        if self.top_n < 1:
            raise InvariantError(f"top_n must be >= 1, got {self.top_n}")

    @property
    def selected_ids(self) -> tuple[str, ...]:
        return tuple(axiom.id for axiom, _ in self.selected)

    def matrix_rows(self) -> list[str]:
        """Matrix section lines: each row labeled by its axiom id, two decimals."""
        n = len(self.selected)
        rows = []
        for r in range(n):
            cells = " ".join(f"{self.matrix_slice[r * n + c]:.2f}" for c in range(n))
            rows.append(f"{self.selected_ids[r]}: {cells}")
        return rows

    def to_record(self) -> dict:
        return {
            "scenario": self.scenario.to_record(),
            "selected": [{"axiom": axiom.to_record(), "alpha": alpha}
                         for axiom, alpha in self.selected],
            "matrix_slice": list(self.matrix_slice),
            "framing": self.framing.to_record() if self.framing else None,
            "top_n": self.top_n,
            "generation": self.generation.to_record(),
        }


@dataclass(frozen=True)
class SynthesisResult:
    narrative: str
    mode: str
    request_echo: SynthesisRequest
    provider_metadata: dict
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("entangled", "baseline"):
            raise InvariantError(f"unknown synthesis mode: {self.mode!r}")
        if not self.narrative.strip():
            raise InvariantError("narrative must be non-empty")

    def to_record(self) -> dict:
        return {
            "narrative": self.narrative,
            "mode": self.mode,
            "request_echo": self.request_echo.to_record(),
            "provider_metadata": dict(self.provider_metadata),
            "warnings": list(self.warnings),
        }


def select_heuristics(activations: ActivationSet, library: AxiomLibrary,
                      top_n: int | None = None,
                      threshold: float | None = None) -> list[tuple[Axiom, float]]:
    """Pick heuristics either as the top-n activations or by a floor on alpha.

    Exactly one selector must be given. Top-n clamps to the library size with
    a logged warning; threshold mode may legitimately select nothing.
    """
    if top_n is None and threshold is None:
        raise InvariantError("provide top_n or threshold to select heuristics")
    if top_n is not None and threshold is not None:
        raise InvariantError("top_n and threshold are mutually exclusive selectors")
    if top_n is not None:
        if top_n < 1:
            raise InvariantError(f"top_n must be >= 1, got {top_n}")
        if top_n > len(activations.entries):
            logger.warning("top_n=%d exceeds library size %d; clamped",
                           top_n, len(activations.entries))
            top_n = len(activations.entries)
        chosen = activations.top(top_n)
    else:
        chosen = tuple((axiom_id, alpha) for axiom_id, alpha in activations.entries
                       if alpha >= threshold)
    return [(library.get(axiom_id), alpha) for axiom_id, alpha in chosen]


def build_prompt(request: SynthesisRequest) -> tuple[str, str]:
    """Render the (system, user) prompt pair for the entangled path.

    The user prompt carries, in order: the scenario rendering, the numbered
    heuristics with activations at two decimals, the id-labeled interference
    rows at two decimals, the framing directive, and the output contract.
    Byte-identical for equal requests.
    """
    if request.framing is None:
        raise InvariantError("entangled prompts require a framing")
    heuristic_lines = [
        f"{i}. {axiom.full_text} (activation {alpha:.2f})"
        for i, (axiom, alpha) in enumerate(request.selected, start=1)]
    framing_line = (f"Framing ({request.framing.kind.value}): "
                    f"{request.framing.directive}")
    user = "\n".join([
        "Scenario:",
        render_scenario_text(request.scenario),
        "",
        "Heuristics (by activation):",
        *heuristic_lines,
        "",
        "Interference matrix (rows ordered as above):",
        *request.matrix_rows(),
        "",
        framing_line,
        "",
        OUTPUT_CONTRACT,
    ])
    return request.generation.system_message, user


def build_baseline_prompt(request: SynthesisRequest) -> tuple[str, str]:
    """Fill the concatenation template with the selected prescriptions.

    The first clause is bare, the last of three or more takes "Finally,",
    and every other clause takes "Additionally,".
    """
    prescriptions = [axiom.prescription for axiom, _ in request.selected]
    clauses = []
    for i, prescription in enumerate(prescriptions):
        if i == 0:
            clauses.append(f"{prescription}.")
        elif i == len(prescriptions) - 1 and len(prescriptions) >= 3:
            clauses.append(f"Finally, {prescription}.")
        else:
            clauses.append(f"Additionally, {prescription}.")
    user = BASELINE_TEMPLATE_HEAD + " ".join(clauses)
    return request.generation.system_message, user


class TextGenerator:
    """Contract for narrative generation backends."""

    kind = "abstract"

    def generate(self, system: str, user: str,
                 cfg: GenerationConfig) -> tuple[str, dict]:
        raise NotImplementedError


_MOCK_HEURISTIC_LINE = re.compile(
    r"^\d+\. If .+?, then (.+)\. \(activation -?\d+\.\d{2}\)$")
_MOCK_FRAMING_LINE = re.compile(r"^Framing \((dominant|contrarian|minimalist)\):",
                                re.MULTILINE)


class DeterministicMockGenerator(TextGenerator):
    """Offline generator with a fixed, documented output contract.

    Baseline prompts (recognized by the concatenation template head) are
    echoed verbatim. Entangled prompts are parsed for their prescriptions
    and framing, then rendered with framing-specific connective text:

    * dominant: "Act from strength." + one "Decisively, {p}." sentence per
      prescription + "Consolidate the advantage on every front."
    * contrarian: "Refuse the obvious path." + one "Against expectation,
      {p}." sentence per prescription + "Let rivals optimize for yesterday."
    * minimalist: the single sentence "Above all, {first prescription}."
    """

    kind = "deterministic_mock"

    def generate(self, system: str, user: str,
                 cfg: GenerationConfig) -> tuple[str, dict]:
        if user.startswith(BASELINE_TEMPLATE_HEAD):
            narrative = user
        else:
            narrative = self._entangled_narrative(user)
        metadata = {
            "model": "deterministic-mock-v1",
            "prompt_tokens": len(system.split()) + len(user.split()),
            "completion_tokens": len(narrative.split()),
        }
        return narrative, metadata

    def _entangled_narrative(self, user: str) -> str:
        prescriptions = []
        for line in user.splitlines():
            matched = _MOCK_HEURISTIC_LINE.match(line)
            if matched:
                prescriptions.append(matched.group(1))
        framing_match = _MOCK_FRAMING_LINE.search(user)
        if not prescriptions or not framing_match:
            raise GenerationError("mock generator could not parse the prompt", attempts=1)
        kind = FramingKind(framing_match.group(1))
        if kind is FramingKind.MINIMALIST:
            return f"Above all, {prescriptions[0]}."
        if kind is FramingKind.DOMINANT:
            opener = "Act from strength."
            body = " ".join(f"Decisively, {p}." for p in prescriptions)
            closer = "Consolidate the advantage on every front."
        else:
            opener = "Refuse the obvious path."
            body = " ".join(f"Against expectation, {p}." for p in prescriptions)
            closer = "Let rivals optimize for yesterday."
        return f"{opener} {body} {closer}"


class RemoteChatGenerator(TextGenerator):
    """Client for a chat-completion endpoint (system + user messages)."""

    kind = "remote"

    def __init__(self, endpoint: str, api_key: str | None = None,
                 model: str = "gpt-4", max_attempts: int = 2,
                 timeout: float = 60.0) -> None:
        if not endpoint:
            raise ProviderError("remote generator requires an endpoint")
        if max_attempts < 1:
            raise InvariantError("max_attempts must be >= 1")
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.max_attempts = max_attempts
        self.timeout = timeout

    def generate(self, system: str, user: str,
                 cfg: GenerationConfig) -> tuple[str, dict]:
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error = "no attempt made"
        for attempt in range(1, self.max_attempts + 1):
            try:
                response = requests.post(self.endpoint, json=payload,
                                         headers=headers, timeout=self.timeout)
            except requests.Timeout:
                last_error = "request timed out"
                if attempt == self.max_attempts:
                    raise ProviderTimeoutError(
                        f"generation timed out (attempts: {attempt})") from None
                continue
            except requests.RequestException as exc:
                raise GenerationError(f"generation request failed: {exc}",
                                      attempts=attempt) from exc
            if response.status_code >= 500:
                last_error = f"server error {response.status_code}"
                if attempt == self.max_attempts:
                    break
                continue
            if response.status_code != 200:
                raise GenerationError(
                    f"generation endpoint returned {response.status_code}",
                    attempts=attempt)
            return self._parse(response.json(), attempt)
        raise GenerationError(f"generation failed: {last_error}",
                              attempts=self.max_attempts)

    def _parse(self, body: object, attempts: int) -> tuple[str, dict]:
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise GenerationError("malformed generation response",
                                  attempts=attempts) from None
        if not isinstance(content, str):
            raise GenerationError("malformed generation response",
                                  attempts=attempts)
        metadata = {"model": body.get("model", self.model)}
        usage = body.get("usage")
        if isinstance(usage, dict):
            metadata.update({k: v for k, v in usage.items()
                             if isinstance(v, (int, float))})
        return content, metadata


def make_generator(cfg: GenerationConfig, endpoint: str | None = None,
                   api_key: str | None = None,
                   model: str | None = None) -> TextGenerator:
    """Build the generator named by the config, remote settings from env."""
    if cfg.provider_kind == "deterministic_mock":
        return DeterministicMockGenerator()
    endpoint = endpoint or os.environ.get(LLM_URL_ENV)
    if not endpoint:
        raise ProviderError(
            f"remote generation requires an endpoint ({LLM_URL_ENV} unset)")
    return RemoteChatGenerator(
        endpoint=endpoint,
        api_key=api_key or os.environ.get(LLM_KEY_ENV),
        model=model or os.environ.get(LLM_MODEL_ENV, "gpt-4"),
    )


def synthesize(request: SynthesisRequest, generator: TextGenerator) -> SynthesisResult:
    """Run the entangled path: build the framed prompt, call the generator."""
    system, user = build_prompt(request)
    narrative, metadata = generator.generate(system, user, request.generation)
    if not narrative.strip():
        raise GenerationError("provider returned an empty narrative", attempts=1)
    return SynthesisResult(narrative=narrative, mode="entangled",
                           request_echo=request, provider_metadata=metadata)


def build_request(scenario: SixCProfile, library: AxiomLibrary,
                  embed_provider: EmbeddingProvider,
                  framing: Framing | None,
                  top_n: int | None = 3, threshold: float | None = None,
                  generation: GenerationConfig | None = None,
                  kappa: KappaConfig | None = None,
                  scenario_mode: str = "composite") -> tuple[SynthesisRequest, ActivationSet]:
    """Assemble a request from raw inputs: activations, selection, sub-matrix."""
    generation = generation or GenerationConfig()
    scenario_vec = embed_scenario(scenario, embed_provider, mode=scenario_mode)
    activations = compute_activations(scenario_vec, library, embed_provider,
                                      scenario_ref=scenario.label)
    selected = select_heuristics(activations, library, top_n=top_n,
                                 threshold=threshold)
    if not selected:
        raise InvariantError("selection is empty; nothing to synthesize")
    subset = library.subset([axiom.id for axiom, _ in selected])
    matrix = build_interference_matrix(subset, embed_provider, kappa)
    flat = matrix.submatrix([axiom.id for axiom, _ in selected]).flatten()
    request = SynthesisRequest(
        scenario=scenario,
        selected=tuple(selected),
        matrix_slice=tuple(float(v) for v in flat),
        framing=framing,
        top_n=top_n if top_n is not None else len(selected),
        generation=generation,
    )
    return request, activations


def run_baseline(scenario: SixCProfile, library: AxiomLibrary,
                 embed_provider: EmbeddingProvider, generator: TextGenerator,
                 generation: GenerationConfig | None = None,
                 kappa: KappaConfig | None = None, top_n: int = 3,
                 scenario_mode: str = "composite") -> SynthesisResult:
    """Rule-ranking baseline: top activations, concatenation template.

    Requests fewer axioms than top_n only when the library is smaller, in
    which case the clamp is recorded as a result warning.
    """
    if len(library) == 0:
        raise InvariantError("baseline requires a non-empty library")
    warnings: tuple[str, ...] = ()
    effective_top = top_n
    if top_n > len(library):
        warnings = (f"requested top {top_n} but library has {len(library)}; clamped",)
        logger.warning(warnings[0])
        effective_top = len(library)
    request, _ = build_request(
        scenario, library, embed_provider, framing=None,
        top_n=effective_top, generation=generation, kappa=kappa,
        scenario_mode=scenario_mode)
    system, user = build_baseline_prompt(request)
    narrative, metadata = generator.generate(system, user, request.generation)
    if not narrative.strip():
        raise GenerationError("provider returned an empty narrative", attempts=1)
    return SynthesisResult(narrative=narrative, mode="baseline",
                           request_echo=request, provider_metadata=metadata,
                           warnings=warnings)
