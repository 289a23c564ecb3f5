"""Shared engine core behind the CLI and the HTTP service.

Both shells resolve an EngineConfig (flags over config file over
environment), construct one Engine, and serialize the records it returns,
so identical inputs produce identical outputs on either path. Matrices are
cached per scheme; synthesis runs append an audit line that lets the exact
prompt be rebuilt later.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

from .axioms import AxiomLibrary, load_bundled_corpus, load_library
from .embedding import EmbeddingProvider, ProviderConfig, make_provider
from .errors import InvariantError, LibraryError
from .evaluation import EvaluationConfig, EvaluationReport, compare, evaluate, radar_export
from .interference import (ActivationSet, GraphExport, InterferenceMatrix, KappaConfig,
                           KappaScheme, MixConfig, build_interference_matrix,
                           compute_activations, export_graph)
from .scenario import SixCProfile, embed_scenario, load_bundled_profile, load_profile
from .synthesis import (Framing, GenerationConfig, SynthesisResult, TextGenerator,
                        build_request, framing_for, make_generator, run_baseline,
                        synthesize)

BIND_ENV = "ENTANGLE_BIND"
DEFAULT_BIND = "127.0.0.1:8123"
SCENARIO_MODES = ("composite", "weighted_average")


@dataclass(frozen=True)
class EngineConfig:
    """Resolved settings for one engine instance.

    Unset library/scenario paths fall back to the bundled case-study corpus
    and profile. ``audit_path`` of None disables audit records.
    """

    library_path: str | None = None
    scenario_path: str | None = None
    embedding: ProviderConfig = field(default_factory=ProviderConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    kappa: KappaConfig = field(default_factory=KappaConfig)
    mix: MixConfig = field(default_factory=MixConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    service_bind: str = DEFAULT_BIND
    scenario_mode: str = "composite"
    audit_path: str | None = "entangle_audit.jsonl"

    def __post_init__(self) -> None:
        if self.scenario_mode not in SCENARIO_MODES:
            raise InvariantError(f"unknown scenario mode: {self.scenario_mode!r}")
        host, _, port = self.service_bind.partition(":")
        if not host or not port.isdigit():
            raise InvariantError(
                f"service_bind must look like host:port, got {self.service_bind!r}")

    def to_record(self) -> dict:
        return {
            "library_path": self.library_path,
            "scenario_path": self.scenario_path,
            "embedding": self.embedding.to_record(),
            "generation": self.generation.to_record(),
            "kappa": self.kappa.to_record(),
            "mix": self.mix.to_record(),
            "evaluation": self.evaluation.to_record(),
            "service_bind": self.service_bind,
            "scenario_mode": self.scenario_mode,
            "audit_path": self.audit_path,
        }


def _overlay(base: dict, extra: dict) -> dict:
    merged = dict(base)
    for key, value in extra.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _overlay(merged[key], value)
        else:
            merged[key] = value
    return merged


def config_from_sources(flags: dict | None = None,
                        config_file: str | Path | None = None) -> EngineConfig:
    """Resolve an EngineConfig with precedence flags > file > environment.

    ``flags`` uses the same nesting as the config file format: top-level
    paths plus embedding/generation/kappa/mix/evaluation sub-objects.
    """
    resolved: dict = {}
    bind = os.environ.get(BIND_ENV)
    if bind:
        resolved["service_bind"] = bind
    if config_file is not None:
        path = Path(config_file)
        if not path.is_file():
            raise LibraryError(f"config file not found: {path}")
        try:
            file_data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise LibraryError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(file_data, dict):
            raise LibraryError(f"config file {path} must hold a JSON object")
        resolved = _overlay(resolved, file_data)
    if flags:
        resolved = _overlay(resolved, flags)

    def sub(name: str, factory):
        data = resolved.get(name, {})
        if not isinstance(data, dict):
            raise LibraryError(f"config section {name!r} must be an object")
        try:
            return factory(**data)
        except TypeError as exc:
            raise LibraryError(f"config section {name!r} is malformed: {exc}") from exc

    return EngineConfig(
        library_path=resolved.get("library_path"),
        scenario_path=resolved.get("scenario_path"),
        embedding=sub("embedding", ProviderConfig),
        generation=sub("generation", GenerationConfig),
        kappa=sub("kappa", KappaConfig),
        mix=sub("mix", MixConfig),
        evaluation=sub("evaluation", EvaluationConfig),
        service_bind=resolved.get("service_bind", DEFAULT_BIND),
        scenario_mode=resolved.get("scenario_mode", "composite"),
        audit_path=resolved.get("audit_path", "entangle_audit.jsonl"),
    )


def _record_sha256(record: object) -> str:
    canonical = json.dumps(record, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Engine:
    """One loaded library + scenario + provider set, shared by both shells.

    The library and config are immutable after construction; matrix caching
    is the only internal state and is keyed by kappa scheme.
    """

    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        if self.config.library_path is not None:
            self.library = load_library(self.config.library_path)
        else:
            self.library = load_bundled_corpus()
        if self.config.scenario_path is not None:
            self.profile = load_profile(self.config.scenario_path)
        else:
            self.profile = load_bundled_profile()
        self.embedder: EmbeddingProvider = make_provider(self.config.embedding)
        self._generator: TextGenerator | None = None
        self._matrices: dict[str, InterferenceMatrix] = {}
        self._lock = threading.Lock()

    def generator(self) -> TextGenerator:
        with self._lock:
            if self._generator is None:
                self._generator = make_generator(self.config.generation)
            return self._generator

    def library_record(self) -> dict:
        return {"count": len(self.library), "axioms": self.library.to_records()}

    def activations(self, profile: SixCProfile | None = None) -> ActivationSet:
        profile = profile or self.profile
        scenario_vec = embed_scenario(profile, self.embedder,
                                      mode=self.config.scenario_mode)
        return compute_activations(scenario_vec, self.library, self.embedder,
                                   scenario_ref=profile.label)

    def matrix(self, scheme: str | None = None) -> InterferenceMatrix:
        cfg = self.config.kappa
        if scheme is not None:
            if scheme not in [s.value for s in KappaScheme]:
                raise InvariantError(f"unknown kappa scheme: {scheme!r} (field: scheme)")
            cfg = replace(cfg, scheme=KappaScheme(scheme))
        with self._lock:
            cached = self._matrices.get(cfg.scheme.value)
            if cached is not None and cached.scheme == cfg:
                return cached
        matrix = build_interference_matrix(self.library, self.embedder, cfg)
        with self._lock:
            self._matrices[cfg.scheme.value] = matrix
        return matrix

    def graph(self, top_n: int, profile: SixCProfile | None = None) -> GraphExport:
        return export_graph(self.activations(profile), self.matrix(), top_n)

    def synthesize_run(self, framing: str | None = None, top_n: int | None = 3,
                       threshold: float | None = None, baseline: bool = False,
                       profile: SixCProfile | None = None) -> SynthesisResult:
        profile = profile or self.profile
        if baseline:
            result = run_baseline(
                profile, self.library, self.embedder, self.generator(),
                generation=self.config.generation, kappa=self.config.kappa,
                top_n=top_n if top_n is not None else 3,
                scenario_mode=self.config.scenario_mode)
        else:
            if framing is None:
                raise InvariantError("entangled synthesis requires a framing")
            request, _ = build_request(
                profile, self.library, self.embedder, framing_for(framing),
                top_n=top_n, threshold=threshold,
                generation=self.config.generation, kappa=self.config.kappa,
                scenario_mode=self.config.scenario_mode)
            result = synthesize(request, self.generator())
        self.audit("synthesize", result.request_echo.to_record(), result.to_record())
        return result

    def evaluate_text(self, synthesis: str, input_ids: list[str] | None = None,
                      variant_label: str = "") -> EvaluationReport:
        if input_ids:
            inputs = [self.library.get(axiom_id) for axiom_id in input_ids]
        else:
            inputs = list(self.library)
        return evaluate(synthesis, inputs, self.embedder,
                        self.config.evaluation, variant_label)

    def compare_run(self, framing: str, top_n: int = 3,
                    profile: SixCProfile | None = None) -> dict:
        """Entangled vs baseline under one GenerationConfig, plus reports.

        Each variant is scored against its own selected axioms; with equal
        top_n the two input sets coincide.
        """
        entangled = self.synthesize_run(framing=framing, top_n=top_n,
                                        baseline=False, profile=profile)
        baseline = self.synthesize_run(top_n=top_n, baseline=True, profile=profile)
        entangled_report = evaluate(
            entangled.narrative,
            [axiom for axiom, _ in entangled.request_echo.selected],
            self.embedder, self.config.evaluation, variant_label="entangled")
        baseline_report = evaluate(
            baseline.narrative,
            [axiom for axiom, _ in baseline.request_echo.selected],
            self.embedder, self.config.evaluation, variant_label="baseline")
        record = {
            "comparison": compare(entangled_report, baseline_report),
            "entangled": entangled.to_record(),
            "baseline": baseline.to_record(),
            "reports": [entangled_report.to_record(), baseline_report.to_record()],
        }
        self.audit("compare", {"framing": framing, "top_n": top_n},
                   record["comparison"])
        return record

    def radar(self, reports: list[EvaluationReport]) -> dict:
        return radar_export(reports)

    def audit(self, command: str, inputs_record: object,
              outputs_record: object) -> None:
        """Append one audit line; a None audit_path disables recording."""
        if self.config.audit_path is None:
            return
        append_audit(self.config.audit_path, command, inputs_record,
                     outputs_record, self.config.to_record())


def append_audit(audit_path: str | Path, command: str, inputs_record: object,
                 outputs_record: object, config_record: dict) -> None:
    """Write one JSONL audit line: hashes of inputs and outputs plus the
    resolved config, stamped with a fresh request id."""
    line = json.dumps({
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "request_id": uuid.uuid4().hex,
        "command": command,
        "inputs_sha256": _record_sha256(inputs_record),
        "outputs_sha256": _record_sha256(outputs_record),
        "config": config_record,
    }, sort_keys=True)
    path = Path(audit_path)
    if str(path.parent) not in (".", "") and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(line + "\n")
