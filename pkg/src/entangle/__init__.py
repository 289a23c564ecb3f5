"""Entangled-heuristics decision support.

Activates conditional strategic axioms against a 6C scenario profile,
models their pairwise semantic interference, composes an entangled field
vector, generates framed strategy narratives through pluggable providers,
and scores the results against a rule-ranking baseline.

The CLI and HTTP shells live in :mod:`entangle.cli` and
:mod:`entangle.service`; this namespace exports the library surface.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .axioms import (Axiom, AxiomLibrary, Strategist, Tradition, axiom_from_record,
                     bundled_corpus_path, filter_axioms, known_themes, load_bundled_corpus,
                     load_library, parse_strategist, parse_tradition, register_theme,
                     render_full_text, save_library)
from .embedding import (DeterministicEmbeddingProvider, EmbeddingProvider,
                        PrecomputedStoreProvider, ProviderConfig, RemoteEmbeddingProvider,
                        SemanticVector, content_hash, cosine, make_provider)
from .engine import Engine, EngineConfig, config_from_sources
from .errors import (EntangleError, GenerationError, InvariantError, LibraryError,
                     MissingVectorError, ProviderError, ProviderTimeoutError)
from .evaluation import (EvaluationConfig, EvaluationReport, coherence, compare,
                         coverage, evaluate, novelty, radar_export, report_from_record,
                         split_sentences)
from .interference import (ActivationSet, FieldVector, GraphExport, InterferenceMatrix,
                           KappaConfig, KappaDecomposition, KappaScheme, LambdaRule,
                           MixConfig, build_interference_matrix, compose_field,
                           compute_activations, decompose_axiom, export_graph,
                           kappa_action_constraint, kappa_similarity, matrix_to_csv,
                           mix)
from .scenario import (QualifierBuckets, SixCProfile, bundled_profile_path,
                       embed_scenario, load_bundled_profile, load_profile,
                       profile_from_record, render_scenario_text)
from .synthesis import (DeterministicMockGenerator, Framing, FramingKind,
                        GenerationConfig, RemoteChatGenerator, SynthesisRequest,
                        SynthesisResult, TextGenerator, build_baseline_prompt,
                        build_prompt, build_request, framing_for, make_generator,
                        parse_framing_kind, register_framing, run_baseline,
                        select_heuristics, synthesize)

__all__ = [
    "__version__",
    "ActivationSet", "Axiom", "AxiomLibrary", "DeterministicEmbeddingProvider",
    "DeterministicMockGenerator", "EmbeddingProvider", "Engine", "EngineConfig",
    "EntangleError", "EvaluationConfig", "EvaluationReport", "FieldVector",
    "Framing", "FramingKind", "GenerationConfig", "GenerationError", "GraphExport",
    "InterferenceMatrix", "InvariantError", "KappaConfig", "KappaDecomposition",
    "KappaScheme", "LambdaRule", "LibraryError", "MissingVectorError", "MixConfig",
    "PrecomputedStoreProvider", "ProviderConfig", "ProviderError",
    "ProviderTimeoutError", "QualifierBuckets", "RemoteChatGenerator",
    "RemoteEmbeddingProvider", "SemanticVector", "SixCProfile", "Strategist",
    "SynthesisRequest", "SynthesisResult", "TextGenerator", "Tradition",
    "axiom_from_record", "build_baseline_prompt", "build_interference_matrix",
    "build_prompt", "build_request", "bundled_corpus_path", "bundled_profile_path",
    "coherence", "compare", "compose_field", "compute_activations",
    "config_from_sources", "content_hash", "cosine", "coverage", "decompose_axiom",
    "embed_scenario", "evaluate", "export_graph", "filter_axioms", "framing_for",
    "kappa_action_constraint", "kappa_similarity", "known_themes",
    "load_bundled_corpus", "load_bundled_profile", "load_library", "load_profile",
    "make_generator", "make_provider", "matrix_to_csv", "mix", "novelty",
    "parse_framing_kind", "parse_strategist", "parse_tradition",
    "profile_from_record", "radar_export", "register_framing", "register_theme",
    "render_full_text", "render_scenario_text", "report_from_record",
    "run_baseline", "save_library", "select_heuristics", "split_sentences",
    "synthesize",
]
