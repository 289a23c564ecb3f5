"""Selection, prompt construction, generators, and the baseline path."""

from __future__ import annotations

import json

import pytest

from entangle.axioms import Axiom, AxiomLibrary, Strategist, Tradition
from entangle.errors import (GenerationError, InvariantError, ProviderError,
                             ProviderTimeoutError)
from entangle.interference import ActivationSet
from entangle.scenario import SixCProfile, render_scenario_text
from entangle.synthesis import (
    BASELINE_TEMPLATE_HEAD,
    OUTPUT_CONTRACT,
    DeterministicMockGenerator,
    Framing,
    FramingKind,
    GenerationConfig,
    RemoteChatGenerator,
    SynthesisRequest,
    SynthesisResult,
    TextGenerator,
    build_baseline_prompt,
    build_prompt,
    build_request,
    default_system_message,
    framing_for,
    make_generator,
    parse_framing_kind,
    register_framing,
    run_baseline,
    select_heuristics,
    synthesize,
    template_text,
)


def _axiom(axiom_id: str, precondition: str, prescription: str) -> Axiom:
    return Axiom(id=axiom_id, strategist=Strategist.CUSTOM,
                 tradition=Tradition.CORPORATE,
                 precondition=precondition, prescription=prescription)


_LIBRARY = AxiomLibrary([
    _axiom("a1", "alpha rises", "press the flank"),
    _axiom("a2", "beta falls", "guard the rear"),
    _axiom("a3", "gamma holds", "extend the line"),
    _axiom("a4", "delta stalls", "open a second front"),
])

_ACTIVATIONS = ActivationSet(entries=(
    ("a1", 0.9), ("a2", 0.7), ("a3", 0.5), ("a4", 0.2)))

_SCENARIO = SixCProfile(
    label="drill", offensive_strength=4.0, defensive_strength=3.0,
    relational_capacity=2.0, potential_energy=5.0,
    temporal_availability=1.0, contextual_fit=3.5)


def _request(count: int = 3, framing: Framing | None = None,
             generation: GenerationConfig | None = None) -> SynthesisRequest:
    selected = tuple((_LIBRARY.get(i), a) for i, a in _ACTIVATIONS.entries[:count])
    slice_values = []
    for r in range(count):
        for c in range(count):
            slice_values.append(1.0 if r == c else 0.25)
    return SynthesisRequest(
        scenario=_SCENARIO,
        selected=selected,
        matrix_slice=tuple(slice_values),
        framing=framing if framing is not None else framing_for("dominant"),
        generation=generation or GenerationConfig(),
    )


class TestSelectHeuristics:
    def test_top_n_takes_the_highest_activations(self):
        chosen = select_heuristics(_ACTIVATIONS, _LIBRARY, top_n=3)
        assert [(a.id, alpha) for a, alpha in chosen] == [
            ("a1", 0.9), ("a2", 0.7), ("a3", 0.5)]

    def test_threshold_keeps_everything_at_or_above(self):
        chosen = select_heuristics(_ACTIVATIONS, _LIBRARY, top_n=None, threshold=0.7)
        assert [a.id for a, _ in chosen] == ["a1", "a2"]

    def test_high_threshold_selects_nothing(self):
        assert select_heuristics(_ACTIVATIONS, _LIBRARY, top_n=None,
                                 threshold=0.95) == []

    def test_tied_alphas_break_by_id(self):
        acts = ActivationSet(entries=(("a1", 0.5), ("a2", 0.5), ("a3", 0.1), ("a4", 0.0)))
        chosen = select_heuristics(acts, _LIBRARY, top_n=1)
        assert chosen[0][0].id == "a1"

    def test_both_selectors_rejected(self):
        with pytest.raises(InvariantError, match="mutually exclusive"):
            select_heuristics(_ACTIVATIONS, _LIBRARY, top_n=2, threshold=0.5)

    def test_neither_selector_rejected(self):
        with pytest.raises(InvariantError, match="top_n or threshold"):
            select_heuristics(_ACTIVATIONS, _LIBRARY)

    def test_nonpositive_top_n_rejected(self):
        with pytest.raises(InvariantError, match=">= 1"):
            select_heuristics(_ACTIVATIONS, _LIBRARY, top_n=0)

    def test_oversized_top_n_clamps_with_warning(self, caplog):
        with caplog.at_level("WARNING"):
            chosen = select_heuristics(_ACTIVATIONS, _LIBRARY, top_n=9)
        assert len(chosen) == 4
        assert any("clamped" in message for message in caplog.messages)


class TestSynthesisRequest:
    def test_empty_selection_rejected(self):
        with pytest.raises(InvariantError, match="non-empty"):
            SynthesisRequest(scenario=_SCENARIO, selected=(),
                             matrix_slice=(), framing=framing_for("dominant"))

    def test_selection_cap_enforced(self):
        axioms = tuple((_axiom(f"x{i:02d}", f"clause {i}", f"act {i}"), 0.5)
                       for i in range(17))
        with pytest.raises(InvariantError, match="cap"):
            SynthesisRequest(scenario=_SCENARIO, selected=axioms,
                             matrix_slice=(0.0,) * (17 * 17),
                             framing=framing_for("dominant"))

    def test_unsorted_selection_rejected(self):
        selected = ((_LIBRARY.get("a2"), 0.7), (_LIBRARY.get("a1"), 0.9))
        with pytest.raises(InvariantError, match="sorted"):
            SynthesisRequest(scenario=_SCENARIO, selected=selected,
                             matrix_slice=(1.0,) * 4, framing=framing_for("dominant"))

    def test_slice_length_must_be_square_of_selection(self):
        selected = ((_LIBRARY.get("a1"), 0.9), (_LIBRARY.get("a2"), 0.7))
        with pytest.raises(InvariantError, match="matrix_slice length"):
            SynthesisRequest(scenario=_SCENARIO, selected=selected,
                             matrix_slice=(1.0, 0.5, 0.5),
                             framing=framing_for("dominant"))

    def test_non_finite_slice_rejected(self):
        selected = ((_LIBRARY.get("a1"), 0.9),)
        with pytest.raises(InvariantError, match="finite"):
            SynthesisRequest(scenario=_SCENARIO, selected=selected,
                             matrix_slice=(float("inf"),),
                             framing=framing_for("dominant"))

    def test_record_shape(self):
        record = _request().to_record()
        assert set(record) == {"scenario", "selected", "matrix_slice",
                               "framing", "top_n", "generation"}
        assert record["framing"]["kind"] == "dominant"
        assert len(record["selected"]) == 3


class TestGenerationConfig:
    def test_defaults(self):
        cfg = GenerationConfig()
        assert cfg.temperature == 0.7
        assert cfg.max_tokens == 512
        assert cfg.provider_kind == "deterministic_mock"
        assert cfg.system_message == default_system_message()

    def test_negative_temperature_rejected(self):
        with pytest.raises(InvariantError, match="temperature"):
            GenerationConfig(temperature=-0.1)

    def test_nonpositive_max_tokens_rejected(self):
        with pytest.raises(InvariantError, match="max_tokens"):
            GenerationConfig(max_tokens=0)

    def test_unknown_provider_kind_rejected(self):
        with pytest.raises(InvariantError, match="provider kind"):
            GenerationConfig(provider_kind="oracle_bones")

    def test_record_carries_every_field(self):
        record = GenerationConfig(temperature=0.2).to_record()
        assert record["temperature"] == 0.2
        assert set(record) == {"temperature", "max_tokens",
                               "system_message", "provider_kind"}


class TestFraming:
    def test_each_kind_resolves_a_template(self):
        for kind in FramingKind:
            framing = framing_for(kind.value)
            assert framing.kind is kind
            assert framing.directive

    def test_dominant_template_mentions_proactive_positioning(self):
        assert "proactive positioning" in framing_for("dominant").directive

    def test_unknown_kind_names_the_field(self):
        with pytest.raises(InvariantError, match=r"\(field: framing\)"):
            parse_framing_kind("bombastic")

    def test_template_swap_and_restore(self):
        original = template_text("framing_dominant_v1")
        register_framing(FramingKind.DOMINANT, "framing_dominant_test",
                         "Dominate quietly.")
        try:
            assert framing_for("dominant").directive == "Dominate quietly."
        finally:
            register_framing(FramingKind.DOMINANT, "framing_dominant_v1", original)
        assert framing_for("dominant").directive == original

    def test_empty_template_text_rejected(self):
        with pytest.raises(InvariantError, match="non-empty"):
            register_framing(FramingKind.MINIMALIST, "framing_blank", "   ")

    def test_unregistered_template_id_rejected(self):
        with pytest.raises(InvariantError, match="no template registered"):
            template_text("framing_never_written")


class TestBuildPrompt:
    def test_section_order_and_numbering(self):
        system, user = build_prompt(_request())
        assert system == default_system_message()
        lines = user.split("\n")
        assert lines[0] == "Scenario:"
        assert lines[1] == render_scenario_text(_SCENARIO)
        assert lines[3] == "Heuristics (by activation):"
        assert lines[4] == "1. If alpha rises, then press the flank. (activation 0.90)"
        assert lines[5] == "2. If beta falls, then guard the rear. (activation 0.70)"
        assert lines[6] == "3. If gamma holds, then extend the line. (activation 0.50)"
        assert lines[8] == "Interference matrix (rows ordered as above):"
        assert lines[9] == "a1: 1.00 0.25 0.25"
        assert lines[10] == "a2: 0.25 1.00 0.25"
        assert lines[11] == "a3: 0.25 0.25 1.00"
        assert lines[13].startswith("Framing (dominant): ")
        assert lines[-1] == OUTPUT_CONTRACT

    def test_single_axiom_matrix_row(self):
        _, user = build_prompt(_request(count=1))
        assert "a1: 1.00" in user.split("\n")

    def test_byte_identical_for_equal_requests(self):
        assert build_prompt(_request()) == build_prompt(_request())

    def test_framing_required(self):
        with pytest.raises(InvariantError, match="framing"):
            build_prompt(_baseline_request())


def _baseline_request(count: int = 3) -> SynthesisRequest:
    selected = tuple((_LIBRARY.get(i), a) for i, a in _ACTIVATIONS.entries[:count])
    slice_values = tuple(1.0 if r == c else 0.25
                         for r in range(count) for c in range(count))
    return SynthesisRequest(scenario=_SCENARIO, selected=selected,
                            matrix_slice=slice_values, framing=None)


class TestBuildBaselinePrompt:
    def test_three_clause_template(self):
        _, user = build_baseline_prompt(_baseline_request())
        assert user == ("For this scenario, apply the following strategic "
                        "principles: press the flank. Additionally, guard the "
                        "rear. Finally, extend the line.")

    def test_single_clause_has_no_connectives(self):
        _, user = build_baseline_prompt(_baseline_request(count=1))
        assert user == BASELINE_TEMPLATE_HEAD + "press the flank."

    def test_two_clauses_skip_finally(self):
        _, user = build_baseline_prompt(_baseline_request(count=2))
        assert user == (BASELINE_TEMPLATE_HEAD
                        + "press the flank. Additionally, guard the rear.")

    def test_four_clauses_use_finally_only_at_the_end(self):
        _, user = build_baseline_prompt(_baseline_request(count=4))
        assert user == (BASELINE_TEMPLATE_HEAD
                        + "press the flank. Additionally, guard the rear. "
                        + "Additionally, extend the line. "
                        + "Finally, open a second front.")

    def test_system_message_comes_from_generation_config(self):
        system, _ = build_baseline_prompt(_baseline_request())
        assert system == default_system_message()


class TestDeterministicMockGenerator:
    def test_baseline_prompt_is_echoed_verbatim(self, mock_generator):
        _, user = build_baseline_prompt(_baseline_request())
        narrative, _ = mock_generator.generate(default_system_message(), user,
                                               GenerationConfig())
        assert narrative == user

    def test_dominant_narrative(self, mock_generator):
        system, user = build_prompt(_request(framing=framing_for("dominant")))
        narrative, _ = mock_generator.generate(system, user, GenerationConfig())
        assert narrative == (
            "Act from strength. Decisively, press the flank. "
            "Decisively, guard the rear. Decisively, extend the line. "
            "Consolidate the advantage on every front.")

    def test_contrarian_narrative(self, mock_generator):
        system, user = build_prompt(_request(framing=framing_for("contrarian")))
        narrative, _ = mock_generator.generate(system, user, GenerationConfig())
        assert narrative == (
            "Refuse the obvious path. Against expectation, press the flank. "
            "Against expectation, guard the rear. Against expectation, extend "
            "the line. Let rivals optimize for yesterday.")

    def test_minimalist_narrative_is_single_sentence(self, mock_generator):
        system, user = build_prompt(_request(framing=framing_for("minimalist")))
        narrative, _ = mock_generator.generate(system, user, GenerationConfig())
        assert narrative == "Above all, press the flank."

    def test_metadata_counts_words(self, mock_generator):
        system, user = build_prompt(_request())
        narrative, metadata = mock_generator.generate(system, user,
                                                      GenerationConfig())
        assert metadata["model"] == "deterministic-mock-v1"
        assert metadata["prompt_tokens"] == len(system.split()) + len(user.split())
        assert metadata["completion_tokens"] == len(narrative.split())

    def test_unparseable_prompt_rejected(self, mock_generator):
        with pytest.raises(GenerationError, match="could not parse"):
            mock_generator.generate("sys", "free-form text with no sections",
                                    GenerationConfig())


class _EmptyGenerator(TextGenerator):
    kind = "empty_test"

    def generate(self, system, user, cfg):
        return "   ", {}


class TestSynthesize:
    def test_entangled_result_shape(self, mock_generator):
        request = _request()
        result = synthesize(request, mock_generator)
        assert result.mode == "entangled"
        assert result.request_echo is request
        assert result.narrative.startswith("Act from strength.")
        assert result.warnings == ()

    def test_empty_narrative_rejected(self):
        with pytest.raises(GenerationError, match="empty narrative"):
            synthesize(_request(), _EmptyGenerator())

    def test_result_mode_is_validated(self):
        with pytest.raises(InvariantError, match="unknown synthesis mode"):
            SynthesisResult(narrative="text", mode="sideways",
                            request_echo=_request(), provider_metadata={})


class TestBuildRequest:
    def test_selection_matches_top_activations(self, library, provider, profile):
        request, activations = build_request(
            profile, library, provider, framing_for("dominant"), top_n=3)
        assert request.selected_ids == activations.ids[:3]
        assert len(request.matrix_slice) == 9
        assert request.framing.kind is FramingKind.DOMINANT

    def test_matrix_slice_diagonal_is_one(self, library, provider, profile):
        request, _ = build_request(profile, library, provider,
                                   framing_for("dominant"), top_n=3)
        assert request.matrix_slice[0] == 1.0
        assert request.matrix_slice[4] == 1.0
        assert request.matrix_slice[8] == 1.0

    def test_matrix_slice_is_symmetric(self, library, provider, profile):
        request, _ = build_request(profile, library, provider,
                                   framing_for("dominant"), top_n=3)
        slice_ = request.matrix_slice
        assert slice_[1] == slice_[3]
        assert slice_[2] == slice_[6]
        assert slice_[5] == slice_[7]

    def test_empty_threshold_selection_rejected(self, library, provider, profile):
        with pytest.raises(InvariantError, match="selection is empty"):
            build_request(profile, library, provider, framing_for("dominant"),
                          top_n=None, threshold=0.99)

    def test_prompts_are_deterministic_across_builds(self, library, profile):
        from entangle.embedding import DeterministicEmbeddingProvider

        first, _ = build_request(profile, library,
                                 DeterministicEmbeddingProvider(),
                                 framing_for("contrarian"), top_n=3)
        second, _ = build_request(profile, library,
                                  DeterministicEmbeddingProvider(),
                                  framing_for("contrarian"), top_n=3)
        assert build_prompt(first) == build_prompt(second)


class TestRunBaseline:
    def test_baseline_result_shape(self, library, provider, profile, mock_generator):
        result = run_baseline(profile, library, provider, mock_generator)
        assert result.mode == "baseline"
        assert result.narrative.startswith(BASELINE_TEMPLATE_HEAD)
        assert result.request_echo.framing is None
        assert result.warnings == ()
        assert len(result.request_echo.selected) == 3

    def test_clamp_is_recorded_as_warning(self, provider, profile, mock_generator):
        small = AxiomLibrary([_axiom("s1", "one thing", "do one"),
                              _axiom("s2", "another thing", "do two")])
        result = run_baseline(profile, small, provider, mock_generator, top_n=5)
        assert len(result.request_echo.selected) == 2
        assert len(result.warnings) == 1
        assert "clamped" in result.warnings[0]

    def test_empty_library_rejected(self, provider, profile, mock_generator):
        with pytest.raises(InvariantError, match="non-empty"):
            run_baseline(profile, AxiomLibrary([]), provider, mock_generator)

    def test_same_generation_config_for_both_paths(self, library, provider,
                                                   profile, mock_generator):
        shared = GenerationConfig(temperature=0.3, max_tokens=256)
        request, _ = build_request(profile, library, provider,
                                   framing_for("dominant"), top_n=3,
                                   generation=shared)
        entangled = synthesize(request, mock_generator)
        baseline = run_baseline(profile, library, provider, mock_generator,
                                generation=shared)
        assert entangled.request_echo.generation == shared
        assert baseline.request_echo.generation == shared
        assert (entangled.request_echo.generation.to_record()
                == baseline.request_echo.generation.to_record())


class _ChatResponse:
    def __init__(self, status_code: int, body: dict):
        self.status_code = status_code
        self._body = body
        self.text = json.dumps(body)

    def json(self) -> dict:
        return self._body


def _chat_body(content: str = "a narrative") -> dict:
    return {
        "model": "remote-model-x",
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 80, "completion_tokens": 40},
    }


class TestRemoteChatGenerator:
    def test_posts_chat_payload_and_parses_content(self, monkeypatch):
        seen = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen.update(url=url, payload=json, headers=headers, timeout=timeout)
            return _ChatResponse(200, _chat_body("the story"))

        monkeypatch.setattr("entangle.synthesis.requests.post", fake_post)
        generator = RemoteChatGenerator("https://llm.test/v1", api_key="k-123",
                                        model="m-9")
        narrative, metadata = generator.generate("sys", "user text",
                                                 GenerationConfig(temperature=0.4))
        assert narrative == "the story"
        assert seen["url"] == "https://llm.test/v1"
        assert seen["payload"]["model"] == "m-9"
        assert seen["payload"]["messages"][0] == {"role": "system", "content": "sys"}
        assert seen["payload"]["messages"][1] == {"role": "user", "content": "user text"}
        assert seen["payload"]["temperature"] == 0.4
        assert seen["payload"]["max_tokens"] == 512
        assert seen["headers"]["Authorization"] == "Bearer k-123"
        assert metadata["model"] == "remote-model-x"
        assert metadata["prompt_tokens"] == 80

    def test_retries_after_server_error(self, monkeypatch):
        responses = [_ChatResponse(503, {}), _ChatResponse(200, _chat_body())]
        calls = []

        def fake_post(*args, **kwargs):
            calls.append(1)
            return responses[len(calls) - 1]

        monkeypatch.setattr("entangle.synthesis.requests.post", fake_post)
        generator = RemoteChatGenerator("https://llm.test/v1")
        narrative, _ = generator.generate("s", "u", GenerationConfig())
        assert narrative == "a narrative"
        assert len(calls) == 2

    def test_persistent_server_error_fails_after_attempts(self, monkeypatch):
        calls = []

        def fake_post(*args, **kwargs):
            calls.append(1)
            return _ChatResponse(502, {})

        monkeypatch.setattr("entangle.synthesis.requests.post", fake_post)
        generator = RemoteChatGenerator("https://llm.test/v1", max_attempts=2)
        with pytest.raises(GenerationError, match="server error 502"):
            generator.generate("s", "u", GenerationConfig())
        assert len(calls) == 2

    def test_timeout_maps_to_timeout_error(self, monkeypatch):
        import requests as requests_module

        def fake_post(*args, **kwargs):
            raise requests_module.Timeout("slow")

        monkeypatch.setattr("entangle.synthesis.requests.post", fake_post)
        generator = RemoteChatGenerator("https://llm.test/v1", max_attempts=2)
        with pytest.raises(ProviderTimeoutError, match=r"attempts: 2"):
            generator.generate("s", "u", GenerationConfig())

    def test_client_error_does_not_retry(self, monkeypatch):
        calls = []

        def fake_post(*args, **kwargs):
            calls.append(1)
            return _ChatResponse(401, {})

        monkeypatch.setattr("entangle.synthesis.requests.post", fake_post)
        generator = RemoteChatGenerator("https://llm.test/v1")
        with pytest.raises(GenerationError, match="401"):
            generator.generate("s", "u", GenerationConfig())
        assert len(calls) == 1

    def test_malformed_body_rejected(self, monkeypatch):
        monkeypatch.setattr("entangle.synthesis.requests.post",
                            lambda *a, **k: _ChatResponse(200, {"choices": []}))
        generator = RemoteChatGenerator("https://llm.test/v1")
        with pytest.raises(GenerationError, match="malformed"):
            generator.generate("s", "u", GenerationConfig())

    def test_missing_endpoint_rejected(self):
        with pytest.raises(ProviderError, match="endpoint"):
            RemoteChatGenerator("")


class TestMakeGenerator:
    def test_mock_kind(self):
        generator = make_generator(GenerationConfig())
        assert isinstance(generator, DeterministicMockGenerator)

    def test_remote_requires_endpoint(self, monkeypatch):
        monkeypatch.delenv("ENTANGLE_LLM_URL", raising=False)
        with pytest.raises(ProviderError, match="ENTANGLE_LLM_URL"):
            make_generator(GenerationConfig(provider_kind="remote"))

    def test_remote_settings_come_from_environment(self, monkeypatch):
        monkeypatch.setenv("ENTANGLE_LLM_URL", "https://env-llm.test")
        monkeypatch.setenv("ENTANGLE_LLM_KEY", "k-env")
        monkeypatch.setenv("ENTANGLE_LLM_MODEL", "m-env")
        generator = make_generator(GenerationConfig(provider_kind="remote"))
        assert isinstance(generator, RemoteChatGenerator)
        assert generator.endpoint == "https://env-llm.test"
        assert generator.api_key == "k-env"
        assert generator.model == "m-env"
