"""HTTP shell: endpoint payloads, error statuses, and CLI parity."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from entangle import __version__
from entangle.cli import main
from entangle.engine import Engine, EngineConfig
from entangle.errors import GenerationError, ProviderTimeoutError
from entangle.service import create_app
from entangle.synthesis import BASELINE_TEMPLATE_HEAD, TextGenerator


@pytest.fixture(scope="module")
def engine():
    return Engine(EngineConfig(audit_path=None))


@pytest.fixture(scope="module")
def client(engine):
    return TestClient(create_app(engine))


@pytest.fixture()
def profile_body(profile):
    return profile.to_record()


class _FailingGenerator(TextGenerator):
    kind = "stub"

    def generate(self, system, user, cfg):
        raise GenerationError("backend exploded")


class _TimeoutGenerator(TextGenerator):
    kind = "stub"

    def generate(self, system, user, cfg):
        raise ProviderTimeoutError("generation timed out (attempts: 2)")


class TestHealthAndLibrary:
    def test_health_payload(self, client, engine):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["version"] == __version__
        assert body["library_count"] == 12
        assert body["embedding"] == {"kind": engine.embedder.kind, "ready": True}
        assert body["generation_kind"] == "deterministic_mock"

    def test_library_record(self, client, engine):
        response = client.get("/library")
        assert response.status_code == 200
        assert response.json() == engine.library_record()

    def test_request_id_header_present(self, client):
        first = client.get("/health")
        second = client.get("/health")
        assert first.headers["X-Request-ID"]
        assert first.headers["X-Request-ID"] != second.headers["X-Request-ID"]
        assert "request_id" not in first.text

    def test_cors_for_static_workbench_origin(self, client):
        origin = "http://127.0.0.1:8080"
        response = client.get("/health", headers={"Origin": origin})
        assert response.headers.get("access-control-allow-origin") == "*"
        exposed = response.headers.get("access-control-expose-headers", "")
        assert "X-Request-ID" in exposed
        preflight = client.options("/synthesize", headers={
            "Origin": origin,
            "Access-Control-Request-Method": "POST",
            "Access-Control-Request-Headers": "content-type",
        })
        assert preflight.status_code == 200
        assert preflight.headers.get("access-control-allow-origin") == "*"


class TestActivations:
    def test_matches_engine_record(self, client, engine, profile_body):
        response = client.post("/activations", json=profile_body)
        assert response.status_code == 200
        assert response.json() == engine.activations().to_record()

    def test_missing_field_is_invalid_body(self, client, profile_body):
        del profile_body["potential_energy"]
        response = client.post("/activations", json=profile_body)
        assert response.status_code == 400
        error = response.json()["error"]
        assert error["code"] == "invalid_body"
        assert "potential_energy" in error["message"]
        assert error["request_id"] == response.headers["X-Request-ID"]

    def test_out_of_range_value_is_invariant_violation(self, client, profile_body):
        profile_body["potential_energy"] = 6.5
        response = client.post("/activations", json=profile_body)
        assert response.status_code == 422
        error = response.json()["error"]
        assert error["code"] == "invariant_violation"
        assert "Potential Energy" in error["message"]


class TestMatrixAndGraph:
    def test_default_scheme(self, client, engine):
        response = client.get("/matrix")
        assert response.status_code == 200
        assert response.json() == engine.matrix().to_record()

    def test_action_constraint_scheme(self, client):
        response = client.get("/matrix", params={"scheme": "action_constraint"})
        assert response.status_code == 200
        assert response.json()["scheme"]["scheme"] == "action_constraint"

    def test_unknown_scheme(self, client):
        response = client.get("/matrix", params={"scheme": "bogus"})
        assert response.status_code == 422
        error = response.json()["error"]
        assert error["code"] == "invariant_violation"
        assert "scheme" in error["message"]

    def test_graph_top_n(self, client):
        response = client.get("/graph", params={"top_n": 4})
        assert response.status_code == 200
        body = response.json()
        assert len(body["nodes"]) == 4
        assert len(body["edges"]) == 6

    def test_graph_top_n_out_of_bounds(self, client):
        assert client.get("/graph", params={"top_n": 0}).status_code == 422
        assert client.get("/graph", params={"top_n": 99}).status_code == 422


class TestSynthesize:
    def test_entangled_narrative(self, client):
        response = client.post("/synthesize", json={"framing": "dominant"})
        assert response.status_code == 200
        body = response.json()
        assert body["mode"] == "entangled"
        assert body["narrative"].startswith("Act from strength.")

    def test_baseline_narrative(self, client):
        response = client.post("/synthesize", json={"baseline": True})
        assert response.status_code == 200
        assert response.json()["narrative"].startswith(BASELINE_TEMPLATE_HEAD)

    def test_framing_required_without_baseline(self, client):
        response = client.post("/synthesize", json={})
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "invariant_violation"

    def test_unknown_framing(self, client):
        response = client.post("/synthesize", json={"framing": "bombastic"})
        assert response.status_code == 422
        assert "framing" in response.json()["error"]["message"]

    def test_profile_override(self, client, profile_body):
        profile_body["label"] = "override"
        response = client.post("/synthesize",
                               json={"framing": "minimalist",
                                     "profile": profile_body})
        assert response.status_code == 200
        assert response.json()["request_echo"]["scenario"]["label"] == "override"

    def test_identical_requests_yield_identical_bodies(self, client):
        payload = {"framing": "contrarian", "top_n": 3}
        first = client.post("/synthesize", json=payload)
        second = client.post("/synthesize", json=payload)
        assert first.text == second.text

    def test_generator_failure_maps_to_502(self, engine):
        app_client = TestClient(create_app(engine))
        engine._generator = _FailingGenerator()
        try:
            response = app_client.post("/synthesize", json={"framing": "dominant"})
        finally:
            engine._generator = None
        assert response.status_code == 502
        error = response.json()["error"]
        assert error["code"] == "generation_failure"
        assert "backend exploded" in error["message"]

    def test_generator_timeout_maps_to_504(self, engine):
        app_client = TestClient(create_app(engine))
        engine._generator = _TimeoutGenerator()
        try:
            response = app_client.post("/synthesize", json={"framing": "dominant"})
        finally:
            engine._generator = None
        assert response.status_code == 504
        assert response.json()["error"]["code"] == "provider_timeout"


class TestEvaluateAndCompare:
    def test_verbatim_axiom_coverage(self, client, library):
        body = {"synthesis": library.get("c1").full_text, "input_ids": ["c1"],
                "variant_label": "identity"}
        response = client.post("/evaluate", json=body)
        assert response.status_code == 200
        report = response.json()
        assert report["coverage"] == 1.0
        assert report["variant_label"] == "identity"

    def test_unknown_input_id(self, client):
        response = client.post("/evaluate",
                               json={"synthesis": "Text.", "input_ids": ["zz"]})
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "library_error"

    def test_missing_synthesis_field(self, client):
        response = client.post("/evaluate", json={"input_ids": ["c1"]})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "invalid_body"

    def test_compare_record(self, client):
        response = client.post("/compare", json={"framing": "dominant"})
        assert response.status_code == 200
        body = response.json()
        assert set(body) == {"comparison", "entangled", "baseline", "reports"}
        labels = [report["variant_label"] for report in body["reports"]]
        assert labels == ["entangled", "baseline"]

    def test_compare_requires_framing(self, client):
        response = client.post("/compare", json={})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "invalid_body"


class TestCliParity:
    """The two shells expose the same records for the same engine state."""

    def _cli_json(self, capsys, *argv: str) -> dict:
        assert main([*argv, "--json", "--no-audit"]) == 0
        return json.loads(capsys.readouterr().out)

    def test_activations(self, capsys, client, profile_body):
        via_cli = self._cli_json(capsys, "activate")
        via_http = client.post("/activations", json=profile_body).json()
        assert via_cli == via_http

    def test_matrix(self, capsys, client):
        via_cli = self._cli_json(capsys, "matrix")
        via_http = client.get("/matrix").json()
        assert via_cli == via_http

    def test_evaluate(self, capsys, client, library, tmp_path):
        text = library.get("m4").full_text + " " + library.get("m6").full_text
        text_file = tmp_path / "synth.txt"
        text_file.write_text(text)
        via_cli = self._cli_json(capsys, "evaluate", "--synthesis",
                                 str(text_file), "--inputs", "m4,m6")
        via_http = client.post("/evaluate",
                               json={"synthesis": text,
                                     "input_ids": ["m4", "m6"]}).json()
        assert via_cli == via_http
