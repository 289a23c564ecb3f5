from __future__ import annotations

import random

import numpy as np
import pytest

from entangle.axioms import (Axiom, AxiomLibrary, Strategist, Tradition,
                             load_bundled_corpus)
from entangle.embedding import (DeterministicEmbeddingProvider, EmbeddingProvider,
                                SemanticVector)
from entangle.errors import ProviderError
from entangle.scenario import SixCProfile, load_bundled_profile
from entangle.synthesis import DeterministicMockGenerator


class MappingProvider(EmbeddingProvider):
    """Provider over a fixed text-to-vector table, for hand-built cases."""

    def __init__(self, table: dict[str, SemanticVector], dimension: int):
        super().__init__(dimension=dimension)
        self._table = dict(table)

    @property
    def kind(self) -> str:
        return "mapping_test"

    def _embed_uncached(self, text: str) -> SemanticVector:
        if text not in self._table:
            raise ProviderError(f"no mapped vector for {text!r}")
        return self._table[text]


class ScalingProvider(EmbeddingProvider):
    """Wraps another provider and scales every vector by a constant."""

    def __init__(self, base: EmbeddingProvider, factor: float):
        super().__init__(dimension=base.dimension)
        self._base = base
        self._factor = factor

    @property
    def kind(self) -> str:
        return "scaling_test"

    def _embed_uncached(self, text: str) -> SemanticVector:
        return self._base.embed(text).scaled(self._factor)


def vector(*components: float) -> SemanticVector:
    return SemanticVector(np.asarray(components, dtype=np.float64))


def random_axioms(rng: random.Random, count: int) -> AxiomLibrary:
    """Small synthetic libraries with distinct clause texts."""
    words = ["signal", "pressure", "tempo", "ground", "leverage", "margin",
             "doubt", "momentum", "cover", "drift", "focus", "reach"]
    axioms = []
    for i in range(count):
        a, b = rng.sample(words, 2)
        axioms.append(Axiom(
            id=f"r{i:02d}",
            strategist=Strategist.CUSTOM,
            tradition=Tradition.CORPORATE,
            precondition=f"the {a} of rivals shifts toward {b} (case {i})",
            prescription=f"redirect {b} before the {a} hardens (case {i})",
        ))
    return AxiomLibrary(axioms)


@pytest.fixture(scope="session")
def provider() -> DeterministicEmbeddingProvider:
    return DeterministicEmbeddingProvider()


@pytest.fixture()
def fresh_provider() -> DeterministicEmbeddingProvider:
    return DeterministicEmbeddingProvider()


@pytest.fixture(scope="session")
def library() -> AxiomLibrary:
    return load_bundled_corpus()


@pytest.fixture(scope="session")
def profile() -> SixCProfile:
    return load_bundled_profile()


@pytest.fixture()
def mock_generator() -> DeterministicMockGenerator:
    return DeterministicMockGenerator()
