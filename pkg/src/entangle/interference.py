"""Activation, pairwise interference, and composition of heuristic vectors.

The engine turns a scenario vector and an axiom library into:

* activation amplitudes (cosine of the scenario against each precondition),
* a symmetric interference matrix ``I = cos(h_i, h_j) * kappa_ij`` over
  full-axiom embeddings, with kappa from one of two schemes,
* a composed field vector
  ``Phi = sum_i alpha_i h_i + sum_{i != j} I_ij * mix(h_i, h_j)``,
* a weighted graph over the top-activated axioms.

Scheme notes: ``similarity_based`` sets kappa_ii = 1 and
kappa_ij = cos(h_i, h_j), so the interference matrix has unit diagonal and
cosine-squared off-diagonals in [0, 1]. ``action_constraint`` scores
agreement between prescriptions against opposition between preconditions
through a tanh link and can go negative (destructive interference).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .axioms import Axiom, AxiomLibrary
from .embedding import EmbeddingProvider, SemanticVector, cosine
from .errors import InvariantError

SYMMETRY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ActivationSet:
    """Per-axiom activation amplitudes, sorted by descending alpha.

    Ties are broken by ascending axiom id, making the order deterministic.
    """

    entries: tuple[tuple[str, float], ...]
    scenario_ref: str = ""

    def __post_init__(self) -> None:
        keys = [(-alpha, axiom_id) for axiom_id, alpha in self.entries]
        if keys != sorted(keys):
            raise InvariantError("activation entries must be sorted by (-alpha, id)")
        for axiom_id, alpha in self.entries:
            if not (-1.0 - 1e-9 <= alpha <= 1.0 + 1e-9):
                raise InvariantError(f"activation for {axiom_id!r} outside [-1, 1]: {alpha}")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(axiom_id for axiom_id, _ in self.entries)

    def alpha_of(self, axiom_id: str) -> float:
        for entry_id, alpha in self.entries:
            if entry_id == axiom_id:
                return alpha
        raise InvariantError(f"no activation entry for axiom {axiom_id!r}")

    def top(self, n: int) -> tuple[tuple[str, float], ...]:
        return self.entries[:n]

    def to_record(self) -> dict:
        return {
            "scenario_ref": self.scenario_ref,
            "entries": [{"axiom_id": a, "alpha": alpha} for a, alpha in self.entries],
        }


def compute_activations(scenario_vec: SemanticVector, library: AxiomLibrary,
                        provider: EmbeddingProvider,
                        scenario_ref: str = "") -> ActivationSet:
    """Project the scenario vector onto each axiom's precondition embedding.

    alpha_i = cosine(scenario_vec, embed(precondition_i)). The resulting
    ranking is invariant under positive rescaling of all embeddings.
    """
    if len(library) == 0:
        raise InvariantError("cannot compute activations over an empty library")
    vectors = provider.batch_embed([axiom.precondition for axiom in library])
    pairs = [(axiom.id, cosine(scenario_vec, vec))
             for axiom, vec in zip(library, vectors)]
    pairs.sort(key=lambda item: (-item[1], item[0]))
    return ActivationSet(entries=tuple(pairs), scenario_ref=scenario_ref)


class KappaScheme(str, Enum):
    SIMILARITY_BASED = "similarity_based"
    ACTION_CONSTRAINT = "action_constraint"


@dataclass(frozen=True)
class KappaConfig:
    """Interference-coefficient scheme and its calibration parameters."""

    scheme: KappaScheme = KappaScheme.SIMILARITY_BASED
    alpha_cal: float = 2.0
    beta_cal: float = 1.5

    def __post_init__(self) -> None:
        if isinstance(self.scheme, str) and not isinstance(self.scheme, KappaScheme):
            object.__setattr__(self, "scheme", KappaScheme(self.scheme))
        if not (math.isfinite(self.alpha_cal) and math.isfinite(self.beta_cal)):
            raise InvariantError("kappa calibration parameters must be finite")

    def to_record(self) -> dict:
        return {"scheme": self.scheme.value,
                "alpha_cal": self.alpha_cal, "beta_cal": self.beta_cal}


def kappa_similarity(hi_vec: SemanticVector, hj_vec: SemanticVector,
                     i: int, j: int) -> float:
    """Similarity-based coefficient: 1.0 on the diagonal, cosine elsewhere."""
    if hi_vec.dimension != hj_vec.dimension:
        raise InvariantError(
            f"dimension mismatch: {hi_vec.dimension} vs {hj_vec.dimension}")
    if i == j:
        return 1.0
    return cosine(hi_vec, hj_vec)


@dataclass(frozen=True)
class KappaDecomposition:
    """Action/constraint embeddings of one axiom.

    The action component embeds the prescription clause, the constraint
    component the precondition clause. ``negated_constraint_embedding``
    optionally holds a textual negation ("it is not the case that ...")
    re-embedded by the provider; when absent, vector negation is used.
    """

    action_embedding: SemanticVector
    constraint_embedding: SemanticVector
    negated_constraint_embedding: SemanticVector | None = None

    def __post_init__(self) -> None:
        dims = {self.action_embedding.dimension, self.constraint_embedding.dimension}
        if self.negated_constraint_embedding is not None:
            dims.add(self.negated_constraint_embedding.dimension)
        if len(dims) != 1:
            raise InvariantError(f"decomposition embeddings disagree on dimension: {dims}")

    def negated_constraint(self) -> SemanticVector:
        if self.negated_constraint_embedding is not None:
            return self.negated_constraint_embedding
        return SemanticVector(-self.constraint_embedding.values)


def decompose_axiom(axiom: Axiom, provider: EmbeddingProvider,
                    negation: str = "vector") -> KappaDecomposition:
    """Split an axiom into action/constraint embeddings for the tanh scheme.

    ``negation="textual"`` additionally embeds a negated restatement of the
    precondition; the default leaves negation to the vector level.
    """
    if negation not in ("vector", "textual"):
        raise InvariantError(f"unknown negation mode: {negation!r}")
    negated = None
    if negation == "textual":
        negated = provider.embed(f"it is not the case that {axiom.precondition}")
    return KappaDecomposition(
        action_embedding=provider.embed(axiom.prescription),
        constraint_embedding=provider.embed(axiom.precondition),
        negated_constraint_embedding=negated,
    )


def kappa_action_constraint(di: KappaDecomposition, dj: KappaDecomposition,
                            cfg: KappaConfig) -> float:
    """tanh(alpha_cal * A - beta_cal * C) over decomposed components.

    A is the cosine between the two action embeddings; C is the cosine
    between the first constraint embedding and the negation of the second.
    The tanh link keeps the coefficient strictly inside (-1, 1).
    """
    agreement = cosine(di.action_embedding, dj.action_embedding)
    contradiction = cosine(di.constraint_embedding, dj.negated_constraint())
    return math.tanh(cfg.alpha_cal * agreement - cfg.beta_cal * contradiction)


@dataclass(frozen=True)
class InterferenceMatrix:
    """Symmetric kappa and interference matrices over an axiom ordering."""

    axiom_ids: tuple[str, ...]
    kappa: np.ndarray
    interference: np.ndarray
    scheme: KappaConfig = field(default_factory=KappaConfig)

    def __post_init__(self) -> None:
        n = len(self.axiom_ids)
        for name, matrix in (("kappa", self.kappa), ("interference", self.interference)):
            if matrix.shape != (n, n):
                raise InvariantError(f"{name} matrix shape {matrix.shape} != ({n}, {n})")
            if np.max(np.abs(matrix - matrix.T), initial=0.0) > SYMMETRY_TOLERANCE:
                raise InvariantError(f"{name} matrix is not symmetric")
            matrix.setflags(write=False)
        if self.scheme.scheme is KappaScheme.SIMILARITY_BASED:
            if n and np.max(np.abs(np.diag(self.interference) - 1.0)) > SYMMETRY_TOLERANCE:
                raise InvariantError("similarity-based interference diagonal must be 1.0")
            if np.min(self.interference, initial=0.0) < -SYMMETRY_TOLERANCE or \
               np.max(self.interference, initial=0.0) > 1.0 + SYMMETRY_TOLERANCE:
                raise InvariantError("similarity-based interference must lie in [0, 1]")
        else:
            if n and (np.min(self.kappa) <= -1.0 or np.max(self.kappa) >= 1.0):
                raise InvariantError("action-constraint kappa must lie strictly inside (-1, 1)")

    @property
    def size(self) -> int:
        return len(self.axiom_ids)

    def index_of(self, axiom_id: str) -> int:
        try:
            return self.axiom_ids.index(axiom_id)
        except ValueError:
            raise InvariantError(f"axiom {axiom_id!r} not in matrix") from None

    def submatrix(self, ids: tuple[str, ...] | list[str]) -> np.ndarray:
        """Interference sub-block in the given id order (rows and columns)."""
        indices = [self.index_of(axiom_id) for axiom_id in ids]
        return self.interference[np.ix_(indices, indices)].copy()

    def to_record(self) -> dict:
        return {
            "axiom_ids": list(self.axiom_ids),
            "kappa": self.kappa.tolist(),
            "interference": self.interference.tolist(),
            "scheme": self.scheme.to_record(),
        }


def build_interference_matrix(library: AxiomLibrary, provider: EmbeddingProvider,
                              cfg: KappaConfig | None = None,
                              negation: str = "vector") -> InterferenceMatrix:
    """Compute kappa and interference over full-axiom-text embeddings.

    Entries are computed for i <= j and mirrored, so both matrices are
    exactly symmetric. Self-cosines are taken as exactly 1, which under the
    similarity scheme pins the interference diagonal at 1.0.
    """
    cfg = cfg or KappaConfig()
    if len(library) == 0:
        raise InvariantError("cannot build an interference matrix over an empty library")
    axioms = list(library)
    ids = tuple(axiom.id for axiom in axioms)
    vectors = provider.batch_embed([axiom.full_text for axiom in axioms])
    n = len(axioms)

    cos_matrix = np.ones((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            value = cosine(vectors[i], vectors[j])
            cos_matrix[i, j] = value
            cos_matrix[j, i] = value

    if cfg.scheme is KappaScheme.SIMILARITY_BASED:
        kappa = cos_matrix.copy()
    else:
        decompositions = [decompose_axiom(axiom, provider, negation) for axiom in axioms]
        kappa = np.empty((n, n), dtype=np.float64)
        for i in range(n):
            for j in range(i, n):
                value = kappa_action_constraint(decompositions[i], decompositions[j], cfg)
                kappa[i, j] = value
                kappa[j, i] = value

    interference = cos_matrix * kappa
    return InterferenceMatrix(axiom_ids=ids, kappa=kappa,
                              interference=interference, scheme=cfg)


def matrix_to_csv(matrix: InterferenceMatrix) -> str:
    """Interference matrix as CSV: id-labeled header row and first column,
    cells at six decimal places."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["id", *matrix.axiom_ids])
    for i, axiom_id in enumerate(matrix.axiom_ids):
        writer.writerow([axiom_id, *(f"{v:.6f}" for v in matrix.interference[i])])
    return buffer.getvalue()


def mix(hi_vec: SemanticVector, hj_vec: SemanticVector,
        lambda_ij: float) -> SemanticVector:
    """Convex blend lambda * h_i + (1 - lambda) * h_j."""
    if hi_vec.dimension != hj_vec.dimension:
        raise InvariantError(
            f"dimension mismatch: {hi_vec.dimension} vs {hj_vec.dimension}")
    if not (0.0 <= lambda_ij <= 1.0):
        raise InvariantError(f"mixing coefficient {lambda_ij} outside [0, 1]")
    return SemanticVector(lambda_ij * hi_vec.values + (1.0 - lambda_ij) * hj_vec.values)


class LambdaRule(str, Enum):
    SYMMETRIC_HALF = "symmetric_half"
    ACTIVATION_WEIGHTED = "activation_weighted"


@dataclass(frozen=True)
class MixConfig:
    """Mixing-coefficient rule and the |I_ij| floor for cross terms."""

    lambda_rule: LambdaRule = LambdaRule.SYMMETRIC_HALF
    floor: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.lambda_rule, str) and not isinstance(self.lambda_rule, LambdaRule):
            object.__setattr__(self, "lambda_rule", LambdaRule(self.lambda_rule))
        if not (0.0 <= self.floor <= 1.0):
            raise InvariantError(f"floor {self.floor} outside [0, 1]")

    def to_record(self) -> dict:
        return {"lambda_rule": self.lambda_rule.value, "floor": self.floor}


@dataclass(frozen=True)
class FieldVector:
    """The composed field and the weighted terms that produced it."""

    values: SemanticVector
    contributions: tuple[tuple[str, float], ...]

    def to_record(self) -> dict:
        return {
            "values": self.values.values.tolist(),
            "contributions": [{"term": t, "weight": w} for t, w in self.contributions],
        }


def _lambda_matrix(alpha: np.ndarray, rule: LambdaRule) -> np.ndarray:
    n = alpha.shape[0]
    if rule is LambdaRule.SYMMETRIC_HALF:
        return np.full((n, n), 0.5)
    sums = alpha[:, None] + alpha[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(sums > 0.0, alpha[:, None] / sums, 0.5)
    # Negative activations can push the ratio outside [0, 1]; clamp so the
    # blend stays convex.
    return np.clip(lam, 0.0, 1.0)


def compose_field(activations: ActivationSet, matrix: InterferenceMatrix,
                  vectors: Mapping[str, SemanticVector],
                  mix_cfg: MixConfig | None = None) -> FieldVector:
    """Compose the field vector from activations and pairwise interference.

    Phi = sum_i alpha_i h_i + sum over ordered pairs i != j with
    |I_ij| >= floor of I_ij * mix(h_i, h_j, lambda_ij). The pair sum is
    folded into a single per-axiom coefficient vector before the matrix
    product, so the result is independent of pair evaluation order.
    """
    mix_cfg = mix_cfg or MixConfig()
    ids = matrix.axiom_ids
    if set(ids) != set(activations.ids):
        raise InvariantError("activations and matrix cover different axiom sets")
    missing = [axiom_id for axiom_id in ids if axiom_id not in vectors]
    if missing:
        raise InvariantError(f"missing heuristic vectors for {missing}")

    alpha = np.array([activations.alpha_of(axiom_id) for axiom_id in ids])
    stacked = np.stack([vectors[axiom_id].values for axiom_id in ids])
    interference = matrix.interference
    n = len(ids)

    off_diagonal = ~np.eye(n, dtype=bool)
    included = off_diagonal & (np.abs(interference) >= mix_cfg.floor)
    lam = _lambda_matrix(alpha, mix_cfg.lambda_rule)
    weighted = np.where(included, interference, 0.0)

    # Coefficient of h_k: its own activation, plus lambda-weighted shares of
    # every included pair in which it appears on either side.
    coefficients = (alpha
                    + np.sum(weighted * lam, axis=1)
                    + np.sum(weighted * (1.0 - lam), axis=0))
    values = SemanticVector(coefficients @ stacked)

    contributions: list[tuple[str, float]] = [
        (f"alpha({axiom_id})", float(a)) for axiom_id, a in zip(ids, alpha)]
    for i in range(n):
        for j in range(n):
            if i != j and included[i, j]:
                contributions.append(
                    (f"mix({ids[i]},{ids[j]})", float(interference[i, j])))
    return FieldVector(values=values, contributions=tuple(contributions))


@dataclass(frozen=True)
class GraphExport:
    """Weighted graph over the top-activated axioms.

    Nodes carry activation weights in activation order; edges carry the
    interference weight for every unordered pair among the nodes.
    """

    nodes: tuple[tuple[str, float], ...]
    edges: tuple[tuple[str, str, float], ...]

    def to_record(self) -> dict:
        return {
            "nodes": [{"id": i, "alpha": a} for i, a in self.nodes],
            "edges": [{"source": s, "target": t, "weight": w} for s, t, w in self.edges],
        }


def export_graph(activations: ActivationSet, matrix: InterferenceMatrix,
                 top_n: int) -> GraphExport:
    """Map the top-n activated axioms into a weighted complete graph."""
    if top_n < 1:
        raise InvariantError("top_n must be at least 1")
    if top_n > len(activations.entries):
        raise InvariantError(
            f"top_n = {top_n} exceeds library size {len(activations.entries)}")
    nodes = activations.top(top_n)
    edges = []
    for a in range(len(nodes)):
        for b in range(a + 1, len(nodes)):
            id_a, id_b = nodes[a][0], nodes[b][0]
            weight = float(matrix.interference[matrix.index_of(id_a),
                                               matrix.index_of(id_b)])
            edges.append((id_a, id_b, weight))
    return GraphExport(nodes=tuple(nodes), edges=tuple(edges))
