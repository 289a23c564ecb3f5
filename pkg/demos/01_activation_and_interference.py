"""
Activations and the interference matrix
========================================

Walks the first half of the pipeline: load the bundled axiom corpus and
scenario profile, score each axiom against the scenario, then build the
pairwise interference matrix and export the strongest couplings as a graph.

Run from the repository root after an editable install:

    python3 demos/01_activation_and_interference.py
"""

import numpy as np

from entangle.axioms import load_bundled_corpus
from entangle.embedding import DeterministicEmbeddingProvider
from entangle.interference import (KappaConfig, build_interference_matrix,
                                   compute_activations, export_graph,
                                   matrix_to_csv)
from entangle.scenario import embed_scenario, load_bundled_profile, render_scenario_text

# The corpus ships twelve conditional axioms: eight from one corporate
# strategist and four classical military-political ones.
library = load_bundled_corpus()
print(f"library: {len(library)} axioms")
for axiom in list(library)[:3]:
    print(f"  {axiom.id}: {axiom.full_text}")
print("  ...")

# The bundled scenario is a six-dimension capability profile. Rendering
# turns the numbers into the sentence the embedding provider actually sees.
profile = load_bundled_profile()
print()
print("scenario rendering:")
print(" ", render_scenario_text(profile))

# The deterministic provider hashes text into unit vectors, so every run
# of this script prints identical numbers.
provider = DeterministicEmbeddingProvider()
scenario_vec = embed_scenario(profile, provider)

# Activation = cosine between the scenario vector and each precondition.
activations = compute_activations(scenario_vec, library, provider)
print()
print("top activations (alpha = scenario/precondition cosine):")
for axiom_id, alpha in activations.top(5):
    print(f"  {axiom_id:<4} {alpha:+.4f}")

# The similarity scheme couples axioms by the squared cosine of their full
# conditional texts: 1.0 on the diagonal, [0, 1] everywhere else.
matrix = build_interference_matrix(library, provider)
print()
print("interference matrix, first rows of the CSV export:")
for line in matrix_to_csv(matrix).splitlines()[:4]:
    print(" ", line[:72], "...")

# The action/constraint scheme signs the coupling: aligned prescriptions
# reinforce, constraint conflicts suppress. Kappa stays inside (-1, 1).
signed = build_interference_matrix(library, provider,
                                   KappaConfig(scheme="action_constraint"))
off_diag = signed.kappa[~np.eye(len(library), dtype=bool)]
print()
print(f"signed kappa range: [{off_diag.min():+.4f}, {off_diag.max():+.4f}]")

# Graph export keeps the strongest activations as nodes and every pairwise
# interference weight among them as an undirected edge.
graph = export_graph(activations, matrix, top_n=4)
print()
print("graph over the top 4 activations:")
for edge in graph.to_record()["edges"]:
    print(f"  {edge['source']} -- {edge['target']}  weight {edge['weight']:.4f}")
