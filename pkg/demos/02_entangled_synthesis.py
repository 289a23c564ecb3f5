"""
Entangled synthesis under each framing
=======================================

Second half of the pipeline: select the strongest heuristics, fold the
interference slice into a framed prompt, and generate a strategy narrative.
The offline mock generator keeps the run deterministic, so two fresh
engines produce byte-identical narratives.

Run from the repository root after an editable install:

    python3 demos/02_entangled_synthesis.py
"""

from entangle.engine import Engine, EngineConfig
from entangle.synthesis import build_prompt, build_request, framing_for

# audit_path=None keeps the demo from writing an audit log in the cwd.
engine = Engine(EngineConfig(audit_path=None))

# The request bundles the scenario, the top-activated axioms with their
# alphas, and the interference slice over exactly that selection.
request, _ = build_request(engine.profile, engine.library, engine.embedder,
                           framing_for("dominant"), top_n=3)
system, user = build_prompt(request)
print("prompt sent to the generator (user message):")
for line in user.splitlines():
    print(" ", line)

# Each framing swaps the directive while everything else stays fixed.
print()
for framing in ("dominant", "contrarian", "minimalist"):
    result = engine.synthesize_run(framing=framing)
    print(f"[{framing}]")
    print(" ", result.narrative)
    print()

# The baseline skips interference entirely: it concatenates the top
# three prescriptions into a fixed template. Same generator, same config.
baseline = engine.synthesize_run(baseline=True)
print("[baseline]")
print(" ", baseline.narrative)

# Determinism check: a brand new engine reproduces the narrative exactly.
again = Engine(EngineConfig(audit_path=None)).synthesize_run(framing="dominant")
first = engine.synthesize_run(framing="dominant")
print()
print("byte-identical across fresh engines:",
      first.narrative.encode() == again.narrative.encode())
