"""
Scoring narratives and comparing variants
==========================================

Last stage of the pipeline: score a synthesis on coverage, coherence, and
novelty, then put the entangled and baseline variants side by side and
export the radar record a plotting layer would consume.

Run from the repository root after an editable install:

    python3 demos/03_evaluation_and_comparison.py
"""

import json

from entangle.engine import Engine, EngineConfig

engine = Engine(EngineConfig(audit_path=None))


def show(report):
    def fmt(value):
        return "N/A" if value is None else f"{value:.4f}"
    print(f"  coverage  {fmt(report.coverage)}")
    print(f"  coherence {fmt(report.coherence)}")
    print(f"  novelty   {fmt(report.novelty)}")


# Coverage asks how many input axioms the text reflects above a similarity
# threshold. A verbatim axiom sentence is always covered.
verbatim = engine.library.get("c1").full_text
report = engine.evaluate_text(verbatim, input_ids=["c1"], variant_label="verbatim")
print(f"verbatim axiom text: {verbatim!r}")
show(report)

# One sentence is too little signal for coherence, so the metric reports
# not-applicable instead of a number. The comparison below keeps that slot.
print()
print("single sentence keeps coherence N/A:",
      engine.evaluate_text("One sentence only.").coherence is None)

# compare_run generates both variants with identical generation settings,
# scores each against its own selected axioms, and reports per-metric deltas.
record = engine.compare_run("dominant", top_n=3)
print()
for label in ("entangled", "baseline"):
    print(f"[{label}]")
    print(" ", record[label]["narrative"])
for row in record["reports"]:
    print(f"[{row['variant_label']} metrics]")
    print(f"  coverage  {row['coverage']:.4f}")
    coh = row["coherence"]
    print(f"  coherence {'N/A' if coh is None else format(coh, '.4f')}")
    print(f"  novelty   {row['novelty']:.4f}")

print("[deltas, entangled minus baseline]")
for metric, cells in record["comparison"]["metrics"].items():
    delta = cells["delta"]
    print(f"  {metric:<9} {'N/A' if delta is None else format(delta, '+.4f')}")

# The radar record lists the three axes and one series per variant, with
# None in any slot whose metric was not applicable. These reports rescore
# both narratives against the full corpus, not just the selected axioms,
# so the numbers differ slightly from the comparison rows above.
reports = [engine.evaluate_text(record[label]["narrative"], variant_label=label)
           for label in ("entangled", "baseline")]
print()
print("radar export:")
print(json.dumps(engine.radar(reports), indent=2))
