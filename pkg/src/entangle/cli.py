"""Command-line shell over the engine core.

Every subcommand resolves configuration with precedence flags > config file
> environment, runs through the same Engine the HTTP service uses, appends
an audit line, and exits nonzero with a machine-readable error record on
any failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .axioms import load_library
from .engine import DEFAULT_BIND, Engine, EngineConfig, append_audit, config_from_sources
from .errors import (EntangleError, GenerationError, InvariantError, LibraryError,
                     MissingVectorError, ProviderError, ProviderTimeoutError)
from .evaluation import report_from_record

_ERROR_CODES = (
    (ProviderTimeoutError, "provider_timeout"),
    (MissingVectorError, "missing_vector"),
    (GenerationError, "generation_failure"),
    (ProviderError, "provider_failure"),
    (LibraryError, "library_error"),
    (InvariantError, "invariant_violation"),
    (EntangleError, "engine_error"),
    (OSError, "io_error"),
)


def error_code(exc: BaseException) -> str:
    for klass, code in _ERROR_CODES:
        if isinstance(exc, klass):
            return code
    return "internal_error"


def _emit_error(exc: BaseException) -> None:
    record = {"error": {"code": error_code(exc), "message": str(exc)}}
    print(json.dumps(record), file=sys.stderr)


def _print_record(record: object) -> None:
    print(json.dumps(record, indent=2))


class _RecordParser(argparse.ArgumentParser):
    """Argument parser whose usage failures also emit an error record."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse contract
        print(json.dumps({"error": {"code": "usage_error", "message": message}}),
              file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--library", help="axiom corpus file (default: bundled)")
    common.add_argument("--scenario", help="6C profile file (default: bundled)")
    common.add_argument("--embed-kind",
                        choices=["deterministic_test", "remote", "precomputed_store"],
                        help="embedding provider kind")
    common.add_argument("--store", help="vector store path for precomputed_store")
    common.add_argument("--generation-kind", choices=["deterministic_mock", "remote"],
                        help="text generation provider kind")
    common.add_argument("--scenario-mode", choices=["composite", "weighted_average"],
                        help="scenario encoding mode")
    common.add_argument("--audit-file", help="audit JSONL path")
    common.add_argument("--no-audit", action="store_true",
                        help="disable audit records")

    parser = _RecordParser(
        prog="entangle",
        description="Heuristic activation, interference, synthesis, and evaluation.")
    commands = parser.add_subparsers(dest="command", required=True)

    lib = commands.add_parser("library", parents=[common], help="corpus maintenance")
    lib.add_argument("action", choices=["validate"])
    lib.add_argument("path", help="axiom corpus file to validate")
    lib.set_defaults(handler=_cmd_library)

    act = commands.add_parser("activate", parents=[common], help="rank axioms against the scenario")
    act.add_argument("--json", action="store_true", help="emit the record instead of a table")
    act.set_defaults(handler=_cmd_activate)

    mat = commands.add_parser("matrix", parents=[common], help="interference matrix export")
    mat.add_argument("--scheme", choices=["similarity_based", "action_constraint"])
    mat.add_argument("--json", action="store_true", help="emit the record instead of CSV")
    mat.add_argument("--out", help="write output to a file instead of stdout")
    mat.set_defaults(handler=_cmd_matrix)

    gra = commands.add_parser("graph", parents=[common], help="weighted graph over top activations")
    gra.add_argument("--top-n", type=int, default=3)
    gra.set_defaults(handler=_cmd_graph)

    syn = commands.add_parser("synthesize", parents=[common], help="generate a strategy narrative")
    syn.add_argument("--framing", help="dominant | contrarian | minimalist")
    syn.add_argument("--top-n", type=int, default=3)
    syn.add_argument("--threshold", type=float,
                     help="select by activation floor instead of top-n")
    syn.add_argument("--baseline", action="store_true",
                     help="run the rule-ranking baseline instead")
    syn.add_argument("--json", action="store_true", help="emit the full result record")
    syn.add_argument("--out", help="write the narrative to a file")
    syn.set_defaults(handler=_cmd_synthesize)

    eva = commands.add_parser("evaluate", parents=[common], help="score a synthesis text")
    eva.add_argument("--synthesis", required=True, help="text file to score")
    eva.add_argument("--inputs", help="comma-separated axiom ids (default: whole library)")
    eva.add_argument("--label", default="", help="variant label for the report")
    eva.add_argument("--json", action="store_true", help="emit the record instead of a table")
    eva.set_defaults(handler=_cmd_evaluate)

    cmp_ = commands.add_parser("compare", parents=[common], help="entangled vs baseline on one scenario")
    cmp_.add_argument("--framing", required=True)
    cmp_.add_argument("--top-n", type=int, default=3)
    cmp_.set_defaults(handler=_cmd_compare)

    rad = commands.add_parser("radar", parents=[common], help="radar-chart data from report files")
    rad.add_argument("--reports", nargs="+", required=True,
                     help="evaluation report record files")
    rad.add_argument("--plot", help="also draw a PNG (requires the plot extra)")
    rad.set_defaults(handler=_cmd_radar)

    srv = commands.add_parser("serve", parents=[common], help="run the HTTP service")
    srv.add_argument("--bind", help=f"host:port (default {DEFAULT_BIND})")
    srv.set_defaults(handler=_cmd_serve)

    return parser


def _flags_from_args(args: argparse.Namespace) -> dict:
    flags: dict = {}
    if args.library:
        flags["library_path"] = args.library
    if args.scenario:
        flags["scenario_path"] = args.scenario
    if args.scenario_mode:
        flags["scenario_mode"] = args.scenario_mode
    if args.audit_file:
        flags["audit_path"] = args.audit_file
    embedding: dict = {}
    if args.embed_kind:
        embedding["kind"] = args.embed_kind
    if args.store:
        embedding["store_path"] = args.store
    if embedding:
        flags["embedding"] = embedding
    if args.generation_kind:
        flags["generation"] = {"provider_kind": args.generation_kind}
    if getattr(args, "bind", None):
        flags["service_bind"] = args.bind
    return flags


def _resolve_config(args: argparse.Namespace) -> EngineConfig:
    config = config_from_sources(_flags_from_args(args), args.config)
    if args.no_audit:
        config = replace(config, audit_path=None)
    return config


def _engine(args: argparse.Namespace) -> Engine:
    return Engine(_resolve_config(args))


def _cmd_library(args: argparse.Namespace) -> int:
    library = load_library(args.path)
    record = {"ok": True, "path": args.path, "count": len(library)}
    config = _resolve_config(args)
    if config.audit_path is not None:
        append_audit(config.audit_path, "library validate",
                     {"path": args.path}, record, config.to_record())
    _print_record(record)
    return 0


def _cmd_activate(args: argparse.Namespace) -> int:
    engine = _engine(args)
    activations = engine.activations()
    record = activations.to_record()
    engine.audit("activate", {"scenario": engine.profile.to_record()}, record)
    if args.json:
        _print_record(record)
    else:
        print(f"scenario: {activations.scenario_ref}")
        print(f"{'axiom':<14} alpha")
        for axiom_id, alpha in activations.entries:
            print(f"{axiom_id:<14} {alpha:+.4f}")
    return 0


def _cmd_matrix(args: argparse.Namespace) -> int:
    from .interference import matrix_to_csv

    engine = _engine(args)
    matrix = engine.matrix(args.scheme)
    record = matrix.to_record()
    engine.audit("matrix", {"scheme": matrix.scheme.to_record()}, record)
    output = json.dumps(record, indent=2) if args.json else matrix_to_csv(matrix)
    if args.out:
        Path(args.out).write_text(output if output.endswith("\n") else output + "\n",
                                  encoding="utf-8")
    else:
        print(output, end="" if output.endswith("\n") else "\n")
    return 0


def _cmd_graph(args: argparse.Namespace) -> int:
    engine = _engine(args)
    graph = engine.graph(args.top_n)
    record = graph.to_record()
    engine.audit("graph", {"top_n": args.top_n}, record)
    _print_record(record)
    return 0


def _cmd_synthesize(args: argparse.Namespace) -> int:
    engine = _engine(args)
    result = engine.synthesize_run(
        framing=args.framing,
        top_n=None if args.threshold is not None else args.top_n,
        threshold=args.threshold,
        baseline=args.baseline,
    )
    if args.out:
        Path(args.out).write_text(result.narrative + "\n", encoding="utf-8")
    if args.json:
        _print_record(result.to_record())
    elif not args.out:
        print(result.narrative)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    engine = _engine(args)
    synthesis_path = Path(args.synthesis)
    if not synthesis_path.exists():
        raise LibraryError(f"synthesis file not found: {synthesis_path}")
    text = synthesis_path.read_text(encoding="utf-8")
    input_ids = [i.strip() for i in args.inputs.split(",") if i.strip()] \
        if args.inputs else None
    report = engine.evaluate_text(text, input_ids, args.label)
    record = report.to_record()
    engine.audit("evaluate",
                 {"synthesis_sha256_of": args.synthesis, "input_ids": input_ids},
                 record)
    if args.json:
        _print_record(record)
    else:
        def show(value: float | None) -> str:
            return "N/A" if value is None else f"{value:.4f}"
        print(f"variant:   {report.variant_label or '(unlabeled)'}")
        print(f"coverage:  {show(report.coverage)}")
        print(f"coherence: {show(report.coherence)}")
        print(f"novelty:   {show(report.novelty)}")
        for axiom_id, best, covered in report.per_axiom:
            marker = "covered" if covered else "missed"
            print(f"  {axiom_id:<14} {best:+.4f}  {marker}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    engine = _engine(args)
    record = engine.compare_run(args.framing, args.top_n)
    _print_record(record)
    return 0


def _cmd_radar(args: argparse.Namespace) -> int:
    engine = _engine(args)
    reports = []
    for path in args.reports:
        report_path = Path(path)
        if not report_path.is_file():
            raise LibraryError(f"report file not found: {report_path}")
        try:
            record_data = json.loads(report_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise LibraryError(f"report file {report_path} is not valid JSON: {exc}") from exc
        reports.append(report_from_record(record_data))
    record = engine.radar(reports)
    engine.audit("radar", {"reports": args.reports}, record)
    if args.plot:
        _draw_radar(record, args.plot)
    _print_record(record)
    return 0


def _draw_radar(record: dict, out_path: str) -> None:
    try:
        import matplotlib
    except ImportError:
        raise ProviderError(
            "radar plotting requires matplotlib; install the 'plot' extra") from None
    matplotlib.use("Agg")
    import math

    import matplotlib.pyplot as plt

    axes = record["axes"]
    angles = [2 * math.pi * i / len(axes) for i in range(len(axes))]
    figure, axis = plt.subplots(subplot_kw={"projection": "polar"})
    for series in record["series"]:
        values = [0.0 if v is None else float(v) for v in series["values"]]
        axis.plot(angles + angles[:1], values + values[:1], label=series["label"])
    axis.set_xticks(angles)
    axis.set_xticklabels(axes)
    axis.legend(loc="upper right", bbox_to_anchor=(1.3, 1.1))
    figure.savefig(out_path, bbox_inches="tight")
    plt.close(figure)


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = _resolve_config(args)
    engine = Engine(config)
    engine.audit("serve", {"bind": config.service_bind}, {"started": True})
    host, _, port = config.service_bind.partition(":")
    uvicorn.run(create_app(engine), host=host, port=int(port))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (EntangleError, OSError) as exc:
        _emit_error(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
