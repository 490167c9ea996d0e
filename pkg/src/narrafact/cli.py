"""Command-line interface: stage-by-stage pipeline, eval harness, service.

Exit codes: 0 success, 1 usage error, 2 pipeline error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .app import RunStore, advance, create_run, export_report
from .ckg import linearize
from .config import PipelineConfig
from .corpus import load_narrative
from .errors import NarrafactError
from .evalharness import (
    build_series,
    correlation_report,
    load_human_scores,
    load_metric_scores,
    run_perturbation_experiment,
)
from .provider import (
    Provider,
    RecordingProvider,
    RemoteProvider,
    ReplayProvider,
    ScriptedProvider,
    Transcript,
)
from .retrieval import EmbeddingBackend, LexicalBackend


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage failures exit 1, not argparse's 2
        raise UsageError(message)


def build_parser() -> Parser:
    parser = Parser(prog="narrafact", description="Factuality scoring and refinement for narrative summaries")
    parser.add_argument("--runs-dir", default="runs", help="directory holding persisted runs")
    parser.add_argument("--provider", choices=["scripted", "remote", "replay"], default="remote")
    parser.add_argument("--script", help="JSON file with a list of scripted chat responses")
    parser.add_argument("--transcript", help="transcript file (replay input / --record output)")
    parser.add_argument("--record", action="store_true", help="record all provider traffic to --transcript")
    parser.add_argument("--tau", type=int, help="edge frequency threshold override")
    parser.add_argument("--rounds", type=int, help="extraction sampling rounds override")
    parser.add_argument("--budget", type=int, help="chunk token budget override")
    parser.add_argument("--backend", choices=["lexical", "embedding"], help="retrieval backend override")

    sub = parser.add_subparsers(dest="command")

    ingest = sub.add_parser("ingest", help="load a narrative and create a run")
    ingest.add_argument("file")
    ingest.add_argument("--format", choices=["scene_json", "plain_text"], default="scene_json")

    for name, help_text in [
        ("kg", "build the character knowledge graph"),
        ("summarize", "generate the initial summary"),
        ("score", "compute the factuality score"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("run")

    refine = sub.add_parser("refine", help="run refinement iterations")
    refine.add_argument("run")
    refine.add_argument("--iterations", type=int, default=3)

    export = sub.add_parser("export", help="export a run artifact")
    export.add_argument("run")
    export.add_argument("--kind", choices=["score_json", "graph_json", "text_summary"], default="score_json")

    eval_parser = sub.add_parser("eval", help="evaluation harness")
    eval_sub = eval_parser.add_subparsers(dest="eval_command")
    correlate = eval_sub.add_parser("correlate", help="correlation report for metric vs human scores")
    correlate.add_argument("scores", help="CSV unit_id,metric,score")
    correlate.add_argument("--human", required=True, help="CSV unit_id,human_score")
    correlate.add_argument("--permutations", type=int, default=10000)
    correlate.add_argument("--seed", type=int, default=0)
    correlate.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    perturb = eval_sub.add_parser("perturb", help="factual-perturbation sensitivity experiment")
    perturb.add_argument("run")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--addr", default="127.0.0.1:8040")
    return parser


def make_provider(args) -> tuple[Provider, Transcript | None, str | None]:
    """Build the provider stack; returns (provider, transcript-to-save, path)."""
    if args.provider == "scripted":
        if not args.script:
            raise UsageError("--provider scripted requires --script")
        responses = json.loads(Path(args.script).read_text(encoding="utf-8"))
        provider: Provider = ScriptedProvider(responses)
    elif args.provider == "replay":
        if not args.transcript:
            raise UsageError("--provider replay requires --transcript")
        provider = ReplayProvider(Transcript.load(args.transcript))
    else:
        provider = RemoteProvider()
    if args.record:
        if not args.transcript:
            raise UsageError("--record requires --transcript")
        recording = RecordingProvider(provider)
        return recording, recording.transcript, args.transcript
    return provider, None, None


def apply_overrides(store: RunStore, run_id: str, args) -> None:
    record = store.load(run_id)
    overrides = {}
    if args.tau is not None:
        overrides["tau"] = args.tau
    if args.rounds is not None:
        overrides["rounds"] = args.rounds
    if args.budget is not None:
        overrides["chunk_budget"] = args.budget
    if args.backend is not None:
        overrides["retrieval_backend"] = args.backend
    if overrides:
        payload = record.config.to_dict()
        payload.update(overrides)
        record.config = PipelineConfig.from_dict(payload)
        store.save(record)


def dispatch(args) -> int:
    store = RunStore(args.runs_dir)

    if args.command == "ingest":
        narrative = load_narrative(args.file, args.format)
        config = PipelineConfig()
        record = create_run(store, narrative, config)
        apply_overrides(store, record.run_id, args)
        print(json.dumps({"run_id": record.run_id, "scenes": narrative.scene_count, "stage": record.stage}))
        return 0

    if args.command in ("kg", "summarize", "score", "refine"):
        provider, transcript, transcript_path = make_provider(args)
        apply_overrides(store, args.run, args)
        try:
            if args.command == "kg":
                record = advance(store, provider, args.run, "build_graph")
                print(f"graph: {len(record.graph.nodes)} characters, {record.graph.triple_count()} predicates")
                print(linearize(record.graph))
            elif args.command == "summarize":
                record = advance(store, provider, args.run, "summarize")
                print(record.latest_draft().text)
            elif args.command == "score":
                record = advance(store, provider, args.run, "score")
                report = record.latest_report()
                print(json.dumps({"score": float(report.score), "z": report.z,
                                  "false": [v.fact.index for v in report.flagged()]}))
            else:
                for _ in range(args.iterations):
                    record = advance(store, provider, args.run, "refine")
                    report = record.latest_report()
                    print(json.dumps({"iteration": len(record.steps), "score": float(report.score)}))
                    if report.score == 1:
                        break
        finally:
            if transcript is not None and transcript_path:
                transcript.save(transcript_path)
        return 0

    if args.command == "export":
        path = export_report(store, args.run, args.kind)
        print(str(path))
        return 0

    if args.command == "eval":
        if args.eval_command == "correlate":
            series = build_series(load_metric_scores(args.scores), load_human_scores(args.human))
            report = correlation_report(series, permutations=args.permutations, seed=args.seed)
            print(report.to_json() if args.json else report.render_text())
            return 0
        if args.eval_command == "perturb":
            provider, transcript, transcript_path = make_provider(args)
            record = store.load(args.run)
            backend = EmbeddingBackend(provider) if record.config.retrieval_backend == "embedding" else LexicalBackend()
            graph = record.graph if record.config.use_graph else None
            try:
                case = run_perturbation_experiment(
                    provider, record.narrative, graph, record.latest_draft().text, backend,
                    k=record.config.top_k_triples,
                )
            finally:
                if transcript is not None and transcript_path:
                    transcript.save(transcript_path)
            print(json.dumps(case.to_dict(), indent=2))
            return 0
        raise UsageError("eval requires a subcommand (correlate | perturb)")

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        provider, _, _ = make_provider(args)
        host, _, port = args.addr.rpartition(":")
        application = create_app(store, provider)
        uvicorn.run(application, host=host or "127.0.0.1", port=int(port))
        return 0

    raise UsageError("a subcommand is required")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return dispatch(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NarrafactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
