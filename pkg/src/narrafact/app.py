"""Run persistence and the stage-by-stage pipeline state machine.

Each run lives in its own directory as human-inspectable JSON documents
plus a manifest; every write goes through write-then-rename so a crash
mid-save leaves the previous record intact.
"""

from __future__ import annotations

import datetime
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .ckg import CharacterKG, build_ckg
from .config import PipelineConfig
from .corpus import Narrative
from .errors import IllegalTransition, InvalidParams, IoError, NotReady, UnknownRun
from .factscore import FactScoreReport, score_summary
from .provider import Provider
from .refine import RefinementStep, refine_once, build_script_context
from .retrieval import EmbeddingBackend, LexicalBackend
from .summarize import SummaryDraft, hierarchical_summary

STAGES = ("loaded", "graph_built", "summarized", "scored", "refined")
ACTIONS = ("build_graph", "summarize", "score", "refine")

EXPORT_KINDS = ("score_json", "graph_json", "text_summary")

# Hook point so tests can inject a crash between write and rename.
_replace = os.replace


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(data)
        _replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _dump_json(payload) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


@dataclass
class JobInfo:
    job_id: str
    action: str
    status: str  # pending | done | failed
    error: str | None = None
    created_at: str = ""
    finished_at: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "action": self.action,
            "status": self.status,
            "error": self.error,
            "created_at": self.created_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "JobInfo":
        return cls(**payload)


@dataclass
class RunRecord:
    run_id: str
    narrative: Narrative
    config: PipelineConfig
    stage: str = "loaded"
    graph: CharacterKG | None = None
    drafts: list[SummaryDraft] = field(default_factory=list)
    reports: list[FactScoreReport] = field(default_factory=list)
    steps: list[RefinementStep] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    jobs: dict[str, JobInfo] = field(default_factory=dict)
    created_at: str = ""
    updated_at: str = ""

    def latest_draft(self) -> SummaryDraft:
        if not self.drafts:
            raise NotReady("run has no summary draft yet")
        return self.drafts[-1]

    def latest_report(self) -> FactScoreReport:
        if not self.reports:
            raise NotReady("run has no factuality report yet")
        return self.reports[-1]

    def to_view(self) -> dict:
        """JSON shape served over HTTP; excludes nothing the UI needs."""
        return {
            "run_id": self.run_id,
            "stage": self.stage,
            "narrative": {
                "id": self.narrative.id,
                "title": self.narrative.title,
                "scene_count": self.narrative.scene_count,
            },
            "config": self.config.to_dict(),
            "graph": self.graph.to_dict() if self.graph else None,
            "drafts": [d.to_dict() for d in self.drafts],
            "reports": [r.to_dict() for r in self.reports],
            "steps": [s.to_dict() for s in self.steps],
            "diagnostics": list(self.diagnostics),
            "jobs": {job_id: job.to_dict() for job_id, job in self.jobs.items()},
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


class RunStore:
    """Directory-backed store with per-run exclusive locks."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def lock_for(self, run_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(run_id, threading.Lock())

    def run_dir(self, run_id: str) -> Path:
        return self.root / run_id

    def list_runs(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if (p / "manifest.json").exists())

    def create(self, narrative: Narrative, config: PipelineConfig) -> RunRecord:
        with self._registry_lock:
            run_id = uuid.uuid4().hex[:8]
            while (self.root / run_id).exists():
                run_id = uuid.uuid4().hex[:8]
            (self.root / run_id).mkdir(parents=True)
        record = RunRecord(
            run_id=run_id,
            narrative=narrative,
            config=config,
            created_at=_now(),
            updated_at=_now(),
        )
        self.save(record)
        return record

    def save(self, record: RunRecord) -> None:
        run_dir = self.run_dir(record.run_id)
        if not run_dir.exists():
            raise UnknownRun(record.run_id)
        record.updated_at = _now()
        _atomic_write(run_dir / "narrative.json", _dump_json(record.narrative.to_dict()))
        if record.graph is not None:
            _atomic_write(run_dir / "graph.json", _dump_json(record.graph.to_dict()))
        if record.drafts:
            _atomic_write(run_dir / "drafts.json", _dump_json([d.to_dict() for d in record.drafts]))
        if record.reports:
            _atomic_write(run_dir / "reports.json", _dump_json([r.to_dict() for r in record.reports]))
        if record.steps:
            _atomic_write(run_dir / "steps.json", _dump_json([s.to_dict() for s in record.steps]))
        manifest = {
            "run_id": record.run_id,
            "narrative_ref": "narrative.json",
            "stage": record.stage,
            "config": record.config.to_dict(),
            "diagnostics": record.diagnostics,
            "jobs": {job_id: job.to_dict() for job_id, job in record.jobs.items()},
            "created_at": record.created_at,
            "updated_at": record.updated_at,
        }
        # manifest last: it is the commit point for the whole record
        _atomic_write(run_dir / "manifest.json", _dump_json(manifest))

    def load(self, run_id: str) -> RunRecord:
        run_dir = self.run_dir(run_id)
        manifest_path = run_dir / "manifest.json"
        if not manifest_path.exists():
            raise UnknownRun(run_id)
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            narrative = Narrative.from_dict(
                json.loads((run_dir / manifest["narrative_ref"]).read_text(encoding="utf-8"))
            )
        except OSError as exc:
            raise IoError(f"cannot read run {run_id}: {exc}") from exc
        record = RunRecord(
            run_id=manifest["run_id"],
            narrative=narrative,
            config=PipelineConfig.from_dict(manifest["config"]),
            stage=manifest["stage"],
            diagnostics=list(manifest.get("diagnostics", [])),
            jobs={k: JobInfo.from_dict(v) for k, v in manifest.get("jobs", {}).items()},
            created_at=manifest.get("created_at", ""),
            updated_at=manifest.get("updated_at", ""),
        )
        graph_path = run_dir / "graph.json"
        if graph_path.exists():
            record.graph = CharacterKG.from_dict(json.loads(graph_path.read_text(encoding="utf-8")))
        drafts_path = run_dir / "drafts.json"
        if drafts_path.exists():
            record.drafts = [
                SummaryDraft.from_dict(d) for d in json.loads(drafts_path.read_text(encoding="utf-8"))
            ]
        reports_path = run_dir / "reports.json"
        if reports_path.exists():
            record.reports = [
                FactScoreReport.from_dict(r)
                for r in json.loads(reports_path.read_text(encoding="utf-8"))
            ]
        steps_path = run_dir / "steps.json"
        if steps_path.exists():
            record.steps = [
                RefinementStep.from_dict(s) for s in json.loads(steps_path.read_text(encoding="utf-8"))
            ]
        return record


def create_run(store: RunStore, narrative: Narrative, config: PipelineConfig | None = None) -> RunRecord:
    return store.create(narrative, config or PipelineConfig())


def check_transition(stage: str, action: str) -> None:
    """Raise IllegalTransition unless the action is legal at this stage."""
    legal = {
        "build_graph": stage == "loaded",
        "summarize": stage == "graph_built",
        "score": stage in ("summarized", "scored", "refined"),
        "refine": stage in ("scored", "refined"),
    }
    if action not in legal:
        raise InvalidParams(f"unknown action {action!r}")
    if not legal[action]:
        raise IllegalTransition(f"action {action!r} is not legal at stage {stage!r}")


def _backend_for(record: RunRecord, provider: Provider):
    if record.config.retrieval_backend == "embedding":
        return EmbeddingBackend(provider)
    return LexicalBackend()


def advance(store: RunStore, provider: Provider, run_id: str, action: str) -> RunRecord:
    """Run one pipeline action against the persisted record.

    Pipeline failures propagate after the prior state is left untouched on
    disk; the caller decides whether to record them as failed jobs.
    """
    with store.lock_for(run_id):
        record = store.load(run_id)
        check_transition(record.stage, action)
        config = record.config
        if action == "build_graph":
            diagnostics: list[str] = []
            record.graph = build_ckg(
                provider,
                record.narrative,
                rounds=config.rounds,
                tau=config.effective_tau(),
                temperature=config.extraction_temperature,
                diagnostics=diagnostics,
            )
            record.diagnostics.extend(diagnostics)
            record.stage = "graph_built"
        elif action == "summarize":
            draft = hierarchical_summary(
                provider,
                record.narrative,
                budget=config.chunk_budget,
                merge_mode=config.merge_mode,
            )
            record.drafts = [draft]
            record.diagnostics.extend(draft.diagnostics)
            record.stage = "summarized"
        elif action == "score":
            backend = _backend_for(record, provider)
            graph = record.graph if config.use_graph else None
            report = score_summary(
                provider,
                record.latest_draft(),
                record.narrative,
                graph,
                backend,
                k=config.top_k_triples,
                temperature=config.judge_temperature,
            )
            record.reports.append(report)
            if record.stage == "summarized":
                record.stage = "scored"
        elif action == "refine":
            if len(record.steps) >= config.max_iterations:
                raise IllegalTransition(
                    f"refinement budget exhausted ({config.max_iterations} iterations)"
                )
            report = record.latest_report()
            if report.score == 1:
                record.diagnostics.append("refine requested but latest score is 1.0; nothing to revise")
            else:
                backend = _backend_for(record, provider)
                graph = record.graph if config.use_graph else None
                draft = record.latest_draft()
                flagged = tuple((v.fact.text, v.feedback or "") for v in report.flagged())
                revised = refine_once(
                    provider,
                    draft,
                    report,
                    record.narrative,
                    context_budget=config.refine_context_budget,
                    full_narrative=config.full_narrative_context,
                )
                if revised.text == draft.text:
                    report_after = report
                else:
                    report_after = score_summary(
                        provider,
                        revised,
                        record.narrative,
                        graph,
                        backend,
                        k=config.top_k_triples,
                        temperature=config.judge_temperature,
                    )
                record.steps.append(
                    RefinementStep(
                        iteration=revised.iteration,
                        input_draft=draft,
                        flagged=flagged,
                        script_context=build_script_context(
                            record.narrative,
                            report,
                            config.refine_context_budget,
                            config.full_narrative_context,
                        ),
                        output_draft=revised,
                        report_before=report,
                        report_after=report_after,
                    )
                )
                record.drafts.append(revised)
                record.reports.append(report_after)
                record.stage = "refined"
        store.save(record)
        return record


def export_report(store: RunStore, run_id: str, kind: str) -> Path:
    """Serialize one artifact deterministically into the run's exports dir."""
    if kind not in EXPORT_KINDS:
        raise InvalidParams(f"unknown export kind {kind!r}")
    record = store.load(run_id)
    exports = store.run_dir(run_id) / "exports"
    exports.mkdir(exist_ok=True)
    if kind == "graph_json":
        if record.graph is None:
            raise NotReady("graph not built yet")
        path = exports / "graph.json"
        _atomic_write(path, _dump_json(record.graph.to_dict()))
    elif kind == "score_json":
        if not record.reports:
            raise NotReady("run not scored yet")
        path = exports / "score.json"
        _atomic_write(path, _dump_json([r.to_dict() for r in record.reports]))
    else:  # text_summary
        if not record.drafts:
            raise NotReady("run not summarized yet")
        path = exports / "summary.txt"
        _atomic_write(path, (record.latest_draft().text + "\n").encode("utf-8"))
    return path
