"""Agent-based refinement: rewrite flagged facts from verifier feedback."""

from __future__ import annotations

from dataclasses import dataclass

from .ckg import CharacterKG
from .corpus import Narrative, tokenize
from .errors import ContextOverflow, InvalidParams
from .factscore import FactScoreReport, score_summary
from .prompts import REFINEMENT_PROMPT, render_revision_statements
from .provider import ChatRequest, Provider
from .summarize import SummaryDraft, draft_from_text


@dataclass(frozen=True)
class RefinementStep:
    iteration: int  # >= 1
    input_draft: SummaryDraft
    flagged: tuple[tuple[str, str], ...]  # (fact text, feedback)
    script_context: str
    output_draft: SummaryDraft
    report_before: FactScoreReport
    report_after: FactScoreReport

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "input_draft": self.input_draft.to_dict(),
            "flagged": [{"fact": f, "feedback": fb} for f, fb in self.flagged],
            "script_context": self.script_context,
            "output_draft": self.output_draft.to_dict(),
            "report_before": self.report_before.to_dict(),
            "report_after": self.report_after.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RefinementStep":
        return cls(
            iteration=payload["iteration"],
            input_draft=SummaryDraft.from_dict(payload["input_draft"]),
            flagged=tuple((f["fact"], f["feedback"]) for f in payload["flagged"]),
            script_context=payload["script_context"],
            output_draft=SummaryDraft.from_dict(payload["output_draft"]),
            report_before=FactScoreReport.from_dict(payload["report_before"]),
            report_after=FactScoreReport.from_dict(payload["report_after"]),
        )


@dataclass
class RefineOutcome:
    """Loop result: the surviving draft plus every recorded step and report.

    reports[0] scores the input draft; reports[i] scores the draft after
    step i, so the list is meaningful even when zero iterations run.
    """

    final_draft: SummaryDraft
    steps: list[RefinementStep]
    reports: list[FactScoreReport]


def build_script_context(
    narrative: Narrative,
    report: FactScoreReport,
    budget: int,
    full_narrative: bool = False,
) -> str:
    """Concatenate the flagged facts' evidence scenes within a token budget.

    Scenes are deduplicated and kept in narrative order; on overflow the
    lowest-similarity scenes are dropped first (ties drop the later scene).
    Raises ContextOverflow when even the strongest single scene exceeds the
    budget, or when full-narrative mode cannot fit.
    """
    if full_narrative:
        text = narrative.full_text()
        if len(tokenize(text)) > budget:
            raise ContextOverflow(
                f"narrative has {len(tokenize(text))} tokens; budget is {budget}"
            )
        return text

    best_score: dict[int, float] = {}
    for verdict in report.flagged():
        index = verdict.evidence.scene_index
        score = verdict.evidence.scene_score
        if index not in best_score or score > best_score[index]:
            best_score[index] = score
    kept = sorted(best_score)
    tokens_of = {i: narrative.scenes[i].token_count for i in kept}

    while kept and sum(tokens_of[i] for i in kept) > budget:
        if len(kept) == 1:
            raise ContextOverflow(
                f"evidence scene {kept[0]} alone exceeds the context budget {budget}"
            )
        weakest = min(kept, key=lambda i: (best_score[i], -i))
        kept.remove(weakest)
    return "\n\n".join(narrative.scenes[i].text for i in kept)


def refine_once(
    provider: Provider,
    draft: SummaryDraft,
    report: FactScoreReport,
    narrative: Narrative,
    context_budget: int = 4096,
    full_narrative: bool = False,
    temperature: float = 0.0,
) -> SummaryDraft:
    """One revision pass over the whole summary.

    With no flagged facts the draft is returned as-is without any model
    call; otherwise the revision prompt carries the evidence script, the
    current summary, and one numbered statement/reason pair per flagged
    fact.
    """
    flagged = [(v.fact.text, v.feedback or "") for v in report.flagged()]
    if not flagged:
        return draft
    script = build_script_context(narrative, report, context_budget, full_narrative)
    prompt = REFINEMENT_PROMPT.format(
        script=script,
        summary=draft.text,
        statements=render_revision_statements(flagged),
    )
    response = provider.chat(
        ChatRequest(prompt=prompt, temperature=temperature, tag=f"refinement iter {draft.iteration + 1}")
    )
    return draft_from_text(
        response.strip(),
        iteration=draft.iteration + 1,
        lineage=draft.id,
    )


def refine_loop(
    provider: Provider,
    narrative: Narrative,
    graph: CharacterKG | None,
    draft: SummaryDraft,
    backend,
    max_iterations: int = 3,
    context_budget: int = 4096,
    full_narrative: bool = False,
    k: int = 3,
    judge_temperature: float = 0.0,
    refine_temperature: float = 0.0,
) -> RefineOutcome:
    """Alternate scoring and revision until the summary is clean.

    Stops when the score reaches 1.0, when a revision leaves the text
    unchanged (the unchanged draft keeps its prior report rather than
    being re-judged), or after max_iterations.
    """
    if max_iterations < 0:
        raise InvalidParams("max_iterations must be >= 0")
    report = score_summary(provider, draft, narrative, graph, backend, k, judge_temperature)
    reports = [report]
    steps: list[RefinementStep] = []
    current = draft
    for _ in range(max_iterations):
        if report.score == 1:
            break
        flagged = tuple((v.fact.text, v.feedback or "") for v in report.flagged())
        revised = refine_once(
            provider, current, report, narrative, context_budget, full_narrative, refine_temperature
        )
        unchanged = revised.text == current.text
        if unchanged:
            report_after = report
        else:
            report_after = score_summary(
                provider, revised, narrative, graph, backend, k, judge_temperature
            )
        steps.append(
            RefinementStep(
                iteration=revised.iteration,
                input_draft=current,
                flagged=flagged,
                script_context=build_script_context(
                    narrative, report, context_budget, full_narrative
                ),
                output_draft=revised,
                report_before=report,
                report_after=report_after,
            )
        )
        reports.append(report_after)
        current = revised
        report = report_after
        if unchanged:
            break
    return RefineOutcome(final_draft=current, steps=steps, reports=reports)
