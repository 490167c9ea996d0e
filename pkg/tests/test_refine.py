"""Refinement prompt assembly and loop behaviour tests."""

from __future__ import annotations

from fractions import Fraction

import pytest

from narrafact.corpus import Narrative, Scene
from narrafact.errors import ContextOverflow
from narrafact.factscore import AtomicFact, FactScoreReport, FactVerdict
from narrafact.provider import ScriptedProvider
from narrafact.refine import build_script_context, refine_loop, refine_once
from narrafact.retrieval import LexicalBackend, RetrievedEvidence
from narrafact.summarize import draft_from_text

from kg_fixtures import lotr_graph


NARRATIVE = Narrative(
    id="n", title="n",
    scenes=(
        Scene.make(0, "Saruman studies the Palantir to watch Sauron closely."),
        Scene.make(1, "Frodo and Sam are chased across the Shire by Farmer Maggot."),
        Scene.make(2, "Gandalf rides to Isengard seeking counsel."),
    ),
)


def verdict(index: int, text: str, factual: bool, scene: int, score: float = 0.5) -> FactVerdict:
    return FactVerdict(
        fact=AtomicFact(index=index, text=text, source_sentence=0, source_chunk=0),
        factual=factual,
        feedback=None if factual else f"feedback for {text}",
        evidence=RetrievedEvidence(scene_index=scene, scene_score=score, triples=()),
    )


def report_with(verdicts: list[FactVerdict], iteration: int = 0) -> FactScoreReport:
    factual = sum(1 for v in verdicts if v.factual)
    return FactScoreReport(
        score=Fraction(factual, len(verdicts)),
        verdicts=tuple(verdicts),
        z=len(verdicts),
        iteration=iteration,
    )


def test_refine_once_clean_report_is_a_no_call_noop():
    provider = ScriptedProvider([])  # any call would raise ProviderExhausted
    draft = draft_from_text("All good.", iteration=0)
    report = report_with([verdict(1, "fine", True, 0)])
    assert refine_once(provider, draft, report, NARRATIVE) is draft


def test_refine_once_builds_numbered_statements():
    provider = ScriptedProvider(["Revised summary text."])
    draft = draft_from_text("Original summary.", iteration=0)
    report = report_with([
        verdict(1, "wrong fact one", False, 0),
        verdict(2, "wrong fact two", False, 1),
    ])
    revised = refine_once(provider, draft, report, NARRATIVE)
    prompt = provider.calls[0].prompt
    assert "- Statement to Revise 1: wrong fact one (Reason for Revision: feedback for wrong fact one)" in prompt
    assert "- Statement to Revise 2: wrong fact two" in prompt
    assert revised.iteration == 1
    assert revised.lineage == draft.id
    assert revised.text == "Revised summary text."


def test_script_context_deduplicates_scenes_in_order():
    report = report_with([
        verdict(1, "a", False, 1),
        verdict(2, "b", False, 1),
        verdict(3, "c", False, 0),
    ])
    context = build_script_context(NARRATIVE, report, budget=1000)
    assert context.index(NARRATIVE.scenes[0].text) < context.index(NARRATIVE.scenes[1].text)
    assert context.count(NARRATIVE.scenes[1].text) == 1


def test_script_context_drops_lowest_similarity_first():
    report = report_with([
        verdict(1, "a", False, 0, score=0.9),
        verdict(2, "b", False, 1, score=0.2),
    ])
    budget = NARRATIVE.scenes[0].token_count + 2  # too small for both scenes
    context = build_script_context(NARRATIVE, report, budget=budget)
    assert NARRATIVE.scenes[0].text in context
    assert NARRATIVE.scenes[1].text not in context


def test_script_context_overflow_when_single_scene_too_big():
    report = report_with([verdict(1, "a", False, 0, score=0.9)])
    with pytest.raises(ContextOverflow):
        build_script_context(NARRATIVE, report, budget=2)


def test_script_context_full_narrative_mode():
    report = report_with([verdict(1, "a", False, 0)])
    context = build_script_context(NARRATIVE, report, budget=10_000, full_narrative=True)
    assert context == NARRATIVE.full_text()
    with pytest.raises(ContextOverflow):
        build_script_context(NARRATIVE, report, budget=3, full_narrative=True)


def loop_provider(decompositions: list[str], verdicts: list[str]) -> ScriptedProvider:
    return ScriptedProvider(decompositions + verdicts)


def test_refine_loop_zero_iterations_scores_only():
    provider = ScriptedProvider(["f1\nf2", "1", "1"])
    draft = draft_from_text("A clean summary.", iteration=0)
    outcome = refine_loop(provider, NARRATIVE, lotr_graph(), draft, LexicalBackend(), max_iterations=0)
    assert outcome.final_draft is draft
    assert outcome.steps == []
    assert len(outcome.reports) == 1
    assert outcome.reports[0].score == 1


def test_refine_loop_stops_at_perfect_score():
    # iteration 1 fixes the flagged fact; loop re-scores and stops
    provider = ScriptedProvider([
        "f1\nf2", "1", "False, wrong.",        # initial score: 1/2
        "Fixed summary.",                        # refinement call
        "f1\nf2", "1", "1",                     # re-score: 2/2
    ])
    draft = draft_from_text("Broken summary.", iteration=0)
    outcome = refine_loop(provider, NARRATIVE, lotr_graph(), draft, LexicalBackend(), max_iterations=3)
    assert len(outcome.steps) == 1
    assert outcome.final_draft.text == "Fixed summary."
    assert [float(r.score) for r in outcome.reports] == [0.5, 1.0]
    step = outcome.steps[0]
    assert [fact for fact, _ in step.flagged] == ["f2"]
    assert step.report_before.score == Fraction(1, 2)
    assert step.report_after.score == 1


def test_refine_loop_flagged_matches_false_verdicts_exactly():
    provider = ScriptedProvider([
        "f1\nf2\nf3", "False, a.", "1", "False, b.",
        "Next version.",
        "f1\nf2\nf3", "1", "1", "1",
    ])
    draft = draft_from_text("Summary.", iteration=0)
    outcome = refine_loop(provider, NARRATIVE, lotr_graph(), draft, LexicalBackend(), max_iterations=3)
    step = outcome.steps[0]
    expected = {(v.fact.text, v.feedback) for v in step.report_before.flagged()}
    assert set(step.flagged) == expected


def test_refine_loop_stops_when_text_unchanged():
    provider = ScriptedProvider([
        "f1", "False, still wrong.",
        "Same text.",                       # iteration 1 (changed from original)
        "f1", "False, still wrong.",
        "Same text.",                       # iteration 2 returns identical text -> stop
    ])
    draft = draft_from_text("Original.", iteration=0)
    outcome = refine_loop(provider, NARRATIVE, lotr_graph(), draft, LexicalBackend(), max_iterations=5)
    assert len(outcome.steps) == 2
    # unchanged revision keeps the prior report instead of re-judging
    assert outcome.steps[1].report_after is outcome.steps[1].report_before
    assert outcome.final_draft.text == "Same text."


def test_refine_loop_respects_max_iterations():
    responses = []
    for i in range(4):
        if i > 0:
            responses.append(f"Version {i}.")
        responses.extend(["f1", "False, never fixed."])
    provider = ScriptedProvider(responses)
    draft = draft_from_text("Version 0.", iteration=0)
    outcome = refine_loop(provider, NARRATIVE, lotr_graph(), draft, LexicalBackend(), max_iterations=3)
    assert len(outcome.steps) == 3
    assert outcome.final_draft.iteration == 3


def test_refinement_call_count_equals_flagged_iterations():
    provider = ScriptedProvider([
        "f1", "False, wrong.",
        "Better.",
        "f1", "1",
    ])
    draft = draft_from_text("Bad.", iteration=0)
    outcome = refine_loop(provider, NARRATIVE, lotr_graph(), draft, LexicalBackend(), max_iterations=3)
    refinement_calls = [c for c in provider.calls if c.tag.startswith("refinement")]
    assert len(refinement_calls) == len(outcome.steps) == 1
