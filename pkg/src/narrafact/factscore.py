"""Atomic fact decomposition, retrieval-grounded verification, and scoring."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ckg import CharacterKG
from .corpus import Narrative
from .errors import InvalidInput, NoFacts
from .prompts import FACT_CHECK_PROMPT, FACT_CHECK_PROMPT_NO_GRAPH, FACT_DECOMPOSITION_PROMPT
from .provider import ChatRequest, Provider
from .retrieval import RetrievedEvidence, retrieve_evidence
from .summarize import SummaryDraft

_EMPTY_JUDGE_FEEDBACK = "unverifiable: the judge returned an empty response"


@dataclass(frozen=True)
class AtomicFact:
    index: int  # 1-based within a report
    text: str
    source_sentence: int
    source_chunk: int | None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "text": self.text,
            "source_sentence": self.source_sentence,
            "source_chunk": self.source_chunk,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AtomicFact":
        return cls(
            index=payload["index"],
            text=payload["text"],
            source_sentence=payload["source_sentence"],
            source_chunk=payload.get("source_chunk"),
        )


@dataclass(frozen=True)
class FactVerdict:
    fact: AtomicFact
    factual: bool
    feedback: str | None  # present iff not factual
    evidence: RetrievedEvidence

    def __post_init__(self) -> None:
        if self.factual and self.feedback is not None:
            raise InvalidInput("factual verdicts carry no feedback")
        if not self.factual and not self.feedback:
            raise InvalidInput("non-factual verdicts need feedback")

    def to_dict(self) -> dict:
        return {
            "fact": self.fact.to_dict(),
            "factual": self.factual,
            "feedback": self.feedback,
            "evidence": self.evidence.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FactVerdict":
        return cls(
            fact=AtomicFact.from_dict(payload["fact"]),
            factual=payload["factual"],
            feedback=payload.get("feedback"),
            evidence=RetrievedEvidence.from_dict(payload["evidence"]),
        )


@dataclass(frozen=True)
class FactScoreReport:
    """Fraction of atomic facts judged factual, with per-fact verdicts."""

    score: Fraction
    verdicts: tuple[FactVerdict, ...]
    z: int
    iteration: int
    diagnostics: tuple[str, ...] = ()

    def flagged(self) -> list[FactVerdict]:
        return [v for v in self.verdicts if not v.factual]

    def to_dict(self) -> dict:
        return {
            "score": float(self.score),
            "score_exact": f"{self.score.numerator}/{self.score.denominator}",
            "z": self.z,
            "iteration": self.iteration,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FactScoreReport":
        num, den = payload["score_exact"].split("/")
        return cls(
            score=Fraction(int(num), int(den)),
            verdicts=tuple(FactVerdict.from_dict(v) for v in payload["verdicts"]),
            z=payload["z"],
            iteration=payload["iteration"],
            diagnostics=tuple(payload.get("diagnostics", ())),
        )


def decompose_facts(provider: Provider, draft: SummaryDraft, temperature: float = 0.0) -> tuple[list[AtomicFact], list[str]]:
    """One decomposition call per sentence; newline-separated facts.

    Sentences that decompose to nothing are dropped with a diagnostic.
    Raises NoFacts when the whole summary yields zero facts.
    """
    if not draft.sentences:
        raise InvalidInput("draft has no sentences to decompose")
    facts: list[AtomicFact] = []
    diagnostics: list[str] = []
    for sentence_index, (sentence, chunk) in enumerate(draft.sentences):
        prompt = FACT_DECOMPOSITION_PROMPT.format(sentence=sentence)
        response = provider.chat(
            ChatRequest(prompt=prompt, temperature=temperature, tag=f"fact_decomposition sentence {sentence_index}")
        )
        lines = [line.strip() for line in response.splitlines() if line.strip()]
        if not lines:
            diagnostics.append(f"sentence {sentence_index} produced no atomic facts; dropped")
            continue
        for line in lines:
            facts.append(
                AtomicFact(
                    index=len(facts) + 1,
                    text=line,
                    source_sentence=sentence_index,
                    source_chunk=chunk,
                )
            )
    if not facts:
        raise NoFacts("decomposition produced zero atomic facts")
    return facts, diagnostics


def parse_verdict(response: str) -> tuple[bool, str | None]:
    """Total parse rule: a trimmed response whose first line is exactly "1"
    is factual; anything else is non-factual with the response as feedback."""
    trimmed = response.strip()
    first_line = trimmed.splitlines()[0].strip() if trimmed else ""
    if first_line == "1":
        return True, None
    return False, trimmed if trimmed else _EMPTY_JUDGE_FEEDBACK


def verify_fact(
    provider: Provider,
    fact: AtomicFact,
    narrative: Narrative,
    graph: CharacterKG | None,
    backend,
    k: int = 3,
    temperature: float = 0.0,
) -> FactVerdict:
    """Judge one fact against its retrieved scene and triple subgraph.

    With graph=None the subgraph block is omitted from the prompt (the
    scene-only ablation).
    """
    evidence = retrieve_evidence(backend, fact.text, narrative, graph, k)
    scene_text = narrative.scenes[evidence.scene_index].text
    if graph is not None:
        subgraph = "\n".join(rendering for rendering, _ in evidence.triples)
        prompt = FACT_CHECK_PROMPT.format(scene=scene_text, subgraph=subgraph, statement=fact.text)
    else:
        prompt = FACT_CHECK_PROMPT_NO_GRAPH.format(scene=scene_text, statement=fact.text)
    response = provider.chat(
        ChatRequest(prompt=prompt, temperature=temperature, tag=f"fact_check {fact.index}")
    )
    factual, feedback = parse_verdict(response)
    return FactVerdict(fact=fact, factual=factual, feedback=feedback, evidence=evidence)


def score_summary(
    provider: Provider,
    draft: SummaryDraft,
    narrative: Narrative,
    graph: CharacterKG | None,
    backend,
    k: int = 3,
    temperature: float = 0.0,
) -> FactScoreReport:
    """Decompose, verify every fact, and aggregate the exact factual ratio."""
    facts, diagnostics = decompose_facts(provider, draft, temperature)
    verdicts = tuple(
        verify_fact(provider, fact, narrative, graph, backend, k, temperature)
        for fact in facts
    )
    factual_count = sum(1 for v in verdicts if v.factual)
    return FactScoreReport(
        score=Fraction(factual_count, len(verdicts)),
        verdicts=verdicts,
        z=len(verdicts),
        iteration=draft.iteration,
        diagnostics=tuple(diagnostics),
    )
