"""Factuality evaluation and refinement for long-narrative summaries."""

from .ckg import (
    ABSENT,
    CharacterKG,
    NamesGraph,
    Triple,
    build_ckg,
    build_names_graph,
    extract_scene_triples,
    linearize,
    select_edges,
)
from .config import PipelineConfig
from .corpus import (
    Chunk,
    Narrative,
    Scene,
    chunk_scenes,
    load_narrative,
    narrative_from_plain_text,
    segment_plain_text,
    tokenize,
)
from .factscore import AtomicFact, FactScoreReport, FactVerdict, decompose_facts, score_summary, verify_fact
from .provider import (
    ChatRequest,
    Provider,
    RecordingProvider,
    RemoteProvider,
    ReplayProvider,
    ScriptedProvider,
    Transcript,
)
from .refine import RefinementStep, RefineOutcome, refine_loop, refine_once
from .retrieval import EmbeddingBackend, LexicalBackend, RetrievedEvidence, top_scene, top_triples
from .summarize import SummaryDraft, hierarchical_summary, merge_summaries, split_sentences, summarize_chunk

__version__ = "0.1.0"
