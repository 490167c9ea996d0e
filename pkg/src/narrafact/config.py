"""Pipeline configuration shared by CLI, service, and run records."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class PipelineConfig:
    # chunking
    chunk_budget: int = 1024
    window: int = 256
    overlap: int = 128
    # graph construction
    rounds: int = 3
    tau: int | None = None  # None -> majority of rounds
    extraction_temperature: float = 0.7
    # retrieval
    retrieval_backend: str = "lexical"  # lexical | embedding
    top_k_triples: int = 3
    # scoring
    use_graph: bool = True
    judge_temperature: float = 0.0
    # refinement
    max_iterations: int = 3
    refine_context_budget: int = 4096
    full_narrative_context: bool = False
    merge_mode: str = "concat"  # concat | recompress

    def effective_tau(self) -> int:
        if self.tau is not None:
            return self.tau
        return max(1, math.ceil(self.rounds / 2))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "PipelineConfig":
        known = {f: payload[f] for f in cls.__dataclass_fields__ if f in payload}
        return cls(**known)
