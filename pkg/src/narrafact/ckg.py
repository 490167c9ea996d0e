"""Character knowledge graph construction.

Pipeline: per-scene triple extraction (one-shot prompt, parsed by a strict
line grammar), alias consolidation into a names graph, multi-round sampling
with a frequency threshold on predicates, and a deterministic linearized
rendering used for retrieval and prompting.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import Narrative, Scene
from .errors import EmptyResponse, InvalidParams
from .prompts import KNOWLEDGE_EXTRACTION_PROMPT
from .provider import ChatRequest, Provider

# Sentinel for a triple with no object: the predicate states the subject's
# own condition and becomes a self-loop edge.
ABSENT = None

_UNKNOWN_SCENE_SORT = 2**31


def _norm_name(raw: str) -> str:
    return re.sub(r"\s+", " ", raw).strip()


def _norm_predicate(raw: str) -> str:
    return re.sub(r"\s+", " ", raw).strip().lower()


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str | None  # ABSENT marks a self-loop state
    scene_index: int
    round: int = 0

    def is_self_loop(self) -> bool:
        return self.object is ABSENT


@dataclass
class ExtractionResult:
    scene_index: int
    round: int
    alias_pairs: list[tuple[str, str]]
    triples: list[Triple]
    skipped_lines: list[str]


@dataclass(frozen=True)
class AliasCluster:
    key: str  # first-occurring alias
    display: str  # aliases joined by " / " in first-occurrence order
    aliases: tuple[str, ...]
    first_scene: int | None = None


class NamesGraph:
    """Alias clusters as connected components of pairwise same-character links."""

    def __init__(self, clusters: Sequence[AliasCluster]):
        self.clusters = tuple(clusters)
        self._by_alias: dict[str, AliasCluster] = {}
        for cluster in self.clusters:
            for alias in cluster.aliases:
                self._by_alias[alias] = cluster

    def canonical_for(self, name: str) -> str | None:
        cluster = self._by_alias.get(_norm_name(name))
        return cluster.key if cluster else None

    def cluster_for(self, name: str) -> AliasCluster | None:
        return self._by_alias.get(_norm_name(name))

    def __len__(self) -> int:
        return len(self.clusters)


def build_names_graph(
    alias_pairs: Iterable[tuple[str, str]],
    first_scenes: Mapping[str, int] | None = None,
) -> NamesGraph:
    """Union alias pairs into clusters; first-occurring alias becomes the key.

    Pairs must arrive in narrative order: stream position determines which
    alias of a cluster counts as first-occurring. A self-pair (name, name)
    registers a singleton character.
    """
    parent: dict[str, str] = {}
    order: dict[str, int] = {}

    def register(name: str) -> str | None:
        name = _norm_name(name)
        if not name:
            return None
        if name not in parent:
            parent[name] = name
            order[name] = len(order)
        return name

    def find(name: str) -> str:
        root = name
        while parent[root] != root:
            root = parent[root]
        while parent[name] != root:
            parent[name], name = root, parent[name]
        return root

    for raw_a, raw_b in alias_pairs:
        a, b = register(raw_a), register(raw_b)
        if a is None or b is None:
            continue
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the earliest-seen alias as the component root
            if order[ra] <= order[rb]:
                parent[rb] = ra
            else:
                parent[ra] = rb

    members: dict[str, list[str]] = {}
    for name in parent:
        members.setdefault(find(name), []).append(name)

    clusters: list[AliasCluster] = []
    for root, aliases in members.items():
        aliases.sort(key=lambda n: order[n])
        first_scene: int | None = None
        if first_scenes:
            seen = [first_scenes[a] for a in aliases if a in first_scenes]
            first_scene = min(seen) if seen else None
        clusters.append(
            AliasCluster(
                key=aliases[0],
                display=" / ".join(aliases),
                aliases=tuple(aliases),
                first_scene=first_scene,
            )
        )
    clusters.sort(key=lambda c: order[c.key])
    return NamesGraph(clusters)


@dataclass(frozen=True)
class PredicateEdge:
    predicate: str  # display form: first-occurring raw text
    freq: int
    first_scene: int


@dataclass(frozen=True)
class CharacterNode:
    key: str
    display: str
    aliases: tuple[str, ...]
    first_scene: int | None = None


@dataclass
class CharacterKG:
    """Directed graph of canonical characters with frequency-selected predicates.

    `nodes` holds every names-graph character whether or not it has edges;
    `edges` maps (subject_key, object_key) to predicates sorted by
    first-occurrence scene. A (k, k) edge stores the character's self-loop
    states.
    """

    nodes: dict[str, CharacterNode] = field(default_factory=dict)
    edges: dict[tuple[str, str], tuple[PredicateEdge, ...]] = field(default_factory=dict)
    tau: int = 1

    def node_sort_key(self, key: str):
        node = self.nodes[key]
        scene = node.first_scene if node.first_scene is not None else _UNKNOWN_SCENE_SORT
        return (scene, key)

    def ordered_node_keys(self) -> list[str]:
        return sorted(self.nodes, key=self.node_sort_key)

    def triple_count(self) -> int:
        return sum(len(preds) for preds in self.edges.values())

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "linearized": linearize(self),
            "nodes": [
                {
                    "key": n.key,
                    "display": n.display,
                    "aliases": list(n.aliases),
                    "first_scene": n.first_scene,
                }
                for n in (self.nodes[k] for k in self.ordered_node_keys())
            ],
            "edges": [
                {
                    "subject": s,
                    "object": o,
                    "predicates": [
                        {"predicate": p.predicate, "freq": p.freq, "first_scene": p.first_scene}
                        for p in self.edges[(s, o)]
                    ],
                }
                for s, o in sorted(self.edges)
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CharacterKG":
        nodes = {
            n["key"]: CharacterNode(
                key=n["key"],
                display=n["display"],
                aliases=tuple(n["aliases"]),
                first_scene=n.get("first_scene"),
            )
            for n in payload["nodes"]
        }
        edges = {
            (e["subject"], e["object"]): tuple(
                PredicateEdge(p["predicate"], p["freq"], p["first_scene"])
                for p in e["predicates"]
            )
            for e in payload["edges"]
        }
        return cls(nodes=nodes, edges=edges, tau=payload.get("tau", 1))


_EDGE_LINE = re.compile(r"^\s*\d+\.\s*(.+)$")


def parse_extraction_response(text: str) -> tuple[list[list[str]], list[tuple[list[str], str, str | None]], list[str]]:
    """Parse a knowledge-extraction response into alias groups and edge rows.

    Returns (alias_groups, edge_rows, skipped_lines). An edge row is
    (subjects, predicate, object-or-ABSENT); numbered lines that do not
    split into two or three `;` fields are skipped and reported.
    """
    alias_groups: list[list[str]] = []
    edge_rows: list[tuple[list[str], str, str | None]] = []
    skipped: list[str] = []
    section = ""
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        lowered = stripped.lower().rstrip(":")
        if lowered == "named entities":
            section = "entities"
            continue
        if lowered == "knowledge graph edges":
            section = "edges"
            continue
        if section == "entities":
            names = [_norm_name(part) for part in stripped.split("/")]
            names = [n for n in names if n]
            if names:
                alias_groups.append(names)
        elif section == "edges":
            match = _EDGE_LINE.match(stripped)
            if not match:
                skipped.append(stripped)
                continue
            parts = [p.strip() for p in match.group(1).split(";")]
            parts = [p for p in parts if p != ""]
            if len(parts) == 3:
                subjects_raw, predicate, obj = parts
            elif len(parts) == 2:
                subjects_raw, predicate, obj = parts[0], parts[1], ABSENT
            else:
                skipped.append(stripped)
                continue
            subjects = [_norm_name(s) for s in subjects_raw.split(",")]
            subjects = [s for s in subjects if s]
            if not subjects or not _norm_predicate(predicate):
                skipped.append(stripped)
                continue
            edge_rows.append((subjects, predicate, obj))
    return alias_groups, edge_rows, skipped


def extract_scene_triples(
    provider: Provider,
    scene: Scene,
    round: int = 0,
    temperature: float = 0.7,
) -> ExtractionResult:
    """Run the extraction prompt for one scene and parse the response.

    Alias groups become pairwise links (a single-name line registers the
    character via a self-pair); multi-subject edge lines expand into one
    triple per subject.
    """
    prompt = KNOWLEDGE_EXTRACTION_PROMPT.format(scene=scene.text)
    response = provider.chat(
        ChatRequest(prompt=prompt, temperature=temperature, tag=f"triple_extraction scene {scene.index} round {round}")
    )
    if not response.strip():
        raise EmptyResponse(f"empty extraction response for scene {scene.index}")
    alias_groups, edge_rows, skipped = parse_extraction_response(response)
    alias_pairs: list[tuple[str, str]] = []
    for group in alias_groups:
        if len(group) == 1:
            alias_pairs.append((group[0], group[0]))
        else:
            alias_pairs.extend(itertools.combinations(group, 2))
    triples = [
        Triple(subject=subject, predicate=predicate, object=obj, scene_index=scene.index, round=round)
        for subjects, predicate, obj in edge_rows
        for subject in subjects
    ]
    return ExtractionResult(
        scene_index=scene.index,
        round=round,
        alias_pairs=alias_pairs,
        triples=triples,
        skipped_lines=skipped,
    )


def select_edges(triples: Sequence[Triple], names: NamesGraph, tau: int) -> CharacterKG:
    """Keep canonicalized predicates whose frequency reaches the threshold.

    Subjects and objects are resolved through the names graph; triples that
    mention an unknown character are dropped. Predicate identity for
    counting is case-insensitive after whitespace normalization; the first
    observed raw form is kept for display. Predicates of an edge are
    ordered by first occurrence (scene, then round, then input position),
    which preserves temporal narrative shifts.
    """
    if tau < 1:
        raise InvalidParams("tau must be >= 1")
    counts: dict[tuple[str, str, str], int] = {}
    first_occ: dict[tuple[str, str, str], tuple[int, int, int]] = {}
    display: dict[tuple[str, str, str], str] = {}

    for seq, triple in enumerate(triples):
        subject_key = names.canonical_for(triple.subject)
        if subject_key is None:
            continue
        if triple.is_self_loop():
            object_key = subject_key
        else:
            object_key = names.canonical_for(triple.object)  # type: ignore[arg-type]
            if object_key is None:
                continue
        pred_norm = _norm_predicate(triple.predicate)
        if not pred_norm:
            continue
        key = (subject_key, object_key, pred_norm)
        occurrence = (triple.scene_index, triple.round, seq)
        counts[key] = counts.get(key, 0) + 1
        if key not in first_occ or occurrence < first_occ[key]:
            first_occ[key] = occurrence
            display[key] = _norm_name(triple.predicate)

    edges: dict[tuple[str, str], tuple[PredicateEdge, ...]] = {}
    grouped: dict[tuple[str, str], list[tuple[str, str, str]]] = {}
    for key, freq in counts.items():
        if freq >= tau:
            grouped.setdefault((key[0], key[1]), []).append(key)
    for pair, keys in grouped.items():
        keys.sort(key=lambda k: first_occ[k])
        edges[pair] = tuple(
            PredicateEdge(predicate=display[k], freq=counts[k], first_scene=first_occ[k][0])
            for k in keys
        )

    nodes = {
        cluster.key: CharacterNode(
            key=cluster.key,
            display=cluster.display,
            aliases=cluster.aliases,
            first_scene=cluster.first_scene,
        )
        for cluster in names.clusters
    }
    return CharacterKG(nodes=nodes, edges=edges, tau=tau)


def build_ckg(
    provider: Provider,
    narrative: Narrative,
    rounds: int = 3,
    tau: int | None = None,
    temperature: float = 0.7,
    diagnostics: list[str] | None = None,
) -> CharacterKG:
    """Extract triples for every scene over several sampling rounds and
    keep the relationships that recur at least `tau` times.

    tau defaults to a majority of the rounds. rounds=1 with tau=1 is the
    single-pass variant without the consistency filter.
    """
    if rounds < 1:
        raise InvalidParams("rounds must be >= 1")
    effective_tau = tau if tau is not None else max(1, -(-rounds // 2))
    results: list[ExtractionResult] = []
    for round_index in range(rounds):
        for scene in narrative.scenes:
            results.append(extract_scene_triples(provider, scene, round_index, temperature))

    # Alias decisions are unioned globally across scenes and rounds, merged
    # in scene order so first occurrences follow the narrative.
    results.sort(key=lambda r: (r.scene_index, r.round))
    alias_pairs: list[tuple[str, str]] = []
    first_scenes: dict[str, int] = {}
    triples: list[Triple] = []
    skipped_total = 0
    for result in results:
        for a, b in result.alias_pairs:
            alias_pairs.append((a, b))
            for name in (_norm_name(a), _norm_name(b)):
                if name and name not in first_scenes:
                    first_scenes[name] = result.scene_index
        triples.extend(result.triples)
        skipped_total += len(result.skipped_lines)
        if diagnostics is not None:
            for line in result.skipped_lines:
                diagnostics.append(
                    f"scene {result.scene_index} round {result.round}: skipped edge line {line!r}"
                )
    if diagnostics is not None and skipped_total:
        diagnostics.append(f"{skipped_total} edge lines failed the grammar and were skipped")

    names = build_names_graph(alias_pairs, first_scenes)
    triples.sort(key=lambda t: (t.scene_index, t.round))
    return select_edges(triples, names, effective_tau)


def render_triple(subject: str, obj: str, predicate: str) -> str:
    """Plain-text form of one predicate unit: "s p o", or "s p" for states."""
    if subject == obj:
        return f"{subject} {predicate}"
    return f"{subject} {predicate} {obj}"


def iter_triple_renderings(graph: CharacterKG) -> list[str]:
    """Every stored predicate as one rendering, in linearization order."""
    renderings: list[str] = []
    ordered = graph.ordered_node_keys()
    for subject in ordered:
        self_edge = graph.edges.get((subject, subject))
        if self_edge:
            renderings.extend(render_triple(subject, subject, p.predicate) for p in self_edge)
        for obj in ordered:
            if obj == subject:
                continue
            edge = graph.edges.get((subject, obj))
            if edge:
                renderings.extend(render_triple(subject, obj, p.predicate) for p in edge)
    return renderings


def linearize(graph: CharacterKG) -> str:
    """Render the graph as deterministic subject/object/predicate lines.

    Subjects and objects are ordered by (first-occurrence scene, then key);
    a subject's self-loop states come first as a bare predicate line, then
    each object with its temporally ordered predicates. Subjects without
    stored edges are omitted; the empty graph renders as empty text.
    """
    ordered = graph.ordered_node_keys()
    lines: list[str] = []
    for subject in ordered:
        self_edge = graph.edges.get((subject, subject))
        object_keys = [
            o for o in ordered if o != subject and (subject, o) in graph.edges
        ]
        if not self_edge and not object_keys:
            continue
        lines.append(f"<subject>{subject}")
        if self_edge:
            lines.append("    <predicate>" + ", ".join(p.predicate for p in self_edge))
        for obj in object_keys:
            lines.append(f"  <object>{obj}")
            lines.append(
                "    <predicate>" + ", ".join(p.predicate for p in graph.edges[(subject, obj)])
            )
    return "\n".join(lines)
