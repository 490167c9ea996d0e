// Scripted backend fixtures mirroring the service's JSON shapes.

import type {
  GraphView,
  ReportView,
  RunView,
  Stage,
  VerdictView,
} from "../src/types.js";

export const THREE_NODE_GRAPH: GraphView = {
  tau: 2,
  nodes: [
    { key: "Frodo", display: "Frodo / Frodo Baggins", aliases: ["Frodo", "Frodo Baggins"], first_scene: 0 },
    { key: "Gandalf", display: "Gandalf", aliases: ["Gandalf"], first_scene: 0 },
    { key: "Sauron", display: "Sauron", aliases: ["Sauron"], first_scene: 1 },
  ],
  edges: [
    { subject: "Frodo", object: "Frodo", predicates: [
      { predicate: "hobbit", freq: 3, first_scene: 0 },
      { predicate: "own Ring", freq: 3, first_scene: 0 },
    ] },
    { subject: "Frodo", object: "Gandalf", predicates: [{ predicate: "guided by", freq: 2, first_scene: 0 }] },
    { subject: "Frodo", object: "Sauron", predicates: [
      { predicate: "fear", freq: 3, first_scene: 3 },
      { predicate: "resist", freq: 2, first_scene: 20 },
    ] },
    { subject: "Gandalf", object: "Gandalf", predicates: [{ predicate: "wizard", freq: 3, first_scene: 0 }] },
    { subject: "Gandalf", object: "Frodo", predicates: [{ predicate: "ally of", freq: 2, first_scene: 0 }] },
    { subject: "Gandalf", object: "Sauron", predicates: [{ predicate: "enemy of", freq: 2, first_scene: 1 }] },
    { subject: "Sauron", object: "Frodo", predicates: [{ predicate: "pursue", freq: 2, first_scene: 2 }] },
  ],
};

function verdict(index: number, factual: boolean, text: string, feedback?: string): VerdictView {
  return {
    fact: { index, text, source_sentence: 0, source_chunk: 0 },
    factual,
    feedback: factual ? null : feedback ?? `The statement [${index}] is false.`,
    evidence: {
      scene_index: 38 + index,
      scene_score: 0.42,
      triples: factual
        ? []
        : [
            { rendering: "Frodo guided by Gandalf", score: 0.8 },
            { rendering: "Sauron pursue Frodo", score: 0.7 },
          ],
    },
  };
}

/** Twelve atomic facts with exactly [3] and [7] judged false. */
export const TWELVE_FACT_REPORT: ReportView = {
  score: 10 / 12,
  score_exact: "5/6",
  z: 12,
  iteration: 0,
  diagnostics: [],
  verdicts: Array.from({ length: 12 }, (_, i) =>
    verdict(
      i + 1,
      i + 1 !== 3 && i + 1 !== 7,
      `atomic fact number ${i + 1}`,
      i + 1 === 3
        ? "False, the Palantir is used by the other wizard."
        : "False, the moment is not peaceful.",
    ),
  ),
};

export function runAtStage(stage: Stage, overrides: Partial<RunView> = {}): RunView {
  const scored = stage === "scored" || stage === "refined";
  return {
    run_id: "abcd1234",
    stage,
    narrative: { id: "lighthouse", title: "The Lighthouse Keeper", scene_count: 3 },
    config: {},
    graph: stage === "loaded" ? null : THREE_NODE_GRAPH,
    drafts:
      stage === "loaded" || stage === "graph_built"
        ? []
        : [{ id: "draft-0", iteration: 0, text: "Summary text.", sentences: [], lineage: null, diagnostics: [] }],
    reports: scored ? [TWELVE_FACT_REPORT] : [],
    steps: [],
    diagnostics: [],
    jobs: {},
    created_at: "2026-01-01T00:00:00Z",
    updated_at: "2026-01-01T00:00:00Z",
    ...overrides,
  };
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
