// Service JSON shapes. The UI derives everything from these; it performs
// no pipeline logic of its own.

export type Stage = "loaded" | "graph_built" | "summarized" | "scored" | "refined";
export type Action = "build_graph" | "summarize" | "score" | "refine";
export type JobStatus = "pending" | "done" | "failed";

export interface PredicateView {
  predicate: string;
  freq: number;
  first_scene: number | null;
}

export interface GraphNodeView {
  key: string;
  display: string;
  aliases: string[];
  first_scene: number | null;
}

export interface GraphEdgeView {
  subject: string;
  object: string;
  predicates: PredicateView[];
}

export interface GraphView {
  tau: number;
  nodes: GraphNodeView[];
  edges: GraphEdgeView[];
}

export interface EvidenceView {
  scene_index: number;
  scene_score: number;
  triples: { rendering: string; score: number }[];
}

export interface VerdictView {
  fact: {
    index: number;
    text: string;
    source_sentence: number;
    source_chunk: number | null;
  };
  factual: boolean;
  feedback: string | null;
  evidence: EvidenceView;
}

export interface ReportView {
  score: number;
  score_exact: string;
  z: number;
  iteration: number;
  verdicts: VerdictView[];
  diagnostics: string[];
}

export interface DraftView {
  id: string;
  iteration: number;
  text: string;
  sentences: { text: string; chunk: number | null }[];
  lineage: string | null;
  diagnostics: string[];
}

export interface JobView {
  job_id: string;
  action: Action;
  status: JobStatus;
  error: string | null;
  created_at: string;
  finished_at: string | null;
}

export interface RunView {
  run_id: string;
  stage: Stage;
  narrative: { id: string; title: string; scene_count: number };
  config: Record<string, unknown>;
  graph: GraphView | null;
  drafts: DraftView[];
  reports: ReportView[];
  steps: unknown[];
  diagnostics: string[];
  jobs: Record<string, JobView>;
  created_at: string;
  updated_at: string;
}

export interface RunSummaryView {
  run_id: string;
  stage: Stage;
  title: string;
  updated_at: string;
}
