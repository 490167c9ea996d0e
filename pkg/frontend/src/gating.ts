import type { Action, RunView, Stage } from "./types.js";

export const ACTION_LABELS: Record<Action, string> = {
  build_graph: "Generate Knowledge Graph",
  summarize: "Generate Initial Summary",
  score: "Calculate Factuality Score",
  refine: "Refine Summary",
};

const LEGAL: Record<Action, Stage[]> = {
  build_graph: ["loaded"],
  summarize: ["graph_built"],
  score: ["summarized", "scored", "refined"],
  refine: ["scored", "refined"],
};

export function hasPendingJob(run: RunView): boolean {
  return Object.values(run.jobs).some((job) => job.status === "pending");
}

/** Controls legal at the run's stage; everything is disabled mid-job. */
export function enabledActions(run: RunView): Action[] {
  if (hasPendingJob(run)) {
    return [];
  }
  return (Object.keys(LEGAL) as Action[]).filter((action) =>
    LEGAL[action].includes(run.stage),
  );
}
