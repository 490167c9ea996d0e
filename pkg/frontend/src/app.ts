import { ApiClient } from "./api.js";
import { renderScoreTrajectory, renderVerdicts } from "./cards.js";
import { renderControls } from "./controls.js";
import { hasPendingJob } from "./gating.js";
import { highlightTriples, renderGraph } from "./graph.js";
import type { RunView } from "./types.js";

/** Re-fetches a run until no job is pending; all state stays server-side. */
export class RunPoller {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private api: ApiClient,
    private runId: string,
    private onUpdate: (run: RunView) => void,
    private intervalMs = 1000,
  ) {}

  async tick(): Promise<void> {
    const run = await this.api.getRun(this.runId);
    this.onUpdate(run);
    if (!hasPendingJob(run)) {
      this.stop();
    }
  }

  start(): void {
    if (this.timer) return;
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}

interface Panels {
  runs: HTMLElement;
  narrative: HTMLElement;
  controls: HTMLElement;
  graph: HTMLElement;
  summary: HTMLElement;
  verdicts: HTMLElement;
  trajectory: HTMLElement;
  status: HTMLElement;
}

function panel(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

export function mountApp(root: Document = document): void {
  const params = new URLSearchParams(root.defaultView?.location.search ?? "");
  const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8040");
  const panels: Panels = {
    runs: panel("runs"),
    narrative: panel("narrative"),
    controls: panel("controls"),
    graph: panel("graph"),
    summary: panel("summary"),
    verdicts: panel("verdicts"),
    trajectory: panel("trajectory"),
    status: panel("status"),
  };
  let poller: RunPoller | null = null;

  const showError = (message: string) => {
    panels.status.textContent = message;
    panels.status.className = "status error";
  };

  const paint = (run: RunView) => {
    panels.status.textContent = `stage: ${run.stage}`;
    panels.status.className = "status";
    panels.narrative.textContent = `${run.narrative.title} — ${run.narrative.scene_count} scenes`;
    renderControls(panels.controls, run, api, () => watch(run.run_id), showError);
    renderGraph(panels.graph, run.graph);
    panels.summary.textContent = run.drafts.length
      ? run.drafts[run.drafts.length - 1].text
      : "No summary yet.";
    renderVerdicts(
      panels.verdicts,
      run.reports.length ? run.reports[run.reports.length - 1] : null,
      (renderings) => highlightTriples(panels.graph, renderings),
    );
    renderScoreTrajectory(panels.trajectory, run);
  };

  const watch = (runId: string) => {
    poller?.stop();
    poller = new RunPoller(api, runId, paint);
    poller.start();
  };

  const refreshRunList = async () => {
    try {
      const runs = await api.listRuns();
      panels.runs.innerHTML = "";
      for (const run of runs) {
        const button = document.createElement("button");
        button.className = "run-entry";
        button.textContent = `${run.run_id} · ${run.title || "untitled"} · ${run.stage}`;
        button.addEventListener("click", () => watch(run.run_id));
        panels.runs.appendChild(button);
      }
      if (runs.length === 0) {
        panels.runs.textContent = "No runs yet. Create one with the CLI: narrafact ingest <file>";
      }
    } catch (err) {
      showError(`cannot reach service: ${String(err)}`);
    }
  };

  void refreshRunList();
  const requested = params.get("run");
  if (requested) {
    watch(requested);
  }
}

declare global {
  interface Window {
    __NARRAFACT_NO_AUTOMOUNT?: boolean;
  }
}

if (typeof window !== "undefined" && !window.__NARRAFACT_NO_AUTOMOUNT) {
  window.addEventListener("DOMContentLoaded", () => mountApp());
}
