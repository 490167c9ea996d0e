import type { ApiClient } from "./api.js";
import { ACTION_LABELS, enabledActions, hasPendingJob } from "./gating.js";
import type { Action, RunView } from "./types.js";

/**
 * The four pipeline buttons. Buttons outside the run's stage are disabled;
 * while a job is pending everything is disabled and progress is shown. A
 * click issues exactly one POST action and immediately disables the panel
 * until the next poll repaints it.
 */
export function renderControls(
  container: HTMLElement,
  run: RunView,
  api: ApiClient,
  onSubmitted?: (jobId: string) => void,
  onError?: (message: string) => void,
): void {
  container.innerHTML = "";
  const enabled = new Set(enabledActions(run));
  const panel = document.createElement("div");
  panel.className = "controls";

  (Object.keys(ACTION_LABELS) as Action[]).forEach((action) => {
    const button = document.createElement("button");
    button.textContent = ACTION_LABELS[action];
    button.dataset.action = action;
    button.disabled = !enabled.has(action);
    button.addEventListener("click", () => {
      panel.querySelectorAll("button").forEach((b) => (b.disabled = true));
      api
        .postAction(run.run_id, action)
        .then((body) => onSubmitted?.(body.job_id))
        .catch((err) => onError?.(String(err)));
    });
    panel.appendChild(button);
  });
  container.appendChild(panel);

  if (hasPendingJob(run)) {
    const progress = document.createElement("div");
    progress.className = "job-progress";
    const pending = Object.values(run.jobs).find((j) => j.status === "pending");
    progress.textContent = `Working: ${pending ? ACTION_LABELS[pending.action] : "job"}…`;
    container.appendChild(progress);
  }
}
