import type { ReportView, RunView, VerdictView } from "./types.js";

/**
 * Verdict list for the latest report: every fact gets a row, and each
 * non-factual verdict becomes a feedback card with the judge's reason and
 * its evidence pointers. Selecting a card reports its evidence renderings
 * so the graph view can highlight them.
 */
export function renderVerdicts(
  container: HTMLElement,
  report: ReportView | null,
  onSelectEvidence?: (renderings: string[]) => void,
): void {
  container.innerHTML = "";
  if (!report) {
    const empty = document.createElement("div");
    empty.className = "empty-state";
    empty.textContent = "No factuality report yet.";
    container.appendChild(empty);
    return;
  }

  const headline = document.createElement("div");
  headline.className = "score-headline";
  headline.textContent = `NarrativeFactScore ${(report.score * 100).toFixed(1)}% (${report.score_exact})`;
  container.appendChild(headline);

  const list = document.createElement("ul");
  list.className = "verdict-list";
  for (const verdict of report.verdicts) {
    list.appendChild(verdictItem(verdict, onSelectEvidence));
  }
  container.appendChild(list);
}

function verdictItem(
  verdict: VerdictView,
  onSelectEvidence?: (renderings: string[]) => void,
): HTMLLIElement {
  const item = document.createElement("li");
  item.className = verdict.factual ? "verdict true" : "verdict false feedback-card";
  item.dataset.factIndex = String(verdict.fact.index);

  const fact = document.createElement("div");
  fact.className = "fact-text";
  fact.textContent = `[${verdict.fact.index}] ${verdict.fact.text}`;
  item.appendChild(fact);

  const badge = document.createElement("span");
  badge.className = "badge";
  badge.textContent = verdict.factual ? "True" : "False";
  item.appendChild(badge);

  if (!verdict.factual) {
    const feedback = document.createElement("div");
    feedback.className = "feedback";
    feedback.textContent = verdict.feedback ?? "";
    item.appendChild(feedback);

    const evidence = document.createElement("div");
    evidence.className = "evidence";
    const triples = verdict.evidence.triples.map((t) => t.rendering);
    evidence.textContent =
      `evidence scene #${verdict.evidence.scene_index}` +
      (triples.length ? ` · ${triples.join(" | ")}` : "");
    item.appendChild(evidence);

    if (onSelectEvidence) {
      item.addEventListener("click", () => onSelectEvidence(triples));
    }
  }
  return item;
}

/** Score-per-iteration trail so the operator can judge whether to refine again. */
export function renderScoreTrajectory(container: HTMLElement, run: RunView): void {
  container.innerHTML = "";
  if (run.reports.length === 0) {
    return;
  }
  const trail = document.createElement("ol");
  trail.className = "score-trajectory";
  run.reports.forEach((report, i) => {
    const entry = document.createElement("li");
    entry.textContent = `#${i}: ${(report.score * 100).toFixed(1)}%`;
    trail.appendChild(entry);
  });
  container.appendChild(trail);
}
