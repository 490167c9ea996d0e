// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderControls } from "../src/controls.js";
import { jsonResponse, runAtStage } from "./fixtures.js";

function recordingClient() {
  const posts: { url: string; body: unknown }[] = [];
  const api = new ApiClient("http://svc", async (url, init) => {
    if (init?.method === "POST") {
      posts.push({ url, body: JSON.parse(String(init.body)) });
      return jsonResponse({ job_id: "job1", run_id: "abcd1234", action: "refine" }, 202);
    }
    return jsonResponse({ runs: [] });
  });
  return { api, posts };
}

describe("action controls", () => {
  it("clicking Refine Summary issues exactly one POST action", async () => {
    const { api, posts } = recordingClient();
    const host = document.createElement("div");
    renderControls(host, runAtStage("scored"), api);

    const refine = host.querySelector<HTMLButtonElement>('button[data-action="refine"]')!;
    expect(refine.disabled).toBe(false);
    refine.click();
    await Promise.resolve();

    expect(posts.length).toBe(1);
    expect(posts[0].url).toBe("http://svc/runs/abcd1234/actions");
    expect(posts[0].body).toEqual({ action: "refine" });
    // the panel locks immediately after the click, so a double click cannot
    // fire a second request
    expect(refine.disabled).toBe(true);
    refine.click();
    await Promise.resolve();
    expect(posts.length).toBe(1);
  });

  it("disables out-of-stage controls", () => {
    const { api } = recordingClient();
    const host = document.createElement("div");
    renderControls(host, runAtStage("loaded"), api);
    const buttons = [...host.querySelectorAll<HTMLButtonElement>("button")];
    const byAction = Object.fromEntries(buttons.map((b) => [b.dataset.action, b.disabled]));
    expect(byAction).toEqual({
      build_graph: false,
      summarize: true,
      score: true,
      refine: true,
    });
  });

  it("shows progress and disables everything while a job is pending", () => {
    const { api } = recordingClient();
    const host = document.createElement("div");
    const run = runAtStage("graph_built", {
      jobs: {
        j1: {
          job_id: "j1",
          action: "summarize",
          status: "pending",
          error: null,
          created_at: "",
          finished_at: null,
        },
      },
    });
    renderControls(host, run, api);
    expect([...host.querySelectorAll<HTMLButtonElement>("button")].every((b) => b.disabled)).toBe(true);
    expect(host.querySelector(".job-progress")?.textContent).toContain("Generate Initial Summary");
  });

  it("surfaces a submitted job id through the callback", async () => {
    const { api } = recordingClient();
    const host = document.createElement("div");
    const submitted: string[] = [];
    renderControls(host, runAtStage("scored"), api, (jobId) => submitted.push(jobId));
    host.querySelector<HTMLButtonElement>('button[data-action="score"]')!.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(submitted).toEqual(["job1"]);
  });
});
