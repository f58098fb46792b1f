/** Advisor parity: replaying the recorded timelines through the client must
 * surface exactly the service's recommendations, never a local computation.
 * The fixtures are recorded from the live service and pinned by a test on
 * the Python side, so agreement here is end-to-end agreement. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { AdvisorApi } from "../src/api.js";
import { SessionController } from "../src/session.js";
import type { ModelSpec, Recommendation } from "../src/types.js";
import { replayFetch, type Fixture } from "./replay.js";

const here = dirname(fileURLToPath(import.meta.url));

function loadFixture(name: string): Fixture {
  return JSON.parse(readFileSync(join(here, "..", "fixtures", `${name}.json`), "utf8"));
}

async function replayThroughClient(fixture: Fixture) {
  const api = new AdvisorApi("http://advisor.test", replayFetch(fixture));
  const controller = new SessionController(api);
  let view = await controller.configure(fixture.model as unknown as ModelSpec);
  expect(view.error).toBeNull();
  const shown: Recommendation[] = [view.recommendation!];
  for (const step of fixture.steps) {
    view = await controller.recordObservation(step.observe as 0 | 1);
    expect(view.error).toBeNull();
    shown.push(view.recommendation!);
  }
  return { view, shown };
}

describe("advisor parity via recorded fixtures", () => {
  it("secretary n=10: continue through 3, stop on the record at 4", async () => {
    const fixture = loadFixture("secretary10");
    const { view, shown } = await replayThroughClient(fixture);
    expect(shown[0]).toEqual(fixture.initial_recommendation);
    fixture.steps.forEach((step, i) => {
      expect(shown[i + 1]).toEqual(step.recommendation); // verbatim, no local math
    });
    expect(shown.slice(1).map((r) => r.action)).toEqual([
      "continue",
      "continue",
      "continue",
      "stop",
    ]);
    expect(view.recommendation!.threshold).toBe(4);
  });

  it("dice 10/6: act from throw 6", async () => {
    const fixture = loadFixture("dice10x6");
    const { view, shown } = await replayThroughClient(fixture);
    fixture.steps.forEach((step, i) => {
      expect(shown[i + 1]).toEqual(step.recommendation);
    });
    expect(shown.slice(1).map((r) => r.action)).toEqual([
      "continue",
      "continue",
      "continue",
      "continue",
      "continue", // a six on throw 5 is still before the window
      "stop", // the six on throw 6 is taken
    ]);
    expect(view.recommendation!.threshold).toBe(6);
  });

  it("keeps the timeline strictly append-only across the replay", async () => {
    const fixture = loadFixture("secretary10");
    const api = new AdvisorApi("http://advisor.test", replayFetch(fixture));
    const controller = new SessionController(api);
    await controller.configure(fixture.model as unknown as ModelSpec);
    let previous = controller.view.timeline;
    for (const step of fixture.steps) {
      const view = await controller.recordObservation(step.observe as 0 | 1);
      expect(view.timeline.length).toBe(previous.length + 1);
      previous.forEach((entry, i) => expect(view.timeline[i]).toEqual(entry));
      previous = view.timeline;
    }
  });
});
