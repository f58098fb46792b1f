/** DOM wiring: one active session per tab, state rendered from the
 * controller's view after every interaction. */

import { AdvisorApi } from "./api.js";
import { banner, buildModel, PRESETS } from "./presets.js";
import { SessionController } from "./session.js";
import type { SessionView } from "./session.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const state: { controller: SessionController | null } = { controller: null };

function percent(x: number | null | undefined): string {
  if (x === null || x === undefined) return "-";
  return `${(100 * x).toFixed(2)}%`;
}

function renderFields(): void {
  const kind = $<HTMLSelectElement>("model-kind").value;
  const preset = PRESETS[kind];
  const holder = $("model-fields");
  holder.innerHTML = "";
  for (const field of preset?.fields ?? []) {
    const label = document.createElement("label");
    label.textContent = field.label;
    const input = document.createElement("input");
    input.name = field.name;
    input.placeholder = field.placeholder;
    label.appendChild(input);
    holder.appendChild(label);
  }
}

function render(view: SessionView): void {
  $("config-error").textContent = view.error ?? "";
  const active = view.sessionId !== null;
  $("session-panel").style.display = active ? "block" : "none";
  if (!active) return;
  const summary = view.created!.model;
  $("session-banner").textContent = banner(summary);
  $("session-model").textContent =
    `${summary.kind}, horizon ${summary.n}` +
    (summary.threshold !== undefined ? `, threshold ${summary.threshold}` : "");

  const list = $("timeline");
  list.innerHTML = "";
  for (const entry of view.timeline) {
    const item = document.createElement("li");
    item.textContent =
      `#${entry.index}: ${entry.value ? "success" : "failure"} -> ` +
      `${entry.recommendation.action}`;
    list.appendChild(item);
  }

  const rec = view.recommendation;
  const panel = $("recommendation");
  panel.classList.toggle("stop", rec?.action === "stop");
  $("rec-action").textContent = rec ? rec.action.toUpperCase() : "-";
  $("rec-win-stop").textContent = percent(rec?.win_if_stop);
  $("rec-win-continue").textContent = percent(rec?.win_if_continue_estimate);
  $("rec-threshold").textContent = rec ? String(rec.threshold) : "-";
  const done = view.finished;
  $("forced-end").style.display = done ? "block" : "none";
  $<HTMLButtonElement>("record-success").disabled = done;
  $<HTMLButtonElement>("record-failure").disabled = done;
}

async function onConfigure(event: Event): Promise<void> {
  event.preventDefault();
  const kind = $<HTMLSelectElement>("model-kind").value;
  const values: Record<string, string> = {};
  for (const input of $("model-fields").querySelectorAll("input")) {
    values[input.name] = input.value;
  }
  const model = buildModel(kind, values);
  if (typeof model === "string") {
    $("config-error").textContent = model;
    return;
  }
  const api = new AdvisorApi($<HTMLInputElement>("service-url").value.replace(/\/$/, ""));
  state.controller = new SessionController(api);
  render(await state.controller.configure(model));
}

async function onRecord(value: 0 | 1): Promise<void> {
  if (!state.controller) return;
  render(await state.controller.recordObservation(value));
}

async function onDiscard(): Promise<void> {
  if (!state.controller) return;
  render(await state.controller.discard());
  state.controller = null;
  $("session-panel").style.display = "none";
}

export function start(): void {
  const select = $<HTMLSelectElement>("model-kind");
  for (const [kind, preset] of Object.entries(PRESETS)) {
    const option = document.createElement("option");
    option.value = kind;
    option.textContent = preset.label;
    select.appendChild(option);
  }
  select.addEventListener("change", renderFields);
  renderFields();
  $("configure-form").addEventListener("submit", (e) => void onConfigure(e));
  $("record-success").addEventListener("click", () => void onRecord(1));
  $("record-failure").addEventListener("click", () => void onRecord(0));
  $("discard-session").addEventListener("click", () => void onDiscard());
}

start();
