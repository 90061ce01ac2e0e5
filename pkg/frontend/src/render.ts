// DOM rendering. Everything here derives from the store; no state of its own.

import { attributionPanels, Bar, sourceBadge } from "./attribution.js";
import type { ConnectionState } from "./feed.js";
import type { EventStore } from "./store.js";
import type { EventView } from "./types.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderConnection(target: HTMLElement, state: ConnectionState): void {
  target.textContent = state === "open" ? "live" : state;
  target.className = `conn conn-${state}`;
}

export function renderFeed(target: HTMLElement, store: EventStore): void {
  target.replaceChildren();
  const events = store.list();
  for (let i = events.length - 1; i >= 0; i--) {
    const event = events[i]!;
    const row = el("div", "event-row" + (store.selectedId === event.event_id ? " selected" : ""));
    row.dataset["eventId"] = event.event_id;
    row.append(
      el("span", "seq", `#${event.seq}`),
      el("span", `badge badge-${event.severity}`, event.severity),
      el("span", "cls", event.prediction.predicted_class),
      el(
        "span",
        "prob",
        (100 * (event.prediction.probabilities[event.prediction.predicted_index] ?? 0)).toFixed(1) + "%",
      ),
      el("span", "when", new Date(event.received_at * 1000).toLocaleTimeString()),
    );
    row.addEventListener("click", () => store.select(event.event_id));
    target.append(row);
  }
}

function renderBars(title: string, bars_: Bar[]): HTMLElement {
  const panel = el("div", "attr-panel");
  panel.append(el("h4", undefined, title));
  for (const bar of bars_) {
    const row = el("div", "bar-row");
    const label = el("span", "bar-label", bar.name);
    const track = el("div", "bar-track");
    const fill = el("div", `bar-fill ${bar.positive ? "pos" : "neg"}`);
    fill.style.width = `${Math.round(bar.width * 100)}%`;
    fill.title = bar.score.toPrecision(4);
    track.append(fill);
    row.append(label, track, el("span", "bar-badge", sourceBadge(bar.sources)));
    panel.append(row);
  }
  return panel;
}

export function renderDetail(target: HTMLElement, event: EventView | undefined): void {
  target.replaceChildren();
  if (!event) {
    target.append(el("p", "hint", "select an event"));
    return;
  }
  target.append(
    el("h3", undefined, `${event.prediction.predicted_class} (${event.severity})`),
    el("p", "meta", `event ${event.event_id} · seq ${event.seq} · model ${event.model_id.slice(0, 12)}`),
  );
  if (event.attribution) {
    const panels = attributionPanels(event.attribution);
    target.append(
      el("p", "meta", `shapley: ${panels.method} · lime R²: ${panels.surrogateR2.toFixed(3)}`),
      renderBars("top SHAP features", panels.shap),
      renderBars("top LIME features", panels.lime),
      renderBars("fused (union)", panels.fused),
    );
  } else {
    target.append(el("p", "pending", "attribution pending…"));
  }
  const expl = el("div", "explanation");
  if (event.explanation) {
    if (event.explanation.error) {
      expl.append(el("p", "degraded", `explanation unavailable: ${event.explanation.error}`));
    } else {
      expl.append(
        el("p", "meta", `${event.explanation.provider} · ${event.explanation.model_name} · hash ${event.explanation.prompt_hash.slice(0, 12)}`),
        el("pre", "expl-text", event.explanation.text),
      );
    }
  }
  target.append(expl);
}
