import { ApiClient, websocketUrl } from "./api.js";
import { ExplainControls } from "./controls.js";
import { LiveFeed, SocketLike } from "./feed.js";
import { loadPrefs, savePrefs } from "./prefs.js";
import { renderConnection, renderDetail, renderFeed } from "./render.js";
import { EventStore } from "./store.js";
import type { Descriptiveness, ExperienceLevel } from "./types.js";

const base = window.location.origin;
const api = new ApiClient(base);
const store = new EventStore();
const controls = new ExplainControls(api, store);
const prefs = loadPrefs(window.localStorage);

const feedEl = document.getElementById("feed")!;
const detailEl = document.getElementById("detail")!;
const connEl = document.getElementById("connection")!;
const levelEl = document.getElementById("level") as HTMLSelectElement;
const styleEl = document.getElementById("style") as HTMLSelectElement;
const explainBtn = document.getElementById("explain") as HTMLButtonElement;
const noticeEl = document.getElementById("notice")!;

levelEl.value = prefs.experience_level;
styleEl.value = prefs.descriptiveness;

function persistPrefs(): void {
  savePrefs(window.localStorage, {
    experience_level: levelEl.value as ExperienceLevel,
    descriptiveness: styleEl.value as Descriptiveness,
  });
}
levelEl.addEventListener("change", persistPrefs);
styleEl.addEventListener("change", persistPrefs);

explainBtn.addEventListener("click", async () => {
  const selected = store.selected();
  if (!selected) return;
  noticeEl.textContent = "requesting explanation…";
  const outcome = await controls.request(
    selected.event_id,
    levelEl.value as ExperienceLevel,
    styleEl.value as Descriptiveness,
  );
  if (outcome.ok && outcome.result?.error) {
    noticeEl.textContent = `degraded mode: ${outcome.result.error}`;
  } else if (outcome.pendingAttribution) {
    noticeEl.textContent = "attribution still pending for this event";
  } else if (!outcome.ok) {
    noticeEl.textContent = `explanation failed: ${outcome.message}`;
  } else {
    noticeEl.textContent = "";
  }
});

store.subscribe(() => {
  renderFeed(feedEl, store);
  renderDetail(detailEl, store.selected());
});

const feed = new LiveFeed({
  socketFactory: () => new WebSocket(websocketUrl(base)) as unknown as SocketLike,
  api,
  store,
  onState: (state) => renderConnection(connEl, state),
});
feed.start();
