import { GradingApi } from "./api.js";
import { SessionStore } from "./session-store.js";
import { buildLayout, StudioUi } from "./ui.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8742";

const api = new GradingApi(SERVICE_URL);
const store = new SessionStore(api);
const els = buildLayout(document.getElementById("app")!);
const ui = new StudioUi(els, store, api);

// show uploaded input frames on the original (left) pane without any color
// math: raw object URLs of the files the user picked
els.inputFile.addEventListener("change", async () => {
  const file = els.inputFile.files?.[0];
  if (!file) return;
  if (file.name.endsWith(".zip")) {
    // frame-accurate originals for zips would need an unzip; the studio
    // shows the graded pane only in that case
    ui.setOriginalFrames([]);
  } else {
    ui.setOriginalFrames([URL.createObjectURL(file)]);
  }
});
