/** DOM rendering for the grading studio. All pixels shown on the graded side
 * come from /preview responses; the original side shows the uploaded files
 * verbatim via object URLs. */

import { GradingApi } from "./api.js";
import { SessionStore, StudioView } from "./session-store.js";

export interface StudioElements {
  root: HTMLElement;
  inputFile: HTMLInputElement;
  referenceFile: HTMLInputElement;
  gradeButton: HTMLButtonElement;
  keyPairBadge: HTMLElement;
  originalImage: HTMLImageElement;
  gradedImage: HTMLImageElement;
  scrubber: HTMLInputElement;
  promptInput: HTMLInputElement;
  promptButton: HTMLButtonElement;
  matchInfo: HTMLElement;
  stackList: HTMLUListElement;
  exportCube: HTMLAnchorElement;
  exportClip: HTMLAnchorElement;
  statusLine: HTMLElement;
  confirmBox: HTMLElement;
}

export function buildLayout(root: HTMLElement): StudioElements {
  root.innerHTML = `
    <header><h1>gradeforge studio</h1><p id="status"></p></header>
    <section class="uploads">
      <label>Input frames (zip) <input id="input-file" type="file" accept=".zip"></label>
      <label>Reference (png or zip) <input id="reference-file" type="file" accept=".png,.zip"></label>
      <button id="grade" disabled>Grade</button>
      <span id="key-pair" class="badge"></span>
    </section>
    <section class="viewer">
      <figure><img id="original" alt="original frame"><figcaption>original</figcaption></figure>
      <figure><img id="graded" alt="graded frame"><figcaption>graded</figcaption></figure>
    </section>
    <input id="scrubber" type="range" min="0" max="0" value="0" disabled>
    <section class="retouch">
      <input id="prompt" type="text" placeholder="e.g. increase contrast">
      <button id="send-prompt" disabled>Retouch</button>
      <span id="match-info"></span>
      <div id="confirm-box" hidden></div>
    </section>
    <section class="stack"><h2>LUT stack</h2><ul id="stack-list"></ul></section>
    <section class="exports">
      <a id="export-cube" download>Download .cube</a>
      <a id="export-clip" download>Download graded frames</a>
    </section>`;
  const get = <T extends HTMLElement>(id: string) =>
    root.querySelector<T>(`#${id}`)!;
  return {
    root,
    inputFile: get<HTMLInputElement>("input-file"),
    referenceFile: get<HTMLInputElement>("reference-file"),
    gradeButton: get<HTMLButtonElement>("grade"),
    keyPairBadge: get<HTMLElement>("key-pair"),
    originalImage: get<HTMLImageElement>("original"),
    gradedImage: get<HTMLImageElement>("graded"),
    scrubber: get<HTMLInputElement>("scrubber"),
    promptInput: get<HTMLInputElement>("prompt"),
    promptButton: get<HTMLButtonElement>("send-prompt"),
    matchInfo: get<HTMLElement>("match-info"),
    stackList: get<HTMLUListElement>("stack-list"),
    exportCube: get<HTMLAnchorElement>("export-cube"),
    exportClip: get<HTMLAnchorElement>("export-clip"),
    statusLine: get<HTMLElement>("status"),
    confirmBox: get<HTMLElement>("confirm-box"),
  };
}

export class StudioUi {
  private previewUrl: string | null = null;
  private originalUrls: string[] = [];

  constructor(
    private readonly els: StudioElements,
    private readonly store: SessionStore,
    private readonly api: GradingApi,
  ) {
    els.inputFile.addEventListener("change", () => this.onUpload("input"));
    els.referenceFile.addEventListener("change", () => this.onUpload("reference"));
    els.gradeButton.addEventListener("click", () => void this.store.grade());
    els.scrubber.addEventListener("input", () =>
      void this.store.scrub(Number(els.scrubber.value)),
    );
    els.promptButton.addEventListener("click", () => void this.onPrompt());
    store.subscribe((view) => this.render(view));
  }

  private async onUpload(kind: "input" | "reference"): Promise<void> {
    const input = kind === "input" ? this.els.inputFile : this.els.referenceFile;
    const file = input.files?.[0];
    if (!file) return;
    if (!this.store.current.session) await this.store.create();
    if (kind === "input") {
      await this.store.uploadInput(file);
    } else {
      await this.store.uploadReference(file);
    }
  }

  /** Register local object URLs for the original (left) pane. */
  setOriginalFrames(urls: string[]): void {
    this.originalUrls = urls;
    this.render(this.store.current);
  }

  private async onPrompt(): Promise<void> {
    const prompt = this.els.promptInput.value;
    if (!prompt.trim()) return;
    await this.store.feedback(prompt);
    if (this.store.current.error === null) this.els.promptInput.value = "";
  }

  private render(view: StudioView): void {
    const els = this.els;
    const session = view.session;
    els.statusLine.textContent = view.error
      ? `error: ${view.error}`
      : view.busy
        ? "working…"
        : session
          ? `session ${session.id} — ${session.status}`
          : "no session";

    els.gradeButton.disabled = !session || session.status === "created" || view.busy;
    els.promptButton.disabled = !session || session.status !== "graded" || view.busy;

    if (view.rejectedPrompt !== null) els.promptInput.value = view.rejectedPrompt;

    if (session?.key_pair) {
      const kp = session.key_pair;
      els.keyPairBadge.textContent =
        `key pair m=${kp.input_index} n=${kp.reference_index} ` +
        `cos=${kp.similarity.toFixed(3)}`;
    } else {
      els.keyPairBadge.textContent = "";
    }

    els.scrubber.disabled = !session || session.status !== "graded";
    if (session) {
      els.scrubber.max = String(Math.max(0, session.input_frames - 1));
      els.scrubber.value = String(view.cursor);
    }

    els.originalImage.src = this.originalUrls[view.cursor] ?? "";

    if (view.previewBytes) {
      if (this.previewUrl) URL.revokeObjectURL(this.previewUrl);
      this.previewUrl = URL.createObjectURL(
        new Blob([view.previewBytes.slice().buffer], { type: "image/png" }),
      );
      els.gradedImage.src = this.previewUrl;
    }

    els.stackList.innerHTML = "";
    session?.stack.forEach((entry, i) => {
      const li = document.createElement("li");
      li.textContent = `${i}: ${entry.name} (${entry.source})`;
      if (entry.source === "catalog") {
        const undo = document.createElement("button");
        undo.textContent = "undo to here";
        undo.addEventListener("click", () => void this.store.undo(i - 1));
        li.appendChild(undo);
      }
      els.stackList.appendChild(li);
    });

    const last = session?.history[session.history.length - 1];
    els.matchInfo.textContent = last
      ? `matched ${last.matched} (cos ${last.similarity.toFixed(3)}` +
        (last.runner_up ? `, runner-up ${last.runner_up})` : ")")
      : "";

    if (view.pendingConfirm) {
      els.confirmBox.hidden = false;
      els.confirmBox.innerHTML = "";
      const text = document.createElement("span");
      text.textContent =
        `Low-confidence match "${view.pendingConfirm.matched}" ` +
        `(cos ${view.pendingConfirm.similarity.toFixed(3)}). Keep it?`;
      const keep = document.createElement("button");
      keep.textContent = "Keep";
      keep.addEventListener("click", () => void this.store.confirmPending(true));
      const drop = document.createElement("button");
      drop.textContent = "Revert";
      drop.addEventListener("click", () => void this.store.confirmPending(false));
      els.confirmBox.append(text, keep, drop);
    } else {
      els.confirmBox.hidden = true;
    }

    if (session && session.status === "graded") {
      els.exportCube.href = this.api.exportCubeUrl(session.id);
      els.exportClip.href = this.api.exportClipUrl(session.id);
      els.exportCube.style.visibility = "visible";
      els.exportClip.style.visibility = "visible";
    } else {
      els.exportCube.style.visibility = "hidden";
      els.exportClip.style.visibility = "hidden";
    }
  }
}
