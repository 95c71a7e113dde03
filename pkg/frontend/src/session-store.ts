/** UI-side session state machine.
 *
 * Every mutation round-trips through the service and replaces the local
 * session snapshot with the authoritative response, so the stack list and
 * key-pair badge can never drift from the engine. Previews are fetched (and
 * only fetched) from /preview, keyed by the service-reported revision.
 */

import { GradingApi } from "./api.js";
import { PreviewCache } from "./preview-cache.js";
import { ApiError, FeedbackResponse, SessionState } from "./types.js";

export interface PendingConfirm {
  matched: string;
  similarity: number;
  /** history index to undo back to if the user rejects the weak match */
  undoTo: number;
}

export interface StudioView {
  session: SessionState | null;
  cursor: number;
  previewBytes: Uint8Array | null;
  busy: boolean;
  error: string | null;
  /** prompt preserved for editing after an unmatchable-prompt rejection */
  rejectedPrompt: string | null;
  pendingConfirm: PendingConfirm | null;
}

type Listener = (view: StudioView) => void;

export class SessionStore {
  private view: StudioView = {
    session: null,
    cursor: 0,
    previewBytes: null,
    busy: false,
    error: null,
    rejectedPrompt: null,
    pendingConfirm: null,
  };
  private listeners: Listener[] = [];
  private previewAbort: AbortController | null = null;
  private mutationInFlight = false;

  constructor(
    private readonly api: GradingApi,
    private readonly cache = new PreviewCache(),
  ) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.view);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  get current(): StudioView {
    return this.view;
  }

  private emit(patch: Partial<StudioView>): void {
    this.view = { ...this.view, ...patch };
    for (const listener of this.listeners) listener(this.view);
  }

  private async mutate<T extends SessionState>(op: () => Promise<T>): Promise<T | null> {
    if (this.mutationInFlight) return null;
    this.mutationInFlight = true;
    this.emit({ busy: true, error: null });
    try {
      const state = await op();
      this.emit({ session: state, busy: false });
      await this.refreshPreview();
      return state;
    } catch (err) {
      this.emit({ busy: false, error: err instanceof Error ? err.message : String(err) });
      return null;
    } finally {
      this.mutationInFlight = false;
    }
  }

  async create(): Promise<void> {
    await this.mutate(() => this.api.createSession());
  }

  async uploadInput(archive: Blob, fps = 24): Promise<void> {
    const id = this.requireId();
    await this.mutate(() => this.api.uploadInput(id, archive, fps));
  }

  async uploadReference(payload: Blob, fps = 24): Promise<void> {
    const id = this.requireId();
    await this.mutate(() => this.api.uploadReference(id, payload, fps));
  }

  async grade(): Promise<void> {
    const id = this.requireId();
    await this.mutate(() => this.api.grade(id));
  }

  async feedback(prompt: string): Promise<void> {
    const id = this.requireId();
    const before = this.view.session?.history.length ?? 0;
    const result = (await this.mutate(() => this.api.feedback(id, prompt))) as
      | FeedbackResponse
      | null;
    if (result === null) {
      // unmatchable prompts keep the text around for editing
      if (this.view.error !== null) this.emit({ rejectedPrompt: prompt });
      return;
    }
    this.emit({ rejectedPrompt: null });
    if (result.low_confidence) {
      this.emit({
        pendingConfirm: {
          matched: result.matched,
          similarity: result.similarity,
          undoTo: before,
        },
      });
    }
  }

  /** Resolve a low-confidence match: keep it or roll back to the prior state. */
  async confirmPending(keep: boolean): Promise<void> {
    const pending = this.view.pendingConfirm;
    if (!pending) return;
    this.emit({ pendingConfirm: null });
    if (!keep) await this.undo(pending.undoTo);
  }

  async undo(toIndex: number): Promise<void> {
    const id = this.requireId();
    await this.mutate(() => this.api.undo(id, toIndex));
  }

  async scrub(frame: number): Promise<void> {
    const session = this.view.session;
    if (!session) return;
    const clamped = Math.max(0, Math.min(frame, session.input_frames - 1));
    this.emit({ cursor: clamped });
    await this.refreshPreview();
  }

  async refreshPreview(): Promise<void> {
    const session = this.view.session;
    if (!session || session.status !== "graded") {
      this.emit({ previewBytes: null });
      return;
    }
    const { revision } = session;
    const frame = this.view.cursor;
    const cached = this.cache.get(revision, frame);
    if (cached !== undefined) {
      this.emit({ previewBytes: cached });
      return;
    }
    this.previewAbort?.abort();
    const abort = new AbortController();
    this.previewAbort = abort;
    try {
      const bytes = await this.api.preview(session.id, frame, abort.signal);
      this.cache.put(revision, frame, bytes);
      if (!abort.signal.aborted) this.emit({ previewBytes: bytes });
    } catch (err) {
      if (err instanceof ApiError) this.emit({ error: err.message });
      // aborted fetches fall through silently
    }
  }

  private requireId(): string {
    const id = this.view.session?.id;
    if (!id) throw new Error("no session yet; call create() first");
    return id;
  }
}
