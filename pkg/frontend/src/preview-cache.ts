/** Small LRU for preview bytes keyed by (stack revision, frame index), so a
 * feedback or undo (which bumps the revision) never serves stale frames. */

export class PreviewCache {
  private readonly entries = new Map<string, Uint8Array>();

  constructor(private readonly capacity = 48) {}

  private key(revision: number, frame: number): string {
    return `${revision}:${frame}`;
  }

  get(revision: number, frame: number): Uint8Array | undefined {
    const key = this.key(revision, frame);
    const hit = this.entries.get(key);
    if (hit !== undefined) {
      this.entries.delete(key);
      this.entries.set(key, hit); // refresh recency
    }
    return hit;
  }

  put(revision: number, frame: number, bytes: Uint8Array): void {
    const key = this.key(revision, frame);
    this.entries.delete(key);
    this.entries.set(key, bytes);
    while (this.entries.size > this.capacity) {
      const oldest = this.entries.keys().next().value as string;
      this.entries.delete(oldest);
    }
  }

  get size(): number {
    return this.entries.size;
  }
}
