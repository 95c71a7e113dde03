import { describe, expect, it } from "vitest";

import { PreviewCache } from "../src/preview-cache.js";

const bytes = (n: number) => new Uint8Array([n, n + 1]);

describe("preview cache", () => {
  it("is keyed by (revision, frame)", () => {
    const cache = new PreviewCache(8);
    cache.put(1, 0, bytes(10));
    cache.put(2, 0, bytes(20));
    expect(cache.get(1, 0)).toEqual(bytes(10));
    expect(cache.get(2, 0)).toEqual(bytes(20));
    expect(cache.get(3, 0)).toBeUndefined();
  });

  it("evicts the least recently used entry", () => {
    const cache = new PreviewCache(2);
    cache.put(1, 0, bytes(0));
    cache.put(1, 1, bytes(1));
    cache.get(1, 0); // refresh frame 0
    cache.put(1, 2, bytes(2)); // evicts frame 1
    expect(cache.get(1, 0)).toEqual(bytes(0));
    expect(cache.get(1, 1)).toBeUndefined();
    expect(cache.get(1, 2)).toEqual(bytes(2));
    expect(cache.size).toBe(2);
  });

  it("replaces entries for the same key", () => {
    const cache = new PreviewCache(2);
    cache.put(1, 0, bytes(0));
    cache.put(1, 0, bytes(9));
    expect(cache.get(1, 0)).toEqual(bytes(9));
    expect(cache.size).toBe(1);
  });
});
