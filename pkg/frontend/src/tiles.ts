// Tile pyramid over the complex plane plus an LRU cache with request
// generations, so pans refetch only newly exposed tiles and stale
// responses never overwrite a newer view's tiles.

import type { Rect, TileData, ViewState } from './types';

export const TILE_PX = 256;
export const BASE_SPAN = 32; // world units covered by a level-0 tile

export interface TileAddress {
  plane: 'param' | 'dyn';
  level: number;
  ix: number;
  iy: number;
}

export function tileSpan(level: number): number {
  return BASE_SPAN / 2 ** level;
}

export function levelForWindow(window: Rect, canvasPx: number): number {
  // pick the level whose tile resolution best matches screen resolution
  const unitsPerPx = (window.x1 - window.x0) / canvasPx;
  const ideal = Math.log2(BASE_SPAN / (TILE_PX * unitsPerPx));
  return Math.max(0, Math.min(24, Math.round(ideal)));
}

export function visibleTiles(window: Rect, level: number,
                             plane: 'param' | 'dyn'): TileAddress[] {
  const span = tileSpan(level);
  const ix0 = Math.floor(window.x0 / span);
  const ix1 = Math.ceil(window.x1 / span);
  const iy0 = Math.floor(window.y0 / span);
  const iy1 = Math.ceil(window.y1 / span);
  const out: TileAddress[] = [];
  for (let iy = iy0; iy < iy1; iy++) {
    for (let ix = ix0; ix < ix1; ix++) {
      out.push({ plane, level, ix, iy });
    }
  }
  return out;
}

export function tileRect(t: TileAddress): Rect {
  const span = tileSpan(t.level);
  return { x0: t.ix * span, y0: t.iy * span, x1: (t.ix + 1) * span, y1: (t.iy + 1) * span };
}

export function tileKey(t: TileAddress, st: ViewState): string {
  // dyn tiles depend on the map parameters; the param plane is the fixed
  // real (a, b) rectangle and depends on nothing else
  const deps = t.plane === 'dyn'
    ? `a=${st.a};b=${st.b};saddle=${st.saddle};depth=${st.depth}`
    : 'real_ab';
  return `${t.plane}/${t.level}/${t.ix}/${t.iy}?${deps}`;
}

interface CacheEntry {
  data: TileData | null; // null while in flight
  generation: number;
}

export class TileCache {
  private entries = new Map<string, CacheEntry>();
  generation = 0;

  constructor(private capacity = 256) {}

  bump(): number {
    return ++this.generation;
  }

  get(key: string): TileData | null {
    const e = this.entries.get(key);
    if (!e) return null;
    this.entries.delete(key); // LRU refresh
    this.entries.set(key, e);
    return e.data;
  }

  has(key: string): boolean {
    return this.entries.has(key);
  }

  markInFlight(key: string): void {
    if (!this.entries.has(key)) {
      this.put(key, null);
    }
  }

  put(key: string, data: TileData | null): void {
    this.entries.delete(key);
    this.entries.set(key, { data, generation: this.generation });
    while (this.entries.size > this.capacity) {
      const oldest = this.entries.keys().next().value as string;
      this.entries.delete(oldest);
    }
  }

  size(): number {
    return this.entries.size;
  }
}

export function debounce<A extends unknown[]>(fn: (...args: A) => void,
                                              ms: number,
                                              timers: { set: typeof setTimeout; clear: typeof clearTimeout } =
                                              { set: setTimeout, clear: clearTimeout }) {
  let handle: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (handle !== null) timers.clear(handle);
    handle = timers.set(() => {
      handle = null;
      fn(...args);
    }, ms);
  };
}
