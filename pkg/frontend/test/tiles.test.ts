import { describe, expect, it, vi } from 'vitest';

import {
  BASE_SPAN,
  debounce,
  levelForWindow,
  TILE_PX,
  TileCache,
  tileKey,
  tileRect,
  tileSpan,
  visibleTiles,
} from '../src/tiles';
import { DEFAULT_STATE } from '../src/types';

describe('tile pyramid', () => {
  it('level matches screen resolution', () => {
    // window of width BASE_SPAN on a TILE_PX canvas wants level 0
    const level = levelForWindow({ x0: 0, y0: 0, x1: BASE_SPAN, y1: BASE_SPAN }, TILE_PX);
    expect(level).toBe(0);
    const finer = levelForWindow({ x0: 0, y0: 0, x1: BASE_SPAN / 4, y1: BASE_SPAN / 4 }, TILE_PX);
    expect(finer).toBe(2);
  });

  it('visible tiles cover the window', () => {
    const win = { x0: -10, y0: -10, x1: 10, y1: 10 };
    const level = 1; // span 16
    const tiles = visibleTiles(win, level, 'dyn');
    const span = tileSpan(level);
    expect(span).toBe(16);
    const minX = Math.min(...tiles.map((t) => tileRect(t).x0));
    const maxX = Math.max(...tiles.map((t) => tileRect(t).x1));
    expect(minX).toBeLessThanOrEqual(win.x0);
    expect(maxX).toBeGreaterThanOrEqual(win.x1);
  });

  it('pan by one tile width refetches only the new column', () => {
    const level = 2;
    const span = tileSpan(level);
    const win = { x0: 0, y0: 0, x1: 3 * span, y1: 2 * span };
    const before = new Set(
      visibleTiles(win, level, 'dyn').map((t) => tileKey(t, DEFAULT_STATE)));
    const panned = { x0: win.x0 + span, y0: win.y0, x1: win.x1 + span, y1: win.y1 };
    const after = visibleTiles(panned, level, 'dyn').map((t) => tileKey(t, DEFAULT_STATE));
    const missing = after.filter((k) => !before.has(k));
    // one new column of two tiles; everything else is already cached
    expect(missing.length).toBe(2);
    expect(after.length - missing.length).toBe(4);
  });

  it('dyn keys depend on the selected parameter, param keys do not', () => {
    const t = { plane: 'dyn' as const, level: 0, ix: 0, iy: 0 };
    const k1 = tileKey(t, { ...DEFAULT_STATE, a: 6 });
    const k2 = tileKey(t, { ...DEFAULT_STATE, a: 5 });
    expect(k1).not.toBe(k2);
    const p = { plane: 'param' as const, level: 0, ix: 0, iy: 0 };
    expect(tileKey(p, { ...DEFAULT_STATE, a: 6 }))
      .toBe(tileKey(p, { ...DEFAULT_STATE, a: 5 }));
  });
});

describe('tile cache', () => {
  const data = { w: 1, h: 1, rates: new Float32Array(1), status: new Uint8Array(1),
                 window: [0, 0, 1, 1] as [number, number, number, number] };

  it('stores and evicts LRU', () => {
    const cache = new TileCache(2);
    cache.put('a', data);
    cache.put('b', data);
    cache.get('a'); // refresh a
    cache.put('c', data); // evicts b
    expect(cache.has('a')).toBe(true);
    expect(cache.has('b')).toBe(false);
    expect(cache.has('c')).toBe(true);
  });

  it('generation bump marks newer views', () => {
    const cache = new TileCache(4);
    const g1 = cache.generation;
    const g2 = cache.bump();
    expect(g2).toBeGreaterThan(g1);
  });

  it('in-flight entries are present but empty', () => {
    const cache = new TileCache(4);
    cache.markInFlight('k');
    expect(cache.has('k')).toBe(true);
    expect(cache.get('k')).toBeNull();
  });
});

describe('debounce', () => {
  it('collapses bursts into the last call', () => {
    vi.useFakeTimers();
    const calls: number[] = [];
    const fn = debounce((x: number) => calls.push(x), 150);
    fn(1);
    fn(2);
    vi.advanceTimersByTime(100);
    fn(3);
    vi.advanceTimersByTime(149);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual([3]);
    vi.useRealTimers();
  });
});
