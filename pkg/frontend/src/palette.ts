// Client-side palette identical to the server's documented default, so
// raw tiles render the same pixels as server PNG / CLI exports:
// bounded cells black; escaped cells take t = log1p(rate) with channels
// round(127.5 * (1 - cos(f * t))), f = (2.0, 3.5, 5.0).

import type { TileData } from './types';

export const STATUS_BOUNDED = 0;
export const STATUS_ESCAPED = 1;
export const PARAM_CONNECTED = 0;
export const PARAM_DISCONNECTED = 1;
export const PARAM_UNDECIDED = 2;

const PARAM_COLORS: Record<number, [number, number, number]> = {
  [PARAM_CONNECTED]: [40, 40, 200],
  [PARAM_DISCONNECTED]: [235, 235, 235],
  [PARAM_UNDECIDED]: [160, 40, 40],
};

export function escapeColor(rate: number): [number, number, number] {
  const t = Math.log1p(Math.max(rate, 0));
  const chan = (f: number) => Math.round(127.5 * (1 - Math.cos(f * t)));
  return [chan(2.0), chan(3.5), chan(5.0)];
}

export function tileToRgba(tile: TileData, kind: 'dyn' | 'param'): Uint8ClampedArray<ArrayBuffer> {
  const { w, h, rates, status } = tile;
  const out = new Uint8ClampedArray(new ArrayBuffer(w * h * 4));
  for (let row = 0; row < h; row++) {
    // HSLC rows start at the y0 edge; canvases draw top-down
    const src = (h - 1 - row) * w;
    for (let col = 0; col < w; col++) {
      const i = src + col;
      let rgb: [number, number, number] = [0, 0, 0];
      if (kind === 'param') {
        rgb = PARAM_COLORS[status[i]] ?? [0, 0, 0];
      } else if (status[i] === STATUS_ESCAPED) {
        rgb = escapeColor(rates[i]);
      }
      const dst = (row * w + col) * 4;
      out[dst] = rgb[0];
      out[dst + 1] = rgb[1];
      out[dst + 2] = rgb[2];
      out[dst + 3] = 255;
    }
  }
  return out;
}
