// URL builders for the tile service; the UI computes nothing itself.

import { TILE_PX, tileRect, type TileAddress } from './tiles';
import type { ViewState } from './types';

export const HSLC_MIME = 'application/x-hslc';

export function apiBase(): string {
  const override = new URLSearchParams(location.search).get('api');
  return override ?? 'http://127.0.0.1:8757';
}

export function dynTileUrl(base: string, t: TileAddress, st: ViewState): string {
  const r = tileRect(t);
  const p = new URLSearchParams({
    a: st.a.toString(),
    b: st.b.toString(),
    saddle: st.saddle,
    x0: r.x0.toString(),
    y0: r.y0.toString(),
    x1: r.x1.toString(),
    y1: r.y1.toString(),
    w: TILE_PX.toString(),
    h: TILE_PX.toString(),
    depth: st.depth.toString(),
  });
  return `${base}/tile/dyn?${p.toString()}`;
}

export function paramTileUrl(base: string, t: TileAddress, _st: ViewState): string {
  // the parameter plane is the real (a, b) rectangle: x = a, y = b
  const r = tileRect(t);
  const p = new URLSearchParams({
    probe: 'escape_of_measure',
    mode: 'real_ab',
    a0: r.x0.toString(),
    b0: r.y0.toString(),
    a1: r.x1.toString(),
    b1: r.y1.toString(),
    w: '64',
    h: '64',
  });
  return `${base}/tile/param?${p.toString()}`;
}

export function verdictUrl(base: string, st: ViewState): string {
  const p = new URLSearchParams({ a: st.a.toString(), b: st.b.toString() });
  return `${base}/verdict?${p.toString()}`;
}
