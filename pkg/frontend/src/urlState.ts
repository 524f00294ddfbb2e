// Serialize the full ViewState into the URL fragment so any view is a
// shareable, reproducible address.

import { DEFAULT_STATE, type Rect, type ViewState } from './types';

function putRect(p: URLSearchParams, prefix: string, r: Rect): void {
  p.set(prefix + '0', r.x0.toString());
  p.set(prefix + '1', r.y0.toString());
  p.set(prefix + '2', r.x1.toString());
  p.set(prefix + '3', r.y1.toString());
}

function getRect(p: URLSearchParams, prefix: string, fallback: Rect): Rect {
  const vals = ['0', '1', '2', '3'].map((s) => p.get(prefix + s));
  if (vals.some((v) => v === null)) return { ...fallback };
  const [x0, y0, x1, y1] = vals.map(Number);
  if ([x0, y0, x1, y1].some((v) => !Number.isFinite(v)) || x1 <= x0 || y1 <= y0) {
    return { ...fallback };
  }
  return { x0, y0, x1, y1 };
}

export function encodeState(st: ViewState): string {
  const p = new URLSearchParams();
  p.set('plane', st.plane);
  p.set('a', st.a.toString());
  p.set('b', st.b.toString());
  p.set('saddle', st.saddle);
  p.set('depth', st.depth.toString());
  p.set('palette', st.palette);
  putRect(p, 'pw', st.paramWindow);
  putRect(p, 'dw', st.dynWindow);
  return p.toString();
}

export function decodeState(fragment: string): ViewState {
  const p = new URLSearchParams(fragment.replace(/^#/, ''));
  const st: ViewState = {
    ...DEFAULT_STATE,
    paramWindow: getRect(p, 'pw', DEFAULT_STATE.paramWindow),
    dynWindow: getRect(p, 'dw', DEFAULT_STATE.dynWindow),
  };
  const plane = p.get('plane');
  if (plane === 'param' || plane === 'dyn') st.plane = plane;
  const num = (k: string, fallback: number) => {
    const v = p.get(k);
    if (v === null) return fallback;
    const n = Number(v);
    return Number.isFinite(n) ? n : fallback;
  };
  st.a = num('a', st.a);
  st.b = num('b', st.b);
  st.depth = Math.max(1, Math.floor(num('depth', st.depth)));
  st.saddle = p.get('saddle') ?? st.saddle;
  st.palette = p.get('palette') ?? st.palette;
  return st;
}
