// Dual-plane explorer: parameter plane (real (a, b) rectangle) on the left,
// unstable-slice plane for the selected parameter on the right.  All
// numbers shown come from server responses; the UI only draws tiles.

import { apiBase, dynTileUrl, HSLC_MIME, paramTileUrl, verdictUrl } from './api';
import { parseHslc } from './hslc';
import { tileToRgba } from './palette';
import {
  debounce,
  levelForWindow,
  TileCache,
  tileKey,
  tileRect,
  visibleTiles,
  type TileAddress,
} from './tiles';
import type { Plane, Rect, ViewState } from './types';
import { decodeState, encodeState } from './urlState';

const base = apiBase();
const cache = new TileCache(512);
let state: ViewState = decodeState(location.hash);
let applyingHistory = false;

const paramCanvas = document.getElementById('param') as HTMLCanvasElement;
const dynCanvas = document.getElementById('dyn') as HTMLCanvasElement;
const verdictPanel = document.getElementById('verdict') as HTMLElement;
const statusLine = document.getElementById('status') as HTMLElement;

function windowOf(plane: Plane): Rect {
  return plane === 'param' ? state.paramWindow : state.dynWindow;
}

function canvasOf(plane: Plane): HTMLCanvasElement {
  return plane === 'param' ? paramCanvas : dynCanvas;
}

function pushHistory(): void {
  if (applyingHistory) return;
  history.pushState(null, '', '#' + encodeState(state));
}

function replaceHistory(): void {
  if (applyingHistory) return;
  history.replaceState(null, '', '#' + encodeState(state));
}

async function fetchTile(t: TileAddress, gen: number): Promise<void> {
  const key = tileKey(t, state);
  if (cache.has(key)) return;
  cache.markInFlight(key);
  const url = t.plane === 'dyn' ? dynTileUrl(base, t, state) : paramTileUrl(base, t, state);
  try {
    const resp = await fetch(url, { headers: { accept: HSLC_MIME } });
    if (!resp.ok) throw new Error(`HTTP ${resp.status}`);
    const data = parseHslc(await resp.arrayBuffer());
    cache.put(key, data);
  } catch (err) {
    statusLine.textContent = `tile error: ${String(err)}`;
    cache.put(key, null);
    return;
  }
  // stale generations fill the cache but must not trigger a redraw of a
  // newer view (request-generation tagging)
  if (gen === cache.generation) {
    drawPlane(t.plane);
  }
}

function drawPlane(plane: Plane): void {
  const canvas = canvasOf(plane);
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const win = windowOf(plane);
  const level = levelForWindow(win, canvas.width);
  const tiles = visibleTiles(win, level, plane);
  ctx.fillStyle = '#181818';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const sx = canvas.width / (win.x1 - win.x0);
  const sy = canvas.height / (win.y1 - win.y0);
  const gen = cache.generation;
  for (const t of tiles) {
    const key = tileKey(t, state);
    const data = cache.get(key);
    if (data === null || data === undefined) {
      if (!cache.has(key)) void fetchTile(t, gen);
      continue;
    }
    const rgba = tileToRgba(data, t.plane);
    const image = new ImageData(rgba, data.w, data.h);
    const r = tileRect(t);
    const px = (r.x0 - win.x0) * sx;
    const py = canvas.height - (r.y1 - win.y0) * sy; // flip: y grows upward
    const pw = (r.x1 - r.x0) * sx;
    const ph = (r.y1 - r.y0) * sy;
    void createImageBitmap(image).then((bmp) => {
      if (gen !== cache.generation) return;
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(bmp, px, py, pw, ph);
    });
  }
  if (plane === 'param') {
    // crosshair on the selected parameter
    const cx = (state.a - win.x0) * sx;
    const cy = canvas.height - (state.b - win.y0) * sy;
    ctx.strokeStyle = '#ff5050';
    ctx.beginPath();
    ctx.moveTo(cx - 6, cy);
    ctx.lineTo(cx + 6, cy);
    ctx.moveTo(cx, cy - 6);
    ctx.lineTo(cx, cy + 6);
    ctx.stroke();
  }
}

function drawAll(): void {
  cache.bump();
  drawPlane('param');
  drawPlane('dyn');
}

async function refreshVerdict(): Promise<void> {
  verdictPanel.textContent = 'computing verdict…';
  try {
    const resp = await fetch(verdictUrl(base, state));
    const body = await resp.json();
    if (!resp.ok) throw new Error(JSON.stringify(body));
    const lp = body.lambda_plus ? body.lambda_plus.value.toFixed(4) : 'n/a';
    const lm = body.lambda_minus ? body.lambda_minus.value.toFixed(4) : 'n/a';
    verdictPanel.innerHTML = '';
    const lines = [
      `a = ${body.a}, b = ${body.b}`,
      `verdict: ${body.combined}`,
      `lambda+ = ${lp}   lambda- = ${lm}`,
      `critical points: ${body.critical_points.critical_points.length}`,
      `component evidence boxes: ${body.compact_components.component_boxes.length}`,
    ];
    for (const line of lines) {
      const div = document.createElement('div');
      div.textContent = line;
      verdictPanel.appendChild(div);
    }
  } catch (err) {
    verdictPanel.textContent = `verdict error: ${String(err)}`;
  }
}

function setParameter(a: number, b: number): void {
  state = { ...state, a, b };
  (document.getElementById('a-input') as HTMLInputElement).value = a.toString();
  (document.getElementById('b-input') as HTMLInputElement).value = b.toString();
  pushHistory();
  drawAll();
  void refreshVerdict();
}

function attachPanZoom(plane: Plane): void {
  const canvas = canvasOf(plane);
  let drag: { x: number; y: number } | null = null;
  let moved = false;
  const debouncedRedraw = debounce(() => {
    replaceHistory();
    drawAll();
  }, 150);

  canvas.addEventListener('mousedown', (ev) => {
    drag = { x: ev.offsetX, y: ev.offsetY };
    moved = false;
  });
  canvas.addEventListener('mousemove', (ev) => {
    if (!drag) return;
    const win = windowOf(plane);
    const dx = ((ev.offsetX - drag.x) / canvas.width) * (win.x1 - win.x0);
    const dy = ((ev.offsetY - drag.y) / canvas.height) * (win.y1 - win.y0);
    if (Math.abs(ev.offsetX - drag.x) + Math.abs(ev.offsetY - drag.y) > 3) moved = true;
    const shifted = { x0: win.x0 - dx, x1: win.x1 - dx, y0: win.y0 + dy, y1: win.y1 + dy };
    if (plane === 'param') state = { ...state, paramWindow: shifted };
    else state = { ...state, dynWindow: shifted };
    drag = { x: ev.offsetX, y: ev.offsetY };
    debouncedRedraw();
  });
  canvas.addEventListener('mouseup', (ev) => {
    drag = null;
    if (!moved && plane === 'param') {
      const win = windowOf('param');
      const a = win.x0 + (ev.offsetX / canvas.width) * (win.x1 - win.x0);
      const b = win.y1 - (ev.offsetY / canvas.height) * (win.y1 - win.y0);
      setParameter(Number(a.toFixed(4)), Number(b.toFixed(4)));
    }
  });
  canvas.addEventListener('mouseleave', () => {
    drag = null;
  });
  canvas.addEventListener('wheel', (ev) => {
    ev.preventDefault();
    const win = windowOf(plane);
    const factor = ev.deltaY > 0 ? 1.25 : 0.8;
    const fx = ev.offsetX / canvas.width;
    const fy = 1 - ev.offsetY / canvas.height;
    const cx = win.x0 + fx * (win.x1 - win.x0);
    const cy = win.y0 + fy * (win.y1 - win.y0);
    const nw = (win.x1 - win.x0) * factor;
    const nh = (win.y1 - win.y0) * factor;
    const zoomed = {
      x0: cx - fx * nw, x1: cx + (1 - fx) * nw,
      y0: cy - fy * nh, y1: cy + (1 - fy) * nh,
    };
    if (plane === 'param') state = { ...state, paramWindow: zoomed };
    else state = { ...state, dynWindow: zoomed };
    debouncedRedraw();
  });
}

function attachControls(): void {
  const aInput = document.getElementById('a-input') as HTMLInputElement;
  const bInput = document.getElementById('b-input') as HTMLInputElement;
  const depthInput = document.getElementById('depth-input') as HTMLInputElement;
  const saddleInput = document.getElementById('saddle-input') as HTMLSelectElement;
  aInput.value = state.a.toString();
  bInput.value = state.b.toString();
  depthInput.value = state.depth.toString();
  saddleInput.value = state.saddle;
  const apply = () => {
    const a = Number(aInput.value);
    const b = Number(bInput.value);
    const depth = Math.max(1, Math.floor(Number(depthInput.value)));
    if (!Number.isFinite(a) || !Number.isFinite(b) || b === 0) {
      statusLine.textContent = 'invalid parameters (need finite a, nonzero b)';
      return;
    }
    state = { ...state, a, b, depth, saddle: saddleInput.value };
    pushHistory();
    drawAll();
    void refreshVerdict();
  };
  document.getElementById('apply')!.addEventListener('click', apply);
}

window.addEventListener('hashchange', () => {
  applyingHistory = true;
  state = decodeState(location.hash);
  (document.getElementById('a-input') as HTMLInputElement).value = state.a.toString();
  (document.getElementById('b-input') as HTMLInputElement).value = state.b.toString();
  (document.getElementById('depth-input') as HTMLInputElement).value = state.depth.toString();
  drawAll();
  void refreshVerdict();
  applyingHistory = false;
});

attachPanZoom('param');
attachPanZoom('dyn');
attachControls();
replaceHistory();
drawAll();
void refreshVerdict();
