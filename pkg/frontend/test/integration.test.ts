// Round trip against the real tile service: the URL fragment for
// a = 6, b = 0.3 must produce tile requests whose pixel data matches the
// CLI-rendered golden artifacts, and the verdict panel's source JSON must
// be exactly what GET /verdict returns.

import { spawn, spawnSync } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { dynTileUrl, HSLC_MIME, verdictUrl } from '../src/api';
import { parseHslc } from '../src/hslc';
import { levelForWindow, TILE_PX, tileRect, visibleTiles } from '../src/tiles';
import type { ViewState } from '../src/types';
import { decodeState } from '../src/urlState';

const PORT = 8791;
const BASE = `http://127.0.0.1:${PORT}`;
const FRAGMENT = '#plane=dyn&a=6&b=0.3&saddle=auto&depth=200&palette=default'
  + '&dw0=-8&dw1=-8&dw2=8&dw3=8';

let server: ReturnType<typeof spawn> | null = null;
let workDir = '';

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 90_000;
  for (;;) {
    try {
      const r = await fetch(`${BASE}/meta`);
      if (r.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error('server did not come up');
    await new Promise((res) => setTimeout(res, 500));
  }
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), 'henonlab-ui-'));
  server = spawn('python3', ['-m', 'henonlab.cli', 'serve', '--port', String(PORT)],
                 { stdio: 'ignore' });
  await waitForServer();
}, 120_000);

afterAll(() => {
  server?.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

function cliRenderTile(st: ViewState, rect: { x0: number; y0: number; x1: number; y1: number },
                       out: string): Buffer {
  const res = spawnSync('python3', [
    '-m', 'henonlab.cli', 'render-slice',
    '--a', String(st.a), '--b', String(st.b), '--saddle', st.saddle,
    '--window', String(rect.x0), String(rect.y0), String(rect.x1), String(rect.y1),
    '--res', String(TILE_PX), '--depth', String(st.depth),
    '--out', out,
  ], { cwd: workDir });
  expect(res.status).toBe(0);
  return readFileSync(join(workDir, out));
}

describe('explorer round trip', () => {
  it('tile requests reproduce the CLI golden artifacts', async () => {
    const st = decodeState(FRAGMENT);
    expect(st.a).toBe(6);
    expect(st.b).toBe(0.3);
    const level = levelForWindow(st.dynWindow, 512);
    const tiles = visibleTiles(st.dynWindow, level, 'dyn');
    expect(tiles.length).toBe(4); // the window is exactly tile-aligned
    for (const t of tiles) {
      const url = dynTileUrl(BASE, t, st);
      const resp = await fetch(url, { headers: { accept: HSLC_MIME } });
      expect(resp.status).toBe(200);
      const served = parseHslc(await resp.arrayBuffer());
      const golden = cliRenderTile(st, tileRect(t), `tile_${t.ix}_${t.iy}.hslc`);
      const goldenTile = parseHslc(golden.buffer.slice(
        golden.byteOffset, golden.byteOffset + golden.byteLength) as ArrayBuffer);
      expect(served.w).toBe(goldenTile.w);
      expect(Array.from(served.status)).toEqual(Array.from(goldenTile.status));
      expect(Array.from(served.rates)).toEqual(Array.from(goldenTile.rates));
    }
  }, 240_000);

  it('verdict panel source equals GET /verdict exactly', async () => {
    const st = decodeState(FRAGMENT);
    const r1 = await fetch(verdictUrl(BASE, st));
    const r2 = await fetch(verdictUrl(BASE, st));
    const t1 = await r1.text();
    const t2 = await r2.text();
    expect(r1.status).toBe(200);
    expect(t1).toBe(t2); // cacheable: identical bytes
    const body = JSON.parse(t1);
    expect(body.combined).toBe('unstably_disconnected');
    expect(body.lambda_plus.value).toBeGreaterThan(Math.log(2));
    expect(body).toHaveProperty('critical_points');
    expect(body).toHaveProperty('compact_components');
  }, 120_000);
});
