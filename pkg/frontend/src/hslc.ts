// Parser for the raw HSLC tile stream (little-endian):
// "HSLC" | u32 version | u32 W | u32 H | 4 x f64 window |
// u32 provLen | provenance JSON | W*H records of (f32 rate, u8 status).

import type { TileData } from './types';

export function parseHslc(buf: ArrayBuffer): TileData {
  const dv = new DataView(buf);
  const magic = String.fromCharCode(dv.getUint8(0), dv.getUint8(1), dv.getUint8(2), dv.getUint8(3));
  if (magic !== 'HSLC') throw new Error('not an HSLC stream');
  const version = dv.getUint32(4, true);
  if (version !== 1) throw new Error(`unsupported HSLC version ${version}`);
  const w = dv.getUint32(8, true);
  const h = dv.getUint32(12, true);
  const window: [number, number, number, number] = [
    dv.getFloat64(16, true), dv.getFloat64(24, true),
    dv.getFloat64(32, true), dv.getFloat64(40, true),
  ];
  const provLen = dv.getUint32(48, true);
  let off = 52 + provLen;
  const n = w * h;
  const rates = new Float32Array(n);
  const status = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    rates[i] = dv.getFloat32(off, true);
    status[i] = dv.getUint8(off + 4);
    off += 5;
  }
  return { w, h, rates, status, window };
}

export function provenance(buf: ArrayBuffer): unknown {
  const dv = new DataView(buf);
  const provLen = dv.getUint32(48, true);
  const bytes = new Uint8Array(buf, 52, provLen);
  return JSON.parse(new TextDecoder().decode(bytes));
}
