import { describe, expect, it } from 'vitest';

import { DEFAULT_STATE, type ViewState } from '../src/types';
import { decodeState, encodeState } from '../src/urlState';

describe('url state', () => {
  it('round-trips the full view state', () => {
    const st: ViewState = {
      plane: 'param',
      paramWindow: { x0: -1.25, y0: -0.5, x1: 2.75, y1: 0.5 },
      dynWindow: { x0: -3, y0: -2, x1: 5, y1: 4 },
      a: 6,
      b: 0.3,
      saddle: 'fp1',
      depth: 321,
      palette: 'default',
    };
    const back = decodeState('#' + encodeState(st));
    expect(back).toEqual(st);
  });

  it('falls back to defaults on junk', () => {
    expect(decodeState('')).toEqual(DEFAULT_STATE);
    expect(decodeState('#a=nope&dw0=1&dw2=0')).toEqual(DEFAULT_STATE);
  });

  it('keeps the selected parameter in the fragment', () => {
    const frag = encodeState({ ...DEFAULT_STATE, a: 6, b: 0.3 });
    expect(frag).toContain('a=6');
    expect(frag).toContain('b=0.3');
  });

  it('re-encoding a decoded fragment is stable', () => {
    const frag = encodeState({ ...DEFAULT_STATE, a: 1.25, b: -0.5 });
    const once = decodeState('#' + frag);
    expect(encodeState(once)).toBe(frag);
  });
});
