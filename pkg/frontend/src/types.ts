export type Plane = 'param' | 'dyn';

export interface Rect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface ViewState {
  plane: Plane;
  paramWindow: Rect; // (re a, im a) window at fixed b
  dynWindow: Rect;   // linearizing-plane window
  a: number;
  b: number;
  saddle: string;
  depth: number;
  palette: string;
}

export const DEFAULT_STATE: ViewState = {
  plane: 'dyn',
  paramWindow: { x0: -2.5, y0: -1.5, x1: 3.5, y1: 1.5 },
  dynWindow: { x0: -10, y0: -10, x1: 10, y1: 10 },
  a: 6.0,
  b: 0.3,
  saddle: 'auto',
  depth: 200,
  palette: 'default',
};

export interface TileData {
  w: number;
  h: number;
  rates: Float32Array;
  status: Uint8Array;
  window: [number, number, number, number];
}
