import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { beforeEach, describe, expect, it } from 'vitest';

import { parseBundle, type Bundle } from '../src/schema.js';
import {
  initialState,
  renderModel,
  resetZoom,
  selectBundle,
  selectSample,
  toggleModel,
  withBundle,
  zoomTo,
  type ViewerState,
} from '../src/state.js';

const here = dirname(fileURLToPath(import.meta.url));
const demoPath = join(here, '..', 'demo', 'bundle.json');

function loadDemo(): Bundle {
  return parseBundle(JSON.parse(readFileSync(demoPath, 'utf-8')));
}

describe('viewer state with the demo bundle', () => {
  let demo: Bundle;
  let state: ViewerState;

  beforeEach(() => {
    demo = loadDemo();
    state = withBundle(initialState(), demo);
  });

  it('demo bundle ships 3 models and 5 samples', () => {
    expect(demo.models).toHaveLength(3);
    expect(demo.samples).toHaveLength(5);
  });

  it('loading selects the first sample with all models visible', () => {
    expect(state.activeSample).toBe(0);
    expect(state.visibleModels).toEqual(demo.models);
    expect(state.viewport).toBeNull();
  });

  it('renders 1 truth + 3 model series (4 total)', () => {
    const rm = renderModel(state)!;
    expect(rm.series).toHaveLength(4);
    expect(rm.series[0].kind).toBe('truth');
    expect(rm.series.slice(1).map((s) => s.name)).toEqual(demo.models);
  });

  it('sample dropdown switch re-renders with that sample data', () => {
    const before = renderModel(state)!;
    state = selectSample(state, 2);
    const after = renderModel(state)!;
    expect(after.sampleId).not.toBe(before.sampleId);
    expect(after.series[0].segments[0].values).toEqual(demo.samples[2].truth);
    expect(after.shaded).toEqual(demo.samples[2].missing_runs);
  });

  it('model toggle removes exactly one series, others unchanged', () => {
    const before = renderModel(state)!;
    state = toggleModel(state, demo.models[1]);
    const after = renderModel(state)!;
    expect(after.series).toHaveLength(before.series.length - 1);
    expect(after.series.map((s) => s.name)).toEqual(
      before.series.map((s) => s.name).filter((n) => n !== demo.models[1]),
    );
    // series count on screen is always 1 + |visible models|
    expect(after.series).toHaveLength(1 + state.visibleModels.length);
    state = toggleModel(state, demo.models[1]);
    expect(renderModel(state)!.series).toHaveLength(4);
  });

  it('zoom into a shaded missing run and reset both work', () => {
    const [start, length] = demo.samples[0].missing_runs[0];
    state = zoomTo(state, start - 20, start + length + 20);
    const zoomed = renderModel(state)!;
    expect(zoomed.viewport.tMin).toBeGreaterThanOrEqual(0);
    expect(zoomed.viewport.tMax - zoomed.viewport.tMin).toBeLessThan(zoomed.windowLength);
    // the shaded run is inside the zoomed viewport
    expect(start).toBeGreaterThanOrEqual(zoomed.viewport.tMin);
    expect(start + length).toBeLessThanOrEqual(zoomed.viewport.tMax);
    // zoom never mutates data
    expect(zoomed.series[0].segments[0].values).toEqual(demo.samples[0].truth);
    state = resetZoom(state);
    const full = renderModel(state)!;
    expect(full.viewport).toEqual({ tMin: 0, tMax: full.windowLength });
  });

  it('displayed metrics equal the bundle values verbatim', () => {
    for (let i = 0; i < demo.samples.length; i++) {
      state = selectSample(state, i);
      const rm = renderModel(state)!;
      for (const m of rm.metrics) {
        expect(m.mse).toBe(demo.samples[i].metrics[m.model].mse);
        expect(m.mae).toBe(demo.samples[i].metrics[m.model].mae);
      }
    }
  });

  it('viewer is read-only: transitions never touch bundle contents', () => {
    const raw = JSON.stringify(demo);
    state = selectSample(state, 3);
    state = toggleModel(state, demo.models[0]);
    state = zoomTo(state, 100, 400);
    state = resetZoom(state);
    renderModel(state);
    expect(JSON.stringify(state.bundles[0])).toBe(raw);
  });
});

describe('state edge cases', () => {
  it('degenerate zoom selections are ignored', () => {
    const state = withBundle(initialState(), loadDemo());
    expect(zoomTo(state, 50, 50.4)).toBe(state);
    const clamped = zoomTo(state, -100, 10_000_000);
    expect(clamped.viewport).toEqual({ tMin: 0, tMax: loadDemo().samples[0].truth.length });
  });

  it('empty bundle renders an empty-state message', () => {
    const empty = parseBundle({
      version: 1,
      experiment: 'none',
      missingness: { type: 'extended', percent: 0.1 },
      sampling_rate_hz: 100,
      models: [],
      samples: [],
    });
    const rm = renderModel(withBundle(initialState(), empty))!;
    expect(rm.emptyMessage).toMatch(/no samples/);
    expect(rm.series).toHaveLength(0);
  });

  it('switching experiments updates the metadata header', () => {
    let state = withBundle(initialState(), loadDemo());
    const other = parseBundle({
      version: 1,
      experiment: 'other_run',
      missingness: { type: 'transient', percent: 0.15 },
      sampling_rate_hz: 250,
      models: [],
      samples: [],
    });
    state = withBundle(state, other);
    expect(renderModel(state)!.header).toContain('transient');
    expect(renderModel(state)!.header).toContain('15%');
    state = selectBundle(state, 0);
    expect(renderModel(state)!.header).toContain('extended');
    expect(state.activeSample).toBe(0);
  });
});
