/**
 * Viewer state and pure transitions. The viewer is read-only: nothing here
 * ever modifies bundle contents, and every transition returns a new state.
 */

import type { Bundle } from './schema.js';

export interface Viewport {
  tMin: number;
  tMax: number;
}

export interface ViewerState {
  bundles: Bundle[];
  activeBundle: number;
  activeSample: number;
  visibleModels: string[]; // subset of the active bundle's model list
  viewport: Viewport | null; // null = full window
}

export interface RenderSeries {
  name: string;
  kind: 'truth' | 'imputation';
  color: string;
  segments: Array<{ start: number; values: number[] }>;
}

export interface RenderModel {
  emptyMessage: string | null;
  header: string;
  sampleId: string;
  series: RenderSeries[]; // truth first, then one per visible model
  shaded: Array<[number, number]>; // missing runs as [start, length]
  metrics: Array<{ model: string; mse: number; mae: number; visible: boolean }>;
  viewport: Viewport;
  windowLength: number;
}

export const TRUTH_COLOR = '#1a1a1a';
export const MODEL_PALETTE = ['#d62728', '#1f77b4', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b'];

export function initialState(): ViewerState {
  return { bundles: [], activeBundle: 0, activeSample: 0, visibleModels: [], viewport: null };
}

export function activeBundle(state: ViewerState): Bundle | null {
  return state.bundles[state.activeBundle] ?? null;
}

/** Add a bundle; it becomes active with its first sample and all models visible. */
export function withBundle(state: ViewerState, bundle: Bundle): ViewerState {
  const bundles = [...state.bundles, bundle];
  return {
    bundles,
    activeBundle: bundles.length - 1,
    activeSample: 0,
    visibleModels: [...bundle.models],
    viewport: null,
  };
}

export function selectBundle(state: ViewerState, index: number): ViewerState {
  const bundle = state.bundles[index];
  if (!bundle) return state;
  return {
    ...state,
    activeBundle: index,
    activeSample: 0,
    visibleModels: [...bundle.models],
    viewport: null,
  };
}

export function selectSample(state: ViewerState, index: number): ViewerState {
  const bundle = activeBundle(state);
  if (!bundle || index < 0 || index >= bundle.samples.length) return state;
  return { ...state, activeSample: index };
}

export function toggleModel(state: ViewerState, model: string): ViewerState {
  const bundle = activeBundle(state);
  if (!bundle || !bundle.models.includes(model)) return state;
  const visible = state.visibleModels.includes(model)
    ? state.visibleModels.filter((m) => m !== model)
    : bundle.models.filter((m) => state.visibleModels.includes(m) || m === model);
  return { ...state, visibleModels: visible };
}

/** Zoom to a timestep window; bounds are clamped and must keep tMin < tMax. */
export function zoomTo(state: ViewerState, tMin: number, tMax: number): ViewerState {
  const bundle = activeBundle(state);
  if (!bundle) return state;
  const T = bundle.samples[state.activeSample]?.truth.length ?? 0;
  const lo = Math.max(0, Math.floor(Math.min(tMin, tMax)));
  const hi = Math.min(T, Math.ceil(Math.max(tMin, tMax)));
  if (hi - lo < 2) return state; // degenerate selection: ignore
  return { ...state, viewport: { tMin: lo, tMax: hi } };
}

export function resetZoom(state: ViewerState): ViewerState {
  return { ...state, viewport: null };
}

export function modelColor(bundle: Bundle, model: string): string {
  const i = bundle.models.indexOf(model);
  return MODEL_PALETTE[((i % MODEL_PALETTE.length) + MODEL_PALETTE.length) % MODEL_PALETTE.length];
}

/** Derive everything the chart and side panels need from the current state. */
export function renderModel(state: ViewerState): RenderModel | null {
  const bundle = activeBundle(state);
  if (!bundle) return null;
  const header =
    `${bundle.experiment} - missingness: ${bundle.missingness.type} ` +
    `${(bundle.missingness.percent * 100).toFixed(0)}% - ${bundle.sampling_rate_hz} Hz`;
  if (bundle.samples.length === 0) {
    return {
      emptyMessage: 'This bundle contains no samples.',
      header,
      sampleId: '',
      series: [],
      shaded: [],
      metrics: [],
      viewport: { tMin: 0, tMax: 1 },
      windowLength: 0,
    };
  }
  const sample = bundle.samples[state.activeSample];
  const T = sample.truth.length;
  const viewport = state.viewport ?? { tMin: 0, tMax: T };

  const series: RenderSeries[] = [
    {
      name: 'ground truth',
      kind: 'truth',
      color: TRUTH_COLOR,
      segments: [{ start: 0, values: sample.truth }],
    },
  ];
  for (const model of bundle.models) {
    if (!state.visibleModels.includes(model)) continue;
    series.push({
      name: model,
      kind: 'imputation',
      color: modelColor(bundle, model),
      segments: sample.imputations[model],
    });
  }

  // metric values pass through verbatim; the viewer never recomputes them
  const metrics = bundle.models.map((model) => ({
    model,
    mse: sample.metrics[model].mse,
    mae: sample.metrics[model].mae,
    visible: state.visibleModels.includes(model),
  }));

  return {
    emptyMessage: null,
    header,
    sampleId: sample.channel && !sample.id.includes('/ch')
      ? `${sample.id} (${sample.channel})`
      : sample.id,
    series,
    shaded: sample.missing_runs,
    metrics,
    viewport,
    windowLength: T,
  };
}
