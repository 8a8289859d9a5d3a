/**
 * DOM wiring for the comparison viewer. All data flows one way: events build
 * a new ViewerState via the pure transitions in state.ts, then everything
 * re-renders from renderModel().
 */

import { drawChart, pixelToTimestep } from './chart.js';
import { parseBundle, SchemaError } from './schema.js';
import {
  activeBundle,
  initialState,
  modelColor,
  renderModel,
  resetZoom,
  selectBundle,
  selectSample,
  toggleModel,
  withBundle,
  zoomTo,
  ViewerState,
} from './state.js';

let state: ViewerState = initialState();

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const canvas = $<HTMLCanvasElement>('chart');
const errorBox = $<HTMLDivElement>('error');
const emptyBox = $<HTMLDivElement>('empty');
const headerBox = $<HTMLDivElement>('meta');
const experimentSelect = $<HTMLSelectElement>('experiment-select');
const sampleSelect = $<HTMLSelectElement>('sample-select');
const togglesBox = $<HTMLDivElement>('model-toggles');
const metricsBox = $<HTMLTableElement>('metrics');
const fileInput = $<HTMLInputElement>('file-input');
const resetButton = $<HTMLButtonElement>('reset-zoom');
const zoomHint = $<HTMLDivElement>('zoom-hint');

function showError(message: string): void {
  errorBox.textContent = message;
  errorBox.style.display = 'block';
}

function clearError(): void {
  errorBox.style.display = 'none';
}

function rebuildControls(): void {
  experimentSelect.innerHTML = '';
  state.bundles.forEach((b, i) => {
    const opt = document.createElement('option');
    opt.value = String(i);
    opt.textContent = `${b.experiment} (${b.missingness.type})`;
    opt.selected = i === state.activeBundle;
    experimentSelect.appendChild(opt);
  });

  const bundle = activeBundle(state);
  sampleSelect.innerHTML = '';
  togglesBox.innerHTML = '';
  if (!bundle) return;

  bundle.samples.forEach((s, i) => {
    const opt = document.createElement('option');
    opt.value = String(i);
    opt.textContent = s.id;
    opt.selected = i === state.activeSample;
    sampleSelect.appendChild(opt);
  });

  for (const model of bundle.models) {
    const label = document.createElement('label');
    label.className = 'toggle';
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.checked = state.visibleModels.includes(model);
    box.addEventListener('change', () => {
      state = toggleModel(state, model);
      render();
    });
    const swatch = document.createElement('span');
    swatch.className = 'swatch';
    swatch.style.background = modelColor(bundle, model);
    label.appendChild(box);
    label.appendChild(swatch);
    label.appendChild(document.createTextNode(model));
    togglesBox.appendChild(label);
  }
}

function renderMetrics(rm: ReturnType<typeof renderModel>): void {
  metricsBox.innerHTML = '';
  if (!rm || rm.metrics.length === 0) return;
  const head = metricsBox.insertRow();
  for (const text of ['model', 'mse', 'mae']) {
    const th = document.createElement('th');
    th.textContent = text;
    head.appendChild(th);
  }
  for (const m of rm.metrics) {
    const row = metricsBox.insertRow();
    row.className = m.visible ? '' : 'hidden-model';
    row.insertCell().textContent = m.model;
    // stored values shown verbatim, never recomputed or rounded
    row.insertCell().textContent = String(m.mse);
    row.insertCell().textContent = String(m.mae);
  }
}

function render(): void {
  const rm = renderModel(state);
  if (!rm) {
    headerBox.textContent = 'Load a bundle.json produced by `pulsekit run` to begin.';
    emptyBox.style.display = 'none';
    return;
  }
  headerBox.textContent = rm.header;
  if (rm.emptyMessage) {
    emptyBox.textContent = rm.emptyMessage;
    emptyBox.style.display = 'block';
    return;
  }
  emptyBox.style.display = 'none';
  drawChart(canvas, rm);
  renderMetrics(rm);
  zoomHint.textContent =
    `sample ${rm.sampleId} - viewing [${Math.round(rm.viewport.tMin)}, ` +
    `${Math.round(rm.viewport.tMax)}) of ${rm.windowLength}`;
}

function loadBundleText(text: string): void {
  try {
    const bundle = parseBundle(JSON.parse(text));
    state = withBundle(state, bundle);
    clearError();
    rebuildControls();
    render();
  } catch (e) {
    // state stays unchanged on malformed input; the error renders inline
    if (e instanceof SchemaError) {
      showError(e.message);
    } else if (e instanceof SyntaxError) {
      showError(`malformed JSON: ${e.message}`);
    } else {
      showError(String(e));
    }
  }
}

fileInput.addEventListener('change', () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  file.text().then(loadBundleText, (e) => showError(String(e)));
});

experimentSelect.addEventListener('change', () => {
  state = selectBundle(state, Number(experimentSelect.value));
  rebuildControls();
  render();
});

sampleSelect.addEventListener('change', () => {
  state = selectSample(state, Number(sampleSelect.value));
  render();
});

resetButton.addEventListener('click', () => {
  state = resetZoom(state);
  render();
});

canvas.addEventListener('dblclick', () => {
  state = resetZoom(state);
  render();
});

// drag on the chart to zoom into an x-range
let dragStart: number | null = null;
canvas.addEventListener('mousedown', (e) => {
  dragStart = e.offsetX;
});
canvas.addEventListener('mouseup', (e) => {
  if (dragStart === null) return;
  const rm = renderModel(state);
  if (rm && !rm.emptyMessage && Math.abs(e.offsetX - dragStart) > 4) {
    const a = pixelToTimestep(canvas, rm, dragStart);
    const b = pixelToTimestep(canvas, rm, e.offsetX);
    state = zoomTo(state, a, b);
    render();
  }
  dragStart = null;
});

window.addEventListener('resize', render);

// optional auto-load: ?bundle=<url> (e.g. demo/bundle.json when served over http)
const params = new URLSearchParams(window.location.search);
const bundleUrl = params.get('bundle');
if (bundleUrl) {
  fetch(bundleUrl)
    .then((r) => {
      if (!r.ok) throw new Error(`${r.status} ${r.statusText}`);
      return r.text();
    })
    .then(loadBundleText, (e) => showError(`could not fetch ${bundleUrl}: ${e}`));
}

render();
