/**
 * Bundle schema (version 1) produced by the pulsekit runner:
 * ground truth series, missing runs, per-model imputation segments around the
 * gaps, and the stored metrics. The viewer never recomputes any of it.
 */

export interface ImputationSegment {
  start: number;
  values: number[];
}

export interface SampleEntry {
  id: string;
  channel?: string;
  truth: number[];
  missing_runs: Array<[number, number]>; // [start, length]
  imputations: Record<string, ImputationSegment[]>;
  metrics: Record<string, { mse: number; mae: number }>;
}

export interface Bundle {
  version: number;
  experiment: string;
  missingness: { type: string; percent: number };
  sampling_rate_hz: number;
  models: string[];
  samples: SampleEntry[];
}

export class SchemaError extends Error {}

function fail(path: string, why: string): never {
  throw new SchemaError(`bundle schema: ${path} ${why}`);
}

function requireNumber(v: unknown, path: string): number {
  if (typeof v !== 'number' || !isFinite(v)) fail(path, 'must be a finite number');
  return v;
}

function requireString(v: unknown, path: string): string {
  if (typeof v !== 'string') fail(path, 'must be a string');
  return v;
}

function requireNumberArray(v: unknown, path: string): number[] {
  if (!Array.isArray(v)) fail(path, 'must be an array');
  for (let i = 0; i < v.length; i++) {
    if (typeof v[i] !== 'number' || !isFinite(v[i])) fail(`${path}[${i}]`, 'must be a finite number');
  }
  return v as number[];
}

function asRecord(v: unknown, path: string): Record<string, unknown> {
  if (typeof v !== 'object' || v === null || Array.isArray(v)) fail(path, 'must be an object');
  return v as Record<string, unknown>;
}

function parseSegments(v: unknown, path: string): ImputationSegment[] {
  if (!Array.isArray(v)) fail(path, 'must be an array');
  return v.map((seg, i) => {
    const rec = asRecord(seg, `${path}[${i}]`);
    return {
      start: requireNumber(rec.start, `${path}[${i}].start`),
      values: requireNumberArray(rec.values, `${path}[${i}].values`),
    };
  });
}

function parseSample(v: unknown, path: string, models: string[]): SampleEntry {
  const rec = asRecord(v, path);
  const truth = requireNumberArray(rec.truth, `${path}.truth`);
  if (!Array.isArray(rec.missing_runs)) fail(`${path}.missing_runs`, 'must be an array');
  const runs = (rec.missing_runs as unknown[]).map((run, i) => {
    const pair = requireNumberArray(run, `${path}.missing_runs[${i}]`);
    if (pair.length !== 2) fail(`${path}.missing_runs[${i}]`, 'must be a [start, length] pair');
    return [pair[0], pair[1]] as [number, number];
  });
  const impRec = asRecord(rec.imputations, `${path}.imputations`);
  const imputations: Record<string, ImputationSegment[]> = {};
  for (const model of models) {
    if (!(model in impRec)) fail(`${path}.imputations`, `missing model ${model}`);
    imputations[model] = parseSegments(impRec[model], `${path}.imputations.${model}`);
  }
  const metRec = asRecord(rec.metrics, `${path}.metrics`);
  const metrics: Record<string, { mse: number; mae: number }> = {};
  for (const model of models) {
    if (!(model in metRec)) fail(`${path}.metrics`, `missing model ${model}`);
    const m = asRecord(metRec[model], `${path}.metrics.${model}`);
    metrics[model] = {
      mse: requireNumber(m.mse, `${path}.metrics.${model}.mse`),
      mae: requireNumber(m.mae, `${path}.metrics.${model}.mae`),
    };
  }
  return {
    id: requireString(rec.id, `${path}.id`),
    channel: rec.channel === undefined ? undefined : requireString(rec.channel, `${path}.channel`),
    truth,
    missing_runs: runs,
    imputations,
    metrics,
  };
}

/** Validate a parsed JSON document as a version-1 bundle. */
export function parseBundle(doc: unknown): Bundle {
  const rec = asRecord(doc, 'bundle');
  const version = requireNumber(rec.version, 'version');
  if (version !== 1) fail('version', `must be 1, got ${version}`);
  const missRec = asRecord(rec.missingness, 'missingness');
  if (!Array.isArray(rec.models)) fail('models', 'must be an array');
  const models = (rec.models as unknown[]).map((m, i) => requireString(m, `models[${i}]`));
  if (!Array.isArray(rec.samples)) fail('samples', 'must be an array');
  const samples = (rec.samples as unknown[]).map((s, i) => parseSample(s, `samples[${i}]`, models));
  return {
    version,
    experiment: requireString(rec.experiment, 'experiment'),
    missingness: {
      type: requireString(missRec.type, 'missingness.type'),
      percent: requireNumber(missRec.percent, 'missingness.percent'),
    },
    sampling_rate_hz: requireNumber(rec.sampling_rate_hz, 'sampling_rate_hz'),
    models,
    samples,
  };
}
