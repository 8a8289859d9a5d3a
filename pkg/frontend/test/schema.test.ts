import { describe, expect, it } from 'vitest';

import { parseBundle, SchemaError } from '../src/schema.js';

function tinyBundle(overrides: Record<string, unknown> = {}) {
  return {
    version: 1,
    experiment: 'e',
    missingness: { type: 'extended', percent: 0.3 },
    sampling_rate_hz: 100,
    models: ['mean_fill'],
    samples: [
      {
        id: 's0',
        truth: [0, 1, 2, 3],
        missing_runs: [[1, 2]],
        imputations: { mean_fill: [{ start: 0, values: [0, 1.5, 1.5, 3] }] },
        metrics: { mean_fill: { mse: 0.25, mae: 0.5 } },
      },
    ],
    ...overrides,
  };
}

describe('parseBundle', () => {
  it('accepts a well-formed version-1 bundle', () => {
    const b = parseBundle(tinyBundle());
    expect(b.models).toEqual(['mean_fill']);
    expect(b.samples[0].missing_runs).toEqual([[1, 2]]);
    expect(b.samples[0].metrics.mean_fill.mse).toBe(0.25);
  });

  it('rejects other versions', () => {
    expect(() => parseBundle(tinyBundle({ version: 2 }))).toThrow(SchemaError);
  });

  it('rejects a sample missing a model imputation', () => {
    const doc = tinyBundle();
    (doc.samples[0] as { imputations: object }).imputations = {};
    expect(() => parseBundle(doc)).toThrow(/missing model/);
  });

  it('rejects non-numeric truth values', () => {
    const doc = tinyBundle();
    (doc.samples[0] as { truth: unknown[] }).truth = [0, 'x', 2];
    expect(() => parseBundle(doc)).toThrow(SchemaError);
  });

  it('rejects malformed missing runs', () => {
    const doc = tinyBundle();
    (doc.samples[0] as { missing_runs: unknown[] }).missing_runs = [[1, 2, 3]];
    expect(() => parseBundle(doc)).toThrow(/pair/);
  });

  it('accepts zero samples (empty-state bundle)', () => {
    const b = parseBundle(tinyBundle({ samples: [] }));
    expect(b.samples).toHaveLength(0);
  });
});
