// @vitest-environment happy-dom

import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { createClient, type FetchLike } from '../src/api';
import { DEBOUNCE_MS, exportHistoryJson, initApp, type App } from '../src/app';
import type {
  ActivationsRecord,
  CompareRecord,
  EvaluationRecord,
  MatrixRecord,
  SynthesisRecord,
} from '../src/types';

const ACTIVATIONS_A: ActivationsRecord = {
  scenario_ref: 'draft',
  entries: [
    { axiom_id: 'a1', alpha: 0.25 },
    { axiom_id: 'a2', alpha: 0.125 },
  ],
};

const ACTIVATIONS_B: ActivationsRecord = {
  scenario_ref: 'draft',
  entries: [{ axiom_id: 'a1', alpha: 0.9375 }],
};

const MATRIX: MatrixRecord = {
  axiom_ids: ['a1', 'a2'],
  kappa: [
    [1, 0.5],
    [0.5, 1],
  ],
  interference: [
    [1, 0.25],
    [0.25, 1],
  ],
  scheme: { scheme: 'action_constraint', alpha_cal: 2.0, beta_cal: 1.5 },
};

const SYNTHESIS: SynthesisRecord = {
  narrative: 'Act from strength.',
  mode: 'entangled',
  request_echo: {
    scenario: {
      label: 'draft',
      offensive_strength: 2.5,
      defensive_strength: 2.5,
      relational_capacity: 2.5,
      potential_energy: 2.5,
      temporal_availability: 2.5,
      contextual_fit: 2.5,
    },
    selected: [{ axiom: { id: 'a1' }, alpha: 0.25 }],
    matrix_slice: [1],
    framing: { kind: 'dominant', template_id: 'framing_dominant_v1' },
    top_n: 3,
    generation: {},
  },
  provider_metadata: {},
  warnings: [],
};

const EVALUATION: EvaluationRecord = {
  variant_label: 'dominant',
  coverage: 0.5,
  coherence: null,
  novelty: 0.125,
  per_axiom: [{ axiom_id: 'a1', best_similarity: 0.75, covered: true }],
  config: {},
  human_depth: null,
};

const COMPARE: CompareRecord = {
  comparison: {
    entangled: 'entangled',
    baseline: 'baseline',
    metrics: {
      coverage: { entangled: 0.5, baseline: 0.25, delta: 0.25, pct_improvement: 100 },
      coherence: { entangled: null, baseline: null, delta: null, pct_improvement: null },
      novelty: { entangled: 0.75, baseline: 0.5, delta: 0.25, pct_improvement: 50 },
    },
  },
  entangled: SYNTHESIS,
  baseline: SYNTHESIS,
  reports: [EVALUATION, { ...EVALUATION, variant_label: 'baseline', coherence: 0.5 }],
};

interface Call {
  url: string;
  init?: RequestInit;
}

type Handler = () => Response | Promise<Response>;

function jsonResponse(body: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    headers: { get: (name: string) => (name === 'X-Request-ID' ? 'req-hdr' : null) },
    json: async () => body,
  } as unknown as Response;
}

function deferred<T>(): { promise: Promise<T>; resolve: (value: T) => void } {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}

function harness(routes: Record<string, Handler>): { calls: Call[]; fetchImpl: FetchLike } {
  const calls: Call[] = [];
  const fetchImpl: FetchLike = (url, init) => {
    calls.push({ url, init });
    const path = url.replace('http://svc', '').split('?')[0];
    const handler = routes[path];
    if (!handler) return Promise.reject(new Error(`unrouted: ${url}`));
    return Promise.resolve(handler());
  };
  return { calls, fetchImpl };
}

function countCalls(calls: Call[], path: string): number {
  return calls.filter((c) => c.url.includes(path)).length;
}

async function flush(): Promise<void> {
  for (let i = 0; i < 10; i += 1) await Promise.resolve();
}

function click(id: string): void {
  (document.getElementById(id) as HTMLElement).click();
}

function panelHtml(id: string): string {
  return (document.getElementById(id) as HTMLElement).innerHTML;
}

function boot(routes: Record<string, Handler>): { calls: Call[]; app: App } {
  const { calls, fetchImpl } = harness(routes);
  const app = initApp(document, createClient('http://svc', fetchImpl));
  return { calls, app };
}

beforeEach(() => {
  document.body.innerHTML = '<div id="workbench"></div>';
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe('profile submit', () => {
  it('one click sends exactly one activations request', async () => {
    const { calls } = boot({ '/activations': () => jsonResponse(ACTIVATIONS_A) });
    click('recompute');
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    await flush();
    expect(countCalls(calls, '/activations')).toBe(1);
    expect(panelHtml('activations-panel')).toContain('0.2500');
  });

  it('rapid clicks coalesce into one request', async () => {
    const { calls } = boot({ '/activations': () => jsonResponse(ACTIVATIONS_A) });
    click('recompute');
    click('recompute');
    click('recompute');
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    await flush();
    expect(countCalls(calls, '/activations')).toBe(1);
  });

  it('slider drags send nothing and only move the value label', async () => {
    const { calls } = boot({ '/activations': () => jsonResponse(ACTIVATIONS_A) });
    const slider = document.querySelector(
      'input[data-dim="potential_energy"]',
    ) as HTMLInputElement;
    const output = document.querySelector(
      'output[data-dim-value="potential_energy"]',
    ) as HTMLOutputElement;
    slider.value = '4.2';
    slider.dispatchEvent(new Event('input'));
    slider.value = '4.7';
    slider.dispatchEvent(new Event('input'));
    await vi.advanceTimersByTimeAsync(10 * DEBOUNCE_MS);
    await flush();
    expect(calls).toHaveLength(0);
    expect(output.textContent).toBe('4.70');
  });

  it('submitted profile carries the edited slider values', async () => {
    const { calls } = boot({ '/activations': () => jsonResponse(ACTIVATIONS_A) });
    const slider = document.querySelector(
      'input[data-dim="offensive_strength"]',
    ) as HTMLInputElement;
    slider.value = '4.25';
    slider.dispatchEvent(new Event('input'));
    click('recompute');
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    await flush();
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body.offensive_strength).toBe(4.25);
    expect(body.label).toBe('draft');
  });

  it('discards a stale response when a newer one already landed', async () => {
    const first = deferred<Response>();
    const second = deferred<Response>();
    const queue = [first.promise, second.promise];
    const { calls } = boot({ '/activations': () => queue.shift()! });
    click('recompute');
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    click('recompute');
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    expect(countCalls(calls, '/activations')).toBe(2);
    second.resolve(jsonResponse(ACTIVATIONS_B));
    await flush();
    expect(panelHtml('activations-panel')).toContain('0.9375');
    first.resolve(jsonResponse(ACTIVATIONS_A));
    await flush();
    expect(panelHtml('activations-panel')).toContain('0.9375');
    expect(panelHtml('activations-panel')).not.toContain('0.2500');
  });
});

describe('matrix panel', () => {
  it('passes the chosen scheme and renders symmetric hover values', async () => {
    const { calls } = boot({ '/matrix': () => jsonResponse(MATRIX) });
    (document.getElementById('scheme') as HTMLSelectElement).value = 'action_constraint';
    click('fetch-matrix');
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    await flush();
    expect(calls[0].url).toBe('http://svc/matrix?scheme=action_constraint');
    const html = panelHtml('matrix-panel');
    expect(html).toContain('title="a1 x a2 = 0.250"');
    expect(html).toContain('title="a2 x a1 = 0.250"');
    expect(html).toContain('class="cell diag" title="a1 x a1 = 1.000"');
  });
});

describe('failures', () => {
  it('shows the error banner and keeps the previous panel', async () => {
    let healthy = true;
    const { calls } = boot({
      '/activations': () =>
        healthy
          ? jsonResponse(ACTIVATIONS_A)
          : jsonResponse(
              { error: { code: 'engine_error', message: 'boom', request_id: 'req-77' } },
              422,
            ),
    });
    click('recompute');
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    await flush();
    expect(panelHtml('activations-panel')).toContain('0.2500');

    healthy = false;
    click('recompute');
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS);
    await flush();
    expect(countCalls(calls, '/activations')).toBe(2);
    const banner = panelHtml('error-slot');
    expect(banner).toContain('engine_error');
    expect(banner).toContain('boom');
    expect(banner).toContain('request req-77');
    expect(panelHtml('activations-panel')).toContain('0.2500');
  });
});

describe('synthesis lane', () => {
  it('runs synthesize then evaluate and appends to history', async () => {
    const { calls, app } = boot({
      '/synthesize': () => jsonResponse(SYNTHESIS),
      '/evaluate': () => jsonResponse(EVALUATION),
    });
    click('synthesize');
    await flush();
    expect(countCalls(calls, '/synthesize')).toBe(1);
    expect(countCalls(calls, '/evaluate')).toBe(1);
    const evaluateBody = JSON.parse(
      String(calls.find((c) => c.url.includes('/evaluate'))?.init?.body),
    );
    expect(evaluateBody.synthesis).toBe('Act from strength.');
    expect(evaluateBody.input_ids).toEqual(['a1']);
    expect(evaluateBody.variant_label).toBe('dominant');
    expect(panelHtml('synthesis-panel')).toContain('Act from strength.');
    expect(panelHtml('evaluation-panel')).toContain('<dt>coherence</dt><dd>N/A</dd>');
    expect(app.state.history).toHaveLength(1);

    click('synthesize');
    await flush();
    expect(app.state.history).toHaveLength(2);
    expect([...panelHtml('history-panel').matchAll(/history-card/g)]).toHaveLength(2);
    const exported = JSON.parse(exportHistoryJson(app.state));
    expect(exported).toHaveLength(2);
    expect(exported[0].narrative).toBe('Act from strength.');
  });

  it('ignores a second click while a synthesis is in flight', async () => {
    const gate = deferred<Response>();
    const { calls, app } = boot({
      '/synthesize': () => gate.promise,
      '/evaluate': () => jsonResponse(EVALUATION),
    });
    click('synthesize');
    click('synthesize');
    await flush();
    expect(countCalls(calls, '/synthesize')).toBe(1);
    gate.resolve(jsonResponse(SYNTHESIS));
    await flush();
    expect(app.state.history).toHaveLength(1);
  });

  it('baseline checkbox sends a null framing', async () => {
    const { calls } = boot({
      '/synthesize': () => jsonResponse({ ...SYNTHESIS, mode: 'baseline' }),
      '/evaluate': () => jsonResponse({ ...EVALUATION, variant_label: 'baseline' }),
    });
    (document.getElementById('baseline') as HTMLInputElement).checked = true;
    click('synthesize');
    await flush();
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body.framing).toBeNull();
    expect(body.baseline).toBe(true);
  });
});

describe('comparison lane', () => {
  it('renders the metric table and a radar with N/A slots', async () => {
    const { calls } = boot({ '/compare': () => jsonResponse(COMPARE) });
    click('compare');
    await flush();
    expect(countCalls(calls, '/compare')).toBe(1);
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body.framing).toBe('dominant');
    expect(body.top_n).toBe(3);
    const table = panelHtml('comparison-panel');
    expect(table).toContain('50.00%');
    expect(table).toContain('<th>coherence</th><td>N/A</td><td>N/A</td><td>N/A</td><td>N/A</td>');
    const radar = panelHtml('radar-panel');
    expect(radar).toContain('data-axis="coherence">N/A</td>');
    expect(radar).toContain('data-axis="coverage">0.500</td>');
  });
});
