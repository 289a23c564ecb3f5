/**
 * DOM wiring for the workbench.
 *
 * Every request is explicit: slider drags only update the value labels,
 * and each panel refreshes on its own button. Responses that arrive after
 * a newer request for the same lane are discarded by request id. A failed
 * request shows a banner and leaves the previous panel content in place.
 */

import type { Client, ServiceError } from './api';
import {
  radarRecordFromReports,
  renderActivationBars,
  renderComparison,
  renderErrorBanner,
  renderEvaluation,
  renderHeatmap,
  renderHistory,
  renderNarrativeCard,
  renderRadar,
} from './render';
import {
  appendHistory,
  clampDimension,
  initialState,
  isLatest,
  nextRequestId,
  type WorkbenchState,
} from './state';
import { DIMENSION_KEYS, type DimensionKey, type ProfileRecord } from './types';

export const DEBOUNCE_MS = 150;

export const DEFAULT_PROFILE: ProfileRecord = {
  label: 'draft',
  offensive_strength: 2.5,
  defensive_strength: 2.5,
  relational_capacity: 2.5,
  potential_energy: 2.5,
  temporal_availability: 2.5,
  contextual_fit: 2.5,
  narrative_context: null,
  scale_max: 5,
};

const DIMENSION_LABELS: Record<DimensionKey, string> = {
  offensive_strength: 'Offensive Strength',
  defensive_strength: 'Defensive Strength',
  relational_capacity: 'Relational Capacity',
  potential_energy: 'Potential Energy',
  temporal_availability: 'Temporal Availability',
  contextual_fit: 'Contextual Fit',
};

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, waitMs);
  };
}

export function buildLayout(): string {
  const sliders = DIMENSION_KEYS.map((key) =>
    [
      '<label class="dim">',
      `<span>${DIMENSION_LABELS[key]}</span>`,
      `<input type="range" min="0" max="5" step="0.01" value="2.5" data-dim="${key}">`,
      `<output data-dim-value="${key}">2.50</output>`,
      '</label>',
    ].join(''),
  );
  return [
    '<section id="profile-form">',
    '<label>Label <input type="text" id="profile-label" value="draft"></label>',
    ...sliders,
    '<label>Framing <select id="framing">',
    '<option value="dominant">dominant</option>',
    '<option value="contrarian">contrarian</option>',
    '<option value="minimalist">minimalist</option>',
    '</select></label>',
    '<label><input type="checkbox" id="baseline"> baseline</label>',
    '<label>Scheme <select id="scheme">',
    '<option value="similarity_based">similarity_based</option>',
    '<option value="action_constraint">action_constraint</option>',
    '</select></label>',
    '<button id="recompute">Recompute activations</button>',
    '<button id="fetch-matrix">Fetch matrix</button>',
    '<button id="synthesize">Synthesize</button>',
    '<button id="compare">Compare</button>',
    '<button id="export-history">Export history</button>',
    '</section>',
    '<div id="error-slot"></div>',
    '<section id="activations-panel"></section>',
    '<section id="matrix-panel"></section>',
    '<section id="synthesis-panel"></section>',
    '<section id="evaluation-panel"></section>',
    '<section id="comparison-panel"></section>',
    '<section id="radar-panel"></section>',
    '<section id="history-panel"></section>',
  ].join('\n');
}

export function exportHistoryJson(state: WorkbenchState): string {
  return JSON.stringify(state.history, null, 2);
}

export interface App {
  state: WorkbenchState;
}

export function initApp(doc: Document, client: Client): App {
  const state = initialState(DEFAULT_PROFILE);
  const root = doc.getElementById('workbench') ?? doc.body;
  root.innerHTML = buildLayout();

  const panel = (id: string): HTMLElement => {
    const node = doc.getElementById(id);
    if (!node) throw new Error(`missing panel: ${id}`);
    return node;
  };
  const errorSlot = panel('error-slot');

  function showError(error: unknown): void {
    errorSlot.innerHTML = renderErrorBanner(error as ServiceError);
  }

  function profileFromForm(): ProfileRecord {
    const profile: ProfileRecord = { ...state.profile };
    const labelInput = doc.getElementById('profile-label') as HTMLInputElement | null;
    if (labelInput && labelInput.value.trim()) profile.label = labelInput.value.trim();
    for (const key of DIMENSION_KEYS) {
      const input = root.querySelector<HTMLInputElement>(`input[data-dim="${key}"]`);
      if (input) profile[key] = clampDimension(parseFloat(input.value));
    }
    state.profile = profile;
    return profile;
  }

  // Slider drags update the value label only; no request leaves here.
  for (const key of DIMENSION_KEYS) {
    const input = root.querySelector<HTMLInputElement>(`input[data-dim="${key}"]`);
    const output = root.querySelector<HTMLOutputElement>(`output[data-dim-value="${key}"]`);
    input?.addEventListener('input', () => {
      if (output) output.textContent = clampDimension(parseFloat(input.value)).toFixed(2);
    });
  }

  async function submitActivations(): Promise<void> {
    const requestId = nextRequestId(state, 'activations');
    try {
      const record = await client.activations(profileFromForm());
      if (!isLatest(state, 'activations', requestId)) return;
      state.latestActivations = record;
      errorSlot.innerHTML = '';
      panel('activations-panel').innerHTML = renderActivationBars(record);
    } catch (error) {
      if (isLatest(state, 'activations', requestId)) showError(error);
    }
  }

  async function fetchMatrix(): Promise<void> {
    const requestId = nextRequestId(state, 'matrix');
    const scheme = (doc.getElementById('scheme') as HTMLSelectElement | null)?.value;
    try {
      const record = await client.matrix(scheme);
      if (!isLatest(state, 'matrix', requestId)) return;
      state.latestMatrix = record;
      errorSlot.innerHTML = '';
      panel('matrix-panel').innerHTML = renderHeatmap(record);
    } catch (error) {
      if (isLatest(state, 'matrix', requestId)) showError(error);
    }
  }

  let synthesisInFlight = false;

  async function runSynthesis(): Promise<void> {
    if (synthesisInFlight) return;
    synthesisInFlight = true;
    const requestId = nextRequestId(state, 'synthesis');
    const framing = (doc.getElementById('framing') as HTMLSelectElement).value;
    const baseline = (doc.getElementById('baseline') as HTMLInputElement).checked;
    try {
      const profile = profileFromForm();
      const result = await client.synthesize({
        framing: baseline ? null : framing,
        top_n: 3,
        baseline,
        profile,
      });
      const label = baseline ? 'baseline' : framing;
      const report = await client.evaluate({
        synthesis: result.narrative,
        input_ids: result.request_echo.selected.map((s) => s.axiom.id),
        variant_label: label,
      });
      if (!isLatest(state, 'synthesis', requestId)) return;
      state.latestSynthesis = result;
      state.framing = framing;
      appendHistory(state, { label, framing: label, narrative: result.narrative, report });
      errorSlot.innerHTML = '';
      panel('synthesis-panel').innerHTML = renderNarrativeCard(result);
      panel('evaluation-panel').innerHTML = renderEvaluation(report);
      panel('history-panel').innerHTML = renderHistory(state.history);
    } catch (error) {
      if (isLatest(state, 'synthesis', requestId)) showError(error);
    } finally {
      synthesisInFlight = false;
    }
  }

  async function runCompare(): Promise<void> {
    const requestId = nextRequestId(state, 'compare');
    const framing = (doc.getElementById('framing') as HTMLSelectElement).value;
    try {
      const record = await client.compare(framing, 3, profileFromForm());
      if (!isLatest(state, 'compare', requestId)) return;
      errorSlot.innerHTML = '';
      panel('comparison-panel').innerHTML = renderComparison(record);
      panel('radar-panel').innerHTML = renderRadar(radarRecordFromReports(record.reports));
    } catch (error) {
      if (isLatest(state, 'compare', requestId)) showError(error);
    }
  }

  function downloadHistory(): void {
    const payload = exportHistoryJson(state);
    const url = `data:application/json;charset=utf-8,${encodeURIComponent(payload)}`;
    const anchor = doc.createElement('a');
    anchor.setAttribute('href', url);
    anchor.setAttribute('download', 'workbench-history.json');
    anchor.click();
  }

  const debouncedActivations = debounce(() => void submitActivations(), DEBOUNCE_MS);
  const debouncedMatrix = debounce(() => void fetchMatrix(), DEBOUNCE_MS);
  doc.getElementById('recompute')?.addEventListener('click', debouncedActivations);
  doc.getElementById('fetch-matrix')?.addEventListener('click', debouncedMatrix);
  doc.getElementById('synthesize')?.addEventListener('click', () => void runSynthesis());
  doc.getElementById('compare')?.addEventListener('click', () => void runCompare());
  doc.getElementById('export-history')?.addEventListener('click', downloadHistory);

  return { state };
}
