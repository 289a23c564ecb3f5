/**
 * Workbench session state.
 *
 * Slider values stay inside [0, scale]. Results arriving out of order are
 * dropped by request id ("latest only" per lane). History is append-only
 * for the life of the session; entries are frozen on append.
 */

import type {
  ActivationsRecord,
  EvaluationRecord,
  MatrixRecord,
  ProfileRecord,
  SynthesisRecord,
} from './types';

export type Lane = 'activations' | 'matrix' | 'synthesis' | 'compare';

export interface HistoryEntry {
  label: string;
  framing: string;
  narrative: string;
  report: EvaluationRecord | null;
}

export interface WorkbenchState {
  profile: ProfileRecord;
  framing: string;
  latestActivations: ActivationsRecord | null;
  latestMatrix: MatrixRecord | null;
  latestSynthesis: SynthesisRecord | null;
  history: readonly HistoryEntry[];
  counters: Record<Lane, number>;
}

export const DEFAULT_SCALE = 5;

export function initialState(profile: ProfileRecord): WorkbenchState {
  return {
    profile: { ...profile },
    framing: 'dominant',
    latestActivations: null,
    latestMatrix: null,
    latestSynthesis: null,
    history: [],
    counters: { activations: 0, matrix: 0, synthesis: 0, compare: 0 },
  };
}

export function clampDimension(value: number, scale: number = DEFAULT_SCALE): number {
  if (Number.isNaN(value)) return 0;
  return Math.min(scale, Math.max(0, value));
}

export function nextRequestId(state: WorkbenchState, lane: Lane): number {
  state.counters[lane] += 1;
  return state.counters[lane];
}

export function isLatest(state: WorkbenchState, lane: Lane, id: number): boolean {
  return state.counters[lane] === id;
}

export function appendHistory(state: WorkbenchState, entry: HistoryEntry): void {
  state.history = [...state.history, Object.freeze({ ...entry })];
}
