/**
 * Wire types for the engine's HTTP service.
 *
 * The workbench never computes metrics or matrices itself; every number it
 * shows comes from one of these payloads.
 */

export interface ProfileRecord {
  label: string;
  offensive_strength: number;
  defensive_strength: number;
  relational_capacity: number;
  potential_energy: number;
  temporal_availability: number;
  contextual_fit: number;
  narrative_context?: string | null;
  scale_max?: number;
}

export type DimensionKey =
  | 'offensive_strength'
  | 'defensive_strength'
  | 'relational_capacity'
  | 'potential_energy'
  | 'temporal_availability'
  | 'contextual_fit';

export const DIMENSION_KEYS: DimensionKey[] = [
  'offensive_strength',
  'defensive_strength',
  'relational_capacity',
  'potential_energy',
  'temporal_availability',
  'contextual_fit',
];

export interface ActivationEntry {
  axiom_id: string;
  alpha: number;
}

export interface ActivationsRecord {
  scenario_ref: string;
  entries: ActivationEntry[];
}

export interface MatrixRecord {
  axiom_ids: string[];
  kappa: number[][];
  interference: number[][];
  scheme: { scheme: string; alpha_cal: number; beta_cal: number };
}

export interface SynthesisRecord {
  narrative: string;
  mode: 'entangled' | 'baseline';
  request_echo: {
    scenario: ProfileRecord;
    selected: { axiom: { id: string }; alpha: number }[];
    matrix_slice: number[];
    framing: { kind: string; template_id: string } | null;
    top_n: number;
    generation: Record<string, unknown>;
  };
  provider_metadata: Record<string, unknown>;
  warnings: string[];
}

export interface PerAxiomRow {
  axiom_id: string;
  best_similarity: number;
  covered: boolean;
}

export interface EvaluationRecord {
  variant_label: string;
  coverage: number;
  coherence: number | null;
  novelty: number;
  per_axiom: PerAxiomRow[];
  config: Record<string, unknown>;
  human_depth: string | null;
}

export interface MetricCells {
  entangled: number | null;
  baseline: number | null;
  delta: number | null;
  pct_improvement: number | null;
}

export interface CompareRecord {
  comparison: {
    entangled: string;
    baseline: string;
    metrics: { coverage: MetricCells; coherence: MetricCells; novelty: MetricCells };
  };
  entangled: SynthesisRecord;
  baseline: SynthesisRecord;
  reports: EvaluationRecord[];
}

export interface RadarRecord {
  axes: string[];
  series: { label: string; values: (number | null)[] }[];
}

export interface HealthRecord {
  status: string;
  version: string;
  library_count: number;
  embedding: { kind: string; ready: boolean };
  generation_kind: string;
}

export interface ErrorRecord {
  error: { code: string; message: string; request_id?: string };
}
