/**
 * Pure HTML renderers. Each takes a service payload and returns a markup
 * string; nothing here recomputes a metric or a matrix entry, so every
 * number on screen is a payload value verbatim (fixed-decimal formatting
 * only). Keeping these DOM-free makes them directly snapshot-testable.
 */

import type {
  ActivationsRecord,
  CompareRecord,
  EvaluationRecord,
  MatrixRecord,
  RadarRecord,
  SynthesisRecord,
} from './types';

import type { HistoryEntry } from './state';
import type { ServiceError } from './api';

/**
 * Reshape evaluation reports into the radar record. Pure reshuffling of
 * payload values into the fixed axis order; nothing is recomputed.
 */
export function radarRecordFromReports(reports: EvaluationRecord[]): RadarRecord {
  return {
    axes: ['coverage', 'coherence', 'novelty'],
    series: reports.map((report) => ({
      label: report.variant_label,
      values: [report.coverage, report.coherence, report.novelty],
    })),
  };
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function fmt(value: number | null, decimals: number): string {
  return value === null ? 'N/A' : value.toFixed(decimals);
}

export function renderActivationBars(record: ActivationsRecord): string {
  if (record.entries.length === 0) {
    return '<p class="empty">No axioms in the library.</p>';
  }
  const peak = Math.max(...record.entries.map((e) => Math.abs(e.alpha)));
  const rows = record.entries.map((entry) => {
    const width = peak > 0 ? (Math.abs(entry.alpha) / peak) * 100 : 0;
    return [
      '<div class="bar-row">',
      `<span class="bar-id">${escapeHtml(entry.axiom_id)}</span>`,
      `<span class="bar" style="width:${width.toFixed(1)}%"></span>`,
      `<span class="bar-alpha">${entry.alpha.toFixed(4)}</span>`,
      '</div>',
    ].join('');
  });
  return [
    `<div class="bars" data-scenario="${escapeHtml(record.scenario_ref)}">`,
    ...rows,
    '</div>',
  ].join('\n');
}

export function renderHeatmap(record: MatrixRecord): string {
  const ids = record.axiom_ids;
  const grid = record.interference;
  const consistent =
    grid.length === ids.length && grid.every((row) => row.length === ids.length);
  if (!consistent) {
    return '<div class="integrity-warning">Matrix shape does not match the axiom ids; refusing to render.</div>';
  }
  const header = ['<tr><th></th>', ...ids.map((id) => `<th>${escapeHtml(id)}</th>`), '</tr>'].join('');
  const body = ids.map((rowId, i) => {
    const cells = ids.map((colId, j) => {
      const value = grid[i][j];
      const classes = i === j ? 'cell diag' : 'cell';
      const hover = `${escapeHtml(rowId)} x ${escapeHtml(colId)} = ${value.toFixed(3)}`;
      return `<td class="${classes}" title="${hover}">${value.toFixed(3)}</td>`;
    });
    return [`<tr><th>${escapeHtml(rowId)}</th>`, ...cells, '</tr>'].join('');
  });
  return [
    `<table class="heatmap" data-scheme="${escapeHtml(record.scheme.scheme)}">`,
    header,
    ...body,
    '</table>',
  ].join('\n');
}

export function renderEvaluation(report: EvaluationRecord): string {
  const perAxiom = report.per_axiom.map((row) =>
    [
      '<tr>',
      `<td>${escapeHtml(row.axiom_id)}</td>`,
      `<td>${row.best_similarity.toFixed(3)}</td>`,
      `<td>${row.covered ? 'covered' : 'missed'}</td>`,
      '</tr>',
    ].join(''),
  );
  return [
    `<div class="evaluation" data-variant="${escapeHtml(report.variant_label)}">`,
    '<dl class="metric-triple">',
    `<dt>coverage</dt><dd>${fmt(report.coverage, 3)}</dd>`,
    `<dt>coherence</dt><dd>${fmt(report.coherence, 3)}</dd>`,
    `<dt>novelty</dt><dd>${fmt(report.novelty, 3)}</dd>`,
    '</dl>',
    '<table class="per-axiom">',
    ...perAxiom,
    '</table>',
    '</div>',
  ].join('\n');
}

export function renderNarrativeCard(result: SynthesisRecord): string {
  const framing = result.request_echo.framing;
  const badge = framing === null ? 'baseline' : framing.kind;
  const warnings = result.warnings.map(
    (w) => `<li class="warning">${escapeHtml(w)}</li>`,
  );
  return [
    `<article class="narrative" data-mode="${result.mode}">`,
    `<span class="badge">${escapeHtml(badge)}</span>`,
    `<p>${escapeHtml(result.narrative)}</p>`,
    warnings.length > 0 ? `<ul class="warnings">${warnings.join('')}</ul>` : '',
    '</article>',
  ]
    .filter((part) => part !== '')
    .join('\n');
}

/** Polar vertex for axis k of n at unit radius, 12 o'clock start. */
function vertex(k: number, n: number, radius: number): { x: number; y: number } {
  const angle = (Math.PI * 2 * k) / n - Math.PI / 2;
  return { x: Math.cos(angle) * radius, y: Math.sin(angle) * radius };
}

export function renderRadar(record: RadarRecord): string {
  const n = record.axes.length;
  const radius = 90;
  // Display-only scaling: each axis stretches to the largest value any
  // series reports on it, so shapes stay comparable without clipping.
  const axisPeak = record.axes.map((_, k) => {
    const magnitudes = record.series
      .map((s) => s.values[k])
      .filter((v): v is number => v !== null)
      .map((v) => Math.abs(v));
    return Math.max(1e-9, ...magnitudes);
  });
  const axes = record.axes.map((axis, k) => {
    const tip = vertex(k, n, radius);
    const anchor = vertex(k, n, radius + 12);
    return [
      `<line x1="0" y1="0" x2="${tip.x.toFixed(1)}" y2="${tip.y.toFixed(1)}" class="axis"></line>`,
      `<text x="${anchor.x.toFixed(1)}" y="${anchor.y.toFixed(1)}" class="axis-label">${escapeHtml(axis)}</text>`,
    ].join('');
  });
  const polygons = record.series.map((series) => {
    const points = series.values
      .map((value, k) => {
        if (value === null) return null;
        const scaled = Math.max(0, value) / axisPeak[k];
        const point = vertex(k, n, scaled * radius);
        return `${point.x.toFixed(1)},${point.y.toFixed(1)}`;
      })
      .filter((p): p is string => p !== null);
    return `<polygon class="series" data-label="${escapeHtml(series.label)}" points="${points.join(' ')}"></polygon>`;
  });
  const legendHeader = [
    '<tr><th>axis</th>',
    ...record.series.map((s) => `<th>${escapeHtml(s.label)}</th>`),
    '</tr>',
  ].join('');
  const legendRows = record.axes.map((axis, k) => {
    const cells = record.series.map(
      (s) => `<td data-axis="${escapeHtml(axis)}">${fmt(s.values[k], 3)}</td>`,
    );
    return [`<tr><th>${escapeHtml(axis)}</th>`, ...cells, '</tr>'].join('');
  });
  return [
    '<figure class="radar">',
    `<svg viewBox="-120 -120 240 240">${axes.join('')}${polygons.join('')}</svg>`,
    '<table class="radar-legend">',
    legendHeader,
    ...legendRows,
    '</table>',
    '</figure>',
  ].join('\n');
}

export function renderComparison(record: CompareRecord): string {
  const metrics = record.comparison.metrics;
  const rows = (Object.keys(metrics) as (keyof typeof metrics)[]).map((name) => {
    const cells = metrics[name];
    const pct =
      cells.pct_improvement === null ? 'N/A' : `${cells.pct_improvement.toFixed(2)}%`;
    return [
      '<tr>',
      `<th>${name}</th>`,
      `<td>${fmt(cells.entangled, 3)}</td>`,
      `<td>${fmt(cells.baseline, 3)}</td>`,
      `<td>${fmt(cells.delta, 3)}</td>`,
      `<td>${pct}</td>`,
      '</tr>',
    ].join('');
  });
  return [
    '<table class="comparison">',
    '<tr><th>metric</th><th>entangled</th><th>baseline</th><th>delta</th><th>pct</th></tr>',
    ...rows,
    '</table>',
  ].join('\n');
}

export function renderHistory(entries: readonly HistoryEntry[]): string {
  if (entries.length === 0) {
    return '<p class="empty">No runs yet.</p>';
  }
  const cards = entries.map((entry, index) =>
    [
      `<article class="history-card" data-index="${index}">`,
      `<header>${escapeHtml(entry.label)} <span class="badge">${escapeHtml(entry.framing)}</span></header>`,
      `<p>${escapeHtml(entry.narrative)}</p>`,
      entry.report ? renderEvaluation(entry.report) : '',
      '</article>',
    ]
      .filter((part) => part !== '')
      .join('\n'),
  );
  return cards.join('\n');
}

export function renderErrorBanner(error: ServiceError): string {
  const requestId = error.requestId
    ? ` <span class="request-id">request ${escapeHtml(error.requestId)}</span>`
    : '';
  return [
    '<div class="error-banner" role="alert">',
    `<strong>${escapeHtml(error.code)}</strong> ${escapeHtml(error.message)}${requestId}`,
    '<button data-action="retry">Retry</button>',
    '</div>',
  ].join('');
}
