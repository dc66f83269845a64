// View state: the loaded study rows (for display only), the current selection,
// the last server answers, and the revision history. All bound numbers come
// from the server; the only client-side arithmetic is q = t / |S| for display.

import type { BoundWire, Selector, SummaryWire } from './api.js';

export interface StudyRow {
  id: string;
  p: number;
}

export interface HistoryEntry {
  alpha: number;
  selector: Selector;
  size: number;
  d: number;
  t: number;
  q: string;
}

export function parseCsv(text: string): StudyRow[] {
  const rows: StudyRow[] = [];
  const lines = text.split(/\r?\n/);
  for (const line of lines) {
    if (!line.trim()) continue;
    const sep = line.includes('\t') ? '\t' : ',';
    const cells = line.split(sep).map((c) => c.trim());
    if (cells.length !== 2) throw new Error(`expected 2 fields: ${line}`);
    const p = Number(cells[1]);
    if (Number.isNaN(p)) {
      if (rows.length === 0) continue; // header
      throw new Error(`not a p-value: ${cells[1]}`);
    }
    rows.push({ id: cells[0] ?? '', p });
  }
  if (rows.length === 0) throw new Error('no data rows');
  return rows;
}

export function sortedByP(rows: StudyRow[]): StudyRow[] {
  return rows
    .map((row, i) => ({ row, i }))
    .sort((a, b) => a.row.p - b.row.p || a.i - b.i)
    .map((x) => x.row);
}

/** The ids a selector denotes, for display; mirrors the server's resolution. */
export function resolveIds(rows: StudyRow[], sel: Selector): string[] {
  switch (sel.kind) {
    case 'ids':
      return [...sel.ids];
    case 'top':
      return sortedByP(rows)
        .slice(0, sel.k)
        .map((r) => r.id);
    case 'threshold':
      return rows.filter((r) => r.p <= sel.pMax).map((r) => r.id);
  }
}

export function displayQ(size: number, t: number): string {
  if (size === 0) return '0.000';
  return (t / size).toFixed(3);
}

export class ViewState {
  sessionId: string | null = null;
  alpha = 0.05;
  rows: StudyRow[] = [];
  selector: Selector = { kind: 'top', k: 0 };
  resolvedIds: string[] = [];
  summary: SummaryWire | null = null;
  lastBound: BoundWire | null = null;
  history: HistoryEntry[] = [];

  setStudy(sessionId: string, rows: StudyRow[]): void {
    this.sessionId = sessionId;
    this.rows = rows;
    this.selector = { kind: 'top', k: 0 };
    this.resolvedIds = [];
    this.summary = null;
    this.lastBound = null;
    this.history = [];
  }

  setSelector(sel: Selector): void {
    this.selector = sel;
    this.resolvedIds = resolveIds(this.rows, sel);
  }

  recordBound(bound: BoundWire): void {
    this.lastBound = bound;
    this.history.push({
      alpha: this.alpha,
      selector: this.selector,
      size: bound.size,
      d: bound.d,
      t: bound.t,
      q: displayQ(bound.size, bound.t),
    });
  }

  get qDisplay(): string {
    if (!this.lastBound) return '0.000';
    return displayQ(this.lastBound.size, this.lastBound.t);
  }
}
