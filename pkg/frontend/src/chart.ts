// Sorted p-value strip chart: rank on x, p on y, the alpha reference line,
// markers at m-h, z and b, and the concentration prefix shaded. Hypotheses
// beyond the concentration set are visibly flagged: no confident discoveries
// live out there.

import type { StudyRow } from './state.js';
import { sortedByP } from './state.js';

export interface ChartModel {
  rows: StudyRow[];
  alpha: number;
  h: number;
  z: number;
  b: number;
}

const W = 640;
const H = 320;
const PAD = 40;

function sx(rank: number, m: number): number {
  return PAD + ((W - 2 * PAD) * rank) / Math.max(m, 1);
}

function sy(p: number): number {
  return H - PAD - (H - 2 * PAD) * p;
}

export function chartSvg(model: ChartModel): string {
  const sorted = sortedByP(model.rows);
  const m = sorted.length;
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg" ` +
      `role="img" aria-label="sorted p-values">`,
  );
  // axes
  parts.push(
    `<line x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}" class="axis"/>`,
    `<line x1="${PAD}" y1="${H - PAD}" x2="${PAD}" y2="${PAD}" class="axis"/>`,
  );
  // concentration prefix (ranks 1..z)
  if (model.z > 0) {
    parts.push(
      `<rect class="concentration" x="${sx(0.5, m)}" y="${PAD}" ` +
        `width="${sx(model.z + 0.5, m) - sx(0.5, m)}" height="${H - 2 * PAD}"/>`,
    );
  }
  // the Simes/BH reference line p = alpha * i / m
  parts.push(
    `<line class="alpha-line" x1="${sx(0, m)}" y1="${sy(0)}" ` +
      `x2="${sx(m, m)}" y2="${sy(model.alpha)}"/>`,
  );
  // rank markers
  const markers: Array<[number, string]> = [
    [m - model.h, 'marker-mh'],
    [model.z, 'marker-z'],
    [model.b, 'marker-b'],
  ];
  for (const [rank, cls] of markers) {
    const x = sx(rank, m);
    parts.push(
      `<line class="${cls}" x1="${x}" y1="${PAD}" x2="${x}" y2="${H - PAD}"/>`,
    );
  }
  // points
  sorted.forEach((row, i) => {
    const rank = i + 1;
    const outside = rank > model.z;
    const cls = outside ? 'pt outside' : 'pt';
    const note = outside ? ' data-note="no confident discoveries here"' : '';
    parts.push(
      `<circle class="${cls}" data-id="${row.id}" cx="${sx(rank, m)}" ` +
        `cy="${sy(row.p)}" r="3"${note}><title>${row.id}: p=${row.p}` +
        `${outside ? ' (no confident discoveries here)' : ''}</title></circle>`,
    );
  });
  parts.push(
    `<text class="legend" x="${PAD}" y="${PAD - 8}">m-h=${m - model.h}, ` +
      `z=${model.z}, b=${model.b}</text>`,
  );
  parts.push('</svg>');
  return parts.join('');
}

export function renderChart(container: Element, model: ChartModel): void {
  container.innerHTML = chartSvg(model);
}
