// Wiring: file load starts a session, the alpha slider refreshes summary and
// the current bound, selection widgets issue bound queries, and a history log
// records every revision. Empty selections short-circuit to the definitional
// zero report without a network call.

import { ApiClient, type BoundWire, type Selector } from './api.js';
import { renderChart } from './chart.js';
import { HistoryEntry, ViewState, parseCsv } from './state.js';

const TEMPLATE = `
  <section class="loader">
    <label>p-value table (CSV/TSV)
      <input type="file" id="file-input" accept=".csv,.tsv,.txt">
    </label>
    <span id="study-info"></span>
  </section>
  <section class="controls" hidden id="controls">
    <label>alpha
      <input type="range" id="alpha-slider" min="0.001" max="0.999" step="0.001" value="0.05">
      <output id="alpha-value">0.050</output>
    </label>
    <div class="summary">
      h=<span id="summary-h">-</span>
      z=<span id="summary-z">-</span>
      pi_hat=<span id="summary-pihat">-</span>
      |R|=<span id="summary-r">-</span>
      b=<span id="summary-b">-</span>
    </div>
    <fieldset class="selection">
      <legend>selection</legend>
      <label>ids <input type="text" id="ids-input" placeholder="g1,g2"></label>
      <button id="apply-ids">apply</button>
      <label>top ranks <input type="number" id="topk-input" min="0" value="0"></label>
      <button id="apply-top">apply</button>
      <label>p &le; <input type="number" id="threshold-input" min="0" max="1" step="0.001" value="0.05"></label>
      <button id="apply-threshold">apply</button>
    </fieldset>
    <div class="readouts">
      discoveries d=<span id="readout-d">0</span>
      false discoveries t&le;<span id="readout-t">0</span>
      FDP q&le;<span id="readout-q">0.000</span>
      (|S|=<span id="readout-size">0</span>)
    </div>
    <div id="resolved-ids"></div>
    <div id="chart"></div>
    <section class="history">
      <h3>selection history</h3>
      <ol id="history"></ol>
    </section>
  </section>
  <p id="status" role="status"></p>
`;

export interface App {
  state: ViewState;
  loadCsv(text: string): Promise<void>;
  setAlpha(alpha: number): Promise<void>;
  applySelector(sel: Selector): Promise<void>;
  replayHistory(): Promise<HistoryEntry[]>;
}

function emptyBound(): BoundWire {
  return { size: 0, d: 0, t: 0, q: '0' };
}

export function createApp(root: Element, api: ApiClient): App {
  root.innerHTML = TEMPLATE;
  const doc = root.ownerDocument;
  const byId = <T extends Element>(id: string): T => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as unknown as T;
  };

  const state = new ViewState();
  const fileInput = byId<HTMLInputElement>('file-input');
  const controls = byId<HTMLElement>('controls');
  const slider = byId<HTMLInputElement>('alpha-slider');
  const alphaOut = byId<HTMLOutputElement>('alpha-value');
  const status = byId<HTMLElement>('status');

  function setStatus(text: string): void {
    status.textContent = text;
  }

  function renderSummary(): void {
    const s = state.summary;
    byId('summary-h').textContent = s ? String(s.h) : '-';
    byId('summary-z').textContent = s ? String(s.z) : '-';
    byId('summary-pihat').textContent = s ? s.pi_hat : '-';
    byId('summary-r').textContent = s ? String(s.r_size) : '-';
    byId('summary-b').textContent = s ? String(s.b) : '-';
    if (s) {
      renderChart(byId('chart'), {
        rows: state.rows,
        alpha: s.alpha,
        h: s.h,
        z: s.z,
        b: s.b,
      });
    }
  }

  function renderBound(): void {
    const bound = state.lastBound ?? emptyBound();
    byId('readout-d').textContent = String(bound.d);
    byId('readout-t').textContent = String(bound.t);
    byId('readout-q').textContent = state.qDisplay;
    byId('readout-size').textContent = String(bound.size);
    byId('resolved-ids').textContent =
      state.resolvedIds.length > 0 ? `ids: ${state.resolvedIds.join(', ')}` : '';
  }

  function renderHistory(): void {
    const list = byId<HTMLOListElement>('history');
    list.innerHTML = '';
    for (const entry of state.history) {
      const item = doc.createElement('li');
      item.textContent =
        `alpha=${entry.alpha} ${describeSelector(entry.selector)} -> ` +
        `d=${entry.d} t=${entry.t} q=${entry.q}`;
      list.appendChild(item);
    }
  }

  function describeSelector(sel: Selector): string {
    switch (sel.kind) {
      case 'ids':
        return `ids:${sel.ids.join(',')}`;
      case 'top':
        return `top:${sel.k}`;
      case 'threshold':
        return `p<=${sel.pMax}`;
    }
  }

  async function refreshBound(): Promise<void> {
    if (!state.sessionId) return;
    if (state.resolvedIds.length === 0) {
      // empty selection: q = 0 by definition, no server call
      state.lastBound = emptyBound();
      renderBound();
      return;
    }
    const bound = await api.bound(state.sessionId, state.alpha, state.selector);
    if (bound === null) return; // superseded by a newer request
    state.recordBound(bound);
    renderBound();
    renderHistory();
  }

  async function refreshSummary(): Promise<void> {
    if (!state.sessionId) return;
    state.summary = await api.summary(state.sessionId, state.alpha);
    renderSummary();
  }

  const app: App = {
    state,

    async loadCsv(text: string): Promise<void> {
      const rows = parseCsv(text);
      const reply = await api.uploadCsv(text);
      state.setStudy(reply.session_id, rows);
      controls.hidden = false;
      byId('study-info').textContent = `m=${reply.m} session=${reply.session_id}`;
      await refreshSummary();
      renderBound();
      renderHistory();
      setStatus(`loaded ${reply.m} hypotheses`);
    },

    async setAlpha(alpha: number): Promise<void> {
      state.alpha = alpha;
      slider.value = String(alpha);
      alphaOut.textContent = alpha.toFixed(3);
      await refreshSummary();
      await refreshBound();
    },

    async applySelector(sel: Selector): Promise<void> {
      state.setSelector(sel);
      await refreshBound();
    },

    async replayHistory(): Promise<HistoryEntry[]> {
      // re-issue every recorded revision; answers must reproduce exactly
      const sid = state.sessionId;
      if (!sid) return [];
      const replayed: HistoryEntry[] = [];
      for (const entry of state.history) {
        const bound = await api.bound(sid, entry.alpha, entry.selector);
        if (bound === null) continue;
        replayed.push({
          alpha: entry.alpha,
          selector: entry.selector,
          size: bound.size,
          d: bound.d,
          t: bound.t,
          q: bound.size === 0 ? '0.000' : (bound.t / bound.size).toFixed(3),
        });
      }
      return replayed;
    },
  };

  fileInput.addEventListener('change', () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    file
      .text()
      .then((text) => app.loadCsv(text))
      .catch((err: Error) => setStatus(`load failed: ${err.message}`));
  });

  slider.addEventListener('input', () => {
    app.setAlpha(Number(slider.value)).catch((err: Error) =>
      setStatus(`alpha update failed: ${err.message}`),
    );
  });

  byId<HTMLButtonElement>('apply-ids').addEventListener('click', () => {
    const raw = byId<HTMLInputElement>('ids-input').value;
    const ids = raw
      .split(',')
      .map((s) => s.trim())
      .filter((s) => s.length > 0);
    app.applySelector({ kind: 'ids', ids }).catch((err: Error) =>
      setStatus(`selection failed: ${err.message}`),
    );
  });

  byId<HTMLButtonElement>('apply-top').addEventListener('click', () => {
    const k = Number(byId<HTMLInputElement>('topk-input').value);
    app.applySelector({ kind: 'top', k }).catch((err: Error) =>
      setStatus(`selection failed: ${err.message}`),
    );
  });

  byId<HTMLButtonElement>('apply-threshold').addEventListener('click', () => {
    const pMax = Number(byId<HTMLInputElement>('threshold-input').value);
    app.applySelector({ kind: 'threshold', pMax }).catch((err: Error) =>
      setStatus(`selection failed: ${err.message}`),
    );
  });

  return app;
}
