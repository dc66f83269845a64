// Typed client for the session service. Bound queries are latest-wins: a new
// request aborts the previous in-flight one, which then resolves to null.

export interface UploadReply {
  session_id: string;
  m: number;
}

export interface SummaryWire {
  m: number;
  alpha: number;
  h: number;
  z: number;
  pi_hat: string;
  r_size: number;
  b: number;
  concentration_ids: string[];
}

export interface BoundWire {
  size: number;
  d: number;
  t: number;
  q: string;
}

export type Selector =
  | { kind: 'ids'; ids: string[] }
  | { kind: 'top'; k: number }
  | { kind: 'threshold'; pMax: number };

export function selectorBody(sel: Selector): Record<string, unknown> {
  switch (sel.kind) {
    case 'ids':
      return { ids: sel.ids };
    case 'top':
      return { top: sel.k };
    case 'threshold':
      return { p_max: sel.pMax };
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(`service replied ${status}: ${detail}`);
  }
}

async function checked(response: Response): Promise<unknown> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && body.detail !== undefined) detail = JSON.stringify(body.detail);
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json();
}

export class ApiClient {
  private boundController: AbortController | null = null;

  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async uploadCsv(text: string): Promise<UploadReply> {
    const response = await this.fetchFn(`${this.base}/studies`, {
      method: 'POST',
      headers: { 'content-type': 'text/csv' },
      body: text,
    });
    return (await checked(response)) as UploadReply;
  }

  async summary(sid: string, alpha: number): Promise<SummaryWire> {
    const response = await this.fetchFn(
      `${this.base}/studies/${encodeURIComponent(sid)}/summary?alpha=${alpha}`,
    );
    return (await checked(response)) as SummaryWire;
  }

  /** Resolves to null when superseded by a newer bound request. */
  async bound(sid: string, alpha: number, sel: Selector): Promise<BoundWire | null> {
    this.boundController?.abort();
    const controller = new AbortController();
    this.boundController = controller;
    try {
      const response = await this.fetchFn(
        `${this.base}/studies/${encodeURIComponent(sid)}/bound`,
        {
          method: 'POST',
          headers: { 'content-type': 'application/json' },
          body: JSON.stringify({ alpha, ...selectorBody(sel) }),
          signal: controller.signal,
        },
      );
      return (await checked(response)) as BoundWire;
    } catch (err) {
      if ((err as Error).name === 'AbortError') return null;
      throw err;
    } finally {
      if (this.boundController === controller) this.boundController = null;
    }
  }

  async minAlpha(
    sid: string,
    sel: Selector,
    k: number,
    tol = 1e-4,
  ): Promise<{ alpha: number | null; attainable: boolean }> {
    const response = await this.fetchFn(
      `${this.base}/studies/${encodeURIComponent(sid)}/min-alpha`,
      {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ k, tol, ...selectorBody(sel) }),
      },
    );
    return (await checked(response)) as { alpha: number | null; attainable: boolean };
  }
}
