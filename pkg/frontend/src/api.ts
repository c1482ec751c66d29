// Typed client for the reader-study service. Consumes the HTTP API verbatim;
// report responses keep their raw body so the summary can display the
// service's numbers byte-for-byte instead of re-deriving them.

export type Verdict = "real" | "synthetic";

export interface CreateSessionResponse {
  session_id: string;
  n_items: number;
}

export interface SessionStatus {
  session_id: string;
  n_items: number;
  answered: number;
  next_index: number | null;
  state: "open" | "complete";
}

export interface VerdictResponse {
  accepted: boolean;
  answered: number;
  state: "open" | "complete";
}

export interface ReaderReport {
  session_id: string;
  reader_id: string;
  TR: number;
  FR: number;
  TS: number;
  FS: number;
  acc: number;
}

export interface RawReport {
  report: ReaderReport;
  raw: string; // exact response body
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectOk(res: Response, expected = 200): Promise<Response> {
  if (res.status !== expected) {
    const text = await res.text().catch(() => "");
    throw new ApiError(res.status, `${res.status}: ${text}`);
  }
  return res;
}

export class StudyApi {
  constructor(
    private base: string = "",
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  async createSession(
    readerId: string,
    modality: string,
    resolution: number,
  ): Promise<CreateSessionResponse> {
    const res = await this.fetchFn(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ reader_id: readerId, modality, resolution }),
    });
    await expectOk(res, 201);
    return (await res.json()) as CreateSessionResponse;
  }

  async status(sessionId: string): Promise<SessionStatus> {
    const res = await this.fetchFn(`${this.base}/sessions/${sessionId}`);
    await expectOk(res);
    return (await res.json()) as SessionStatus;
  }

  async itemBlob(sessionId: string, index: number): Promise<Blob> {
    const res = await this.fetchFn(`${this.base}/sessions/${sessionId}/items/${index}`);
    await expectOk(res);
    return await res.blob();
  }

  async submitVerdict(
    sessionId: string,
    index: number,
    verdict: Verdict,
  ): Promise<VerdictResponse> {
    const res = await this.fetchFn(
      `${this.base}/sessions/${sessionId}/items/${index}/verdict`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ verdict }),
      },
    );
    await expectOk(res);
    return (await res.json()) as VerdictResponse;
  }

  async report(sessionId: string): Promise<RawReport> {
    const res = await this.fetchFn(`${this.base}/sessions/${sessionId}/report`);
    await expectOk(res);
    const raw = await res.text();
    return { report: JSON.parse(raw) as ReaderReport, raw };
  }
}
