// DOM layer: renders the state machine into the page and wires events.
// Images render at 100% zoom by default with optional integer zoom, always
// nearest-neighbor (pixelated) so compression or smoothing cannot mask
// generator artifacts.

import { StudyApi, type Verdict } from "./api.js";
import {
  applyAck,
  applyFailure,
  applyReport,
  applyReportDenied,
  applyStatus,
  assertBlinded,
  chooseVerdict,
  initialState,
  progressLabel,
  retry,
  type SessionViewState,
} from "./state.js";
import { summaryCells } from "./summary.js";
import { ApiError } from "./api.js";

export class SessionController {
  state: SessionViewState;
  private imageUrl: string | null = null;
  private zoom = 1;

  constructor(
    private api: StudyApi,
    private root: HTMLElement,
    sessionId: string,
    nItems: number,
  ) {
    this.state = initialState(sessionId, nItems);
  }

  async start(): Promise<void> {
    await this.refreshFromServer();
  }

  private set(next: SessionViewState): void {
    this.state = next;
    assertBlinded(this.state);
    this.render();
  }

  private async refreshFromServer(): Promise<void> {
    try {
      const status = await this.api.status(this.state.sessionId);
      const next = applyStatus(this.state, status);
      this.set(next);
      if (next.phase === "task") {
        await this.loadImage();
      } else if (next.phase === "loading-report") {
        await this.loadReport();
      }
    } catch (err) {
      this.set(applyFailure(this.state, String(err)));
    }
  }

  private async loadImage(): Promise<void> {
    try {
      const blob = await this.api.itemBlob(this.state.sessionId, this.state.index);
      if (this.imageUrl) {
        URL.revokeObjectURL(this.imageUrl);
      }
      this.imageUrl = URL.createObjectURL(blob);
      this.render();
    } catch (err) {
      this.set(applyFailure(this.state, String(err)));
    }
  }

  private async loadReport(): Promise<void> {
    try {
      const report = await this.api.report(this.state.sessionId);
      this.set(applyReport(this.state, report));
    } catch (err) {
      if (err instanceof ApiError && err.status === 403) {
        // not actually complete: stay blinded on the task view
        this.set(applyReportDenied(this.state));
        await this.refreshFromServer();
        return;
      }
      this.set(applyFailure(this.state, String(err)));
    }
  }

  async submit(verdict: Verdict): Promise<void> {
    let submitting: SessionViewState;
    try {
      submitting = chooseVerdict(this.state, verdict);
    } catch {
      return; // double-click while disabled
    }
    this.set(submitting);
    try {
      const ack = await this.api.submitVerdict(this.state.sessionId, this.state.index, verdict);
      const next = applyAck(this.state, ack);
      this.set(next);
      if (next.phase === "task") {
        await this.loadImage();
      } else {
        await this.loadReport();
      }
    } catch (err) {
      this.set(applyFailure(this.state, String(err)));
    }
  }

  async onRetry(): Promise<void> {
    const pending = this.state.chosenVerdict;
    this.set(retry(this.state));
    if (pending) {
      await this.submit(pending);
    } else {
      await this.refreshFromServer();
    }
  }

  setZoom(factor: number): void {
    this.zoom = Math.max(1, Math.floor(factor));
    this.render();
  }

  render(): void {
    const s = this.state;
    this.root.replaceChildren();
    if (s.phase === "summary" && s.report) {
      this.root.appendChild(renderSummary(s));
      return;
    }
    this.root.appendChild(this.renderTask());
  }

  private renderTask(): HTMLElement {
    const s = this.state;
    const wrap = el("div", "task-view");

    const progress = el("div", "progress");
    progress.textContent = s.phase === "loading-report"
      ? "all items answered, fetching summary..."
      : progressLabel(s);
    wrap.appendChild(progress);

    const frame = el("div", "image-frame");
    if (this.imageUrl) {
      const img = document.createElement("img");
      img.src = this.imageUrl;
      img.alt = "study image";
      img.className = "study-image";
      img.style.imageRendering = "pixelated";
      img.onload = () => {
        img.style.width = `${img.naturalWidth * this.zoom}px`;
        img.style.height = `${img.naturalHeight * this.zoom}px`;
      };
      frame.appendChild(img);
    }
    wrap.appendChild(frame);

    const buttons = el("div", "verdict-buttons");
    const disabled = s.phase !== "task";
    for (const verdict of ["real", "synthetic"] as Verdict[]) {
      const b = document.createElement("button");
      b.textContent = verdict;
      b.disabled = disabled;
      b.dataset.verdict = verdict;
      b.addEventListener("click", () => void this.submit(verdict));
      buttons.appendChild(b);
    }
    wrap.appendChild(buttons);

    const zoomBar = el("div", "zoom-bar");
    for (const z of [1, 2, 4, 8]) {
      const b = document.createElement("button");
      b.textContent = `${z}x`;
      b.addEventListener("click", () => this.setZoom(z));
      zoomBar.appendChild(b);
    }
    wrap.appendChild(zoomBar);

    if (s.phase === "error") {
      const err = el("div", "error-bar");
      err.textContent = `request failed: ${s.lastError ?? "unknown error"}`;
      const retryBtn = document.createElement("button");
      retryBtn.textContent = "retry";
      retryBtn.addEventListener("click", () => void this.onRetry());
      err.appendChild(retryBtn);
      wrap.appendChild(err);
    }
    return wrap;
  }
}

export function renderSummary(state: SessionViewState): HTMLElement {
  if (!state.report) {
    throw new Error("summary rendered without a report");
  }
  const cells = summaryCells(state.report);
  const wrap = el("div", "summary-view");
  wrap.appendChild(el("h2", "", "session complete"));

  const table = document.createElement("table");
  table.className = "confusion";
  table.innerHTML = `
    <tr><th></th><th>called real</th><th>called synthetic</th></tr>
    <tr><th>actual real</th><td data-cell="TR">${cells.TR}</td><td data-cell="FS">${cells.FS}</td></tr>
    <tr><th>actual synthetic</th><td data-cell="FR">${cells.FR}</td><td data-cell="TS">${cells.TS}</td></tr>
  `;
  wrap.appendChild(table);

  const acc = el("div", "accuracy");
  acc.dataset.acc = cells.acc;
  acc.textContent = `accuracy: ${cells.acc}`;
  wrap.appendChild(acc);
  return wrap;
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}
