// Session view state machine. Pure transitions, no DOM and no network:
// the UI layer feeds in server responses and renders whatever comes out.
//
// Invariants enforced here:
//  - no ground-truth or accuracy information exists in the state before the
//    session completes (the report slot stays null);
//  - navigation is forward-only: the index only ever advances;
//  - a failed submission keeps the chosen verdict so retrying cannot lose it.

import type { RawReport, SessionStatus, Verdict, VerdictResponse } from "./api.js";

export type Phase =
  | "connecting"
  | "task"
  | "submitting"
  | "loading-report"
  | "summary"
  | "error";

export interface SessionViewState {
  sessionId: string;
  nItems: number;
  index: number;
  answered: number;
  phase: Phase;
  chosenVerdict: Verdict | null;
  report: RawReport | null; // populated only after completion
  lastError: string | null;
}

export function initialState(sessionId: string, nItems: number): SessionViewState {
  return {
    sessionId,
    nItems,
    index: 0,
    answered: 0,
    phase: "connecting",
    chosenVerdict: null,
    report: null,
    lastError: null,
  };
}

export function progressLabel(state: SessionViewState): string {
  return `${state.index + 1}/${state.nItems}`;
}

export function progressFraction(state: SessionViewState): number {
  return state.nItems === 0 ? 0 : state.answered / state.nItems;
}

/** Resume from server status: jump to the first unanswered item. */
export function applyStatus(state: SessionViewState, status: SessionStatus): SessionViewState {
  if (status.state === "complete" || status.next_index === null) {
    return { ...state, answered: status.answered, phase: "loading-report", lastError: null };
  }
  if (status.next_index < state.index) {
    // forward-only: the server can never send us backwards
    throw new Error(`server proposed backwards navigation to ${status.next_index}`);
  }
  return {
    ...state,
    nItems: status.n_items,
    answered: status.answered,
    index: status.next_index,
    phase: "task",
    chosenVerdict: null,
    lastError: null,
  };
}

export function chooseVerdict(state: SessionViewState, verdict: Verdict): SessionViewState {
  if (state.phase !== "task") {
    throw new Error(`cannot submit a verdict in phase ${state.phase}`);
  }
  return { ...state, phase: "submitting", chosenVerdict: verdict, lastError: null };
}

export function applyAck(state: SessionViewState, ack: VerdictResponse): SessionViewState {
  if (state.phase !== "submitting") {
    throw new Error(`unexpected ack in phase ${state.phase}`);
  }
  if (ack.state === "complete") {
    return { ...state, answered: ack.answered, phase: "loading-report", chosenVerdict: null };
  }
  return {
    ...state,
    answered: ack.answered,
    index: state.index + 1,
    phase: "task",
    chosenVerdict: null,
  };
}

/** Network failure: surface a retry affordance without losing the verdict. */
export function applyFailure(state: SessionViewState, message: string): SessionViewState {
  return { ...state, phase: "error", lastError: message };
}

/** Retry after a failure: fall back to task with the verdict still chosen. */
export function retry(state: SessionViewState): SessionViewState {
  if (state.phase !== "error") {
    return state;
  }
  return { ...state, phase: "task", lastError: null };
}

export function applyReport(state: SessionViewState, report: RawReport): SessionViewState {
  if (state.phase !== "loading-report") {
    throw new Error(`report arrived in phase ${state.phase}`);
  }
  return { ...state, report, phase: "summary" };
}

/** A premature report fetch (403) keeps the reader on the task view. */
export function applyReportDenied(state: SessionViewState): SessionViewState {
  return { ...state, phase: "task", report: null };
}

const TRUTH_MARKERS = ["truth", "image_path", "pools/", "acc"];

/** Blinding self-check: serialize the state and scan for leak markers.
 *  Allowed to contain them only once the report is legitimately present. */
export function assertBlinded(state: SessionViewState): void {
  if (state.report !== null) {
    return;
  }
  const text = JSON.stringify(state).toLowerCase();
  for (const marker of TRUTH_MARKERS) {
    if (text.includes(`"${marker}"`)) {
      throw new Error(`blinding violation: state contains ${marker}`);
    }
  }
}
