/** Pure derivations from server payloads to render state.
 *
 *  Nothing in here recomputes emotions or valence: every number shown is
 *  taken from the payload, at most display-rounded to two decimals, with
 *  the full-precision string kept for tooltips.
 */

import type { ChatTurnPayload } from "./types.js";

export interface VaDot {
  x: number;
  y: number;
}

export interface TurnView {
  turnIndex: number;
  userText: string;
  replyText: string;
  badge: string;
  nextBadge: string;
  dot: VaDot;
  valenceDisplay: string;
  arousalDisplay: string;
  empathyDisplay: string;
  valenceFull: string;
  arousalFull: string;
  empathyFull: string;
}

export interface TraceView {
  points: number[];
  markerCount: number;
  delta: number;
  deltaDisplay: string;
  deltaFull: string;
}

/** Two-decimal string with an explicit sign; negative zero folds to +0.00. */
export function signed(value: number, digits = 2): string {
  let fixed = value.toFixed(digits);
  if (Number(fixed) === 0) fixed = (0).toFixed(digits);
  return Number(fixed) < 0 ? fixed : `+${fixed}`;
}

export function sendDisabled(text: string): boolean {
  return text.trim().length === 0;
}

export function turnView(payload: ChatTurnPayload): TurnView {
  return {
    turnIndex: payload.turn_index,
    userText: payload.user_text,
    replyText: payload.reply_text,
    badge: payload.detected_emotion,
    nextBadge: payload.predicted_next_emotion,
    dot: { x: payload.detected_valence, y: payload.detected_arousal },
    valenceDisplay: signed(payload.detected_valence),
    arousalDisplay: signed(payload.detected_arousal),
    empathyDisplay: signed(payload.empathy_valence_so_far),
    valenceFull: String(payload.detected_valence),
    arousalFull: String(payload.detected_arousal),
    empathyFull: String(payload.empathy_valence_so_far),
  };
}

/** Chart model for the valence trajectory.  The delta annotation uses the
 *  endpoints only, whatever happens in between; a single point reads as
 *  zero change. */
export function traceView(trace: number[]): TraceView {
  if (trace.length < 1) {
    throw new Error("trace must contain at least one point");
  }
  const first = trace[0]!;
  const last = trace[trace.length - 1]!;
  const delta = trace.length === 1 ? 0 : last - first;
  return {
    points: [...trace],
    markerCount: trace.length,
    delta,
    deltaDisplay: signed(delta),
    deltaFull: String(delta),
  };
}
