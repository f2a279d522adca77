/** Wire protocol types, mirroring the chat service's JSON bodies verbatim.
 *  Field names stay snake_case so a payload can be checked against the
 *  server response key for key. */

export interface ChatTurnPayload {
  user_text: string;
  reply_text: string;
  detected_emotion: string;
  detected_valence: number;
  detected_arousal: number;
  predicted_next_emotion: string;
  empathy_valence_so_far: number;
  turn_index: number;
}

export interface TraceResponse {
  valence_trace: number[];
  turns: ChatTurnPayload[];
}

export interface SessionResponse {
  session_id: string;
}

export interface ErrorBody {
  code: string;
  message: string;
}
