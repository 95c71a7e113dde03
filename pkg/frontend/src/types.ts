/** Wire shapes of the grading service API. */

export interface KeyPair {
  input_index: number;
  reference_index: number;
  similarity: number;
}

export interface StackEntry {
  source: string;
  name: string;
}

export interface HistoryEntry {
  prompt: string;
  matched: string;
  similarity: number;
  runner_up: string | null;
}

export interface SessionState {
  id: string;
  status: "created" | "loaded" | "graded" | "error";
  revision: number;
  input_frames: number;
  reference_frames: number;
  key_pair: KeyPair | null;
  stack: StackEntry[];
  history: HistoryEntry[];
}

export interface GradeResponse extends SessionState {
  lut_id: string;
  preview_indices: number[];
}

export interface FeedbackResponse extends SessionState {
  matched: string;
  similarity: number;
  runner_up: string | null;
  runner_up_similarity: number | null;
  low_confidence: boolean;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}
