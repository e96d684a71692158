export interface Sentence {
  id: string;
  text: string;
}

export interface Span {
  sentence_id: string;
  start: number;
  end: number;
}

export interface HitView {
  hit_id: string;
  iteration: number;
  sentences: Sentence[];
  gold_spans: Span[];
  worker_spans: Span[];
  assigned_workers: number;
  submit_threshold: number;
}

export interface CandidateOut {
  surface: string;
  sources: string[];
  lm_logprob: number;
  model_score: number | null;
  features: number[];
}

export interface CandidateListOut {
  snapshot_id: string;
  hit_id: string;
  sentence_id: string;
  start: number;
  end: number;
  cp_surface: string;
  model_id: string | null;
  candidates: CandidateOut[];
}

export type EventKind =
  | "select"
  | "do_not_change"
  | "custom_edit"
  | "add_cp"
  | "undo"
  | "redo"
  | "reload"
  | "submit";

export interface UsageEventIn {
  worker_id: string;
  hit_id: string;
  iteration: number;
  kind: EventKind;
  span?: Span | null;
  chosen_surface?: string | null;
  candidate_list_snapshot?: string[] | null;
  snapshot_id?: string | null;
  comment?: string | null;
}

export interface EventAck {
  event_id: number;
}
