import type { HitView, Span } from "./types.js";

export type SpanStatus = "unchanged" | "replaced" | "custom";

export interface SpanState {
  /** Stable identity across edits: origin plus original offsets. */
  id: string;
  sentenceId: string;
  start: number;
  end: number;
  origin: "gold" | "user";
  originalSurface: string;
  status: SpanStatus;
}

interface Snapshot {
  sentences: Record<string, string>;
  spans: SpanState[];
  comment: string;
}

interface HistoryEntry {
  snapshot: Snapshot;
  /** The span whose mutation moved the editor away from this snapshot. */
  mutated: Span;
}

function spanId(origin: string, span: Span): string {
  return `${origin}:${span.sentence_id}:${span.start}:${span.end}`;
}

/**
 * The full editable document state: working sentence texts, span statuses,
 * and undo/redo stacks of complete snapshots, so undo followed by redo is
 * an exact identity.
 */
export class EditorState {
  sentences: Map<string, string>;
  spans: SpanState[];
  comment = "";
  private undoStack: HistoryEntry[] = [];
  private redoStack: HistoryEntry[] = [];
  private initial: Snapshot;

  constructor(hit: HitView) {
    this.sentences = new Map(hit.sentences.map((s) => [s.id, s.text]));
    const build = (origin: "gold" | "user") => (span: Span): SpanState => ({
      id: spanId(origin, span),
      sentenceId: span.sentence_id,
      start: span.start,
      end: span.end,
      origin,
      originalSurface: this.sliceText(span.sentence_id, span.start, span.end),
      status: "unchanged",
    });
    this.spans = [
      ...hit.gold_spans.map(build("gold")),
      ...hit.worker_spans.map(build("user")),
    ];
    this.initial = this.snapshot();
  }

  private sliceText(sentenceId: string, start: number, end: number): string {
    return (this.sentences.get(sentenceId) ?? "").slice(start, end);
  }

  get replacementCount(): number {
    return this.spans.filter((s) => s.status !== "unchanged").length;
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  get canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  sentenceText(sentenceId: string): string {
    return this.sentences.get(sentenceId) ?? "";
  }

  getSpan(id: string): SpanState {
    const found = this.spans.find((s) => s.id === id);
    if (!found) throw new Error(`unknown span ${id}`);
    return found;
  }

  currentSurface(id: string): string {
    const span = this.getSpan(id);
    return this.sliceText(span.sentenceId, span.start, span.end);
  }

  spanRef(id: string): Span {
    const span = this.getSpan(id);
    return { sentence_id: span.sentenceId, start: span.start, end: span.end };
  }

  /** The span's offsets when the HIT was served (events use these). */
  originalSpanRef(id: string): Span {
    const span = this.getSpan(id);
    const [, sentenceId, start, end] = span.id.split(":");
    return { sentence_id: sentenceId!, start: Number(start), end: Number(end) };
  }

  private snapshot(): Snapshot {
    return {
      sentences: Object.fromEntries(this.sentences),
      spans: this.spans.map((s) => ({ ...s })),
      comment: this.comment,
    };
  }

  private restore(snapshot: Snapshot): void {
    this.sentences = new Map(Object.entries(snapshot.sentences));
    this.spans = snapshot.spans.map((s) => ({ ...s }));
    this.comment = snapshot.comment;
  }

  /** Replace a span's current text; shifts later spans in the sentence. */
  applyReplacement(id: string, surface: string, status: "replaced" | "custom"): void {
    const span = this.getSpan(id);
    const mutated = this.originalSpanRef(id);
    this.undoStack.push({ snapshot: this.snapshot(), mutated });
    this.redoStack = [];

    const text = this.sentenceText(span.sentenceId);
    const delta = surface.length - (span.end - span.start);
    this.sentences.set(
      span.sentenceId,
      text.slice(0, span.start) + surface + text.slice(span.end),
    );
    for (const other of this.spans) {
      if (other.sentenceId === span.sentenceId && other.start >= span.end) {
        other.start += delta;
        other.end += delta;
      }
    }
    span.end = span.start + surface.length;
    span.status = status;
  }

  /** Revert the latest mutation; returns the affected span for the event. */
  undo(): Span | null {
    const entry = this.undoStack.pop();
    if (!entry) return null;
    this.redoStack.push({ snapshot: this.snapshot(), mutated: entry.mutated });
    this.restore(entry.snapshot);
    return entry.mutated;
  }

  /** Re-apply the latest undone mutation. */
  redo(): Span | null {
    const entry = this.redoStack.pop();
    if (!entry) return null;
    this.undoStack.push({ snapshot: this.snapshot(), mutated: entry.mutated });
    this.restore(entry.snapshot);
    return entry.mutated;
  }

  /** Back to the text as served; clears both history stacks. */
  reload(): void {
    this.restore(this.initial);
    this.undoStack = [];
    this.redoStack = [];
  }

  addSpan(span: Span): SpanState {
    const state: SpanState = {
      id: spanId("user", span),
      sentenceId: span.sentence_id,
      start: span.start,
      end: span.end,
      origin: "user",
      originalSurface: this.sliceText(span.sentence_id, span.start, span.end),
      status: "unchanged",
    };
    this.spans.push(state);
    this.initial.spans.push({ ...state });
    return state;
  }

  overlapsExistingSpan(span: Span): boolean {
    return this.spans.some(
      (s) =>
        s.sentenceId === span.sentence_id &&
        !(span.end <= s.start || span.start >= s.end),
    );
  }
}
