import { describe, expect, it } from "vitest";

import { EditorState } from "../src/state.js";
import { makeHit } from "./stub.js";

function snapshotOf(state: EditorState) {
  return {
    sentences: Object.fromEntries(state.sentences),
    spans: state.spans.map((s) => ({ ...s })),
    comment: state.comment,
  };
}

describe("EditorState", () => {
  it("starts with no replacements", () => {
    const state = new EditorState(makeHit());
    expect(state.replacementCount).toBe(0);
    expect(state.canUndo).toBe(false);
    expect(state.canRedo).toBe(false);
  });

  it("replacement rewrites the sentence and counts it", () => {
    const state = new EditorState(makeHit());
    const span = state.spans[0]!;
    state.applyReplacement(span.id, "associated", "replaced");
    expect(state.sentenceText("s1")).toBe("He was not associated with any terrorist group.");
    expect(state.replacementCount).toBe(1);
    expect(state.currentSurface(span.id)).toBe("associated");
  });

  it("shifts later spans in the same sentence when length changes", () => {
    const hit = makeHit();
    hit.sentences[0]!.text = "affiliated groups stay affiliated here.";
    hit.gold_spans = [
      { sentence_id: "s1", start: 0, end: 10 },
      { sentence_id: "s1", start: 23, end: 33 },
    ];
    const state = new EditorState(hit);
    state.applyReplacement(state.spans[0]!.id, "tied", "replaced");
    expect(state.sentenceText("s1")).toBe("tied groups stay affiliated here.");
    const second = state.spans[1]!;
    expect(state.sentenceText("s1").slice(second.start, second.end)).toBe("affiliated");
  });

  it("undo then redo restores the exact prior state", () => {
    const state = new EditorState(makeHit());
    const span = state.spans[0]!;
    state.applyReplacement(span.id, "associated", "replaced");
    const afterReplacement = snapshotOf(state);

    const undone = state.undo();
    expect(undone).toEqual({ sentence_id: "s1", start: 11, end: 21 });
    expect(state.sentenceText("s1")).toContain("affiliated");
    expect(state.replacementCount).toBe(0);

    const redone = state.redo();
    expect(redone).toEqual({ sentence_id: "s1", start: 11, end: 21 });
    expect(snapshotOf(state)).toEqual(afterReplacement);
  });

  it("redo then undo is an identity where defined", () => {
    const state = new EditorState(makeHit());
    const span = state.spans[0]!;
    state.applyReplacement(span.id, "associated", "replaced");
    state.undo();
    const beforeRedo = snapshotOf(state);
    state.redo();
    state.undo();
    expect(snapshotOf(state)).toEqual(beforeRedo);
  });

  it("a new mutation clears the redo stack", () => {
    const state = new EditorState(makeHit());
    state.applyReplacement(state.spans[0]!.id, "associated", "replaced");
    state.undo();
    expect(state.canRedo).toBe(true);
    state.applyReplacement(state.spans[1]!.id, "sudden", "replaced");
    expect(state.canRedo).toBe(false);
  });

  it("reload restores the original text and clears both stacks", () => {
    const state = new EditorState(makeHit());
    state.applyReplacement(state.spans[0]!.id, "associated", "replaced");
    state.applyReplacement(state.spans[1]!.id, "sudden", "replaced");
    state.undo();
    state.reload();
    expect(state.sentenceText("s1")).toContain("affiliated");
    expect(state.sentenceText("s2")).toContain("unscheduled");
    expect(state.replacementCount).toBe(0);
    expect(state.canUndo).toBe(false);
    expect(state.canRedo).toBe(false);
  });

  it("events reference the originally served offsets after edits", () => {
    const hit = makeHit();
    hit.sentences[0]!.text = "affiliated groups stay affiliated here.";
    hit.gold_spans = [
      { sentence_id: "s1", start: 0, end: 10 },
      { sentence_id: "s1", start: 23, end: 33 },
    ];
    const state = new EditorState(hit);
    state.applyReplacement(state.spans[0]!.id, "tied", "replaced");
    // current offsets moved, but the API still identifies the span as served
    expect(state.originalSpanRef(state.spans[1]!.id)).toEqual({
      sentence_id: "s1",
      start: 23,
      end: 33,
    });
  });

  it("user spans survive reload", () => {
    const state = new EditorState(makeHit());
    state.addSpan({ sentence_id: "s3", start: 0, end: 4 });
    state.applyReplacement(state.spans[0]!.id, "associated", "replaced");
    state.reload();
    expect(state.spans.some((s) => s.origin === "user")).toBe(true);
  });

  it("detects overlap with existing spans", () => {
    const state = new EditorState(makeHit());
    expect(state.overlapsExistingSpan({ sentence_id: "s1", start: 15, end: 18 })).toBe(true);
    expect(state.overlapsExistingSpan({ sentence_id: "s1", start: 0, end: 2 })).toBe(false);
  });
});
