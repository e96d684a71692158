import { ApiClient, ApiError } from "./api.js";
import { EditorState, SpanState } from "./state.js";
import type { CandidateListOut, HitView, Span, UsageEventIn } from "./types.js";

/**
 * The writing-aid editor: highlighted CP spans, a ranked candidate menu
 * with a trailing "Do not change" entry, double-click to add a CP, and a
 * toolbar (reload, undo/redo, highlight, instructions, original view).
 *
 * Every visible text mutation posts exactly one usage event, echoing the
 * snapshot id the candidates were served under.
 */
export class Editor {
  state!: EditorState;
  hit!: HitView;
  private menuSpanId: string | null = null;
  private listing: CandidateListOut | null = null;
  private showOriginal = false;
  private showInstructions = false;
  private statusMessage = "";

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private workerId: string,
  ) {}

  async load(hitId: string): Promise<void> {
    this.hit = await this.api.getHit(hitId, this.workerId);
    this.state = new EditorState(this.hit);
    this.render();
  }

  private event(kind: UsageEventIn["kind"], extra: Partial<UsageEventIn> = {}): UsageEventIn {
    return {
      worker_id: this.workerId,
      hit_id: this.hit.hit_id,
      iteration: this.hit.iteration,
      kind,
      ...extra,
    };
  }

  private async post(event: UsageEventIn): Promise<boolean> {
    try {
      await this.api.postEvent(event);
      return true;
    } catch (error) {
      this.statusMessage = error instanceof ApiError ? error.detail : String(error);
      return false;
    }
  }

  // -- candidate menu -------------------------------------------------------

  async openMenu(spanId: string): Promise<void> {
    const span = this.state.originalSpanRef(spanId);
    this.listing = await this.api.getCandidates(this.hit.hit_id, span, this.workerId);
    this.menuSpanId = spanId;
    this.render();
  }

  private closeMenu(): void {
    this.menuSpanId = null;
    this.listing = null;
  }

  async selectCandidate(surface: string): Promise<void> {
    if (!this.listing || !this.menuSpanId) return;
    const spanId = this.menuSpanId;
    const ok = await this.post(
      this.event("select", {
        span: this.state.originalSpanRef(spanId),
        chosen_surface: surface,
        snapshot_id: this.listing.snapshot_id,
        candidate_list_snapshot: this.listing.candidates.map((c) => c.surface),
      }),
    );
    if (ok) {
      this.state.applyReplacement(spanId, surface, "replaced");
      this.closeMenu();
    } else {
      // stale snapshot: refresh the menu with a newly served list
      this.listing = await this.api.getCandidates(
        this.hit.hit_id,
        this.state.originalSpanRef(spanId),
        this.workerId,
      );
    }
    this.render();
  }

  async declineCandidates(): Promise<void> {
    if (!this.listing || !this.menuSpanId) return;
    await this.post(
      this.event("do_not_change", {
        span: this.state.originalSpanRef(this.menuSpanId),
        snapshot_id: this.listing.snapshot_id,
        candidate_list_snapshot: this.listing.candidates.map((c) => c.surface),
      }),
    );
    this.closeMenu();
    this.render();
  }

  async customEdit(spanId: string, typed: string): Promise<void> {
    if (typed === this.state.currentSurface(spanId)) return;
    const ok = await this.post(
      this.event("custom_edit", {
        span: this.state.originalSpanRef(spanId),
        chosen_surface: typed,
        candidate_list_snapshot: this.listing?.candidates.map((c) => c.surface) ?? null,
        snapshot_id: this.listing?.snapshot_id ?? null,
      }),
    );
    if (ok) this.state.applyReplacement(spanId, typed, "custom");
    this.closeMenu();
    this.render();
  }

  // -- adding CPs -----------------------------------------------------------

  async addCpFromSelection(sentenceId: string, start: number, end: number): Promise<void> {
    const span: Span = { sentence_id: sentenceId, start, end };
    const surface = this.state.sentenceText(sentenceId).slice(start, end);
    if (!surface.trim()) return; // whitespace selections are ignored
    if (this.state.overlapsExistingSpan(span)) return; // no-op inside existing spans
    const ok = await this.post(this.event("add_cp", { span }));
    if (ok) {
      const created = this.state.addSpan(span);
      await this.openMenu(created.id);
    } else {
      this.render();
    }
  }

  // -- toolbar --------------------------------------------------------------

  async undo(): Promise<void> {
    const affected = this.state.undo();
    if (!affected) return;
    await this.post(this.event("undo", { span: affected }));
    this.closeMenu();
    this.render();
  }

  async redo(): Promise<void> {
    const affected = this.state.redo();
    if (!affected) return;
    await this.post(this.event("redo", { span: affected }));
    this.closeMenu();
    this.render();
  }

  async reload(confirmFn: (message: string) => boolean = (m) => window.confirm(m)): Promise<void> {
    if (!confirmFn("Reload the original text? All changes will be lost.")) return;
    this.state.reload();
    await this.post(this.event("reload"));
    this.closeMenu();
    this.render();
  }

  async highlightDifficult(): Promise<void> {
    // re-request the server's span inventory for this worker
    this.hit = await this.api.getHit(this.hit.hit_id, this.workerId);
    for (const span of [...this.hit.gold_spans, ...this.hit.worker_spans]) {
      if (!this.state.overlapsExistingSpan(span)) this.state.addSpan(span);
    }
    this.render();
  }

  toggleOriginal(): void {
    this.showOriginal = !this.showOriginal;
    this.render();
  }

  toggleInstructions(): void {
    this.showInstructions = !this.showInstructions;
    this.render();
  }

  get submitEnabled(): boolean {
    return this.state.replacementCount >= this.hit.submit_threshold;
  }

  async submit(): Promise<void> {
    if (!this.submitEnabled) return;
    const ok = await this.post(this.event("submit", { comment: this.state.comment }));
    if (ok) this.statusMessage = "Submitted. Thank you!";
    this.render();
  }

  // -- rendering ------------------------------------------------------------

  render(): void {
    this.root.textContent = "";
    this.root.append(this.renderToolbar(), this.renderDocument());
    if (this.showInstructions) this.root.append(this.renderInstructions());
    if (this.showOriginal) this.root.append(this.renderOriginal());
    this.root.append(this.renderFooter());
  }

  private renderToolbar(): HTMLElement {
    const bar = document.createElement("div");
    bar.className = "toolbar";
    const buttons: Array<[string, string, () => void]> = [
      ["reload", "Reload", () => void this.reload()],
      ["undo", "Undo", () => void this.undo()],
      ["redo", "Redo", () => void this.redo()],
      ["highlight", "Highlight difficult words", () => void this.highlightDifficult()],
      ["instructions", "Show instructions", () => this.toggleInstructions()],
      ["original", "Show original text", () => this.toggleOriginal()],
    ];
    for (const [id, label, handler] of buttons) {
      const button = document.createElement("button");
      button.dataset.action = id;
      button.textContent = label;
      button.addEventListener("click", handler);
      if (id === "undo") button.disabled = !this.state.canUndo;
      if (id === "redo") button.disabled = !this.state.canRedo;
      bar.append(button);
    }
    return bar;
  }

  private renderDocument(): HTMLElement {
    const doc = document.createElement("div");
    doc.className = "document";
    for (const sentence of this.hit.sentences) {
      const p = document.createElement("p");
      p.dataset.sentenceId = sentence.id;
      const text = this.state.sentenceText(sentence.id);
      const spans = this.state.spans
        .filter((s) => s.sentenceId === sentence.id)
        .sort((a, b) => a.start - b.start);
      let cursor = 0;
      for (const span of spans) {
        if (span.start > cursor) p.append(text.slice(cursor, span.start));
        p.append(this.renderSpan(span, text.slice(span.start, span.end)));
        cursor = span.end;
      }
      p.append(text.slice(cursor));
      p.addEventListener("dblclick", () => this.handleDoubleClick(sentence.id));
      doc.append(p);
    }
    if (this.menuSpanId && this.listing) doc.append(this.renderMenu());
    return doc;
  }

  private renderSpan(span: SpanState, surface: string): HTMLElement {
    const mark = document.createElement("span");
    mark.className = `cp cp-${span.status}`;
    mark.dataset.spanId = span.id;
    mark.textContent = surface;
    mark.setAttribute("contenteditable", "true");
    mark.addEventListener("click", () => void this.openMenu(span.id));
    mark.addEventListener("blur", () => {
      const typed = mark.textContent ?? "";
      void this.customEdit(span.id, typed);
    });
    return mark;
  }

  private renderMenu(): HTMLElement {
    const menu = document.createElement("ul");
    menu.className = "candidate-menu";
    for (const candidate of this.listing!.candidates) {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.className = "candidate";
      button.textContent = candidate.surface;
      button.addEventListener("click", () => void this.selectCandidate(candidate.surface));
      item.append(button);
      menu.append(item);
    }
    const decline = document.createElement("li");
    const declineButton = document.createElement("button");
    declineButton.className = "do-not-change";
    declineButton.textContent = "Do not change";
    declineButton.addEventListener("click", () => void this.declineCandidates());
    decline.append(declineButton);
    menu.append(decline);
    return menu;
  }

  private handleDoubleClick(sentenceId: string): void {
    const selection = window.getSelection();
    if (!selection || selection.rangeCount === 0) return;
    const selected = selection.toString();
    if (!selected.trim()) return;
    const text = this.state.sentenceText(sentenceId);
    const start = text.indexOf(selected);
    if (start < 0) return;
    void this.addCpFromSelection(sentenceId, start, start + selected.length);
  }

  private renderInstructions(): HTMLElement {
    const panel = document.createElement("div");
    panel.className = "instructions";
    panel.innerHTML = `
      <h3>How to simplify</h3>
      <ol>
        <li>Click a highlighted word or phrase to see ranked replacements;
            pick the one that is simpler and fits the context.</li>
        <li>Pick <em>Do not change</em> if none of the suggestions fits.</li>
        <li>Double-click any other difficult word to request suggestions for it.</li>
        <li>Type your own replacement inside a highlighted span if you prefer.</li>
        <li>Submit once the button turns active.</li>
      </ol>`;
    return panel;
  }

  private renderOriginal(): HTMLElement {
    const panel = document.createElement("div");
    panel.className = "original";
    for (const sentence of this.hit.sentences) {
      const p = document.createElement("p");
      p.textContent = sentence.text;
      panel.append(p);
    }
    return panel;
  }

  private renderFooter(): HTMLElement {
    const footer = document.createElement("div");
    footer.className = "footer";

    const comment = document.createElement("textarea");
    comment.placeholder = "Your comments here:";
    comment.value = this.state.comment;
    comment.addEventListener("input", () => {
      this.state.comment = comment.value;
    });

    const submit = document.createElement("button");
    submit.className = "submit";
    submit.textContent = "Submit";
    submit.disabled = !this.submitEnabled;
    submit.addEventListener("click", () => void this.submit());

    const status = document.createElement("span");
    status.className = "status";
    status.textContent = this.statusMessage;

    const progress = document.createElement("span");
    progress.className = "progress";
    progress.textContent = `${this.state.replacementCount}/${this.hit.submit_threshold} changes`;

    footer.append(comment, progress, submit, status);
    return footer;
  }
}
