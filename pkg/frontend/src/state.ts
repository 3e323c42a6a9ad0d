import type { ItemCard, NextPair, Progress, RankingRow } from "./types.js";

export type Phase = "judging" | "done-judging" | "training" | "ranked";

const PHASE_ORDER: Phase[] = ["judging", "done-judging", "training", "ranked"];

export class PhaseError extends Error {}

/**
 * View state for one annotation session. Holds nothing the service did not
 * say: progress, the current pair, and ranking rows are copied verbatim
 * from responses. The only client-side additions are a title cache (built
 * from pairs the annotator has already seen) and the list of new items the
 * user typed into the ranking form.
 */
export class SessionState {
  phase: Phase;
  progress: Progress = { judged: 0, total: 0 };
  currentPair: Extract<NextPair, { done: false }> | null = null;
  ranking: RankingRow[] = [];
  newItems: { id: string; title: string; description: string }[] = [];
  readonly titles = new Map<string, string>();

  constructor(
    public readonly sessionId: string,
    initialPhase: Phase = "judging",
  ) {
    this.phase = initialPhase;
  }

  /** Strictly forward, one step at a time; skipping phases is a bug. */
  advance(to: Phase): void {
    const from = PHASE_ORDER.indexOf(this.phase);
    if (PHASE_ORDER.indexOf(to) !== from + 1) {
      throw new PhaseError(`cannot advance ${this.phase} -> ${to}`);
    }
    this.phase = to;
  }

  setProgress(progress: Progress): void {
    if (progress.judged > progress.total) {
      throw new PhaseError(`judged ${progress.judged} > total ${progress.total}`);
    }
    this.progress = progress;
  }

  setPair(pair: NextPair): void {
    if (pair.done) {
      this.currentPair = null;
      if (this.phase === "judging") {
        this.advance("done-judging");
      }
      return;
    }
    this.currentPair = pair;
    this.cacheTitle(pair.item_a);
    this.cacheTitle(pair.item_b);
  }

  private cacheTitle(card: ItemCard): void {
    this.titles.set(card.id, card.title);
  }

  titleFor(id: string): string {
    return this.titles.get(id) ?? id;
  }

  rememberNewItem(item: { id: string; title: string; description: string }): void {
    this.newItems.push(item);
    this.titles.set(item.id, item.title);
  }
}
