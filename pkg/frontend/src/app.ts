import { ApiError, type Api } from "./client.js";
import { SessionState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/**
 * The whole UI: a create-session form, the judging screen, and the ranking
 * screen, rendered into one root element. Pure client of the service API;
 * every count and rank shown comes from a response, never from local
 * arithmetic. Failed requests leave state untouched and show a retry
 * banner wired to the exact action that failed.
 */
export class App {
  state: SessionState | null = null;
  private busy = false;
  private banner: { message: string; retry: () => Promise<void> } | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: Api,
  ) {
    document.addEventListener("keydown", (event) => {
      if (this.state?.phase !== "judging" || this.state.currentPair === null) {
        return;
      }
      if (event.key === "ArrowLeft") {
        void this.choose("A");
      } else if (event.key === "ArrowRight") {
        void this.choose("B");
      }
    });
  }

  async start(): Promise<void> {
    const match = /#\/session\/([0-9a-f]+)/.exec(location.hash);
    const sessionId = match?.[1];
    if (sessionId !== undefined) {
      await this.resume(sessionId);
    } else {
      this.render();
    }
  }

  async resume(sessionId: string): Promise<void> {
    await this.guarded(async () => {
      const summary = await this.client.getSession(sessionId);
      if (summary.status === "trained") {
        this.state = new SessionState(sessionId, "ranked");
        this.state.setProgress(summary.progress);
        const { ranking } = await this.client.ranking(sessionId);
        this.state.ranking = ranking;
      } else {
        this.state = new SessionState(sessionId, "judging");
        this.state.setProgress(summary.progress);
        this.state.setPair(await this.client.nextPair(sessionId));
      }
      this.render();
    });
  }

  async createSession(dataset: string, k: number, seed: number): Promise<void> {
    await this.guarded(async () => {
      const summary = await this.client.createSession(dataset, k, seed);
      location.hash = `#/session/${summary.session_id}`;
      this.state = new SessionState(summary.session_id, "judging");
      this.state.setProgress(summary.progress);
      this.state.setPair(await this.client.nextPair(summary.session_id));
      this.render();
    });
  }

  async choose(choice: "A" | "B"): Promise<void> {
    const state = this.state;
    if (state === null || state.phase !== "judging" || state.currentPair === null) {
      return;
    }
    if (this.busy) {
      return; // a judgment is already in flight; double-clicks advance once
    }
    this.busy = true;
    const pairIndex = state.currentPair.pair_index;
    try {
      await this.guarded(async () => {
        try {
          const ack = await this.client.submitJudgment(state.sessionId, pairIndex, choice);
          state.setProgress(ack.progress);
        } catch (error) {
          if (error instanceof ApiError && error.code === "duplicate-judgment") {
            // another submit won the race; the judgment exists, so just move on
            const summary = await this.client.getSession(state.sessionId);
            state.setProgress(summary.progress);
          } else {
            throw error;
          }
        }
        state.setPair(await this.client.nextPair(state.sessionId));
        this.render();
      });
    } finally {
      this.busy = false;
    }
  }

  async skipPair(): Promise<void> {
    const state = this.state;
    if (state === null || state.phase !== "judging" || state.currentPair === null) {
      return;
    }
    if (this.busy) {
      return;
    }
    this.busy = true;
    const pairIndex = state.currentPair.pair_index;
    try {
      await this.guarded(async () => {
        const ack = await this.client.skip(state.sessionId, pairIndex);
        state.setProgress(ack.progress);
        state.setPair(await this.client.nextPair(state.sessionId));
        this.render();
      });
    } finally {
      this.busy = false;
    }
  }

  async trainModel(): Promise<void> {
    const state = this.state;
    if (state === null || state.phase !== "done-judging") {
      return;
    }
    state.advance("training");
    this.render();
    await this.guarded(
      async () => {
        await this.client.train(state.sessionId);
        const { ranking } = await this.client.ranking(state.sessionId);
        state.ranking = ranking;
        state.advance("ranked");
        this.render();
      },
      () => {
        // training never started; fall back so the button comes back
        state.phase = "done-judging";
        this.render();
      },
    );
  }

  async addNewItem(id: string, title: string, description: string): Promise<void> {
    const state = this.state;
    if (state === null || state.phase !== "ranked") {
      return;
    }
    await this.guarded(async () => {
      const pending = [...state.newItems, { id, title, description }];
      const { ranking } = await this.client.ranking(state.sessionId, pending);
      state.rememberNewItem({ id, title, description });
      state.ranking = ranking;
      this.render();
    });
  }

  /** Run an action; on failure show a retry banner and leave state alone. */
  private async guarded(action: () => Promise<void>, onFail?: () => void): Promise<void> {
    try {
      this.banner = null;
      await action();
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      this.banner = { message, retry: () => this.guarded(action, onFail) };
      onFail?.();
      this.render();
    }
  }

  render(): void {
    this.root.textContent = "";
    if (this.banner !== null) {
      this.root.append(this.renderBanner());
    }
    if (this.state === null) {
      this.root.append(this.renderCreateForm());
      return;
    }
    this.root.append(this.renderHeader());
    switch (this.state.phase) {
      case "judging":
        this.root.append(this.renderJudging());
        break;
      case "done-judging":
        this.root.append(this.renderDoneJudging());
        break;
      case "training":
        this.root.append(el("p", { id: "training-note" }, "Training model..."));
        break;
      case "ranked":
        this.root.append(this.renderRanking());
        break;
    }
  }

  private renderBanner(): HTMLElement {
    const banner = el("div", { id: "error-banner", class: "banner", role: "alert" });
    banner.append(el("span", {}, this.banner!.message));
    const retry = el("button", { id: "retry" }, "Retry");
    retry.addEventListener("click", () => void this.banner!.retry());
    banner.append(retry);
    return banner;
  }

  private renderCreateForm(): HTMLElement {
    const form = el("form", { id: "create-form" });
    form.append(el("h1", {}, "Start an annotation session"));
    const dataset = el("input", { id: "dataset", name: "dataset", placeholder: "dataset name" });
    const k = el("input", { id: "k", name: "k", type: "number", value: "1", min: "1" });
    const seed = el("input", { id: "seed", name: "seed", type: "number", value: "0" });
    const submit = el("button", { id: "create", type: "submit" }, "Create session");
    form.append(
      labelled("Dataset", dataset),
      labelled("Pairs per item (k)", k),
      labelled("Seed", seed),
      submit,
    );
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createSession(dataset.value, Number(k.value), Number(seed.value));
    });
    return form;
  }

  private renderHeader(): HTMLElement {
    const state = this.state!;
    const header = el("header", {});
    header.append(el("h1", {}, "storyrank"));
    header.append(el("span", { id: "session-id" }, state.sessionId));
    header.append(
      el("span", { id: "progress" }, `${state.progress.judged} / ${state.progress.total}`),
    );
    return header;
  }

  private renderJudging(): HTMLElement {
    const state = this.state!;
    const pair = state.currentPair!;
    const section = el("section", { id: "judging" });
    section.append(el("p", {}, "Which item requires more effort?"));
    const cards = el("div", { class: "cards" });
    cards.append(this.renderCard("card-a", pair.item_a));
    cards.append(this.renderCard("card-b", pair.item_b));
    section.append(cards);
    const chooseA = el("button", { id: "choose-a" }, "A needs more effort");
    const chooseB = el("button", { id: "choose-b" }, "B needs more effort");
    const skip = el("button", { id: "skip" }, "Skip this pair");
    chooseA.addEventListener("click", () => void this.choose("A"));
    chooseB.addEventListener("click", () => void this.choose("B"));
    skip.addEventListener("click", () => void this.skipPair());
    section.append(el("div", { class: "actions" }));
    section.lastElementChild!.append(chooseA, chooseB, skip);
    section.append(
      el("p", { class: "hint" }, "Keyboard: left arrow = A, right arrow = B"),
    );
    return section;
  }

  private renderCard(id: string, item: { id: string; title: string; description: string }): HTMLElement {
    const card = el("article", { id, class: "card", "data-item-id": item.id });
    card.append(el("h2", {}, item.title));
    card.append(el("p", {}, item.description));
    return card;
  }

  private renderDoneJudging(): HTMLElement {
    const section = el("section", { id: "done-judging" });
    section.append(el("p", {}, "All pairs judged."));
    const train = el("button", { id: "train" }, "Train model");
    train.addEventListener("click", () => void this.trainModel());
    section.append(train);
    return section;
  }

  private renderRanking(): HTMLElement {
    const state = this.state!;
    const section = el("section", { id: "ranking" });
    section.append(el("h2", {}, "Ranked backlog"));
    const table = el("table", { id: "ranking-table" });
    const head = el("tr", {});
    for (const column of ["Rank", "Score", "Title"]) {
      head.append(el("th", {}, column));
    }
    table.append(head);
    for (const row of state.ranking) {
      const tr = el("tr", {
        "data-id": row.id,
        "data-rank": String(row.rank),
        "data-score": String(row.score),
      });
      tr.append(el("td", {}, String(row.rank)));
      tr.append(el("td", {}, row.score.toFixed(4)));
      tr.append(el("td", {}, state.titleFor(row.id)));
      table.append(tr);
    }
    section.append(table);
    section.append(
      el("p", { class: "caption" }, "Scores are unitless effort estimates, not story points."),
    );
    section.append(this.renderNewItemForm());
    return section;
  }

  private renderNewItemForm(): HTMLElement {
    const form = el("form", { id: "new-item-form" });
    form.append(el("h3", {}, "Score a new item"));
    const id = el("input", { id: "new-id", placeholder: "item id" });
    const title = el("input", { id: "new-title", placeholder: "title" });
    const description = el("input", { id: "new-description", placeholder: "description" });
    const submit = el("button", { id: "submit-new-item", type: "submit" }, "Rank it");
    form.append(labelled("Id", id), labelled("Title", title),
                labelled("Description", description), submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.addNewItem(id.value, title.value, description.value);
    });
    return form;
  }
}

function labelled(text: string, input: HTMLElement): HTMLElement {
  const wrap = el("label", {}, text + " ");
  wrap.append(input);
  return wrap;
}
