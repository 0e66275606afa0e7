// The annotation console. One task on screen at a time: the strategy's pick,
// its glosses, and two decisions (Mental / Physical) plus an optional note.
// All state on screen comes from API responses; the client computes nothing
// beyond display formatting.

import { ApiError, LexloopClient } from "./api.js";
import type {
  AnnotationTask,
  LabelBody,
  MetricsHistory,
  QuotaProgress,
  SessionInfo,
} from "./api.js";
import { renderChart } from "./chart.js";
import { barPercent, formatCount, formatScore } from "./format.js";

export type AppOptions = {
  /** Poll delay (ms) while offline or when the service omits Retry-After. */
  retryDelayMs?: number;
  /** Name sent with every label. */
  annotator?: string;
};

type BannerKind = "none" | "training" | "offline" | "error";

const BANNER_TEXT: Record<Exclude<BannerKind, "none" | "error">, string> = {
  training: "retraining… the next word arrives when the new model is ready",
  offline: "connection lost — reconnecting…",
};

const KEY_TO_BUTTON: Record<string, string> = { m: "btn-mental", p: "btn-physical" };

const TEMPLATE = `
<header class="top">
  <h1>lexloop</h1>
  <div id="session-line" class="session-line"></div>
</header>
<div id="banner" class="banner" hidden></div>
<section id="task-panel" class="task" hidden>
  <div id="pick-line" class="pick-line"></div>
  <div id="word" class="word"></div>
  <ul id="glosses" class="glosses"></ul>
  <div class="actions">
    <button id="btn-mental" type="button" disabled>Mental <kbd>m</kbd></button>
    <button id="btn-physical" type="button" disabled>Physical <kbd>p</kbd></button>
  </div>
  <input id="note" type="text" autocomplete="off"
         placeholder="optional note, kept with the label" />
</section>
<section id="finished" class="finished" hidden>
  session finished — every iteration is complete
</section>
<section class="progress">
  <div class="quota-row" id="quota-mental">
    <span class="quota-name">mental</span>
    <div class="bar"><div class="fill"></div></div>
    <span class="count"></span>
  </div>
  <div class="quota-row" id="quota-physical">
    <span class="quota-name">physical</span>
    <div class="bar"><div class="fill"></div></div>
    <span class="count"></span>
  </div>
  <div class="quota-row" id="quota-cap">
    <span class="quota-name">this iteration</span>
    <div class="bar"><div class="fill"></div></div>
    <span class="count"></span>
  </div>
</section>
<section class="metrics">
  <h2>metrics</h2>
  <div id="metrics-empty">no retrains yet — scores appear after the first completed iteration</div>
  <div id="chart-box"></div>
  <table id="metrics-table">
    <thead>
      <tr>
        <th>iter</th>
        <th>mental P</th><th>R</th><th>F1</th>
        <th>physical P</th><th>R</th><th>F1</th>
      </tr>
    </thead>
    <tbody></tbody>
  </table>
</section>
`;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class App {
  private task: AnnotationTask | null = null;
  private session: SessionInfo | null = null;
  private inflight = false;
  private chain: Promise<void> = Promise.resolve();
  private readonly retryDelayMs: number;
  private readonly annotator?: string;
  private readonly onKey: (event: KeyboardEvent) => void;

  constructor(
    readonly root: HTMLElement,
    private readonly client: LexloopClient,
    opts: AppOptions = {},
  ) {
    this.retryDelayMs = opts.retryDelayMs ?? 2000;
    this.annotator = opts.annotator;
    root.innerHTML = TEMPLATE;
    this.must("btn-mental").addEventListener("click", () => this.requestLabel("mental"));
    this.must("btn-physical").addEventListener("click", () => this.requestLabel("physical"));
    this.onKey = (event) => this.handleKey(event);
    root.ownerDocument.addEventListener("keydown", this.onKey);
  }

  /** Fetch everything and keep going until a task (or the end) is on screen. */
  load(): Promise<void> {
    return this.enqueue(async () => {
      await this.refreshQuietly();
      await this.taskLoop();
    });
  }

  /** Resolves once every queued operation has settled. */
  settle(): Promise<void> {
    return this.chain;
  }

  destroy(): void {
    this.root.ownerDocument.removeEventListener("keydown", this.onKey);
  }

  // -- user input

  private handleKey(event: KeyboardEvent): void {
    if (event.defaultPrevented || event.ctrlKey || event.altKey || event.metaKey) return;
    const target = event.target as HTMLElement | null;
    if (target && /^(INPUT|TEXTAREA|SELECT)$/.test(target.tagName)) return;
    const id = KEY_TO_BUTTON[event.key.toLowerCase()];
    if (!id) return;
    const button = this.must(id) as HTMLButtonElement;
    if (!button.disabled) {
      event.preventDefault();
      button.click();
    }
  }

  private requestLabel(label: "mental" | "physical"): void {
    if (this.inflight || !this.task) return;
    void this.enqueue(() => this.submit(label));
  }

  // -- operations (serialized; each one ends in a settled screen state)

  private enqueue(op: () => Promise<void>): Promise<void> {
    const run = async () => {
      this.inflight = true;
      this.syncControls();
      try {
        await op();
      } finally {
        this.inflight = false;
        this.syncControls();
      }
    };
    this.chain = this.chain.then(run, run);
    return this.chain;
  }

  private async submit(label: "mental" | "physical"): Promise<void> {
    const task = this.task;
    if (!task) return;
    const note = (this.must("note") as HTMLInputElement).value.trim();
    const body: LabelBody = { word: task.word, label };
    if (note) body.note = note;
    if (this.annotator) body.annotator = this.annotator;
    try {
      const ack = await this.client.postLabel(body);
      (this.must("note") as HTMLInputElement).value = "";
      this.clearTask();
      if (ack.iteration_complete) this.setBanner("training");
    } catch (err) {
      if (err instanceof ApiError && (err.status === 409 || err.status === 503 || err.status === 404)) {
        // stale task, retrain window, or a finished session: the loop below
        // refetches whatever is actually current
        this.clearTask();
      } else if (err instanceof ApiError) {
        this.showError(err.detail);
        return;
      } else {
        // network failure: the label was never acknowledged, so keep the task
        // on screen (it is still current server-side) and probe until the
        // service is reachable again — nothing is queued or resent
        this.setBanner("offline");
      }
    }
    await this.taskLoop();
  }

  private async taskLoop(): Promise<void> {
    for (;;) {
      try {
        const task = await this.client.getNext();
        this.task = task;
        this.renderTask(task);
        this.renderProgress(task.progress);
        this.setBanner("none");
        await this.refreshQuietly();
        return;
      } catch (err) {
        if (err instanceof ApiError && err.status === 503) {
          this.clearTask();
          this.setBanner("training");
          await this.refreshQuietly();
          if (this.session?.training_error) {
            this.showError(`retraining failed: ${this.session.training_error}`);
            return;
          }
          await sleep(this.delayFor(err));
        } else if (err instanceof ApiError && err.status === 404) {
          this.clearTask();
          this.setBanner("none");
          this.renderFinished();
          await this.refreshQuietly();
          return;
        } else if (err instanceof ApiError) {
          this.showError(err.detail);
          return;
        } else {
          this.setBanner("offline");
          await sleep(this.retryDelayMs);
        }
      }
    }
  }

  private async refreshQuietly(): Promise<void> {
    try {
      const [session, metrics] = await Promise.all([
        this.client.getSession(),
        this.client.getMetrics(),
      ]);
      this.session = session;
      this.renderSession(session);
      this.renderMetrics(metrics);
    } catch {
      // the surrounding loop retries; the banner already tells the story
    }
  }

  private delayFor(err: ApiError): number {
    return err.retryAfterSeconds !== null && Number.isFinite(err.retryAfterSeconds)
      ? err.retryAfterSeconds * 1000
      : this.retryDelayMs;
  }

  // -- rendering

  private must(id: string): HTMLElement {
    const el = this.root.querySelector<HTMLElement>(`#${id}`);
    if (!el) throw new Error(`missing #${id}`);
    return el;
  }

  private syncControls(): void {
    const usable = this.task !== null && !this.inflight;
    (this.must("btn-mental") as HTMLButtonElement).disabled = !usable;
    (this.must("btn-physical") as HTMLButtonElement).disabled = !usable;
    (this.must("note") as HTMLInputElement).disabled = this.task === null;
  }

  private setBanner(kind: Exclude<BannerKind, "error">): void {
    const banner = this.must("banner");
    banner.dataset.kind = kind;
    banner.hidden = kind === "none";
    banner.textContent = kind === "none" ? "" : BANNER_TEXT[kind];
  }

  private showError(message: string): void {
    const banner = this.must("banner");
    banner.dataset.kind = "error";
    banner.hidden = false;
    banner.textContent = message;
  }

  private renderTask(task: AnnotationTask): void {
    this.must("task-panel").hidden = false;
    this.must("finished").hidden = true;
    this.must("word").textContent = task.word;
    this.must("pick-line").textContent =
      `picked by ${task.strategy} · iteration ${task.iteration}`;
    const list = this.must("glosses");
    list.replaceChildren();
    for (const gloss of task.glosses) {
      const item = this.root.ownerDocument.createElement("li");
      item.textContent = gloss;
      list.appendChild(item);
    }
    this.syncControls();
  }

  private clearTask(): void {
    this.task = null;
    this.must("task-panel").hidden = true;
    this.syncControls();
  }

  private renderFinished(): void {
    this.must("finished").hidden = false;
  }

  private renderSession(session: SessionInfo): void {
    this.must("session-line").textContent =
      `${session.strategy} · seed ${session.seed}` +
      ` · iteration ${session.iteration}/${session.iterations}` +
      ` · ${session.labeled_total} labeled` +
      ` · ${session.pool_remaining} of ${session.pool_initial} in the pool`;
    if (this.task === null) this.renderProgress(session.progress);
  }

  private renderProgress(progress: QuotaProgress): void {
    this.paintQuota("quota-mental", progress.pos_filled, progress.pos_quota);
    this.paintQuota("quota-physical", progress.neg_filled, progress.neg_quota);
    this.paintQuota("quota-cap", progress.annotated, progress.cap);
  }

  private paintQuota(rowId: string, filled: number, quota: number): void {
    const row = this.must(rowId);
    const fill = row.querySelector<HTMLElement>(".fill");
    const count = row.querySelector<HTMLElement>(".count");
    if (fill) fill.style.width = `${barPercent(filled, quota)}%`;
    if (count) count.textContent = formatCount(filled, quota);
  }

  private renderMetrics(history: MetricsHistory): void {
    const rows = history.iterations;
    this.must("metrics-empty").hidden = rows.length > 0;
    const chartBox = this.must("chart-box");
    const tbody = this.must("metrics-table").querySelector("tbody");
    if (!tbody) throw new Error("metrics table lost its body");
    if (rows.length === 0) {
      chartBox.replaceChildren();
      tbody.replaceChildren();
      return;
    }
    chartBox.replaceChildren(renderChart(this.root.ownerDocument, rows));
    tbody.replaceChildren();
    for (const row of rows) {
      const tr = this.root.ownerDocument.createElement("tr");
      tr.dataset.iteration = String(row.iteration);
      if (history.best_iteration === row.iteration) tr.classList.add("best");
      const cells = [
        String(row.iteration),
        formatScore(row.mental?.precision),
        formatScore(row.mental?.recall),
        formatScore(row.mental?.f1),
        formatScore(row.physical?.precision),
        formatScore(row.physical?.recall),
        formatScore(row.physical?.f1),
      ];
      for (const text of cells) {
        const td = this.root.ownerDocument.createElement("td");
        td.textContent = text;
        tr.appendChild(td);
      }
      tbody.appendChild(tr);
    }
  }
}

export function initApp(root: HTMLElement, client: LexloopClient, opts: AppOptions = {}): App {
  return new App(root, client, opts);
}
