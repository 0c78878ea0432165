/**
 * Runners: one live query each, driven by the engine's event stream.
 *
 * A runner mirrors the server session state and exposes exactly the
 * controls that state allows.  The pane holds all runners and refuses
 * new ones beyond the configured maximum of concurrently active queries.
 */

export type SessionState =
  | "created"
  | "running"
  | "waiting_more"
  | "prompting_input"
  | "paused_debug"
  | "done"
  | "aborted"
  | "failed_error"
  | "destroyed";

export const NEXT_COUNTS = [1, 10, 100, 1000] as const;

export const DEBUG_BUTTONS = [
  "step_into",
  "step_over",
  "step_out",
  "retry",
  "continue",
  "abort",
] as const;

export interface Controls {
  abort: boolean;
  next: readonly number[];
  stop: boolean;
  input: boolean;
  debug: readonly string[];
}

const NO_CONTROLS: Controls = { abort: false, next: [], stop: false, input: false, debug: [] };

/** Pure function of the mirrored session state. */
export function visibleControls(state: SessionState): Controls {
  switch (state) {
    case "running":
      return { ...NO_CONTROLS, abort: true };
    case "waiting_more":
      return { ...NO_CONTROLS, next: NEXT_COUNTS, stop: true, abort: true };
    case "prompting_input":
      return { ...NO_CONTROLS, input: true, abort: true };
    case "paused_debug":
      return { ...NO_CONTROLS, debug: DEBUG_BUTTONS, abort: true };
    default:
      // created (query on its way) and all terminal states
      return NO_CONTROLS;
  }
}

export const ACTIVE_STATES: ReadonlySet<SessionState> = new Set([
  "created",
  "running",
  "waiting_more",
  "prompting_input",
  "paused_debug",
]);

export interface EngineEvent {
  kind: string;
  [key: string]: unknown;
}

export interface AnswerEntry {
  kind: string;
  payload: unknown;
}

export class Runner {
  state: SessionState = "created";
  readonly answers: AnswerEntry[] = [];
  collapsed = false;

  constructor(
    readonly engineId: string,
    readonly query: string
  ) {}

  get active(): boolean {
    return ACTIVE_STATES.has(this.state);
  }

  get controls(): Controls {
    return visibleControls(this.state);
  }

  /** Advance the state mirror from one engine event. */
  apply(event: EngineEvent): void {
    switch (event.kind) {
      case "create":
        this.state = "created";
        break;
      case "success":
        this.answers.push({ kind: "success", payload: event });
        this.state = event.more ? "waiting_more" : "done";
        break;
      case "failure":
        this.answers.push({ kind: "failure", payload: event });
        this.state = "done";
        break;
      case "error":
        this.answers.push({ kind: "error", payload: event });
        if (event.fatal) this.state = "failed_error";
        break;
      case "output":
        this.answers.push({ kind: "output", payload: event });
        break;
      case "prompt":
        this.state = event.prompt === "debug" ? "paused_debug" : "prompting_input";
        break;
      case "debug":
        this.answers.push({ kind: "debug", payload: event });
        this.state = "paused_debug";
        break;
      case "stopped":
        this.state = "done";
        break;
      case "aborted":
        this.state = "aborted";
        break;
      case "destroyed":
        this.state = "destroyed";
        break;
    }
  }

  /** The client sent a command; the engine is busy until its next event. */
  resumed(): void {
    this.state = "running";
  }
}

export class RunnerRefused extends Error {}

export class RunnerPane {
  readonly runners: Runner[] = [];

  constructor(readonly maxRunners = 3) {}

  get activeCount(): number {
    return this.runners.filter((r) => r.active).length;
  }

  /** Refuses a new runner when the concurrent-query limit is reached. */
  add(engineId: string, query: string): Runner {
    if (this.activeCount >= this.maxRunners) {
      throw new RunnerRefused(`at most ${this.maxRunners} concurrent queries`);
    }
    const runner = new Runner(engineId, query);
    this.runners.push(runner);
    return runner;
  }

  collapseAll(): void {
    for (const r of this.runners) r.collapsed = true;
  }

  expandAll(): void {
    for (const r of this.runners) r.collapsed = false;
  }

  /** Runner ids that still need a stop/abort from the server. */
  stopAll(): { engineId: string; op: "stop" | "abort" }[] {
    const ops: { engineId: string; op: "stop" | "abort" }[] = [];
    for (const r of this.runners) {
      if (r.state === "waiting_more") ops.push({ engineId: r.engineId, op: "stop" });
      else if (r.active && r.state !== "created") ops.push({ engineId: r.engineId, op: "abort" });
    }
    return ops;
  }

  clear(): void {
    this.runners.length = 0;
  }
}
