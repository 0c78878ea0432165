/**
 * The playground page: program editor with live semantic highlighting,
 * query editor with Examples/History/Solutions menus, and the runner
 * pane driving engines over the event protocol.
 */

import { WorkbenchApi, type EngineEventPayload } from "./api.js";
import { REFRESH_DELAY_MS, RefreshScheduler } from "./debounce.js";
import { QueryHistory, queryVariables, wrapQuery, type Modifier } from "./menus.js";
import { Runner, RunnerPane, RunnerRefused } from "./runner.js";
import { styleWithResync, type ServerToken } from "./sync.js";
import { tokenize } from "./tokens.js";

const api = new WorkbenchApi("");
const pane = new RunnerPane(3);
const history = new QueryHistory();
const docId = `doc-${Math.random().toString(36).slice(2)}`;

let serverGroups: ServerToken[][] = [];
const breakpoints = new Set<number>();

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

function editorText(): string {
  return $<HTMLTextAreaElement>("editor").value;
}

// -- highlighting: textarea with a styled <pre> underlay

function renderHighlight(): void {
  const text = editorText();
  const tokens = tokenize(text);
  const { styled } = styleWithResync(tokens, serverGroups);
  const out: string[] = [];
  let prev = 0;
  for (const s of styled) {
    out.push(escapeHtml(text.slice(prev, s.token.start)));
    const cls = ["tok-" + s.token.kind, s.cls ? "sem-" + s.cls : ""].join(" ").trim();
    out.push(`<span class="${cls}">${escapeHtml(s.token.text)}</span>`);
    prev = s.token.end;
  }
  out.push(escapeHtml(text.slice(prev)));
  $("hl").innerHTML = out.join("");
  renderGutter();
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderGutter(): void {
  const lines = editorText().split("\n").length;
  const gutter = $("gutter");
  gutter.innerHTML = "";
  for (let i = 1; i <= lines; i++) {
    const div = document.createElement("div");
    div.textContent = String(i);
    div.className = breakpoints.has(i) ? "line bp" : "line";
    div.onclick = () => {
      if (breakpoints.has(i)) breakpoints.delete(i);
      else breakpoints.add(i);
      renderGutter();
    };
    gutter.appendChild(div);
  }
}

const refresher = new RefreshScheduler(async (payload) => {
  try {
    const result = await api.highlight(docId, payload);
    serverGroups = result.groups;
    renderHighlight();
    return { generation: result.generation };
  } catch (err: unknown) {
    if ((err as { code?: string }).code === "stale_generation") return { generation: 0, stale: true };
    if ((err as { code?: string }).code === "unknown_uuid") return { generation: 0, stale: true };
    throw err;
  }
});

let lastText = "";

function onEdit(): void {
  const text = editorText();
  // a coarse single-span diff is enough for the mirror's change list
  let from = 0;
  while (from < lastText.length && from < text.length && lastText[from] === text[from]) from++;
  let oldEnd = lastText.length;
  let newEnd = text.length;
  while (oldEnd > from && newEnd > from && lastText[oldEnd - 1] === text[newEnd - 1]) {
    oldEnd--;
    newEnd--;
  }
  refresher.noteChange({ from, to: oldEnd, insert: text.slice(from, newEnd) }, text);
  lastText = text;
  renderHighlight();
}

// -- runner pane

function runnerCard(runner: Runner): HTMLElement {
  const card = document.createElement("div");
  card.className = "runner";
  card.dataset.engine = runner.engineId;
  render(runner, card);
  return card;
}

function render(runner: Runner, card: HTMLElement): void {
  const controls = runner.controls;
  const parts: string[] = [
    `<div class="runner-head"><code>${escapeHtml(runner.query)}</code> <em>${runner.state}</em></div>`,
  ];
  if (!runner.collapsed) {
    for (const entry of runner.answers) {
      parts.push(renderAnswer(entry.kind, entry.payload as EngineEventPayload));
    }
  }
  const buttons: string[] = [];
  for (const n of controls.next) buttons.push(`<button data-op="next" data-n="${n}">Next ${n}</button>`);
  if (controls.stop) buttons.push('<button data-op="stop">Stop</button>');
  if (controls.abort) buttons.push('<button data-op="abort">Abort</button>');
  for (const d of controls.debug) buttons.push(`<button data-op="debug" data-cmd="${d}">${d}</button>`);
  if (controls.input) buttons.push('<input data-op="input" placeholder="term." /><button data-op="send">Send</button>');
  parts.push(`<div class="controls">${buttons.join(" ")}</div>`);
  card.innerHTML = parts.join("");
  card.querySelectorAll("button").forEach((button) => {
    button.addEventListener("click", () => handleControl(runner, card, button));
  });
}

function renderAnswer(kind: string, event: EngineEventPayload): string {
  if (kind === "success") {
    const solutions = event.solutions as { bindings: { name: string; renderings: { payload: unknown }[] }[] }[];
    const rows = solutions
      .map(
        (s) =>
          "<div>" +
          (s.bindings.length
            ? s.bindings
                .map((b) => `${b.name} = ${escapeHtml(String(b.renderings[b.renderings.length - 1].payload))}`)
                .join(", ")
            : "true") +
          "</div>"
      )
      .join("");
    return `<div class="answer">${rows}</div>`;
  }
  if (kind === "output") return `<pre class="output">${escapeHtml(String(event.text))}</pre>`;
  if (kind === "failure") return '<div class="answer failure">false</div>';
  if (kind === "error") {
    const error = event.error as { text: string; kind: string };
    return `<div class="answer error">${escapeHtml(error.kind)}: ${escapeHtml(error.text)}</div>`;
  }
  if (kind === "debug") {
    return `<div class="debug">${escapeHtml(String(event.port))} (${escapeHtml(String(event.depth))}) ${escapeHtml(String(event.goal))}</div>`;
  }
  return "";
}

function handleControl(runner: Runner, card: HTMLElement, button: HTMLElement): void {
  const op = button.dataset.op;
  if (op === "next") {
    runner.resumed();
    void api.next(runner.engineId, Number(button.dataset.n));
  } else if (op === "stop") {
    void api.stop(runner.engineId);
  } else if (op === "abort") {
    void api.abort(runner.engineId);
  } else if (op === "debug") {
    runner.resumed();
    void api.respond(runner.engineId, button.dataset.cmd ?? "step_into");
  } else if (op === "send") {
    const input = card.querySelector<HTMLInputElement>("input[data-op=input]");
    if (input) {
      runner.resumed();
      void api.respond(runner.engineId, input.value);
    }
  }
  render(runner, card);
}

async function pollRunner(runner: Runner, card: HTMLElement): Promise<void> {
  while (runner.state !== "destroyed") {
    let events: EngineEventPayload[];
    try {
      events = (await api.events(runner.engineId, 10)).events;
    } catch {
      break; // session forgotten after destroy
    }
    for (const event of events) {
      runner.apply(event);
    }
    render(runner, card);
  }
}

async function runQuery(rawQuery: string, modifier: Modifier | null): Promise<void> {
  const wrapped = modifier ? wrapQuery(rawQuery, modifier) : { query: rawQuery, debug: false };
  history.push(rawQuery);
  renderMenus();
  let runner: Runner;
  try {
    runner = pane.add("", wrapped.query);
  } catch (err) {
    if (err instanceof RunnerRefused) {
      alert(err.message);
      return;
    }
    throw err;
  }
  const created = await api.createEngine(editorText());
  (runner as { engineId: string }).engineId = created.id;
  const card = runnerCard(runner);
  $("runners").prepend(card);
  if (breakpoints.size) await api.setBreakpoints(created.id, [...breakpoints]);
  await api.ask(created.id, wrapped.query, 1, wrapped.debug || breakpoints.size > 0);
  runner.resumed();
  void pollRunner(runner, card);
}

// -- menus

function option(label: string, run: () => void): HTMLElement {
  const li = document.createElement("li");
  li.textContent = label;
  li.onclick = run;
  return li;
}

function renderMenus(): void {
  const examples = $("menu-examples");
  examples.innerHTML = "";
  const query = $<HTMLInputElement>("query");
  for (const entry of currentExamples) {
    examples.appendChild(option(entry, () => (query.value = entry)));
  }
  const hist = $("menu-history");
  hist.innerHTML = "";
  for (const entry of history.list()) {
    hist.appendChild(option(entry, () => (query.value = entry)));
  }
  const solutions = $("menu-solutions");
  solutions.innerHTML = "";
  const mods: [string, Modifier][] = [
    ["Aggregate (count all)", { kind: "count_all" }],
    ["Distinct", { kind: "distinct" }],
    ["Limit 10", { kind: "limit", count: 10 }],
    ["Time", { kind: "time" }],
    ["Debug (trace)", { kind: "debug" }],
  ];
  for (const name of queryVariables(query.value)) {
    mods.push([`Order by ${name} asc`, { kind: "order_by", variable: name, direction: "asc" }]);
  }
  for (const [label, modifier] of mods) {
    solutions.appendChild(option(label, () => void runQuery(query.value, modifier)));
  }
}

let currentExamples: string[] = [];

async function loadFromStore(ref: string): Promise<void> {
  const program = await api.loadProgram(ref);
  $<HTMLTextAreaElement>("editor").value = program.content;
  currentExamples = program.examples;
  onEdit();
  renderMenus();
}

function init(): void {
  const editor = $<HTMLTextAreaElement>("editor");
  editor.addEventListener("input", onEdit);
  editor.addEventListener("scroll", () => {
    $("hl").scrollTop = editor.scrollTop;
    $("hl").scrollLeft = editor.scrollLeft;
  });
  $("run").addEventListener("click", () => void runQuery($<HTMLInputElement>("query").value, null));
  $("save").addEventListener("click", () => {
    void api.saveProgram(editorText()).then((saved) => {
      const url = new URL(location.href);
      url.searchParams.set("program", saved.name);
      history.push(`% saved as ${saved.name}`);
      window.history.replaceState(null, "", url.toString());
      $("saved-as").textContent = `saved as ${saved.name} (${saved.hash.slice(0, 12)}…)`;
    });
  });
  $<HTMLInputElement>("query").addEventListener("input", renderMenus);
  const ref = new URL(location.href).searchParams.get("program");
  if (ref) void loadFromStore(ref);
  lastText = editor.value;
  onEdit();
  renderMenus();
  console.log(`highlight refresh debounce: ${REFRESH_DELAY_MS}ms`);
}

document.addEventListener("DOMContentLoaded", init);
