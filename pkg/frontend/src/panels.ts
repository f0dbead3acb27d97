import type { CanvasController } from "./controller.js";
import type { Suggestion } from "./types.js";

function button(label: string, onClick: () => void): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = label;
  b.addEventListener("click", onClick);
  return b;
}

/** Four-action toolbar shown next to the selected node. */
export function nodeToolbar(
  controller: CanvasController,
  nodeId: string,
  onChange: () => void,
  onSuggestions: (items: Suggestion[]) => void,
  onError: (message: string) => void,
): HTMLElement {
  const bar = document.createElement("div");
  bar.className = "node-toolbar";
  const run = (work: Promise<unknown>) =>
    work.then(onChange).catch((err) => onError(String(err)));
  bar.append(
    button("+", () => run(controller.expand(nodeId))),
    button("delete", () => run(controller.deleteNode(nodeId))),
    button("suggest", () =>
      controller
        .suggest(nodeId)
        .then((items) => {
          onSuggestions(items);
          onChange();
        })
        .catch((err) => onError(String(err))),
    ),
    button("star", () => run(controller.star(nodeId))),
  );
  return bar;
}

/** Global widget bar: create node, group, ungroup, rearrange. */
export function widgetBar(
  controller: CanvasController,
  onChange: () => void,
  onError: (message: string) => void,
  confirmRearrange: () => boolean = () => window.confirm("Recompute the layout? Manual positions will be lost."),
): HTMLElement {
  const bar = document.createElement("div");
  bar.className = "widget-bar";
  bar.append(
    button("create node", () => {
      const title = window.prompt("Node title?");
      if (!title) return;
      controller.createNode(title, "").then(onChange).catch((err) => onError(String(err)));
    }),
    button("rearrange", () => {
      if (!confirmRearrange()) return;
      controller.rearrange().then(onChange).catch((err) => onError(String(err)));
    }),
  );
  return bar;
}

/** Chat panel: send a message, render the exchange, refresh the canvas. */
export function chatPanel(
  controller: CanvasController,
  onChange: () => void,
  onError: (message: string) => void,
): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "chat-panel";
  const log = document.createElement("div");
  const input = document.createElement("input");
  const say = (role: string, text: string) => {
    const line = document.createElement("p");
    line.className = role;
    line.textContent = text;
    log.append(line);
  };
  panel.append(
    log,
    input,
    button("send", () => {
      const text = input.value.trim();
      if (!text) return;
      input.value = "";
      say("user", text);
      controller
        .chat(text, controller.view.selectedNode ?? undefined)
        .then((reply) => {
          say("assistant", reply.text);
          onChange();
        })
        .catch((err) => onError(String(err)));
    }),
  );
  return panel;
}

/** File panel: pick a text file and ingest it into the session. */
export function filePanel(
  controller: CanvasController,
  onChange: () => void,
  onError: (message: string) => void,
): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "file-panel";
  const picker = document.createElement("input");
  picker.type = "file";
  picker.accept = ".txt,.md";
  picker.addEventListener("change", () => {
    const file = picker.files?.[0];
    if (!file) return;
    file
      .text()
      .then((body) => controller.uploadDocument(file.name, body))
      .then(onChange)
      .catch((err) => onError(String(err)));
  });
  panel.append(picker);
  return panel;
}
