import { ApiClient, LabelValue } from "./api.js";
import { resolveApiBase, resolveEvaluatorId } from "./config.js";
import { renderApp } from "./render.js";
import { LabelingSession } from "./session.js";

const KEY_TO_LABEL: Record<string, LabelValue> = {
  y: "yes",
  n: "no",
  u: "unknown",
};

function mount(root: HTMLElement): LabelingSession {
  const client = new ApiClient(resolveApiBase());
  const session = new LabelingSession(client, resolveEvaluatorId());

  session.onChange((state) => {
    root.innerHTML = renderApp(state);
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const button = target.closest("button");
    if (!button) return;
    if (button.id === "retry") {
      void session.retry();
      return;
    }
    const label = button.dataset.label as LabelValue | undefined;
    if (label) void session.submitLabel(label);
  });

  document.addEventListener("keydown", (event) => {
    if (event.repeat || event.metaKey || event.ctrlKey || event.altKey) return;
    const label = KEY_TO_LABEL[event.key.toLowerCase()];
    if (label) void session.submitLabel(label);
  });

  void session.start();
  return session;
}

const root = document.getElementById("app");
if (root) mount(root);

export { mount };
