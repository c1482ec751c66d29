// Bootstrap: join form on first visit, server-side resume afterwards.
// The session id is the only thing persisted client-side.

import { StudyApi } from "./api.js";
import { SessionController } from "./ui.js";

const SESSION_KEY = "reader-study-session";

function qs<T extends HTMLElement>(selector: string): T {
  const node = document.querySelector(selector);
  if (!node) {
    throw new Error(`missing element ${selector}`);
  }
  return node as T;
}

async function boot(): Promise<void> {
  const api = new StudyApi("");
  const root = qs<HTMLElement>("#app");
  const form = qs<HTMLElement>("#join-form");

  const stored = sessionStorage.getItem(SESSION_KEY);
  if (stored) {
    const { sessionId, nItems } = JSON.parse(stored) as { sessionId: string; nItems: number };
    try {
      form.style.display = "none";
      const controller = new SessionController(api, root, sessionId, nItems);
      await controller.start();
      return;
    } catch {
      sessionStorage.removeItem(SESSION_KEY); // stale session: fall through
      form.style.display = "";
    }
  }

  qs<HTMLButtonElement>("#join-button").addEventListener("click", async () => {
    const readerId = qs<HTMLInputElement>("#reader-id").value.trim();
    const modality = qs<HTMLInputElement>("#modality").value.trim() || "toy";
    const resolution = parseInt(qs<HTMLInputElement>("#resolution").value, 10);
    if (!readerId || !Number.isFinite(resolution)) {
      qs<HTMLElement>("#join-error").textContent = "reader id and resolution are required";
      return;
    }
    try {
      const created = await api.createSession(readerId, modality, resolution);
      sessionStorage.setItem(
        SESSION_KEY,
        JSON.stringify({ sessionId: created.session_id, nItems: created.n_items }),
      );
      form.style.display = "none";
      const controller = new SessionController(api, root, created.session_id, created.n_items);
      await controller.start();
    } catch (err) {
      qs<HTMLElement>("#join-error").textContent = String(err);
    }
  });
}

void boot();
