/** Browser entry point: connect to the control service named by
 * ?service=... (default: same origin), open or create a session, and mount
 * the dashboard. */

import { ControlServiceClient, eventSourceOpener } from "./api.js";
import { createDashboard } from "./dashboard.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "";
  const client = new ControlServiceClient(base, (url, init) => fetch(url, init),
                                          eventSourceOpener(EventSource));
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  let sessionId = params.get("session");
  if (!sessionId) {
    const archivePath = params.get("archive");
    if (!archivePath) {
      root.textContent =
        "pass ?session=<id> to join a session, or ?archive=<server path> to start one";
      return;
    }
    const created = await client.createSession({
      archive: { path: archivePath },
      seed: Number(params.get("seed") ?? 0),
    });
    sessionId = created.session_id;
    params.set("session", sessionId);
    history.replaceState(null, "", `?${params.toString()}`);
  }

  await createDashboard(root, client, sessionId);
}

void boot();
