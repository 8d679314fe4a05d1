/** Control-room wiring: Pareto front panels with click-to-switch, live
 * objective charts fed by the event stream, and the command palette
 * (run/pause/step, disruption form, reset).
 *
 * The dashboard is stateless beyond its view models; a page reload
 * reconstructs everything from the server's event log. Commands originate
 * only from explicit user interaction here. */

import { ControlServiceClient } from "./api.js";
import { FrontSelection, riskSummary } from "./front.js";
import { SessionFeed, SessionStore } from "./session.js";
import {
  renderLineChart,
  renderParallelCoordinates,
  renderScatterPanel,
  sessionCharts,
} from "./charts.js";
import type { DisruptionPayload, PolicyListing } from "./types.js";

const SCATTER_PAIRS: Array<[number, number]> = [
  [0, 1],
  [0, 2],
  [1, 2],
];

export interface DashboardHandles {
  selection: FrontSelection;
  feed: SessionFeed;
  close(): void;
}

export async function createDashboard(
  root: HTMLElement,
  client: ControlServiceClient,
  sessionId: string,
): Promise<DashboardHandles> {
  const listing = await client.policies(sessionId);
  const info = await client.sessionInfo(sessionId);

  root.innerHTML = `
    <div class="dashboard">
      <section class="front-panel">
        <h2>Pareto front (${listing.policies.length} policies${riskLabel(listing)})</h2>
        <div id="front-empty" ${listing.policies.length ? 'hidden' : ''}>archive is empty</div>
        <div id="scatter-row"></div>
        <div id="parallel"></div>
        <ul id="policy-list"></ul>
      </section>
      <section class="session-panel">
        <h2>Session <span id="conn-state"></span></h2>
        <div id="chart-profit"></div>
        <div id="chart-emissions"></div>
        <div id="chart-leadtime"></div>
        <div class="palette">
          <button id="btn-run">run</button>
          <input id="run-speed" type="number" value="10" min="1"/>
          <button id="btn-pause">pause</button>
          <button id="btn-step">step</button>
          <input id="step-n" type="number" value="1" min="1"/>
          <button id="btn-reset">reset</button>
          <form id="disruption-form">
            <select id="disruption-kind">
              <option value="cost_surge">cost surge</option>
              <option value="emission_tax">emission tax</option>
            </select>
            <input id="disruption-duration" type="number" value="50" min="1"/>
            <input id="disruption-multiplier" type="number" value="1.1" step="0.05"/>
            <input id="disruption-tax-rate" type="number" value="2.0" step="0.5"/>
            <input id="disruption-threshold" type="number" value="10.0" step="1"/>
            <button type="submit">inject</button>
          </form>
        </div>
        <ol id="event-log"></ol>
      </section>
    </div>`;

  const selection = new FrontSelection(client, sessionId, listing, info.active_policy, renderFront);

  function renderFront(): void {
    const vm = selection.viewModel;
    byId("scatter-row").innerHTML = SCATTER_PAIRS.map(([x, y]) =>
      renderScatterPanel(vm, x, y),
    ).join("");
    byId("parallel").innerHTML = renderParallelCoordinates(vm);
    byId("policy-list").innerHTML = vm.policies
      .map((p) => {
        const risk = riskSummary(p.risk);
        return (
          `<li data-policy="${p.id}" class="${p.selected ? "selected" : ""}">` +
          `#${p.id} [${p.fitness.map((v) => v.toFixed(1)).join(", ")}]` +
          (risk ? ` ${risk}` : "") +
          `</li>`
        );
      })
      .join("");
  }

  function renderSession(store: SessionStore, state: string): void {
    byId("conn-state").textContent = state === "live" ? "" : `(${state})`;
    const series = store.series();
    const charts = sessionCharts(series);
    const markers = store
      .commandMarkers()
      .filter((m) => !["step", "run", "pause"].includes(m.name))
      .map((m) => m.effectivePeriod);
    byId("chart-profit").innerHTML = renderLineChart(
      { title: "cumulative profit", points: charts.profit, markers });
    byId("chart-emissions").innerHTML = renderLineChart(
      { title: "cumulative emissions", points: charts.emissions, markers });
    byId("chart-leadtime").innerHTML = renderLineChart(
      { title: "lead time", points: charts.leadTime, markers });
    byId("event-log").innerHTML = store.eventLog
      .slice(-30)
      .map((e) =>
        e.type === "command"
          ? `<li class="cmd">@${e.effective_period} ${e.name}</li>`
          : `<li>period ${e.period}: profit ${e.reward.profit.toFixed(1)}, policy #${e.active_policy}</li>`,
      )
      .join("");
  }

  const feed = new SessionFeed(
    (since, onMessage, onError) => client.openStream(sessionId, since, onMessage, onError),
    renderSession,
  );
  feed.connect();

  function byId(id: string): HTMLElement {
    const el = root.querySelector(`#${id}`);
    if (!el) throw new Error(`missing dashboard element #${id}`);
    return el as HTMLElement;
  }

  // one switch command per explicit user pick, whether from a scatter
  // mark, a parallel-coordinates line or the list
  root.addEventListener("click", (ev) => {
    const target = (ev.target as HTMLElement).closest("[data-policy]");
    if (target instanceof Element) {
      void selection.select(Number(target.getAttribute("data-policy")));
    }
  });

  byId("btn-run").addEventListener("click", () => {
    const speed = Number((byId("run-speed") as HTMLInputElement).value) || 10;
    void client.sendCommand(sessionId, { type: "run", speed });
  });
  byId("btn-pause").addEventListener("click", () => {
    void client.sendCommand(sessionId, { type: "pause" });
  });
  byId("btn-step").addEventListener("click", () => {
    const n = Number((byId("step-n") as HTMLInputElement).value) || 1;
    void client.sendCommand(sessionId, { type: "step", n });
  });
  byId("btn-reset").addEventListener("click", () => {
    void client.sendCommand(sessionId, { type: "reset" });
  });
  byId("disruption-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const kind = (byId("disruption-kind") as HTMLSelectElement).value as DisruptionPayload["kind"];
    const duration = Number((byId("disruption-duration") as HTMLInputElement).value) || 1;
    const disruption: DisruptionPayload =
      kind === "cost_surge"
        ? { kind, duration,
            cost_multiplier: Number((byId("disruption-multiplier") as HTMLInputElement).value) }
        : { kind, duration,
            tax_rate: Number((byId("disruption-tax-rate") as HTMLInputElement).value),
            emission_threshold: Number((byId("disruption-threshold") as HTMLInputElement).value) };
    void client.sendCommand(sessionId, { type: "inject", disruption });
  });

  renderFront();
  renderSession(feed.store, feed.connectionState);
  return { selection, feed, close: () => feed.close() };
}

function riskLabel(listing: PolicyListing): string {
  return listing.fitness_mode === "cvar" ? `, CVaR-trained @ ${listing.risk_alpha}` : "";
}
