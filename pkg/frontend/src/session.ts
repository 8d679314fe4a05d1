/** Live session state rebuilt purely from the event stream.
 *
 * The store folds a snapshot plus deltas into chart series and command
 * markers. It holds no state of its own beyond the events: dropping the
 * store and replaying the same events reconstructs identical series, which
 * is exactly what a reconnect does. */

import type {
  CommandEvent,
  PeriodEvent,
  SessionEvent,
  SessionSummary,
  SnapshotMessage,
  StreamMessage,
} from "./types.js";

export interface SessionSeries {
  periods: number[];
  /** cumulative profit, folded from per-period rewards */
  profitCum: number[];
  /** cumulative emissions (positive units) */
  emissionsCum: number[];
  /** per-period (non-cumulative) lead time */
  leadTime: number[];
  activePolicy: number[];
  disruptionActive: boolean[];
}

export interface CommandMarker {
  name: string;
  effectivePeriod: number;
  payload: Record<string, unknown>;
}

export class SessionStore {
  private events: SessionEvent[] = [];
  private summary: SessionSummary | null = null;

  /** Number of events consumed; pass as `since` when reconnecting. */
  get cursor(): number {
    return this.events.length;
  }

  get lastSummary(): SessionSummary | null {
    return this.summary;
  }

  get eventLog(): readonly SessionEvent[] {
    return this.events;
  }

  applyMessage(msg: StreamMessage): void {
    if (msg.type === "snapshot") {
      this.applySnapshot(msg);
    } else {
      this.applyDelta(msg);
    }
  }

  applySnapshot(snapshot: SnapshotMessage): void {
    // the snapshot carries everything after the `since` cursor we asked
    // for; events already held stay, the rest append
    this.summary = snapshot.session;
    for (const e of snapshot.events) {
      this.events.push(e);
    }
  }

  applyDelta(event: SessionEvent): void {
    this.events.push(event);
  }

  reset(): void {
    this.events = [];
    this.summary = null;
  }

  periodEvents(): PeriodEvent[] {
    return this.events.filter((e): e is PeriodEvent => e.type === "period");
  }

  commandMarkers(): CommandMarker[] {
    return this.events
      .filter((e): e is CommandEvent => e.type === "command")
      .map((e) => ({ name: e.name, effectivePeriod: e.effective_period, payload: e.payload }));
  }

  /** Chart series folded from per-period rewards. The cumulative columns
   * are prefix sums of the streamed rewards and must agree with the
   * server's cumulative fields (checked by consistencyErrors). */
  series(): SessionSeries {
    const out: SessionSeries = {
      periods: [],
      profitCum: [],
      emissionsCum: [],
      leadTime: [],
      activePolicy: [],
      disruptionActive: [],
    };
    let profit = 0;
    let emissions = 0;
    let lastEnvT = Number.POSITIVE_INFINITY;
    for (const e of this.periodEvents()) {
      if (e.env_t <= lastEnvT && e.env_t === 1) {
        // fresh episode after a reset: cumulative metrics restart
        profit = 0;
        emissions = 0;
      }
      lastEnvT = e.env_t;
      profit += e.reward.profit;
      emissions += -e.reward.neg_emissions;
      out.periods.push(e.period);
      out.profitCum.push(profit);
      out.emissionsCum.push(emissions);
      out.leadTime.push(-e.reward.neg_lead_time);
      out.activePolicy.push(e.active_policy);
      out.disruptionActive.push(e.disruption_active);
    }
    return out;
  }

  /** Folded prefix sums vs the server's streamed cumulative fields. */
  consistencyErrors(tolerance = 1e-6): string[] {
    const errors: string[] = [];
    const series = this.series();
    const periods = this.periodEvents();
    periods.forEach((e, i) => {
      if (Math.abs((series.profitCum[i] ?? 0) - e.cumulative.profit) > tolerance) {
        errors.push(`period ${e.period}: profit prefix sum drifts from streamed cumulative`);
      }
      if (Math.abs((series.emissionsCum[i] ?? 0) - e.cumulative.emissions) > tolerance) {
        errors.push(`period ${e.period}: emissions prefix sum drifts from streamed cumulative`);
      }
    });
    return errors;
  }
}

export type ConnectionState = "connecting" | "live" | "reconnecting" | "closed";

/** Stream lifecycle: snapshot + deltas into a SessionStore, resuming from
 * the cursor after a drop so the series comes back identical. */
export class SessionFeed {
  readonly store = new SessionStore();
  private handle: { close(): void } | null = null;
  private state: ConnectionState = "closed";

  constructor(
    private readonly open: (
      since: number,
      onMessage: (msg: StreamMessage) => void,
      onError: (err: unknown) => void,
    ) => { close(): void },
    private readonly onUpdate: (store: SessionStore, state: ConnectionState) => void = () => {},
  ) {}

  get connectionState(): ConnectionState {
    return this.state;
  }

  connect(): void {
    this.state = "connecting";
    this.handle = this.open(
      this.store.cursor,
      (msg) => {
        this.state = "live";
        this.store.applyMessage(msg);
        this.onUpdate(this.store, this.state);
      },
      () => {
        this.state = "reconnecting";
        this.onUpdate(this.store, this.state);
      },
    );
  }

  /** Drop and resume from the current cursor (used after stream errors). */
  reconnect(): void {
    this.handle?.close();
    this.connect();
  }

  close(): void {
    this.handle?.close();
    this.handle = null;
    this.state = "closed";
  }
}
