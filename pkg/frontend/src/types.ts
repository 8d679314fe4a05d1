/** Wire types for the control-service HTTP+JSON and event-stream schemas
 * (schema_version 1). The dashboard consumes these exclusively; it never
 * reads files or touches simulation state directly. */

export const SCHEMA_VERSION = 1;

export type ObjectiveName = "profit" | "neg_emissions" | "neg_lead_time";

export interface RiskAnnotation {
  alpha: number;
  n_samples: number;
  per_objective: Record<string, { var: number; cvar: number; mean: number }>;
}

export interface ArchivePolicy {
  id: number;
  fitness: [number, number, number];
  risk: RiskAnnotation | null;
}

export interface PolicyListing {
  schema_version: number;
  fitness_mode: "mean" | "cvar";
  risk_alpha: number | null;
  objectives: ObjectiveName[];
  policies: ArchivePolicy[];
}

export interface SessionSummary {
  session_id?: string;
  schema_version: number;
  period: number;
  env_t: number;
  active_policy: number;
  mode: "paused" | "running";
  speed: number;
  cumulative: CumulativeMetrics;
  n_events: number;
}

export interface CumulativeMetrics {
  profit: number;
  emissions: number;
  lead_time_total: number;
}

export interface PeriodEvent {
  type: "period";
  schema_version: number;
  period: number;
  env_t: number;
  active_policy: number;
  disruption_active: boolean;
  reward: { profit: number; neg_emissions: number; neg_lead_time: number };
  cumulative: CumulativeMetrics;
  state: { on_hand_total: number; backlog_total: number; pipeline_total: number };
}

export interface CommandEvent {
  type: "command";
  schema_version: number;
  name: string;
  payload: Record<string, unknown>;
  issued_at_period: number;
  effective_period: number;
}

export type SessionEvent = PeriodEvent | CommandEvent;

export interface SnapshotMessage {
  type: "snapshot";
  schema_version: number;
  session: SessionSummary;
  events: SessionEvent[];
}

export type StreamMessage = SnapshotMessage | SessionEvent;

export interface DisruptionPayload {
  kind: "emission_tax" | "cost_surge";
  duration: number;
  tax_rate?: number;
  emission_threshold?: number;
  cost_multiplier?: number;
}

export type Command =
  | { type: "step"; n: number }
  | { type: "run"; speed: number }
  | { type: "pause" }
  | { type: "switch_policy"; policy_id: number }
  | { type: "inject"; disruption: DisruptionPayload }
  | { type: "reset" };

export interface CommandAck {
  accepted: boolean;
  command: string;
  effective_period: number;
  advanced?: number;
}
