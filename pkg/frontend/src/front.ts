/** Pareto-front view model: normalized coordinates for plotting, risk
 * annotations when the archive was risk-trained, and selection that issues
 * exactly one switch command per user pick. */

import type { ControlServiceClient } from "./api.js";
import type { ArchivePolicy, CommandAck, ObjectiveName, PolicyListing } from "./types.js";

export interface FrontPolicyView {
  id: number;
  fitness: [number, number, number];
  /** min-max normalized per objective over the archive; 0 when an
   * objective has no spread. */
  normalized: [number, number, number];
  risk: ArchivePolicy["risk"];
  selected: boolean;
}

export interface FrontViewModel {
  objectives: ObjectiveName[];
  fitnessMode: "mean" | "cvar";
  riskAlpha: number | null;
  policies: FrontPolicyView[];
  /** per objective [min, max] over the archive, for axis ranges */
  bounds: Array<[number, number]>;
}

export function buildFrontViewModel(listing: PolicyListing, selectedId: number): FrontViewModel {
  if (listing.policies.length === 0) {
    return {
      objectives: listing.objectives,
      fitnessMode: listing.fitness_mode,
      riskAlpha: listing.risk_alpha,
      policies: [],
      bounds: [],
    };
  }
  const nObj = listing.objectives.length;
  const bounds: Array<[number, number]> = [];
  for (let j = 0; j < nObj; j++) {
    const col = listing.policies.map((p) => p.fitness[j] ?? 0);
    bounds.push([Math.min(...col), Math.max(...col)]);
  }
  const policies = listing.policies.map((p) => {
    const normalized = p.fitness.map((v, j) => {
      const [lo, hi] = bounds[j]!;
      return hi > lo ? (v - lo) / (hi - lo) : 0;
    }) as [number, number, number];
    return {
      id: p.id,
      fitness: p.fitness,
      normalized,
      risk: p.risk,
      selected: p.id === selectedId,
    };
  });
  return {
    objectives: listing.objectives,
    fitnessMode: listing.fitness_mode,
    riskAlpha: listing.risk_alpha,
    policies,
    bounds,
  };
}

/** Compact one-line label for a policy's risk annotation, or null when the
 * archive carries none. */
export function riskSummary(risk: ArchivePolicy["risk"]): string | null {
  if (!risk) return null;
  const parts = Object.entries(risk.per_objective).map(
    ([name, v]) => `${name} ${v.cvar.toFixed(1)}`,
  );
  return `CVaR@${risk.alpha}: ${parts.join(", ")}`;
}

/** Selection controller: each user pick issues exactly one switch_policy
 * command, and the view model flips only once the service acknowledges. */
export class FrontSelection {
  private vm: FrontViewModel;

  constructor(
    private readonly client: ControlServiceClient,
    private readonly sessionId: string,
    listing: PolicyListing,
    initialSelected: number,
    private readonly onChange: (vm: FrontViewModel) => void = () => {},
  ) {
    this.vm = buildFrontViewModel(listing, initialSelected);
  }

  get viewModel(): FrontViewModel {
    return this.vm;
  }

  get selectedId(): number {
    return this.vm.policies.find((p) => p.selected)?.id ?? -1;
  }

  async select(policyId: number): Promise<CommandAck> {
    if (!this.vm.policies.some((p) => p.id === policyId)) {
      throw new Error(`policy ${policyId} is not on the served front`);
    }
    const ack = await this.client.sendCommand(this.sessionId, {
      type: "switch_policy",
      policy_id: policyId,
    });
    this.vm = {
      ...this.vm,
      policies: this.vm.policies.map((p) => ({ ...p, selected: p.id === policyId })),
    };
    this.onChange(this.vm);
    return ack;
  }
}
