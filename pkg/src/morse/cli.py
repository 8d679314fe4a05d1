"""Command-line entry points: train, evaluate, scenario, serve.

Every command takes a single --seed from which all internal streams are
derived, writes its artifacts into --out (default under $MORSE_OUT or
./runs) and records them in a manifest. Re-running with --resume is a
no-op once a run's manifest is marked complete.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, Disruption, NetworkConfig
from .evolve import EvoParams, evolve
from .risk import collect_returns, risk_estimate
from .scenarios import CONFIGURATION_IDS, ScenarioSpec, build_configuration, run_scenario, summarize
from .store import (
    CODE_VERSION,
    dumps_canonical,
    finalize_manifest,
    load_manifest,
    new_manifest,
    output_root,
    read_archive,
    sha256_bytes,
    write_archive,
    write_generations_csv,
    write_manifest,
    write_returns_csv,
    write_trace_csv,
)


def _load_config(source: str) -> NetworkConfig:
    if source in CONFIGURATION_IDS:
        return build_configuration(source)
    return NetworkConfig.from_json(source)


def _out_dir(args, default_name: str) -> Path:
    out = Path(args.out) if args.out else output_root() / default_name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resume_done(args, out: Path) -> bool:
    if not getattr(args, "resume", False):
        return False
    manifest = load_manifest(out)
    if manifest is not None and manifest.complete:
        print(f"run {manifest.run_id} already complete in {out}; nothing to do")
        return True
    return False


def cmd_train(args) -> int:
    out = _out_dir(args, f"train-seed{args.seed}")
    if _resume_done(args, out):
        return 0
    cfg = _load_config(args.config)
    mode = "cvar" if args.risk_alpha is not None else "mean"
    episodes = args.episodes if args.episodes is not None else (500 if mode == "cvar" else 5)
    params = EvoParams(
        population_size=args.population,
        generations=args.generations,
        episodes=episodes,
        fitness_mode=mode,
        risk_alpha=args.risk_alpha if args.risk_alpha is not None else 0.9,
        jobs=args.jobs,
    )
    manifest = new_manifest("train", args.seed, params.to_dict(), args.config,
                            sha256_bytes(dumps_canonical(cfg.to_dict()).encode()))
    write_manifest(manifest, out)  # complete=false until the run finishes
    archive, metrics = evolve(cfg, params, args.seed)

    archive_path = out / "archive.json"
    gens_path = out / "generations.csv"
    write_archive(archive, cfg, archive_path)
    write_generations_csv(metrics, gens_path)
    finalize_manifest(manifest, out, {"archive": archive_path, "generations": gens_path})
    print(f"wrote {archive_path} ({len(archive)} Pareto policies, "
          f"{len(metrics) - 1} generations)")
    return 0


def cmd_evaluate(args) -> int:
    out = _out_dir(args, "evaluate")
    if _resume_done(args, out):
        return 0
    archive, cfg = read_archive(args.archive)
    ids = args.policy if args.policy else [e.policy_id for e in archive.entries]
    known = {e.policy_id for e in archive.entries}
    missing = [i for i in ids if i not in known]
    if missing:
        raise ValueError(f"policy ids not in archive: {missing}")

    manifest = new_manifest("evaluate", args.seed,
                            {"episodes": args.episodes, "alpha": args.risk_alpha, "policies": ids},
                            args.archive, archive.config_digest)
    artifacts = {}
    estimates = {}
    for pid in ids:
        entry = archive.get(pid)
        returns = collect_returns(cfg, entry.genome, args.episodes, (args.seed, 3, pid))
        est = risk_estimate(returns, args.risk_alpha)
        estimates[str(pid)] = est.to_dict(("profit", "neg_emissions", "neg_lead_time"))
        entry.risk = estimates[str(pid)]
        path = out / f"returns_policy_{pid}.csv"
        write_returns_csv(returns.returns, path)
        artifacts[f"returns_policy_{pid}"] = path

    risk_path = out / "risk_estimates.json"
    risk_path.write_text(json.dumps(
        {"schema_version": 1, "kind": "risk_estimates", "alpha": args.risk_alpha,
         "episodes": args.episodes, "policies": estimates},
        indent=2, sort_keys=True))
    artifacts["risk_estimates"] = risk_path
    if args.update_archive:
        # write the risk-annotated archive back so dashboards can show
        # VaR/CVaR next to each Pareto point
        write_archive(archive, cfg, args.archive)
    finalize_manifest(manifest, out, artifacts)
    print(f"evaluated {len(ids)} policies x {args.episodes} episodes -> {out}")
    return 0


def cmd_scenario(args) -> int:
    out = _out_dir(args, f"scenario-{args.kind}")
    if _resume_done(args, out):
        return 0
    archive, _cfg = read_archive(args.archive)
    if args.kind == "emission_tax":
        disruption = Disruption("emission_tax", args.start, args.duration,
                                tax_rate=args.tax_rate, emission_threshold=args.threshold)
    else:
        disruption = Disruption("cost_surge", args.start, args.duration,
                                cost_multiplier=args.multiplier)
    spec = ScenarioSpec(config_id=args.config, disruption=disruption, horizon=args.horizon,
                        trigger="on_disruption" if args.trigger is None else args.trigger)
    manifest = new_manifest("scenario", args.seed,
                            {"kind": args.kind, "horizon": args.horizon,
                             "disruption": disruption.to_dict()},
                            args.config, archive.config_digest)
    switching, static = run_scenario(spec, archive, args.seed)

    sw_path, st_path = out / "switching_trace.csv", out / "static_trace.csv"
    write_trace_csv(switching, sw_path)
    write_trace_csv(static, st_path)
    report = {
        "schema_version": 1,
        "kind": "scenario_report",
        "configuration": args.config,
        "trigger_period": spec.resolved_trigger(),
        "disruption": disruption.to_dict(),
        **summarize(switching, static, spec.resolved_trigger()),
    }
    report_path = out / "report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True))
    finalize_manifest(manifest, out,
                      {"switching_trace": sw_path, "static_trace": st_path, "report": report_path})
    print(f"scenario {args.kind} on {args.config}: "
          f"delta profit {report['delta']['profit_cum']:+.1f}, "
          f"delta emissions {report['delta']['emissions_cum']:+.1f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app()
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except OSError as exc:
        print(f"failed to bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morse",
                                     description="Pareto-front neuroevolution for inventory control")
    parser.add_argument("--version", action="version", version=CODE_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="evolve a Pareto archive of policies")
    p.add_argument("--config", required=True, help="config JSON path or builtin id (A/B/C)")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=24)
    p.add_argument("--generations", type=int, default=40)
    p.add_argument("--episodes", type=int, default=None,
                   help="episodes per evaluation (default 5 mean / 500 cvar)")
    p.add_argument("--risk-alpha", type=float, default=None,
                   help="train on CVaR fitness at this confidence level")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="Monte-Carlo return distributions for archive policies")
    p.add_argument("--archive", required=True)
    p.add_argument("--policy", type=int, action="append", default=None)
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--risk-alpha", type=float, default=0.9)
    p.add_argument("--update-archive", action="store_true",
                   help="write VaR/CVaR annotations back into the archive file")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("scenario", help="disruption comparison with and without policy switching")
    p.add_argument("--config", required=True, choices=CONFIGURATION_IDS)
    p.add_argument("--archive", required=True)
    p.add_argument("--kind", required=True, choices=["emission_tax", "cost_surge"])
    p.add_argument("--start", type=int, default=200)
    p.add_argument("--duration", type=int, default=200)
    p.add_argument("--horizon", type=int, default=400)
    p.add_argument("--trigger", type=int, default=None, help="switch period (default: disruption start)")
    p.add_argument("--tax-rate", type=float, default=2.0)
    p.add_argument("--threshold", type=float, default=10.0)
    p.add_argument("--multiplier", type=float, default=1.1)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("serve", help="run the operator control service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
