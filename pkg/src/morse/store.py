"""Run artifacts: archive and manifest JSON, CSV time series, hashing.

Archive files are written with sorted keys and no whitespace so identical
runs produce byte-identical bytes; anything time-dependent (timestamps,
run ids) lives in the manifest, never in the archive. All files carry a
``schema_version``. Infinite crowding distances are stored as ``null``.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import NetworkConfig
from .environment import OBJECTIVES
from .evolve import ArchiveEntry, EvoParams, ParetoArchive
from .policy import Architecture, Genome

SCHEMA_VERSION = 1

try:  # editable installs may not expose metadata
    from importlib.metadata import version

    CODE_VERSION = version("morse")
except Exception:  # pragma: no cover
    CODE_VERSION = "0.1.0"


def sha256_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def output_root() -> Path:
    return Path(os.environ.get("MORSE_OUT", "runs"))


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# -- archive ------------------------------------------------------------


def archive_to_dict(archive: ParetoArchive, cfg: NetworkConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "pareto_archive",
        "seed": archive.seed,
        "fitness_mode": archive.params.fitness_mode,
        "risk_alpha": archive.params.risk_alpha if archive.params.fitness_mode == "cvar" else None,
        "objectives": list(OBJECTIVES),
        "evo_params": archive.params.to_dict(),
        "config": cfg.to_dict(),
        "config_digest": sha256_bytes(dumps_canonical(cfg.to_dict()).encode()),
        "ref_point": archive.ref_point.tolist() if archive.ref_point is not None else None,
        "architecture": archive.arch.to_dict(),
        "policies": [
            {
                "id": e.policy_id,
                "fitness": [float(x) for x in e.fitness],
                "rank": e.rank,
                "crowding": None if math.isinf(e.crowding) else float(e.crowding),
                "risk": e.risk,
                "genome": [float(x) for x in e.genome.values],
            }
            for e in archive.entries
        ],
    }


def archive_from_dict(d: dict) -> tuple:
    """Returns (ParetoArchive, NetworkConfig)."""
    if d.get("schema_version") != SCHEMA_VERSION or d.get("kind") != "pareto_archive":
        raise ValueError("not a pareto_archive document")
    arch = Architecture.from_dict(d["architecture"])
    params = EvoParams(**{**d["evo_params"], "hidden": tuple(d["evo_params"]["hidden"])})
    entries = [
        ArchiveEntry(
            policy_id=p["id"],
            genome=Genome(np.array(p["genome"], dtype=float), arch),
            fitness=np.array(p["fitness"], dtype=float),
            rank=p["rank"],
            crowding=math.inf if p["crowding"] is None else p["crowding"],
            risk=p.get("risk"),
        )
        for p in d["policies"]
    ]
    cfg = NetworkConfig.from_dict(d["config"])
    ref = d.get("ref_point")
    archive = ParetoArchive(
        entries=entries,
        arch=arch,
        seed=d["seed"],
        params=params,
        config_digest=d.get("config_digest", ""),
        ref_point=None if ref is None else np.array(ref, dtype=float),
    )
    return archive, cfg


def write_archive(archive: ParetoArchive, cfg: NetworkConfig, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(archive_to_dict(archive, cfg)))


def read_archive(path: str | Path) -> tuple:
    return archive_from_dict(json.loads(Path(path).read_text()))


# -- genome checkpoints ---------------------------------------------------


def write_genome(genome: Genome, path: str | Path, metadata: dict | None = None) -> None:
    """Standalone genome checkpoint: JSON header plus the flat parameter
    vector as 64-bit floats (text form; values round-trip exactly via repr)."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "genome_checkpoint",
        "architecture": genome.arch.to_dict(),
        "n_params": genome.arch.n_params,
        "metadata": metadata or {},
        "values": [float(x) for x in genome.values],
    }
    Path(path).write_text(dumps_canonical(doc))


def read_genome(path: str | Path) -> Genome:
    doc = json.loads(Path(path).read_text())
    if doc.get("kind") != "genome_checkpoint":
        raise ValueError("not a genome_checkpoint document")
    arch = Architecture.from_dict(doc["architecture"])
    return Genome(np.array(doc["values"], dtype=float), arch)


# -- CSV time series ----------------------------------------------------


def write_generations_csv(metrics: list, path: str | Path) -> None:
    fields = ["generation", "front_sizes", "hypervolume"] + [f"best_{n}" for n in OBJECTIVES]
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        for row in metrics:
            out = dict(row)
            out["front_sizes"] = ";".join(str(s) for s in row["front_sizes"])
            w.writerow(out)


def write_returns_csv(returns: np.ndarray, path: str | Path) -> None:
    """Distribution dump: one row per (episode, objective)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["episode", "objective", "value"])
        for e in range(returns.shape[0]):
            for j, name in enumerate(OBJECTIVES):
                w.writerow([e, name, repr(float(returns[e, j]))])


def read_returns_csv(path: str | Path) -> np.ndarray:
    by_episode: dict = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            e = int(row["episode"])
            by_episode.setdefault(e, {})[row["objective"]] = float(row["value"])
    return np.array([[by_episode[e][n] for n in OBJECTIVES] for e in sorted(by_episode)])


def write_trace_csv(trace, path: str | Path) -> None:
    fields = ["period", "policy_id", "profit_cum", "emissions_cum", "lead_time", "disruption_active"]
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        for row in trace.rows():
            w.writerow(row)


def write_transitions_csv(rows: list, path: str | Path) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)


# -- manifest -----------------------------------------------------------


@dataclass
class RunManifest:
    run_id: str
    command: str
    seed: int | None
    params: dict
    config_source: str
    config_digest: str
    created_at: str
    completed_at: str | None = None
    artifacts: list = field(default_factory=list)  # {name, path, sha256}
    complete: bool = False
    code_version: str = CODE_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "run_manifest",
            "run_id": self.run_id,
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "config_source": self.config_source,
            "config_digest": self.config_digest,
            "created_at": self.created_at,
            "completed_at": self.completed_at,
            "artifacts": self.artifacts,
            "complete": self.complete,
            "code_version": self.code_version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        if d.get("kind") != "run_manifest":
            raise ValueError("not a run_manifest document")
        return cls(**{k: d[k] for k in d if k in cls.__dataclass_fields__})


def new_manifest(command: str, seed: int | None, params: dict,
                 config_source: str, config_digest: str) -> RunManifest:
    return RunManifest(
        run_id=f"{command}-{uuid.uuid4().hex[:12]}",
        command=command,
        seed=seed,
        params=params,
        config_source=config_source,
        config_digest=config_digest,
        created_at=datetime.now(timezone.utc).isoformat(),
    )


def write_manifest(manifest: RunManifest, out_dir: Path) -> None:
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True))


def finalize_manifest(manifest: RunManifest, out_dir: Path, artifact_paths: dict) -> None:
    """Hash the produced artifacts, mark the run complete and write
    manifest.json alongside them. CSV artifacts cannot carry a
    schema_version field themselves, so each artifact entry records it."""
    manifest.artifacts = [
        {"name": name, "path": str(Path(p).name), "sha256": sha256_file(p),
         "schema_version": SCHEMA_VERSION}
        for name, p in artifact_paths.items()
    ]
    manifest.completed_at = datetime.now(timezone.utc).isoformat()
    manifest.complete = True
    write_manifest(manifest, out_dir)


def load_manifest(out_dir: Path) -> RunManifest | None:
    path = out_dir / "manifest.json"
    if not path.exists():
        return None
    return RunManifest.from_dict(json.loads(path.read_text()))
