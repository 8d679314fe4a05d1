"""Operator control service: live, steerable simulation sessions over
HTTP+JSON with a server-push event stream.

A session owns one environment trajectory driven by the currently active
archive policy. Commands (step/run/pause, switch_policy, inject, reset)
are queued and take effect at the next period boundary; every command and
every simulated period is appended to an ordered event log. Replaying
that log against the same seed reproduces the trajectory exactly, so the
log *is* the session.

Event ``period`` numbers count simulated periods monotonically (1-based)
and never rewind, even across a mid-session reset; the environment clock
is reported separately as ``env_t``.
"""
from __future__ import annotations

import asyncio
import json
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse

from .config import ConfigError, Disruption, NetworkConfig
from .environment import observe, reset, step
from .evolve import ParetoArchive
from .policy import policy_actions
from .scenarios import UNIFORM_WEIGHTS, build_configuration, select_policy
from .store import CODE_VERSION, archive_from_dict, read_archive

SCHEMA_VERSION = 1


class SessionError(ValueError):
    pass


@dataclass
class _PendingCommand:
    name: str
    payload: dict


class SessionCore:
    """Deterministic session state machine, independent of HTTP."""

    def __init__(self, cfg: NetworkConfig, archive: ParetoArchive, seed: int):
        self.cfg = cfg
        self.archive = archive
        self.seed = int(seed)
        self.rng = np.random.default_rng(np.random.SeedSequence([self.seed]))
        self.state = reset(cfg, self.rng)
        self.active_policy = select_policy(archive, UNIFORM_WEIGHTS)
        self.period = 0  # monotone count of simulated periods
        self.mode = "paused"
        self.speed = 0.0
        self.events: list = []
        self.pending: list = []
        self.disruptions: list = []
        self.cumulative = {"profit": 0.0, "emissions": 0.0, "lead_time_total": 0.0}

    # -- commands ---------------------------------------------------------

    def enqueue(self, name: str, payload: dict) -> dict:
        """Validate and queue a command; boundary commands take effect at
        period + 1, control commands (step/run/pause) act immediately."""
        if name == "switch_policy":
            pid = payload.get("policy_id")
            try:
                self.archive.get(int(pid))
            except (KeyError, TypeError, ValueError):
                raise SessionError(f"policy {pid!r} not in archive")
            self.pending.append(_PendingCommand(name, {"policy_id": int(pid)}))
        elif name == "inject":
            d = payload.get("disruption", {})
            try:
                # start is assigned at the boundary where the command lands
                Disruption(**{**d, "start": 0})
            except (ConfigError, TypeError) as exc:
                raise SessionError(f"malformed disruption: {exc}")
            self.pending.append(_PendingCommand(name, {"disruption": dict(d)}))
        elif name == "reset":
            self.pending.append(_PendingCommand(name, {}))
        elif name == "step":
            n = int(payload.get("n", 1))
            if n < 1:
                raise SessionError("step count must be >= 1")
        elif name == "run":
            speed = float(payload.get("speed", 10.0))
            if speed <= 0:
                raise SessionError("run speed must be > 0")
            self.mode = "running"
            self.speed = speed
        elif name == "pause":
            self.mode = "paused"
        else:
            raise SessionError(f"unknown command {name!r}")

        effective = self.period + 1
        self.events.append(
            {
                "type": "command",
                "schema_version": SCHEMA_VERSION,
                "name": name,
                "payload": payload,
                "issued_at_period": self.period,
                "effective_period": effective,
            }
        )
        ack = {"accepted": True, "command": name, "effective_period": effective}
        if name == "step":
            ack["advanced"] = self.advance(int(payload.get("n", 1)))
        return ack

    # -- simulation -------------------------------------------------------

    def _apply_pending(self) -> None:
        for cmd in self.pending:
            if cmd.name == "switch_policy":
                self.active_policy = cmd.payload["policy_id"]
            elif cmd.name == "inject":
                d = dict(cmd.payload["disruption"])
                d["start"] = self.state.t  # next simulated period
                self.disruptions.append(Disruption(**d))
            elif cmd.name == "reset":
                self.state = reset(self.cfg, self.rng)
                self.disruptions = []
                self.cumulative = {"profit": 0.0, "emissions": 0.0, "lead_time_total": 0.0}
        self.pending = []

    def advance(self, n_periods: int) -> int:
        """Simulate up to n_periods; stops early at the episode horizon.
        Returns how many periods actually ran."""
        ran = 0
        for _ in range(n_periods):
            self._apply_pending()
            if self.state.t > self.cfg.horizon:
                self.mode = "paused"
                break
            genome = self.archive.get(self.active_policy).genome
            actions = policy_actions(genome, observe(self.state, self.cfg), self.cfg, self.rng)
            self.state, reward, record = step(
                self.state, actions, self.cfg, self.rng, tuple(self.disruptions)
            )
            self.period += 1
            ran += 1
            self.cumulative["profit"] += reward.profit
            self.cumulative["emissions"] += -reward.neg_emissions
            self.cumulative["lead_time_total"] += -reward.neg_lead_time
            self.events.append(
                {
                    "type": "period",
                    "schema_version": SCHEMA_VERSION,
                    "period": self.period,
                    "env_t": self.state.t,
                    "active_policy": self.active_policy,
                    "disruption_active": any(d.active_at(record.t) for d in self.disruptions),
                    "reward": {
                        "profit": reward.profit,
                        "neg_emissions": reward.neg_emissions,
                        "neg_lead_time": reward.neg_lead_time,
                    },
                    "cumulative": dict(self.cumulative),
                    "state": {
                        "on_hand_total": int(self.state.on_hand.sum()),
                        "backlog_total": int(self.state.backlog.sum()),
                        "pipeline_total": int(
                            self.state.pipeline_inventory(self.cfg).sum()
                        ),
                    },
                }
            )
        return ran

    def summary(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "period": self.period,
            "env_t": self.state.t,
            "active_policy": self.active_policy,
            "mode": self.mode,
            "speed": self.speed,
            "cumulative": dict(self.cumulative),
            "n_events": len(self.events),
        }


def replay_session(cfg: NetworkConfig, archive: ParetoArchive, seed: int,
                   events: list) -> SessionCore:
    """Rebuild a session from its event log: re-issue every command at its
    recorded boundary and advance through the same number of periods."""
    core = SessionCore(cfg, archive, seed)
    commands = [e for e in events if e["type"] == "command" and e["name"] not in ("step", "run", "pause")]
    n_periods = sum(1 for e in events if e["type"] == "period")
    by_boundary: dict = {}
    for e in commands:
        by_boundary.setdefault(e["effective_period"], []).append(e)
    while core.period < n_periods:
        for e in by_boundary.get(core.period + 1, ()):
            core.pending.append(_PendingCommand(e["name"], e["payload"]))
        if core.advance(1) == 0:
            break
    return core


# -- HTTP layer ----------------------------------------------------------


@dataclass
class _Runtime:
    core: SessionCore
    cond: asyncio.Condition = field(default_factory=asyncio.Condition)
    runner: asyncio.Task | None = None


def create_app() -> FastAPI:
    app = FastAPI(title="morse control service", version=CODE_VERSION)
    sessions: dict = {}

    def _get(sid: str) -> _Runtime:
        if sid not in sessions:
            raise HTTPException(status_code=404, detail=f"no session {sid}")
        return sessions[sid]

    async def _notify(rt: _Runtime) -> None:
        async with rt.cond:
            rt.cond.notify_all()

    async def _run_loop(rt: _Runtime) -> None:
        core = rt.core
        while core.mode == "running":
            if core.advance(1) == 0:
                break
            await _notify(rt)
            await asyncio.sleep(1.0 / core.speed)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": CODE_VERSION, "schema_version": SCHEMA_VERSION}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict) -> dict:
        archive_ref = body.get("archive")
        if archive_ref is None:
            raise HTTPException(status_code=400, detail="archive reference required")
        try:
            if isinstance(archive_ref, dict) and "path" in archive_ref:
                archive, cfg = read_archive(archive_ref["path"])
            else:
                archive, cfg = archive_from_dict(archive_ref)
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=f"archive not found: {exc}")
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=f"bad archive: {exc}")

        config_ref = body.get("config")
        try:
            if config_ref is not None:
                if isinstance(config_ref, dict) and "id" in config_ref:
                    cfg = build_configuration(config_ref["id"])
                else:
                    cfg = NetworkConfig.from_dict(config_ref)
        except (ConfigError, ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=f"bad config: {exc}")

        sid = uuid.uuid4().hex[:12]
        sessions[sid] = _Runtime(core=SessionCore(cfg, archive, int(body.get("seed", 0))))
        return {"session_id": sid, **sessions[sid].core.summary()}

    @app.get("/sessions")
    def list_sessions() -> dict:
        return {"sessions": [{"session_id": sid, **rt.core.summary()} for sid, rt in sessions.items()]}

    @app.get("/sessions/{sid}")
    def session_info(sid: str) -> dict:
        return {"session_id": sid, **_get(sid).core.summary()}

    @app.delete("/sessions/{sid}")
    def close_session(sid: str) -> dict:
        rt = _get(sid)
        if rt.runner is not None:
            rt.core.mode = "paused"
            rt.runner.cancel()
        del sessions[sid]
        return {"closed": sid}

    @app.get("/sessions/{sid}/policies")
    def session_policies(sid: str) -> dict:
        core = _get(sid).core
        return {
            "schema_version": SCHEMA_VERSION,
            "fitness_mode": core.archive.params.fitness_mode,
            "risk_alpha": core.archive.params.risk_alpha
            if core.archive.params.fitness_mode == "cvar" else None,
            "objectives": ["profit", "neg_emissions", "neg_lead_time"],
            "policies": [
                {"id": e.policy_id, "fitness": [float(x) for x in e.fitness], "risk": e.risk}
                for e in core.archive.entries
            ],
        }

    @app.post("/sessions/{sid}/commands")
    async def command(sid: str, body: dict) -> dict:
        rt = _get(sid)
        name = body.get("type")
        if not isinstance(name, str):
            raise HTTPException(status_code=400, detail="command needs a 'type' field")
        payload = {k: v for k, v in body.items() if k != "type"}
        try:
            ack = rt.core.enqueue(name, payload)
        except SessionError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if name == "run" and (rt.runner is None or rt.runner.done()):
            rt.runner = asyncio.create_task(_run_loop(rt))
        await _notify(rt)
        return ack

    @app.get("/sessions/{sid}/events")
    def events(sid: str, since: int = 0) -> dict:
        log = _get(sid).core.events
        return {"schema_version": SCHEMA_VERSION, "events": log[since:], "next": len(log)}

    @app.get("/sessions/{sid}/stream")
    async def stream(sid: str, since: int = 0, follow: bool = True) -> StreamingResponse:
        rt = _get(sid)

        async def gen():
            core = rt.core
            cursor = min(since, len(core.events))
            snapshot = {
                "type": "snapshot",
                "schema_version": SCHEMA_VERSION,
                "session": core.summary(),
                "events": core.events[cursor:],
            }
            yield f"data: {json.dumps(snapshot)}\n\n"
            cursor = len(core.events)
            if not follow:
                return
            while True:
                async with rt.cond:
                    if cursor >= len(core.events):
                        await rt.cond.wait()
                while cursor < len(core.events):
                    yield f"data: {json.dumps(core.events[cursor])}\n\n"
                    cursor += 1

        return StreamingResponse(gen(), media_type="text/event-stream")

    return app
