"""Scenario configuration, execution and outcome assessment."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..adversary.attacks import AttackId
from ..adversary.interceptor import AdversaryContext
from ..adversary.user import USER_POLICIES, User
from ..core import SigAlg, U32_MAX
from ..errors import ConfigInvalid
from ..envelope import MsgType
from ..events import Detector
from ..fido2.policy import CloneMode, get_preset
from .scripts import SCRIPTS, Stage
from .world import ProtocolKind, World

VICTIM = "alice"


class Cell(enum.Enum):
    SUCCEEDS = "SUCCEEDS"
    DETECTED = "DETECTED"
    PREVENTED = "PREVENTED"


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 1
    protocol: ProtocolKind = ProtocolKind.FIDO2
    clone_mode: CloneMode = CloneMode.COUNTER
    rp_preset: str = "github"
    attack: AttackId | None = None
    user: str = "NEGLIGENT"
    drop_pattern: tuple[int, ...] | None = None
    steps_budget: int = 10_000
    sync_routing: str = "display"
    knows_password: bool = True
    macs: bool = True
    options: tuple[tuple[str, object], ...] = ()

    def validate(self) -> None:
        if not 0 <= self.seed <= 2**64 - 1:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        if self.user not in USER_POLICIES:
            raise ConfigInvalid(f"unknown user policy {self.user!r}")
        if self.steps_budget <= 0:
            raise ConfigInvalid("steps_budget must be positive")
        if self.sync_routing not in ("display", "origin"):
            raise ConfigInvalid(f"unknown routing {self.sync_routing!r}")
        if self.drop_pattern is not None and any(i < 0 or i > U32_MAX for i in self.drop_pattern):
            raise ConfigInvalid("drop indices must be non-negative")
        get_preset(self.rp_preset)


@dataclass
class AttackOutcome:
    attack: AttackId | None
    protocol: ProtocolKind
    succeeded: bool
    detected_by: frozenset[Detector]
    evidence: list[str] = field(default_factory=list)

    @property
    def cell(self) -> Cell:
        if not self.succeeded:
            return Cell.PREVENTED
        return Cell.SUCCEEDS if self.detected_by == {Detector.NONE} else Cell.DETECTED

    def as_dict(self) -> dict:
        return {
            "attack": self.attack.value if self.attack else None,
            "protocol": self.protocol.value,
            "succeeded": self.succeeded,
            "detected_by": sorted(d.value for d in self.detected_by),
            "evidence": self.evidence,
        }


@dataclass
class ScenarioReport:
    config: ScenarioConfig
    outcome: AttackOutcome
    total_bytes: dict[str, int]
    cell: Cell
    trace: list[str]
    events: list[dict]

    def as_dict(self) -> dict:
        c = self.config
        return {
            "config": {
                "seed": c.seed,
                "protocol": c.protocol.value,
                "clone_mode": c.clone_mode.value,
                "rp_preset": c.rp_preset,
                "attack": c.attack.value if c.attack else None,
                "user": c.user,
                "drop_pattern": list(c.drop_pattern) if c.drop_pattern is not None else None,
            },
            "outcome": self.outcome.as_dict(),
            "cell": self.cell.value,
            "total_bytes": self.total_bytes,
        }


def build_stage(config: ScenarioConfig) -> Stage:
    config.validate()
    world = World(
        config.seed,
        config.protocol,
        config.clone_mode,
        macs=config.macs,
        pin_top_level=config.sync_routing == "origin",
        drop=list(config.drop_pattern) if config.drop_pattern is not None else None,
        steps_budget=config.steps_budget,
    )
    options = dict(config.options)
    overrides = dict(options.get("policy_overrides", {}))
    if config.attack is AttackId.SIG_DOWNGRADE:
        overrides.setdefault("min_alg", SigAlg.WEAK_TOY)
    rp = world.add_rp(get_preset(config.rp_preset), **overrides)
    victim = world.add_host("victim-pc", user=User(VICTIM, USER_POLICIES[config.user]))
    device = world.add_host(
        "attacker-pc", adversary=True, tee=bool(options.get("cuckoo")),
        software_key=bool(options.get("software_key")),
    )
    ctx = AdversaryContext(world, victim, device, VICTIM, knows_password=config.knows_password)
    return Stage(world, rp, victim, device, ctx, VICTIM, options)


def assess(stage: Stage, attack: AttackId | None) -> AttackOutcome:
    """Read the outcome off RP state and the event log, never off attack code."""
    world, ctx = stage.world, stage.ctx
    adversary_clients = {h.client.id for h in world.hosts.values() if h.adversary}
    loot = set(ctx.loot)
    evidence: list[str] = []
    for rp in sorted(world.rps.values(), key=lambda r: r.rp_id):
        for s in rp.session_log:
            if s.username != stage.username:
                continue
            if s.client in adversary_clients or s.challenge in ctx.initiated or s.token in loot:
                evidence.append(f"session {rp.rp_id} {s.via} for {s.client} token {s.token.hex()[:16]}")
    detectors: set[Detector] = set()
    for i, e in enumerate(world.events.entries):
        if e.kind == "DETECTION":
            detectors.add(e.detector)
            evidence.append(f"event {i} {e.detector.value} {e.entity} {e.code}")
    succeeded = any(line.startswith("session") for line in evidence)
    return AttackOutcome(attack, world.protocol, succeeded, frozenset(detectors or {Detector.NONE}), evidence)


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    stage = build_stage(config)
    SCRIPTS[config.attack](stage)
    stage.world.network.close()
    outcome = assess(stage, config.attack)
    net = stage.world.network
    return ScenarioReport(
        config,
        outcome,
        net.bytes_by_entity(MsgType),
        outcome.cell,
        net.trace_lines(),
        [e.as_dict() for e in stage.world.events.entries],
    )
