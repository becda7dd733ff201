"""The attack × protocol × clone-mode × user outcome table and its golden copy."""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..adversary.attacks import AttackId
from ..fido2.policy import CloneMode
from .scenario import Cell, ScenarioConfig, ScenarioReport, run_scenario
from .world import ProtocolKind

USERS = ("NEGLIGENT", "VIGILANT")
GOLDEN_NAME = "golden_matrix.json"


def cell_key(attack: AttackId, protocol: ProtocolKind, clone_mode: CloneMode, user: str) -> str:
    return f"{attack.value}|{protocol.value}|{clone_mode.value}|{user}"


def grid(
    seed: int = 1,
    rp_preset: str = "github",
    attacks: Iterable[AttackId] = AttackId,
    protocols: Iterable[ProtocolKind] = ProtocolKind,
    clone_modes: Iterable[CloneMode] = CloneMode,
    users: Iterable[str] = USERS,
) -> list[ScenarioConfig]:
    return [
        ScenarioConfig(seed, p, c, rp_preset, a, u)
        for a in attacks
        for p in protocols
        for c in clone_modes
        for u in users
    ]


@dataclass
class DetectionMatrix:
    cells: dict[str, Cell]
    detectors: dict[str, list[str]]
    reports: list[ScenarioReport]

    def as_dict(self) -> dict:
        return {
            "cells": {k: v.value for k, v in sorted(self.cells.items())},
            "detected_by": dict(sorted(self.detectors.items())),
        }

    def mismatches(self, golden: dict) -> list[str]:
        want = golden["cells"]
        got = self.as_dict()["cells"]
        out = [f"{k}: golden {want.get(k)} got {got.get(k)}" for k in sorted(set(want) | set(got)) if want.get(k) != got.get(k)]
        want_d = golden.get("detected_by", {})
        for k, v in self.as_dict()["detected_by"].items():
            if k in want_d and want_d[k] != v:
                out.append(f"{k}: golden detectors {want_d[k]} got {v}")
        return out

    def trace_lines(self) -> list[str]:
        lines = []
        for r in self.reports:
            c = r.config
            key = cell_key(c.attack, c.protocol, c.clone_mode, c.user)
            lines.append(json.dumps({"scenario": key, "seed": c.seed}, sort_keys=True))
            lines.extend(r.trace)
        return lines

    def table(self) -> str:
        rows = [("attack", "protocol", "clone_mode", "user", "cell", "detected_by")]
        for k, cell in sorted(self.cells.items()):
            rows.append((*k.split("|"), cell.value, ",".join(self.detectors[k])))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows)


def detection_matrix(configs: Iterable[ScenarioConfig] | None = None, *, seed: int = 1) -> DetectionMatrix:
    configs = list(configs) if configs is not None else grid(seed)
    cells, detectors, reports = {}, {}, []
    for config in configs:
        report = run_scenario(config)
        key = cell_key(config.attack, config.protocol, config.clone_mode, config.user)
        cells[key] = report.cell
        detectors[key] = sorted(d.value for d in report.outcome.detected_by)
        reports.append(report)
    return DetectionMatrix(cells, detectors, reports)


def load_golden(path: str | Path | None = None) -> dict:
    if path is not None:
        return json.loads(Path(path).read_text())
    return json.loads(resources.files(__package__).joinpath(GOLDEN_NAME).read_text())


def write_golden(matrix: DetectionMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(matrix.as_dict(), indent=2, sort_keys=True) + "\n")
