"""Append-only log of what entities noticed while processing messages."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Detector(enum.Enum):
    RP = "RP"
    HSK_DISPLAY = "HSK_DISPLAY"
    USER_NOTIFICATION = "USER_NOTIFICATION"
    NONE = "NONE"


@dataclass(frozen=True)
class Event:
    entity: str
    kind: str  # DETECTION, REJECT or NOTE
    code: str
    detail: str = ""
    detector: Detector | None = None

    def as_dict(self) -> dict:
        d = {"entity": self.entity, "kind": self.kind, "code": self.code, "detail": self.detail}
        if self.detector is not None:
            d["detector"] = self.detector.value
        return d


def _code(code: object) -> str:
    return code.value if isinstance(code, enum.Enum) else str(code)


@dataclass
class EventLog:
    entries: list[Event] = field(default_factory=list)

    def mark(self) -> int:
        return len(self.entries)

    def since(self, mark: int) -> list[Event]:
        return self.entries[mark:]

    def detect(self, detector: Detector, entity: object, code: str, detail: str = "") -> None:
        self.entries.append(Event(str(entity), "DETECTION", _code(code), detail, detector))

    def reject(self, entity: object, code: str, detail: str = "") -> None:
        self.entries.append(Event(str(entity), "REJECT", _code(code), detail))

    def note(self, entity: object, code: str, detail: str = "") -> None:
        self.entries.append(Event(str(entity), "NOTE", _code(code), detail))

    def detections(self) -> list[Event]:
        return [e for e in self.entries if e.kind == "DETECTION"]

    def codes(self, kind: str | None = None) -> list[str]:
        return [e.code for e in self.entries if kind is None or e.kind == kind]
