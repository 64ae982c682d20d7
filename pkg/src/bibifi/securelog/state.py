"""Gallery state: the event fold behind logappend/logread.

A log is a strictly time-ordered sequence of arrive/leave events for
employees and guests, optionally scoped to a numbered room.  All query
answers are folds over that sequence; there is no other state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

NAME_RE = re.compile(r"[A-Za-z0-9]+\Z")

EMPLOYEE = "E"
GUEST = "G"
ARRIVE = "A"
LEAVE = "L"


class InvalidEvent(ValueError):
    """Event is syntactically or semantically inadmissible for this log."""


@dataclass(frozen=True)
class LogEvent:
    timestamp: int
    kind: str  # EMPLOYEE | GUEST
    name: str
    action: str  # ARRIVE | LEAVE
    room: int | None  # None = the gallery itself

    def __post_init__(self) -> None:
        if self.kind not in (EMPLOYEE, GUEST):
            raise InvalidEvent("bad person kind")
        if self.action not in (ARRIVE, LEAVE):
            raise InvalidEvent("bad action")
        if not isinstance(self.timestamp, int) or self.timestamp < 0:
            raise InvalidEvent("bad timestamp")
        if self.room is not None and (not isinstance(self.room, int) or self.room < 0):
            raise InvalidEvent("bad room")
        if not NAME_RE.match(self.name):
            raise InvalidEvent("bad name")

    @property
    def person(self) -> tuple[str, str]:
        return (self.kind, self.name)

    def to_wire(self) -> list:
        return [self.timestamp, self.kind, self.name, self.action, self.room]

    @staticmethod
    def from_wire(item: list) -> "LogEvent":
        if not isinstance(item, list) or len(item) != 5:
            raise InvalidEvent("bad event record")
        ts, kind, name, action, room = item
        return LogEvent(ts, kind, name, action, room)


@dataclass
class GalleryState:
    """Fold of a log: where everyone is, plus per-person visit history."""

    # person -> None (in gallery, no room) or room id
    location: dict[tuple[str, str], int | None] = field(default_factory=dict)
    # person -> rooms entered, in order, with repeats
    room_history: dict[tuple[str, str], list[int]] = field(default_factory=dict)
    # person -> [(arrive_ts, leave_ts|None), ...] gallery presence spans
    presence: dict[tuple[str, str], list[tuple[int, int | None]]] = field(
        default_factory=dict
    )
    # person -> [(room, enter_ts, exit_ts|None), ...]
    room_spans: dict[tuple[str, str], list[tuple[int, int, int | None]]] = field(
        default_factory=dict
    )
    last_timestamp: int = -1

    def admit(self, event: LogEvent) -> None:
        """Apply one event, raising InvalidEvent if it breaks an invariant."""
        if event.timestamp <= self.last_timestamp:
            raise InvalidEvent("timestamps must strictly increase")
        person = event.person
        present = person in self.location
        where = self.location.get(person)
        if event.action == ARRIVE and event.room is None:
            if present:
                raise InvalidEvent("already in the gallery")
            self.location[person] = None
            self.presence.setdefault(person, []).append((event.timestamp, None))
        elif event.action == ARRIVE:
            if not present or where is not None:
                raise InvalidEvent("must be in the gallery and not in a room")
            self.location[person] = event.room
            self.room_history.setdefault(person, []).append(event.room)
            self.room_spans.setdefault(person, []).append(
                (event.room, event.timestamp, None)
            )
        elif event.action == LEAVE and event.room is not None:
            if not present or where != event.room:
                raise InvalidEvent("not in that room")
            self.location[person] = None
            spans = self.room_spans[person]
            room, entered, _ = spans[-1]
            spans[-1] = (room, entered, event.timestamp)
        else:  # leave the gallery
            if not present or where is not None:
                raise InvalidEvent("must be in the gallery and not in a room")
            del self.location[person]
            spans = self.presence[person]
            arrived, _ = spans[-1]
            spans[-1] = (arrived, event.timestamp)
        self.last_timestamp = event.timestamp


def fold(events: list[LogEvent]) -> GalleryState:
    state = GalleryState()
    for event in events:
        state.admit(event)
    return state


def validate_append(events: list[LogEvent], new: LogEvent) -> None:
    """Raise InvalidEvent unless `new` is admissible after `events`."""
    state = fold(events)
    state.admit(new)


def query_state(state: GalleryState) -> str:
    """Current occupancy: employees, guests, then rooms (all sorted)."""
    employees = sorted(n for (k, n) in state.location if k == EMPLOYEE)
    guests = sorted(n for (k, n) in state.location if k == GUEST)
    rooms: dict[int, list[str]] = {}
    for (kind, name), where in state.location.items():
        if where is not None:
            rooms.setdefault(where, []).append(name)
    lines = employees + guests
    for room in sorted(rooms):
        lines.append(f"{room}: {','.join(sorted(rooms[room]))}")
    return "\n".join(lines)


def query_history(state: GalleryState, kind: str, name: str) -> str:
    """Rooms the person entered, in order, comma-separated."""
    visits = state.room_history.get((kind, name), [])
    return ",".join(str(r) for r in visits)


def query_time(state: GalleryState, kind: str, name: str) -> str:
    """Total timestamp units spent in the gallery.

    A person still present is counted up to the log's last timestamp.
    Prints nothing for a person who never appeared.
    """
    spans = state.presence.get((kind, name))
    if spans is None:
        return ""
    total = 0
    for arrived, left in spans:
        total += (left if left is not None else state.last_timestamp) - arrived
    return str(total)


def query_intersection(state: GalleryState, persons: list[tuple[str, str]]) -> str:
    """Rooms occupied by all named persons at the same time, ascending."""
    if not persons:
        return ""
    rooms: set[int] | None = None
    for person in persons:
        mine = {room for room, _, _ in state.room_spans.get(person, [])}
        rooms = mine if rooms is None else rooms & mine
    result = []
    assert rooms is not None
    for room in sorted(rooms):
        if _simultaneous(state, persons, room):
            result.append(room)
    return ",".join(str(r) for r in result)


def _simultaneous(
    state: GalleryState, persons: list[tuple[str, str]], room: int
) -> bool:
    """True if some instant saw every listed person inside `room`."""
    infinity = float("inf")
    span_sets = []
    for person in persons:
        spans = [
            (entered, exited if exited is not None else infinity)
            for r, entered, exited in state.room_spans.get(person, [])
            if r == room
        ]
        if not spans:
            return False
        span_sets.append(spans)

    def overlap(acc: list[tuple[float, float]], nxt: list[tuple[float, float]]):
        out = []
        for a0, a1 in acc:
            for b0, b1 in nxt:
                lo, hi = max(a0, b0), min(a1, b1)
                if lo < hi:
                    out.append((lo, hi))
        return out

    acc = span_sets[0]
    for spans in span_sets[1:]:
        acc = overlap(acc, spans)
        if not acc:
            return False
    return True
