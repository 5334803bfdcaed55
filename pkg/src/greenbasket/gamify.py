"""Gamification engine: points, levels, missions, badges, leaderboard.

The engine is pure: profiles go in, updated profiles come out. Events are
emitted by the list service (scans, accepted alternatives, shares); replays
of an already-applied event are ignored, so event delivery can be retried.
All tunables (point schedule, level curve, missions, the daily scan cap)
live in one configuration document.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from greenbasket.errors import ConfigError, ValidationError


class EventKind(str, Enum):
    SCAN = "scan"
    ACCEPTED_ALTERNATIVE = "accepted_alternative"
    SHARED_RECOMMENDATION = "shared_recommendation"


#: (kind value, product_id, timestamp) identifies an event for replay detection.
EventKey = tuple[str, str, float]


@dataclass(frozen=True)
class GamificationEvent:
    """One engagement event, emitted only by list-service operations."""

    kind: EventKind
    user: str
    product_id: str
    stars: float
    timestamp: float
    category: str | None = None
    #: median unit star rating of the category at event time; lets mission
    #: predicates ask "strictly better than the category median" without
    #: the engine holding a catalog reference
    category_median_stars: float | None = None

    @property
    def key(self) -> EventKey:
        return (self.kind.value, self.product_id, self.timestamp)


@dataclass(frozen=True)
class MissionObjective:
    """Countable completion predicate over events."""

    kind: EventKind
    required: int
    category: str | None = None
    above_category_median: bool = False

    def __post_init__(self):
        if self.required < 1:
            raise ValidationError(
                f"required count must be >= 1, got {self.required}", field="required"
            )

    def matches(self, event: GamificationEvent) -> bool:
        if event.kind != self.kind:
            return False
        if self.category is not None and event.category != self.category:
            return False
        if self.above_category_median:
            if event.category_median_stars is None:
                return False
            if not event.stars > event.category_median_stars:
                return False
        return True


@dataclass(frozen=True)
class Mission:
    mission_id: str
    title: str
    objective: MissionObjective
    reward_badge: str
    reward_points: int


@dataclass(frozen=True)
class GamifyConfig:
    """Point schedule, level curve, daily cap and mission definitions."""

    points: Mapping[EventKind, int]
    level_base: int
    daily_scan_point_cap: int
    missions: tuple[Mission, ...]

    def __post_init__(self):
        missing = [k.value for k in EventKind if k not in self.points]
        if missing:
            raise ValidationError(
                f"point schedule is missing kinds: {', '.join(missing)}", field="points"
            )
        if self.level_base < 1:
            raise ValidationError("level base must be >= 1", field="level_base")
        if self.daily_scan_point_cap < 1:
            raise ValidationError("daily scan cap must be >= 1", field="daily_scan_point_cap")
        badges = [m.reward_badge for m in self.missions]
        if len(badges) != len(set(badges)):
            raise ValidationError("badge identifiers must be unique across missions",
                                  field="missions")
        ids = [m.mission_id for m in self.missions]
        if len(ids) != len(set(ids)):
            raise ValidationError("mission ids must be unique", field="missions")


@dataclass(frozen=True)
class PlayerProfile:
    """A user's gamification state; update only via apply_event."""

    user: str
    points: int = 0
    level: int = 0
    badges: frozenset[str] = frozenset()
    mission_progress: Mapping[str, int] = field(default_factory=dict)
    #: timestamp at which the current points total was reached (leaderboard
    #: tie-break: earlier achievement ranks higher)
    points_reached_at: float = 0.0
    #: keys of already-applied events, for idempotent replay handling
    seen_events: frozenset[EventKey] = frozenset()


@dataclass(frozen=True)
class LeaderboardEntry:
    rank: int
    user: str
    points: int
    level: int


@dataclass(frozen=True)
class MissionStatus:
    mission_id: str
    title: str
    current: int
    required: int
    completed: bool


def level_for_points(points: int, *, base: int = 100) -> int:
    """Awareness level reached at a points total: floor(sqrt(points / base)).

    Computed in exact integer arithmetic: floor(sqrt(p / b)) equals
    isqrt(p // b) for nonnegative integers.
    """
    if points < 0:
        raise ValidationError(f"points must be >= 0, got {points}", field="points")
    return math.isqrt(points // base)


def _utc_day(timestamp: float) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).date().isoformat()


def _scan_points_earned_today(profile: PlayerProfile, event: GamificationEvent) -> int:
    day = _utc_day(event.timestamp)
    return sum(
        1
        for kind, product_id, ts in profile.seen_events
        if kind == EventKind.SCAN.value
        and product_id == event.product_id
        and _utc_day(ts) == day
    )


def apply_event(
    profile: PlayerProfile,
    event: GamificationEvent,
    config: GamifyConfig,
) -> tuple[PlayerProfile, tuple[str, ...]]:
    """Apply one event; returns the updated profile and newly earned badges.

    Replays (same user, kind, product and timestamp) leave the profile
    untouched. Repeated scans of one product earn points at most
    ``daily_scan_point_cap`` times per UTC calendar day, but still advance
    mission counters, which keeps the final state independent of event
    order.
    """
    if event.user != profile.user:
        raise ValidationError(
            f"event for user {event.user!r} applied to profile of {profile.user!r}",
            field="user",
        )
    if event.key in profile.seen_events:
        return profile, ()

    delta = config.points[event.kind]
    if (
        event.kind is EventKind.SCAN
        and _scan_points_earned_today(profile, event) >= config.daily_scan_point_cap
    ):
        delta = 0

    progress = dict(profile.mission_progress)
    new_badges: list[str] = []
    for mission in config.missions:
        current = progress.get(mission.mission_id, 0)
        if current >= mission.objective.required:
            continue
        if mission.objective.matches(event):
            current += 1
            progress[mission.mission_id] = current
            if current == mission.objective.required and mission.reward_badge not in profile.badges:
                new_badges.append(mission.reward_badge)
                delta += mission.reward_points

    points = profile.points + delta
    updated = replace(
        profile,
        points=points,
        level=level_for_points(points, base=config.level_base),
        badges=profile.badges | frozenset(new_badges),
        mission_progress=progress,
        points_reached_at=event.timestamp if points > profile.points else profile.points_reached_at,
        seen_events=profile.seen_events | {event.key},
    )
    return updated, tuple(new_badges)


def leaderboard(profiles: Iterable[PlayerProfile], limit: int) -> list[LeaderboardEntry]:
    """Dense 1..n ranking: points desc, earlier achievement first, then user."""
    if limit < 1:
        raise ValidationError(f"limit must be >= 1, got {limit!r}", field="limit")
    ordered = sorted(profiles, key=lambda p: (-p.points, p.points_reached_at, p.user))
    return [
        LeaderboardEntry(rank=i + 1, user=p.user, points=p.points, level=p.level)
        for i, p in enumerate(ordered[:limit])
    ]


def mission_progress(
    profile: PlayerProfile, missions: Sequence[Mission]
) -> tuple[list[MissionStatus], list[str]]:
    """Project profile counters onto the mission list.

    Returns the per-mission status plus warnings for any counter in the
    profile that references a mission no longer defined.
    """
    known = {m.mission_id for m in missions}
    warnings = [
        f"unknown mission {mission_id!r} in profile progress"
        for mission_id in profile.mission_progress
        if mission_id not in known
    ]
    statuses = []
    for mission in missions:
        current = min(profile.mission_progress.get(mission.mission_id, 0),
                      mission.objective.required)
        statuses.append(
            MissionStatus(
                mission_id=mission.mission_id,
                title=mission.title,
                current=current,
                required=mission.objective.required,
                completed=current == mission.objective.required,
            )
        )
    return statuses, warnings


# --- profile serialization (for the embedded store) -----------------------------


def profile_to_dict(profile: PlayerProfile) -> dict:
    return {
        "user": profile.user,
        "points": profile.points,
        "level": profile.level,
        "badges": sorted(profile.badges),
        "mission_progress": dict(profile.mission_progress),
        "points_reached_at": profile.points_reached_at,
        "seen_events": sorted(list(k) for k in profile.seen_events),
    }


def profile_from_dict(payload: Mapping) -> PlayerProfile:
    return PlayerProfile(
        user=payload["user"],
        points=payload["points"],
        level=payload["level"],
        badges=frozenset(payload["badges"]),
        mission_progress=dict(payload["mission_progress"]),
        points_reached_at=payload["points_reached_at"],
        seen_events=frozenset((k, p, t) for k, p, t in payload["seen_events"]),
    )


# --- configuration document ------------------------------------------------------


def parse_gamify_config(payload: Mapping, source: str = "<dict>") -> GamifyConfig:
    try:
        points = {EventKind(k): int(v) for k, v in payload["points"].items()}
        missions = []
        for item in payload.get("missions", []):
            objective = item["objective"]
            missions.append(
                Mission(
                    mission_id=item["mission_id"],
                    title=item["title"],
                    objective=MissionObjective(
                        kind=EventKind(objective["kind"]),
                        required=int(objective["required"]),
                        category=objective.get("category"),
                        above_category_median=bool(objective.get("above_category_median", False)),
                    ),
                    reward_badge=item["reward_badge"],
                    reward_points=int(item["reward_points"]),
                )
            )
        return GamifyConfig(
            points=points,
            level_base=int(payload.get("level", {}).get("points_per_level_base", 100)),
            daily_scan_point_cap=int(payload.get("daily_scan_point_cap", 3)),
            missions=tuple(missions),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: bad gamification config: {exc!r}", source=source) from exc
    except ValidationError as exc:
        raise ConfigError(f"{source}: bad gamification config: {exc}", source=source) from exc


def load_gamify_config(path: str | Path) -> GamifyConfig:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read gamification config: {exc}", source=str(path)) from exc
    return parse_gamify_config(payload, source=str(path))
