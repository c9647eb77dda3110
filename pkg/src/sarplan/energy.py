"""Robot power profiles and per-epoch energy accounting.

Energies are integer millijoules throughout. Every component of an epoch is
rounded to the nearest millijoule once, so a battery trajectory is an exact
integer running sum and never drifts.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields
from decimal import Decimal
from pathlib import Path
from typing import Any, Mapping

from .grid import GridMap, base_distance


class Move(enum.Enum):
    STAY = "stay"
    ORTHOGONAL = "orthogonal"
    DIAGONAL = "diagonal"


def classify_move(src: tuple[int, int], dst: tuple[int, int]) -> Move:
    da, db = abs(dst[0] - src[0]), abs(dst[1] - src[1])
    if da > 1 or db > 1:
        raise ValueError(f"{tuple(src)} -> {tuple(dst)} is not a one-epoch move")
    if da == db == 0:
        return Move.STAY
    if da and db:
        return Move.DIAGONAL
    return Move.ORTHOGONAL


@dataclass(frozen=True)
class EnergyProfile:
    """Power draw constants of one robot type (watts, battery in joules)."""

    name: str
    battery_capacity: float
    rx_power: float
    tx_power_base: float
    sensing_power: float
    idle_power: float
    # (speed m/s, watts) pairs sorted by speed
    motion_power: tuple[tuple[float, float], ...]
    tx_distance_coeff: float = 0.0
    tx_distance_exponent: float = 1.0
    diagonal_factor: float = math.sqrt(2.0)

    def __post_init__(self) -> None:
        motion = tuple(sorted((float(s), float(p)) for s, p in dict(self.motion_power).items()))
        object.__setattr__(self, "motion_power", motion)
        if not motion:
            raise ValueError("motion_power needs at least one speed entry")
        if not self.battery_capacity > 0:
            raise ValueError("battery_capacity must be positive")
        powers = [self.rx_power, self.tx_power_base, self.sensing_power, self.idle_power, self.tx_distance_coeff]
        powers += [p for _, p in motion]
        if any(p < 0 for p in powers):
            raise ValueError(f"profile {self.name!r} has a negative power value")
        if any(s <= 0 for s, _ in motion):
            raise ValueError("motion speeds must be positive")
        if self.diagonal_factor < 1:
            raise ValueError("diagonal_factor must be >= 1")

    def motion_at(self, speed: float) -> float:
        """Motion power at ``speed``.

        Piecewise-linear through the measured points. With a single point the
        draw is scaled proportionally to speed.
        """
        pts = self.motion_power
        for s, p in pts:
            if math.isclose(s, speed):
                return p
        if len(pts) == 1:
            s, p = pts[0]
            return p * speed / s
        if speed <= pts[0][0]:
            (s0, p0), (s1, p1) = pts[0], pts[1]
        elif speed >= pts[-1][0]:
            (s0, p0), (s1, p1) = pts[-2], pts[-1]
        else:
            i = next(i for i, (s, _) in enumerate(pts) if s > speed)
            (s0, p0), (s1, p1) = pts[i - 1], pts[i]
        return max(0.0, p0 + (p1 - p0) * (speed - s0) / (s1 - s0))

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["motion_power"] = {str(s): p for s, p in self.motion_power}
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EnergyProfile":
        data = dict(data)
        motion = data.pop("motion_power")
        if isinstance(motion, Mapping):
            motion = tuple((float(s), float(p)) for s, p in motion.items())
        return cls(motion_power=motion, **data)


@dataclass(frozen=True)
class EpochCost:
    """Energy drawn during one epoch, in millijoules."""

    rx: int = 0
    tx: int = 0
    sensing: int = 0
    motion: int = 0
    idle: int = 0
    total: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "total", self.rx + self.tx + self.sensing + self.motion + self.idle)

    def joules(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) / 1000 for f in fields(self)}


def to_mj(watts: float, seconds: float) -> int:
    return round(watts * seconds * 1000)


# Unitree GO1 per-element breakdown, watts
QUADRUPED_COMPONENTS: tuple[tuple[str, str], ...] = (
    ("4G Peripheral", "15.77"),
    ("Cameras and Nano Proc.", "19.25"),
    ("Human Recognition", "29.38"),
    ("3D LiDAR and SLAM", "56.84"),
    ("Idle Down", "21.62"),
    ("Flex Down", "75.79"),
    ("Flex Up", "93.14"),
    ("Idle Up", "80.33"),
    ("Walking Circles 0.76 rad/s", "73.86"),
    ("Walking 0.5 m/s", "53.26"),
    ("Walking 1 m/s", "108.86"),
    ("Walking 2 m/s", "211.22"),
)

# (row label, quadruped W, wheeled W)
PROFILE_COMPARISON: tuple[tuple[str, str, str], ...] = (
    ("Cellular Reception", "15.77", "4"),
    ("Cellular Transmission", "16.72", "4.95"),
    ("Camera, LiDAR, Processor", "76.09", "12"),
    ("Idle Up or Idle", "80.33", "0.29"),
    ("Motion 1 m/s", "108.86", "7.40"),
)

_BUILTIN = {
    "wheeled": EnergyProfile(
        name="wheeled",
        battery_capacity=72_000.0,
        rx_power=4.0,
        tx_power_base=4.95,
        sensing_power=12.0,
        idle_power=0.29,
        motion_power=((1.0, 7.40),),
    ),
    "quadruped": EnergyProfile(
        name="quadruped",
        battery_capacity=350_000.0,
        rx_power=15.77,
        tx_power_base=16.72,
        sensing_power=76.09,
        idle_power=80.33,
        motion_power=((0.5, 53.26), (1.0, 108.86), (2.0, 211.22)),
    ),
}


def builtin_profile(kind: str) -> EnergyProfile:
    try:
        return _BUILTIN[kind]
    except KeyError:
        raise ValueError(f"unknown robot kind {kind!r}; expected one of {sorted(_BUILTIN)}") from None


def builtin_names() -> list[str]:
    return sorted(_BUILTIN)


def quadruped_component_table() -> list[tuple[str, float]]:
    return [(name, float(w)) for name, w in QUADRUPED_COMPONENTS]


def component_power(element: str) -> float:
    for name, w in QUADRUPED_COMPONENTS:
        if name.lower() == element.lower():
            return float(w)
    raise KeyError(element)


def comparison_rows(kind: str) -> list[tuple[str, Decimal]]:
    col = {"quadruped": 1, "wheeled": 2}[kind]
    return [(row[0], Decimal(row[col])) for row in PROFILE_COMPARISON]


def comparison_total(kind: str) -> Decimal:
    return sum((w for _, w in comparison_rows(kind)), Decimal(0))


def load_profile(path: str | Path) -> EnergyProfile:
    with open(path) as fh:
        return EnergyProfile.from_dict(json.load(fh))


def tx_power(profile: EnergyProfile, distance: float) -> float:
    if distance < 0:
        raise ValueError("distance must be >= 0")
    if profile.tx_distance_coeff == 0:
        return profile.tx_power_base
    return profile.tx_power_base + profile.tx_distance_coeff * distance**profile.tx_distance_exponent


def epoch_energy(
    profile: EnergyProfile,
    move: Move | str,
    exploring_new_cell: bool,
    cell: tuple[int, int],
    grid: GridMap,
    epoch_duration: float,
    speed: float = 1.0,
) -> EpochCost:
    """Energy drawn by one robot over one epoch.

    ``cell`` is the cell the robot occupies at the end of the epoch. Reception
    is always on. Sensing and transmission are only charged when that cell had
    not been explored before the epoch started.
    """
    if not epoch_duration > 0:
        raise ValueError("epoch_duration must be positive")
    move = Move(move)
    dt = epoch_duration
    rx = to_mj(profile.rx_power, dt)
    if move is Move.STAY:
        motion, idle = 0, to_mj(profile.idle_power, dt)
    else:
        factor = profile.diagonal_factor if move is Move.DIAGONAL else 1.0
        motion, idle = to_mj(profile.motion_at(speed) * grid.terrain_factor * factor, dt), 0
    sensing = tx = 0
    if exploring_new_cell:
        sensing = to_mj(profile.sensing_power, dt)
        tx = to_mj(tx_power(profile, base_distance(grid, cell)), dt)
    return EpochCost(rx=rx, tx=tx, sensing=sensing, motion=motion, idle=idle)


_CONVENTIONS = ("additional", "inside", "standing_transitions")


def posture_breakeven(
    table: Mapping[str, float] | None = None,
    transition_time: float = 1.0,
    convention: str = "additional",
) -> float:
    """Idle duration (s) above which lying down beats standing idle.

    Conventions for the two posture transitions of ``transition_time`` each:

    ``additional``
        lying costs flex-down + idle-down for the whole window + flex-up;
        standing costs idle-up for the window.
    ``inside``
        the transitions eat into the window, so idle-down only runs for
        ``window - 2 * transition_time``.
    ``standing_transitions``
        transitions happen outside the window and the standing robot is
        charged idle-up over them as well.

    Returns ``math.inf`` when lying down never saves energy.
    """
    if not transition_time > 0:
        raise ValueError("transition_time must be positive")
    if table is None:
        table = dict(quadruped_component_table())
    idle_up, idle_down = table["Idle Up"], table["Idle Down"]
    flex = (table["Flex Down"] + table["Flex Up"]) * transition_time
    saving_rate = idle_up - idle_down
    if saving_rate <= 0:
        return math.inf
    if convention == "additional":
        overhead = flex
    elif convention == "inside":
        overhead = flex - 2 * transition_time * idle_down
    elif convention == "standing_transitions":
        overhead = flex - 2 * transition_time * idle_up
    else:
        raise ValueError(f"convention must be one of {_CONVENTIONS}")
    return max(0.0, overhead / saving_rate)


# Reference break-even reported for the GO1 measurements
REPORTED_BREAKEVEN_S = 2.87
