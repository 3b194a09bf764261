"""Anneal schedules: pause-point energy scales and the four-point ramp.

Schedules are CSV tables with header ``s,A_GHz,B_GHz``; the pause-point
scales A(s_p), B(s_p) come from linear interpolation. Only the ratio
A/B matters for the dimensionless physics here, so the package ships a
synthetic default table (documented shapes, not device data) whose ratio
at s=0.4 is pinned to 0.260; 0.259 is the corresponding reference value
quoted for the second hardware generation and can be checked against any
user-supplied table the same way.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "ScheduleSpec",
    "ScheduleTable",
    "load_schedule",
    "default_schedule_path",
    "RAMP_LEAD_US",
]

RAMP_LEAD_US = 5.0  # ramp-in/ramp-out duration of the four-point schedule


@dataclass(frozen=True)
class ScheduleTable:
    s: np.ndarray
    a_ghz: np.ndarray
    b_ghz: np.ndarray

    def interpolate(self, s_p: float) -> tuple[float, float]:
        if not self.s[0] <= s_p <= self.s[-1]:
            raise ValueError(f"s_p={s_p} outside table range [{self.s[0]}, {self.s[-1]}]")
        return (
            float(np.interp(s_p, self.s, self.a_ghz)),
            float(np.interp(s_p, self.s, self.b_ghz)),
        )


def load_schedule(path: str | Path) -> ScheduleTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header] != ["s", "A_GHz", "B_GHz"]:
            raise ValueError(f"schedule header must be 's,A_GHz,B_GHz', got {header}")
        rows = [(float(a), float(b), float(c)) for a, b, c in reader]
    s = np.asarray([r[0] for r in rows])
    if np.any(np.diff(s) <= 0):
        raise ValueError("schedule s column must be strictly increasing")
    return ScheduleTable(
        s=s,
        a_ghz=np.asarray([r[1] for r in rows]),
        b_ghz=np.asarray([r[2] for r in rows]),
    )


def default_schedule_path() -> Path:
    return Path(resources.files("annealdiag").joinpath("data/schedule_default.csv"))


@dataclass(frozen=True)
class ScheduleSpec:
    """Pause parameters for a reverse anneal.

    ``a_ghz``/``b_ghz`` are the transverse and problem energy scales at
    the pause fraction ``s_p``; dynamics depend on their ratio. The ramp
    is the four-point profile (0, 1) -> (5, s_p) -> (5+t_p, s_p) ->
    (10+t_p, 1) in microseconds.
    """

    s_p: float
    t_p_us: float
    a_ghz: float
    b_ghz: float

    def __post_init__(self):
        if not 0.0 < self.s_p < 1.0:
            raise ValueError("s_p must lie in (0, 1)")
        if self.t_p_us <= 0:
            raise ValueError("pause time must be positive")
        if self.a_ghz < 0:
            raise ValueError("A must be >= 0")
        if self.b_ghz <= 0:
            raise ValueError("B must be > 0")

    @property
    def ratio(self) -> float:
        return self.a_ghz / self.b_ghz

    @property
    def points(self) -> list[tuple[float, float]]:
        return [
            (0.0, 1.0),
            (RAMP_LEAD_US, self.s_p),
            (RAMP_LEAD_US + self.t_p_us, self.s_p),
            (2 * RAMP_LEAD_US + self.t_p_us, 1.0),
        ]

    @classmethod
    def from_table(cls, table: ScheduleTable, s_p: float, t_p_us: float) -> "ScheduleSpec":
        a, b = table.interpolate(s_p)
        return cls(s_p=s_p, t_p_us=t_p_us, a_ghz=a, b_ghz=b)

    @classmethod
    def from_file(cls, path: str | Path, s_p: float, t_p_us: float) -> "ScheduleSpec":
        return cls.from_table(load_schedule(path), s_p, t_p_us)

    @classmethod
    def default(cls, s_p: float = 0.4, t_p_us: float = 100.0) -> "ScheduleSpec":
        return cls.from_file(default_schedule_path(), s_p, t_p_us)
