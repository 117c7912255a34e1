"""Pilot/data frame schedules.

A transmission block is a sequence of frames.  Frame ``m`` starts with one
pilot slot at time ``tau_m`` followed by ``q_m`` data slots, so
``tau_1 = 0`` and ``tau_{m+1} = tau_m + q_m + 1``.  All users share the
schedule; pilots of different users are kept orthogonal by the pilot code
length, not the schedule.
"""

from __future__ import annotations

import dataclasses


class EmptySchedule(ValueError):
    """Raised for a schedule with no frames or a frame with no data slots."""


@dataclasses.dataclass(frozen=True)
class FrameSchedule:
    """Frame layout ``q = (q_1, ..., q_M)`` of data slots per frame."""

    q: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.q) == 0:
            raise EmptySchedule("schedule needs at least one frame")
        if any(int(qm) != qm or qm < 1 for qm in self.q):
            raise EmptySchedule("every frame needs >= 1 data slot")
        object.__setattr__(self, "q", tuple(int(qm) for qm in self.q))

    @property
    def num_frames(self) -> int:
        return len(self.q)

    @property
    def duration(self) -> int:
        """Total slots in the block, pilots included."""
        return sum(self.q) + len(self.q)

    @property
    def num_data_slots(self) -> int:
        return sum(self.q)

    def pilot_times(self) -> list[int]:
        times = []
        t = 0
        for qm in self.q:
            times.append(t)
            t += qm + 1
        return times

    def data_slots(self, m: int) -> list[int]:
        """Data slot times of frame ``m`` (0-based)."""
        tau = self.pilot_times()[m]
        return [tau + i for i in range(1, self.q[m] + 1)]

    def all_data_slots(self) -> list[tuple[int, int]]:
        """Pairs ``(frame_index, slot_time)`` over the whole block, in order."""
        return [(m, t) for m in range(self.num_frames) for t in self.data_slots(m)]


def pilot_window(schedule: FrameSchedule, m: int, window: int = 3) -> list[int]:
    """Pilot times the estimator may consume for frame ``m``.

    The window is centred on frame ``m`` and intersected with the block, so
    edge frames simply see fewer pilots (no shifting to pad the count).
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if not 0 <= m < schedule.num_frames:
        raise IndexError("frame index out of range")
    half = (window - 1) // 2
    lo = max(0, m - half)
    hi = min(schedule.num_frames, m + half + 1)
    pilots = schedule.pilot_times()
    return [pilots[i] for i in range(lo, hi)]
