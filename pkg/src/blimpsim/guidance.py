"""Velocity-setpoint generation: loiter and waypoint path following.

The path follower combines an along-track term with a correction of the
orthogonal deviation from the active segment. The correction term is
implemented in its literal published form, which scales the along-track
projection by the unnormalized segment vector; a normalized-projection
variant is available behind ``projected_correction`` since the intended
form is ambiguous (both are covered by tests).
"""

from dataclasses import dataclass, field

import numpy as np


class DegenerateSegment(ValueError):
    """Active path segment has zero length."""


@dataclass
class LoiterSpec:
    hold_position: np.ndarray
    gain: float = 0.1  # 1/s

    def __post_init__(self):
        self.hold_position = np.asarray(self.hold_position, dtype=float)
        if self.gain <= 0:
            raise ValueError("loiter gain must be positive")


@dataclass
class PathSpec:
    waypoints: np.ndarray            # (n >= 2, 3)
    speed: float                     # m/s along track
    gain: float = 0.1                # 1/s, cross-track correction
    acceptance_radius: float = 5.0   # m
    projected_correction: bool = False

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints, dtype=float)
        if self.waypoints.ndim != 2 or self.waypoints.shape[0] < 2 \
                or self.waypoints.shape[1] != 3:
            raise ValueError("need at least 2 waypoints of 3 coordinates")
        diffs = np.diff(self.waypoints, axis=0)
        if np.any(np.linalg.norm(diffs, axis=1) == 0):
            raise ValueError("consecutive waypoints must be distinct")
        if self.speed <= 0:
            raise ValueError("path speed must be positive")

    def segment(self, index):
        """(start, end) of segment ``index``; the path is a closed circuit."""
        n = len(self.waypoints)
        return self.waypoints[index % n], self.waypoints[(index + 1) % n]

    @property
    def num_segments(self):
        return len(self.waypoints)


def loiter_setpoint(position, spec):
    """Proportional pull toward the hold position (clamping to the
    airspeed band happens downstream in the setpoint corrector)."""
    return spec.gain * (spec.hold_position - np.asarray(position, float))


def path_setpoint(position, spec, segment_index):
    """Along-track velocity plus correction of the deviation from the
    active segment."""
    p0, p1 = spec.segment(segment_index)
    p_a = np.asarray(position, dtype=float) - p0
    p_b = p1 - p0
    length = np.linalg.norm(p_b)
    if length == 0:
        raise DegenerateSegment(f"segment {segment_index} has zero length")
    p_hat = p_b / length
    along = float(np.dot(p_a, p_hat))
    if spec.projected_correction:
        correction = p_hat * along - p_a
    else:
        correction = p_b * along - p_a
    return spec.speed * p_hat + spec.gain * correction


def advance_waypoint(position, spec, segment_index):
    """Next active segment: advances past the segment end when the
    along-track projection reaches the segment length or the end waypoint
    is captured within the acceptance radius; wraps around (closed
    circuit)."""
    p0, p1 = spec.segment(segment_index)
    p_a = np.asarray(position, dtype=float) - p0
    p_b = p1 - p0
    length = np.linalg.norm(p_b)
    if length == 0:
        raise DegenerateSegment(f"segment {segment_index} has zero length")
    along = float(np.dot(p_a, p_b / length))
    if along >= length or \
            np.linalg.norm(np.asarray(position, float) - p1) \
            < spec.acceptance_radius:
        return (segment_index + 1) % spec.num_segments
    return segment_index


@dataclass
class PathFollower:
    """Owns the active segment index across control ticks."""

    spec: PathSpec
    segment_index: int = 0
    captures: list = field(default_factory=list)  # (t, waypoint index)

    def setpoint(self, position, t=None):
        new_index = advance_waypoint(position, self.spec, self.segment_index)
        if new_index != self.segment_index:
            self.captures.append(
                (t, (self.segment_index + 1) % self.spec.num_segments)
            )
            self.segment_index = new_index
        return path_setpoint(position, self.spec, self.segment_index)
