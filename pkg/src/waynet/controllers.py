"""Untrusted feedback controllers (bang-bang, PD), an admissible-acceleration
selector, and the reference speed controller used by the liveness argument.

Steering corrections are negative feedback on the annulus band residual e:
positive e means the declared band center passes left of the waypoint, i.e.
the robot has drifted left of the band, so the correction reduces curvature
(steers right). The monitors judge the declared arc; the steering command
sent to actuation may differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from waynet.core import Params, RelWaypoint
from waynet.dynamics import RelPoint
from waynet.monitor import ann_residual, fallback_accel, go
from waynet.plan import curvature_through

ACCEL_BISECT_TOL = 1e-6


@dataclass(frozen=True)
class PdGains:
    kp: float             # curvature per meter of residual
    kd: float             # curvature per (m/s) of residual rate
    curvature_max: float  # clamp on the commanded curvature

    def __post_init__(self):
        if self.kp < 0.0 or self.kd < 0.0:
            raise ValueError("PD gains must be non-negative")
        if not self.curvature_max > 0.0:
            raise ValueError("curvature_max must be positive")


def cross_track_error(rel: RelPoint, k: float, eps: float) -> float:
    """Signed band residual e = k (x^2 + y^2 - eps^2)/2 - y; the annulus band
    clause is |e| < eps."""
    return ann_residual(rel.x, rel.y, k, eps)


def bang_bang(rel: RelPoint, k_seg: float, eps: float, deadband: float,
              k_max: float) -> float:
    """Hard-left / hard-right steering around the declared segment curvature."""
    if not k_max > 0.0:
        raise ValueError("k_max must be positive")
    e = cross_track_error(rel, k_seg, eps)
    if abs(e) <= deadband:
        return k_seg
    return k_seg - math.copysign(k_max, e)


def pd(rel: RelPoint, prev_e: float, dt: float, k_seg: float, eps: float,
       g: PdGains) -> float:
    """Proportional-derivative steering on the band residual, clamped."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    e = cross_track_error(rel, k_seg, eps)
    cmd = k_seg - (g.kp * e + g.kd * (e - prev_e) / dt)
    return min(g.curvature_max, max(-g.curvature_max, cmd))


def choose_accel(wp: RelWaypoint, v: float, p: Params, target_speed: float) -> float:
    """Largest admissible acceleration not exceeding the one that reaches
    target_speed by cycle end; falls back to maximum braking when no candidate
    is admissible. The returned value passes go or equals fallback_accel."""
    a_hi = min(p.accel_max, (target_speed - v) / p.cycle_max)
    a_lo = -p.brake_max
    if a_hi < a_lo:
        a_hi = a_lo
    if go(wp, v, a_hi, p):
        return a_hi
    if not go(wp, v, a_lo, p):
        return fallback_accel(v, p)
    # go holds at a_lo and fails at a_hi: bisect the boundary.
    lo, hi = a_lo, a_hi
    while hi - lo > ACCEL_BISECT_TOL:
        mid = (lo + hi) / 2.0
        if go(wp, v, mid, p):
            lo = mid
        else:
            hi = mid
    if go(wp, v, lo, p):
        return lo
    return fallback_accel(v, p)


def liveness_accel(v: float, vl: float, vh: float, A: float, B: float) -> float:
    """Reference speed law: speed up below the limits, cruise inside them,
    brake above them."""
    if not 0.0 <= vl < vh:
        raise ValueError(f"need 0 <= vl < vh, got vl={vl!r}, vh={vh!r}")
    if v < vl:
        return A
    if v <= vh:
        return 0.0
    return -B


def declared_curvature(rel: RelPoint, k_seg: float, eps: float) -> float:
    """Curvature declared to the monitor: the one that zeroes the annulus
    residual when admissible, otherwise the segment's own curvature."""
    d2 = rel.x * rel.x + rel.y * rel.y
    if d2 > eps * eps:
        k_star = curvature_through(rel, eps)
        if abs(k_star) * eps <= 1.0:
            return k_star
    return k_seg
