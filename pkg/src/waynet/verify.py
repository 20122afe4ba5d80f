"""Numeric stand-ins for the deductive guarantees: invariant preservation
along exact flows, progress-function monotonicity for the three reference
speed-law cases, and a quadrature oracle for the admissibility distance bound.

All checks use the exact closed-form flow, never the RK4 integrator, so a
reported violation indicates a formula bug rather than integration error.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from waynet.core import Params, RelWaypoint, euclid_norm, inf_norm
from waynet.dynamics import RelPoint, closed_form_relative
from waynet.monitor import feas, go, invariant_j
from waynet.plan import curvature_through

# Sampling envelope: tolerances, delays, accelerations, curvatures, and speeds
# covering the benchmark courses including the high-speed one.
EPS_RANGE = (0.1, 2.0)
T_RANGE = (0.05, 1.0)
ACC_RANGE = (0.5, 4.0)
SPEED_MAX = 40.0
DIST_MAX = 60.0

DEFAULT_SLACK = 1e-9


@dataclass(frozen=True)
class StateSample:
    wp: RelWaypoint
    v: float
    a: float
    p: Params
    seed: int


@dataclass(frozen=True)
class Violation:
    sample: StateSample
    t: float
    detail: str


@dataclass(frozen=True)
class CheckReport:
    name: str
    checked: int
    violations: tuple[Violation, ...]
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        status = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        note = f" ({self.note})" if self.note else ""
        return f"{self.name}: {self.checked} samples, {status}{note}"


def _sample_params(rng: random.Random) -> Params:
    return Params(accel_max=rng.uniform(*ACC_RANGE),
                  brake_max=rng.uniform(*ACC_RANGE),
                  cycle_max=rng.uniform(*T_RANGE),
                  tol=rng.uniform(*EPS_RANGE))


def _sample_waypoint_geometry(rng: random.Random, eps: float):
    """Waypoint ahead of the robot with the residual-zeroing curvature."""
    dist = rng.uniform(1.2 * eps, DIST_MAX)
    ang = rng.uniform(-math.pi / 3.0, math.pi / 3.0)
    x = dist * math.cos(ang)
    y = dist * math.sin(ang)
    k = curvature_through(RelPoint(x, y), eps)
    if abs(k) * eps > 1.0:
        return None
    return x, y, k


def sample_compliant_state(rng: random.Random, seed: int = 0,
                           require_go: bool = True) -> StateSample:
    """Rejection-sample a state satisfying J and Feas (and Go for the sampled
    acceleration, when require_go); the advertised predicate is re-checked on
    emission."""
    while True:
        p = _sample_params(rng)
        geom = _sample_waypoint_geometry(rng, p.tol)
        if geom is None:
            continue
        x, y, k = geom
        width = max(p.accel_max, p.brake_max) * p.cycle_max * rng.uniform(1.0, 3.0)
        vl = rng.uniform(0.0, SPEED_MAX - width)
        vh = vl + width
        wp = RelWaypoint(x, y, k, vl, vh)
        v = rng.uniform(0.0, SPEED_MAX)
        if not (feas(wp, p) and invariant_j(wp, v, p)):
            continue
        a = 0.0
        if require_go:
            for _ in range(32):
                a = rng.uniform(-p.brake_max, p.accel_max)
                if v + a * p.cycle_max >= 0.0 and go(wp, v, a, p):
                    break
            else:
                continue
        sample = StateSample(wp, v, a, p, seed)
        assert feas(sample.wp, sample.p) and invariant_j(sample.wp, sample.v, sample.p)
        assert not require_go or go(sample.wp, sample.v, sample.a, sample.p)
        return sample


def _flow(sample: StateSample, t: float):
    pt, v = closed_form_relative(RelPoint(sample.wp.x, sample.wp.y),
                                 sample.v, sample.a, sample.wp.k, t)
    return pt, v


def check_invariant_preservation(n: int = 10_000, seed: int = 0,
                                 time_points: int = 100,
                                 slack: float = DEFAULT_SLACK) -> CheckReport:
    """For n states satisfying J, Feas, and Go, the invariant J must hold at
    every sampled time in [0, T] along the exact flow (comparisons relaxed by
    ``slack`` to absorb trigonometric roundoff)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    violations = []
    for i in range(n):
        sample = sample_compliant_state(rng, seed=i)
        T = sample.p.cycle_max
        for j in range(time_points):
            t = T * j / (time_points - 1)
            pt, v = _flow(sample, t)
            wp_t = RelWaypoint(pt.x, pt.y, sample.wp.k, sample.wp.vl, sample.wp.vh)
            verdict = invariant_j(wp_t, v, sample.p, slack=slack)
            if not verdict.passed:
                violations.append(Violation(sample, t, f"J fails: {verdict.failed_clause.value}"))
                break
    return CheckReport("invariant_preservation", n, tuple(violations))


PROGRESS_CASES = ("speedup", "cruise", "slowdown")


def check_progress(case: str, n: int = 1_000, seed: int = 0,
                   time_points: int = 100) -> CheckReport:
    """The case's progress function must strictly decrease along the exact
    flow while outside the case's target set; the minimum per-cycle decrease
    is reported in the note."""
    if case not in PROGRESS_CASES:
        raise ValueError(f"unknown case {case!r} (choose from {PROGRESS_CASES})")
    rng = random.Random(seed)
    violations = []
    min_decrease = math.inf

    for i in range(n):
        base = sample_compliant_state(rng, seed=i, require_go=False)
        wp, p = base.wp, base.p
        if case == "speedup":
            if wp.vl <= 0.0:
                continue
            v = rng.uniform(0.0, wp.vl * 0.999)
            if not invariant_j(wp, v, p):
                continue
            a = p.accel_max
            sample = StateSample(wp, v, a, p, i)
            horizon = (wp.vl - v) / a

            def g(pt, vt):
                return wp.vl - vt
        elif case == "slowdown":
            v = rng.uniform(wp.vh * 1.001, SPEED_MAX + 5.0)
            if not invariant_j(wp, v, p):
                continue
            a = -p.brake_max
            sample = StateSample(wp, v, a, p, i)
            horizon = (v - wp.vh) / p.brake_max

            def g(pt, vt):
                return vt - wp.vh
        else:
            v = rng.uniform(wp.vl, wp.vh)
            if v <= 0.0:
                continue
            sample = StateSample(wp, v, 0.0, p, i)
            # Cruise to the goal region along the declared arc.
            horizon = 4.0 * euclid_norm(wp.x, wp.y) / v

            def g(pt, vt):
                return pt.x * pt.x + pt.y * pt.y - p.tol * p.tol

        pt0, v0 = _flow(sample, 0.0)
        prev = g(pt0, v0)
        prev_t = older_t = 0.0
        for j in range(1, time_points + 1):
            t = horizon * j / time_points
            pt, vt = _flow(sample, t)
            value = g(pt, vt)
            if value >= prev:
                # The goal trough can be narrower than the sampling step:
                # refine before declaring non-monotonicity.
                if case == "cruise" and _refined_min(sample, g, older_t, t) <= 0.0:
                    break  # dipped into the goal region between samples
                violations.append(Violation(sample, t, f"{case}: g did not decrease "
                                            f"({prev:.6g} -> {value:.6g})"))
                break
            decrease = (prev - value) / (t - prev_t)
            min_decrease = min(min_decrease, decrease)
            older_t, prev, prev_t = prev_t, value, t
            if case == "cruise" and value <= 0.0:
                break  # inside the goal region

    note = f"min decrease rate {min_decrease:.6g}/s" if min_decrease < math.inf else ""
    return CheckReport(f"progress_{case}", n, tuple(violations), note)


def _refined_min(sample: StateSample, g, t_lo: float, t_hi: float,
                 iters: int = 80) -> float:
    """Ternary-search minimum of g along the flow over [t_lo, t_hi]."""
    lo, hi = t_lo, t_hi
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if g(*_flow(sample, m1)) <= g(*_flow(sample, m2)):
            hi = m2
        else:
            lo = m1
    return g(*_flow(sample, (lo + hi) / 2.0))


def _quadrature_distance(v0: float, a: float, duration: float, points: int = 200) -> float:
    """Composite-Simpson integral of the (linear) speed profile; an arithmetic
    path independent of the closed-form distance term."""
    if duration <= 0.0:
        return 0.0
    h = duration / (2 * points)
    total = v0 + (v0 + a * duration)
    for j in range(1, 2 * points):
        w = 4.0 if j % 2 else 2.0
        total += w * (v0 + a * (j * h))
    return total * h / 3.0


def go_oracle(n: int = 10_000, seed: int = 0) -> CheckReport:
    """For straight-line states where the admissibility check passes above the
    upper limit, holding the accepted acceleration for one cycle and then
    braking at the maximum rate must restore the limit before the traveled
    distance exhausts the waypoint gap (minus the goal radius)."""
    rng = random.Random(seed)
    violations = []
    for i in range(n):
        while True:
            p = _sample_params(rng)
            x = rng.uniform(1.2 * p.tol, DIST_MAX)
            y = rng.uniform(-p.tol, p.tol) * 0.999
            width = max(p.accel_max, p.brake_max) * p.cycle_max * rng.uniform(1.0, 3.0)
            vl = rng.uniform(0.0, SPEED_MAX - width)
            vh = vl + width
            wp = RelWaypoint(x, y, 0.0, vl, vh)
            v = rng.uniform(vh, SPEED_MAX + 5.0)
            a = rng.uniform(0.0, p.accel_max)
            if v + a * p.cycle_max > vh and go(wp, v, a, p):
                break
        v_end = v + a * p.cycle_max
        brake_time = (v_end - vh) / p.brake_max
        traveled = (_quadrature_distance(v, a, p.cycle_max)
                    + _quadrature_distance(v_end, -p.brake_max, brake_time))
        budget = inf_norm(wp.x, wp.y) - p.tol
        if traveled > budget + 1e-9:
            violations.append(Violation(StateSample(wp, v, a, p, i), brake_time,
                                        f"needs {traveled:.9g} m > budget {budget:.9g} m"))
    return CheckReport("go_oracle", n, tuple(violations))
