import math
import random

import pytest

from waynet.controllers import (PdGains, bang_bang, choose_accel, cross_track_error,
                                declared_curvature, liveness_accel, pd)
from waynet.core import Params, RelWaypoint
from waynet.dynamics import RelPoint
from waynet.monitor import fallback_accel, go

P = Params(accel_max=1.0, brake_max=1.0, cycle_max=0.5, tol=0.5)


class TestCrossTrack:
    def test_zero_on_band_center(self):
        assert cross_track_error(RelPoint(5.0, 0.0), k=0.0, eps=1.0) == 0.0

    def test_reference_residual(self):
        e = cross_track_error(RelPoint(2.5, -3.0), k=-0.4, eps=1.0)
        assert e == pytest.approx(0.15)

    def test_sign_left_of_band(self):
        # Waypoint left of the declared straight line -> negative residual.
        assert cross_track_error(RelPoint(5.0, 1.0), k=0.0, eps=1.0) < 0.0


class TestBangBang:
    def test_deadband_keeps_segment_curvature(self):
        assert bang_bang(RelPoint(5.0, 0.05), 0.0, eps=1.0, deadband=0.1,
                         k_max=0.8) == 0.0

    def test_positive_residual_steers_right(self):
        # e = -y = +0.5 for a waypoint to the right: reduce curvature.
        rel = RelPoint(5.0, -0.5)
        assert cross_track_error(rel, 0.0, 1.0) == pytest.approx(0.5)
        assert bang_bang(rel, 0.0, eps=1.0, deadband=0.1, k_max=0.8) == \
            pytest.approx(-0.8)

    def test_negative_residual_steers_left(self):
        rel = RelPoint(5.0, 0.5)
        assert bang_bang(rel, 0.0, eps=1.0, deadband=0.1, k_max=0.8) == \
            pytest.approx(0.8)

    def test_offsets_from_segment_curvature(self):
        assert bang_bang(RelPoint(5.0, -0.5), 0.3, eps=1.0, deadband=0.1,
                         k_max=0.8) == pytest.approx(0.3 - 0.8)

    def test_validation(self):
        with pytest.raises(ValueError):
            bang_bang(RelPoint(5.0, 0.0), 0.0, eps=1.0, deadband=0.1, k_max=0.0)


class TestPd:
    def test_reference_step(self):
        # e = -y = 0.2, prev 0.1, dt 0.1: cmd = -(0.5*0.2 + 0.05*1.0) = -0.15
        g = PdGains(kp=0.5, kd=0.05, curvature_max=1.0)
        rel = RelPoint(5.0, -0.2 - 0.0)
        e = cross_track_error(rel, 0.0, eps=1.0)
        assert e == pytest.approx(0.2)
        assert pd(rel, prev_e=0.1, dt=0.1, k_seg=0.0, eps=1.0, g=g) == \
            pytest.approx(-0.15)

    def test_clamped(self):
        g = PdGains(kp=10.0, kd=0.0, curvature_max=0.4)
        assert pd(RelPoint(5.0, -2.0), 0.0, 0.1, 0.0, 1.0, g) == -0.4
        assert pd(RelPoint(5.0, 2.0), 0.0, 0.1, 0.0, 1.0, g) == 0.4

    def test_validation(self):
        with pytest.raises(ValueError):
            PdGains(kp=-0.1, kd=0.0, curvature_max=1.0)
        with pytest.raises(ValueError):
            PdGains(kp=0.1, kd=0.0, curvature_max=0.0)
        g = PdGains(0.5, 0.05, 1.0)
        with pytest.raises(ValueError):
            pd(RelPoint(5.0, 0.0), 0.0, 0.0, 0.0, 1.0, g)


class TestChooseAccel:
    def test_reaches_target_speed_when_admissible(self):
        wp = RelWaypoint(12.0, 0.0, 0.0, 1.0, 2.0)
        a = choose_accel(wp, v=1.5, p=P, target_speed=2.0)
        assert a == pytest.approx(1.0)  # (2.0 - 1.5)/0.5 = 1.0 = accel_max

    def test_brakes_when_too_fast_for_gap(self):
        wp = RelWaypoint(12.0, 0.0, 0.0, 1.0, 2.0)
        a = choose_accel(wp, v=5.0, p=P, target_speed=2.0)
        assert a == pytest.approx(-1.0)
        assert go(wp, 5.0, a, P)

    def test_contract_go_or_fallback(self):
        rng = random.Random(21)
        for _ in range(500):
            x = rng.uniform(0.7, 30.0)
            y = rng.uniform(-0.45, 0.45)
            vl = rng.uniform(0.0, 4.0)
            wp = RelWaypoint(x, y, 0.0, vl, vl + rng.uniform(0.6, 3.0))
            v = rng.uniform(0.0, 8.0)
            target = rng.uniform(0.0, 8.0)
            a = choose_accel(wp, v, P, target)
            assert go(wp, v, a, P) or a == fallback_accel(v, P)

    def test_bisection_finds_admissible_boundary(self):
        # Large accel fails the distance clause; some smaller accel passes.
        wp = RelWaypoint(11.2, 0.0, 0.0, 1.0, 2.0)
        a = choose_accel(wp, v=5.0, p=P, target_speed=10.0)
        assert go(wp, 5.0, a, P)
        assert a > -1.0  # did not need full braking


class TestLivenessAccel:
    def test_three_regimes(self):
        assert liveness_accel(0.5, 1.0, 2.0, A=1.5, B=2.5) == 1.5
        assert liveness_accel(1.5, 1.0, 2.0, A=1.5, B=2.5) == 0.0
        assert liveness_accel(3.0, 1.0, 2.0, A=1.5, B=2.5) == -2.5

    def test_boundaries_cruise(self):
        assert liveness_accel(1.0, 1.0, 2.0, 1.0, 1.0) == 0.0
        assert liveness_accel(2.0, 1.0, 2.0, 1.0, 1.0) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            liveness_accel(1.0, 2.0, 2.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            liveness_accel(1.0, -0.1, 2.0, 1.0, 1.0)


class TestDeclaredCurvature:
    def test_zeroes_residual_when_admissible(self):
        rel = RelPoint(2.5, -3.0)
        k = declared_curvature(rel, k_seg=0.1, eps=1.0)
        assert cross_track_error(rel, k, 1.0) == pytest.approx(0.0, abs=1e-12)
        assert k == pytest.approx(-0.42105, abs=1e-5)

    def test_falls_back_when_scale_clause_would_fail(self):
        # Very close lateral point needs |k| eps > 1: keep the segment curvature.
        rel = RelPoint(0.3, 1.0)
        assert declared_curvature(rel, k_seg=0.2, eps=1.0) == 0.2

    def test_inside_goal_region_keeps_segment(self):
        assert declared_curvature(RelPoint(0.2, 0.1), k_seg=0.4, eps=1.0) == 0.4
