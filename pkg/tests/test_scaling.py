import math

import numpy as np
import pytest

from telerate.environment import ObstacleCloud
from telerate.geometry import Vec2
from telerate.riskfield import RobotState
from telerate.scaling import (
    JoystickInput,
    Method,
    clamp_radial,
    compute_command,
    human_scale,
    slew_limit,
)

EMPTY = ObstacleCloud(points=np.zeros((0, 2)), resolution=0.02)

ALL_METHODS = (Method.C, Method.H, Method.R1, Method.R2, Method.R3)


def stick(x, y, button=False):
    return JoystickInput(p_i=Vec2(x, y), button=button)


def rest(x=0.0, y=0.0):
    return RobotState(position=Vec2(x, y), velocity=Vec2(0.0, 0.0))


def single_point_cloud(x, y):
    return ObstacleCloud(points=np.array([[x, y]]), resolution=0.02)


def test_human_scale_values(params):
    assert human_scale(Vec2(0, 0), params.input_threshold) == 0.0
    assert human_scale(Vec2(0.25, 0), params.input_threshold) == pytest.approx(0.5)
    assert human_scale(Vec2(0.9, 0), params.input_threshold) == 1.0


def test_clamp_radial():
    v = clamp_radial(Vec2(1.0, 1.0))
    assert v.norm() == pytest.approx(1.0)
    assert clamp_radial(Vec2(0.3, 0.4)) == Vec2(0.3, 0.4)


def test_joystick_axis_bounds():
    with pytest.raises(ValueError):
        JoystickInput(p_i=Vec2(1.5, 0.0))


def test_zero_input_zero_command(params):
    for method in ALL_METHODS:
        cmd = compute_command(method, stick(0, 0), rest(), EMPTY, params)
        assert cmd.v == Vec2(0.0, 0.0)


def test_constant_method_full_deflection(params):
    cmd = compute_command(Method.C, stick(1, 0), rest(), EMPTY, params)
    assert cmd.v == Vec2(5.0, 0.0)
    assert cmd.diagnostics.s_x == 5.0


def test_h_quarter_deflection(params):
    # s_human = min(1, 0.25/0.5) = 0.5, so v = 5 * 0.5 * 0.25 = 0.625 m/s
    cmd = compute_command(Method.H, stick(0.25, 0), rest(), EMPTY, params)
    assert cmd.v.x == pytest.approx(0.625, abs=1e-12)
    assert cmd.v.y == 0.0


def test_r1_blocked_on_boundary_obstacle(params):
    cloud = single_point_cloud(params.robot_radius, 0.0)  # c_r = 1
    for direction in ((1, 0), (0.3, -0.7), (-1, 0)):
        cmd = compute_command(Method.R1, stick(*direction), rest(), cloud, params)
        assert cmd.v == Vec2(0.0, 0.0)
        assert cmd.diagnostics.s_risk == 0.0


def test_r1_half_risk_magnitude(params):
    # single obstacle at d_o = d/2 ahead: c_r = 0.5; |p_i| = 0.6 >= P_c
    cloud = single_point_cloud(params.robot_radius + 0.15, 0.0)
    cmd = compute_command(Method.R1, stick(0.6, 0), rest(), cloud, params)
    assert cmd.v.norm() == pytest.approx(1.5, abs=1e-9)


def test_h_equals_c_above_threshold(params):
    rng = np.random.default_rng(61)
    for _ in range(100):
        angle = rng.uniform(0, 2 * math.pi)
        mag = rng.uniform(0.5, 1.0)
        s = stick(mag * math.cos(angle), mag * math.sin(angle))
        vc = compute_command(Method.C, s, rest(), EMPTY, params).v
        vh = compute_command(Method.H, s, rest(), EMPTY, params).v
        assert vh == vc


def test_all_methods_equal_h_when_no_risk(params):
    rng = np.random.default_rng(67)
    for _ in range(100):
        s = stick(*rng.uniform(-1, 1, size=2))
        state = RobotState(
            position=Vec2(*rng.uniform(-1, 1, 2)), velocity=Vec2(*rng.uniform(-3, 3, 2))
        )
        vh = compute_command(Method.H, s, state, EMPTY, params).v
        for method in (Method.R1, Method.R2, Method.R3):
            assert compute_command(method, s, state, EMPTY, params).v == vh


def test_method_ordering_random_scenes(params):
    rng = np.random.default_rng(71)
    for _ in range(300):
        cloud = ObstacleCloud(points=rng.uniform(-2, 2, size=(30, 2)), resolution=0.02)
        state = RobotState(
            position=Vec2(*rng.uniform(-1, 1, 2)), velocity=Vec2(*rng.uniform(-3, 3, 2))
        )
        s = stick(*rng.uniform(-1, 1, size=2))
        v = {m: compute_command(m, s, state, cloud, params).v for m in ALL_METHODS}
        assert v[Method.R1].norm() <= v[Method.H].norm() + 1e-15
        assert v[Method.H].norm() <= v[Method.C].norm() + 1e-15
        # per-axis (local frame): undirected risk >= directed risk
        d2 = compute_command(Method.R2, s, state, cloud, params).diagnostics
        d3 = compute_command(Method.R3, s, state, cloud, params).diagnostics
        l2 = d2.frame.to_local(v[Method.R2])
        l3 = d3.frame.to_local(v[Method.R3])
        assert abs(l2.x) <= abs(l3.x) + 1e-12
        assert abs(l2.y) <= abs(l3.y) + 1e-12
        lh = d2.frame.to_local(v[Method.H])
        assert abs(l2.x) <= abs(lh.x) + 1e-12
        assert abs(l2.y) <= abs(lh.y) + 1e-12


def test_rotation_equivariance(params):
    rng = np.random.default_rng(73)
    for method in (Method.C, Method.H, Method.R1):
        for _ in range(50):
            pts = rng.uniform(-2, 2, size=(20, 2))
            cloud = ObstacleCloud(points=pts, resolution=0.02)
            state = RobotState(
                position=Vec2(*rng.uniform(-1, 1, 2)), velocity=Vec2(*rng.uniform(-2, 2, 2))
            )
            s_vec = Vec2(*rng.uniform(-0.7, 0.7, size=2))
            theta = float(rng.uniform(0, 2 * math.pi))
            v = compute_command(method, JoystickInput(p_i=s_vec), state, cloud, params).v
            c, sn = math.cos(theta), math.sin(theta)
            rot_pts = pts @ np.array([[c, sn], [-sn, c]])  # row-vector rotation
            rot_cloud = ObstacleCloud(points=rot_pts, resolution=0.02)
            rot_state = RobotState(
                position=state.position.rotated(theta), velocity=state.velocity.rotated(theta)
            )
            v_rot = compute_command(
                method, JoystickInput(p_i=s_vec.rotated(theta)), rot_state, rot_cloud, params
            ).v
            expect = v.rotated(theta)
            assert v_rot.x == pytest.approx(expect.x, abs=1e-9)
            assert v_rot.y == pytest.approx(expect.y, abs=1e-9)


def test_speed_never_exceeds_max_scale(params):
    rng = np.random.default_rng(79)
    for _ in range(200):
        cloud = ObstacleCloud(points=rng.uniform(-2, 2, size=(10, 2)), resolution=0.02)
        state = RobotState(position=Vec2(0, 0), velocity=Vec2(*rng.uniform(-4, 4, 2)))
        s = stick(*rng.uniform(-1, 1, 2))
        for method in ALL_METHODS:
            cmd = compute_command(method, s, state, cloud, params)
            assert cmd.v.norm() <= params.max_scale + 1e-12
            assert cmd.v.norm() <= params.max_scale * clamp_radial(s.p_i).norm() + 1e-9


def test_command_continuous_in_input(params):
    cloud = single_point_cloud(0.6, 0.2)
    state = rest()
    rng = np.random.default_rng(83)
    for method in ALL_METHODS:
        for _ in range(50):
            base = rng.uniform(-0.9, 0.9, size=2)
            eps = 1e-9
            v1 = compute_command(method, stick(*base), state, cloud, params).v
            v2 = compute_command(method, stick(base[0] + eps, base[1]), state, cloud, params).v
            assert (v2 - v1).norm() < 1e-6


def test_blocked_direction_zeroed_all_risk_methods(params):
    # obstacle dead ahead on the capsule boundary: commanded speed toward
    # it must be zero under every risk-gated method
    cloud = single_point_cloud(params.robot_radius, 0.0)
    for method in (Method.R1, Method.R2, Method.R3):
        cmd = compute_command(method, stick(1.0, 0.0), rest(), cloud, params)
        assert cmd.v.x == pytest.approx(0.0, abs=1e-12)


def test_diagnostics_populated_for_c_and_h(params, env1_cloud):
    state = RobotState(position=Vec2(6.0, 0.0), velocity=Vec2(1.0, 0.0))
    for method in (Method.C, Method.H):
        diag = compute_command(method, stick(0.4, 0.1), state, env1_cloud, params).diagnostics
        assert diag.risk.c_r > 0.0
        assert diag.s_risk == pytest.approx(1.0 - diag.risk.c_r)


def test_fast_path_skips_assessment(params, env1_cloud):
    state = RobotState(position=Vec2(6.0, 0.0), velocity=Vec2(1.0, 0.0))
    diag = compute_command(
        Method.C, stick(0.4, 0.1), state, env1_cloud, params, assess_risk=False
    ).diagnostics
    assert diag.risk.c_r == 0.0
    assert diag.s_risk == 1.0


def test_slew_limit_cap_and_passthrough(params):
    def diag(s_x, s_y):
        base = compute_command(Method.C, stick(0, 0), rest(), EMPTY, params).diagnostics
        from dataclasses import replace
        return replace(base, s_x=s_x, s_y=s_y)

    prev = diag(0.0, 3.0)
    nxt = diag(5.0, 1.0)
    # rate 1.0/s of max_scale, dt 0.01: cap = 0.05 per step
    out = slew_limit(prev, nxt, dt=0.01, rate=1.0, max_scale=5.0)
    assert out.s_x == pytest.approx(0.05)
    assert out.s_y == 1.0  # decreases pass through

    # generous rate: unchanged object
    out2 = slew_limit(prev, nxt, dt=0.01, rate=1e6, max_scale=5.0)
    assert out2 is nxt

    # worked example: prev 0, next 5, rate*S_c*dt = 0.5
    out3 = slew_limit(diag(0.0, 0.0), diag(5.0, 5.0), dt=0.01, rate=10.0, max_scale=5.0)
    assert out3.s_x == pytest.approx(0.5)
    assert out3.s_y == pytest.approx(0.5)


def test_slew_limit_validates_args(params):
    base = compute_command(Method.C, stick(0, 0), rest(), EMPTY, params).diagnostics
    with pytest.raises(ValueError):
        slew_limit(base, base, dt=0.0, rate=1.0, max_scale=5.0)
    with pytest.raises(ValueError):
        slew_limit(base, base, dt=0.01, rate=0.0, max_scale=5.0)
