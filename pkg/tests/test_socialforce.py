"""Crowd simulator dynamics and determinism checks."""
import numpy as np
import pytest

from egoforecast.datagen.socialforce import (CrowdState, SpawnError,
                                             WorldConfig, simulate_episode,
                                             step_social_force)

OPEN_WALLS = (-100.0, 100.0, -100.0, 100.0)
NO_PILLARS = np.zeros((0, 3))


def _single_agent(x0=-5.0, pref=1.2):
    return CrowdState(pos=[[x0, 0.0]], vel=[[0.0, 0.0]], goal=[[50.0, 0.0]],
                      pref_speed=[pref], radius=[0.3])


def test_lone_agent_follows_relaxation_closed_form():
    # goal force alone: v_{k+1} = v_k (1 - dt/tau) + dt vp/tau, x first order
    cfg = WorldConfig(noise=False)
    dt, n, vp, tau = 0.1, 50, 1.2, cfg.relax_time
    state = _single_agent(pref=vp)
    x0 = state.pos[0, 0]
    for _ in range(n):
        state = step_social_force(state, NO_PILLARS, OPEN_WALLS, cfg, dt)
    beta = 1.0 - dt / tau
    expect_v = vp * (1.0 - beta ** n)
    expect_x = x0 + vp * n * dt - vp * (tau - dt) * (1.0 - beta ** n)
    assert abs(state.vel[0, 0] - expect_v) < 1e-9
    assert abs(state.pos[0, 0] - expect_x) < 1e-9
    assert abs(state.pos[0, 1]) < 1e-12          # path stays straight
    assert abs(state.vel[0, 0] - vp) < 0.01 * vp  # near preferred speed


def test_lone_agent_converges_as_dt_shrinks():
    cfg = WorldConfig(noise=False)

    def final_x(dt):
        state = _single_agent()
        for _ in range(int(round(10.0 / dt))):
            state = step_social_force(state, NO_PILLARS, OPEN_WALLS, cfg, dt)
        return state.pos[0, 0]

    d1 = abs(final_x(0.1) - final_x(0.05))
    d2 = abs(final_x(0.05) - final_x(0.025))
    assert d1 < 0.1
    assert d2 < d1


def test_head_on_pair_passes_without_contact():
    cfg = WorldConfig(noise=False)
    state = CrowdState(pos=[[-3.0, 0.0], [3.0, 0.1]],
                       vel=np.zeros((2, 2)),
                       goal=[[4.0, 0.0], [-4.0, 0.1]],
                       pref_speed=[1.0, 1.0], radius=[0.3, 0.3])
    min_ratio = np.inf
    for _ in range(100):
        state = step_social_force(state, NO_PILLARS, cfg.walls, cfg, 0.1)
        d = float(np.hypot(*(state.pos[0] - state.pos[1])))
        min_ratio = min(min_ratio, d / 0.6)
    assert min_ratio > 0.9
    assert state.pos[0, 0] > 0.0                 # both made it past center
    assert state.pos[1, 0] < 0.0


def test_step_rejects_bad_dt():
    cfg = WorldConfig(noise=False)
    for dt in (0.0, -0.1, 0.25):
        with pytest.raises(ValueError, match="dt"):
            step_social_force(_single_agent(), NO_PILLARS, OPEN_WALLS, cfg, dt)


def test_step_rejects_overlapping_state():
    cfg = WorldConfig(noise=False)
    state = CrowdState(pos=[[0.0, 0.0], [0.1, 0.0]], vel=np.zeros((2, 2)),
                       goal=[[5.0, 0.0], [-5.0, 0.0]],
                       pref_speed=[1.0, 1.0], radius=[0.3, 0.3])
    with pytest.raises(ValueError, match="steppable"):
        step_social_force(state, NO_PILLARS, OPEN_WALLS, cfg, 0.1)


def test_world_config_validation():
    with pytest.raises(ValueError, match="sim_dt"):
        WorldConfig(sim_dt=0.25)
    with pytest.raises(ValueError, match="10 s"):
        WorldConfig(duration_s=5.0)
    with pytest.raises(ValueError, match="multiple"):
        WorldConfig(sim_dt=0.15)
    with pytest.raises(ValueError, match="unknown world config"):
        WorldConfig.from_dict({"sim_dt": 0.1, "wind_speed": 3.0})


def test_episode_is_seed_deterministic():
    cfg = WorldConfig(noise=True)
    a = simulate_episode(cfg, 123, episode_index=5)
    b = simulate_episode(cfg, 123, episode_index=5)
    assert np.array_equal(a.ego_pose, b.ego_pose)
    assert np.array_equal(a.neighbor_pos, b.neighbor_pos)
    assert np.array_equal(a.kp_noise, b.kp_noise)
    c = simulate_episode(cfg, 123, episode_index=6)
    assert not np.array_equal(a.ego_pose, c.ego_pose)


def test_episode_shapes_and_pose_validity():
    cfg = WorldConfig(noise=False)
    tr = simulate_episode(cfg, 7)
    t = int(round(cfg.duration_s * cfg.fps)) + 1
    assert tr.ego_pose.shape == (t, 7)
    assert tr.neighbor_pos.shape == (t, cfg.n_neighbors, 2)
    assert tr.times[-1] == pytest.approx(cfg.duration_s)
    q = tr.ego_pose[:, 3:7]
    np.testing.assert_allclose(np.sum(q * q, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(q[:, 1:3], 0.0, atol=1e-12)  # yaw only
    # noise off: measured pose equals the true pose
    assert np.array_equal(tr.ego_pose, tr.ego_pose_true)


def test_zero_neighbor_world():
    cfg = WorldConfig(noise=False, n_neighbors=0, n_pillars=0)
    tr = simulate_episode(cfg, 3)
    assert tr.neighbor_pos.shape[1] == 0
    assert tr.kp_noise.shape[1] == 0


def test_overcrowded_arena_raises_spawn_error():
    cfg = WorldConfig(arena_half_x=1.0, arena_half_y=1.0,
                      n_neighbors=40, n_pillars=0, noise=False)
    with pytest.raises(SpawnError):
        simulate_episode(cfg, 0)
