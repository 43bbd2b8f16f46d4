"""Social-force crowd simulation and episode generation.

Agents move on a 2D arena bounded by walls, around circular pillars.
Per-agent acceleration is goal attraction (relax toward the preferred
velocity), pairwise exponential repulsion, and obstacle repulsion;
integration is symplectic Euler with the speed saturated at twice the
preferred speed.  Agent 0 is the camera wearer; its heading is the
exponentially smoothed velocity direction.
"""
from dataclasses import dataclass, field, asdict
import hashlib
import json

import numpy as np

from .. import kernels
from .camera import CameraIntrinsics
from .quat import yaw_to_quaternion

# states with inter-agent distance below this fraction of the radius
# sum are treated as overlapping and are not steppable
OVERLAP_FRACTION = 0.9


@dataclass
class WorldConfig:
    # arena and content
    arena_half_x: float = 10.0
    arena_half_y: float = 10.0
    n_neighbors: int = 8
    n_pillars: int = 3
    pillar_radius_min: float = 0.3
    pillar_radius_max: float = 0.8
    # dynamics
    sim_dt: float = 0.1
    duration_s: float = 12.0
    fps: float = 2.0
    pref_speed_min: float = 0.8
    pref_speed_max: float = 1.6
    agent_radius_min: float = 0.25
    agent_radius_max: float = 0.35
    relax_time: float = 0.5
    rep_strength: float = 8.0
    rep_range: float = 0.4
    obs_strength: float = 4.0
    obs_range: float = 0.3
    speed_cap_factor: float = 2.0
    goal_reach_dist: float = 0.5
    heading_tau: float = 0.5
    # camera and measurement
    ego_height: float = 1.4
    fx: float = 208.0
    fy: float = 208.0
    cx: float = 240.0
    cy: float = 135.0
    frame_width: int = 480
    frame_height: int = 270
    noise: bool = True
    keypoint_noise_px: float = 1.0
    ego_noise_m: float = 0.01
    # windowing
    t_obs: int = 3
    t_pred: int = 7

    def __post_init__(self):
        if not 0.0 < self.sim_dt <= 0.2:
            raise ValueError("sim_dt must lie in (0, 0.2], got %g" % self.sim_dt)
        if self.duration_s < 10.0:
            raise ValueError(
                "episodes must cover at least 10 s, got %g" % self.duration_s)
        if self.n_neighbors < 0 or self.n_pillars < 0:
            raise ValueError("negative content counts")
        steps_per_sample = (1.0 / self.fps) / self.sim_dt
        if abs(steps_per_sample - round(steps_per_sample)) > 1e-9:
            raise ValueError(
                "1/fps must be an integer multiple of sim_dt "
                "(fps=%g, sim_dt=%g)" % (self.fps, self.sim_dt))

    @property
    def intrinsics(self):
        return CameraIntrinsics(self.fx, self.fy, self.cx, self.cy,
                                self.frame_width, self.frame_height)

    @property
    def walls(self):
        return (-self.arena_half_x, self.arena_half_x,
                -self.arena_half_y, self.arena_half_y)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(
                "unknown world config keys: %s" % ", ".join(sorted(extra)))
        return cls(**d)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


class CrowdState:
    """Positions, velocities, goals, preferred speeds, radii of all agents."""

    def __init__(self, pos, vel, goal, pref_speed, radius):
        self.pos = np.asarray(pos, dtype=np.float64)
        self.vel = np.asarray(vel, dtype=np.float64)
        self.goal = np.asarray(goal, dtype=np.float64)
        self.pref_speed = np.asarray(pref_speed, dtype=np.float64)
        self.radius = np.asarray(radius, dtype=np.float64)
        n = self.pos.shape[0]
        if self.radius.shape != (n,) or np.any(self.radius <= 0):
            raise ValueError("every agent needs a positive radius")


class SpawnError(RuntimeError):
    """Could not place agents without overlap within the retry budget."""


def _min_separation(pos, radius):
    n = pos.shape[0]
    worst = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            d = float(np.hypot(*(pos[i] - pos[j])))
            worst = min(worst, d / (radius[i] + radius[j]))
    return worst


def step_social_force(state, pillars, walls, cfg, dt):
    """Advance the crowd one step of length dt; returns a new CrowdState.

    Rejects dt outside (0, 0.2] and states whose agents already overlap
    (inter-agent distance below 0.9x the radius sum).
    """
    if not 0.0 < dt <= 0.2:
        raise ValueError("dt must lie in (0, 0.2] s, got %g" % dt)
    n = state.pos.shape[0]
    if n > 1 and _min_separation(state.pos, state.radius) < OVERLAP_FRACTION:
        raise ValueError(
            "overlapping agent positions (separation below %.1fx radius sum); "
            "state is not steppable" % OVERLAP_FRACTION)
    pillars = np.asarray(pillars, dtype=np.float64).reshape(-1, 3)
    acc = kernels.social_force_accel(
        state.pos, state.vel, state.goal, state.pref_speed, state.radius,
        cfg.relax_time, cfg.rep_strength, cfg.rep_range,
        tuple(float(w) for w in walls), pillars,
        cfg.obs_strength, cfg.obs_range)
    # symplectic Euler: velocity first, then position with the new velocity
    vel = state.vel + dt * acc
    speed = np.sqrt(np.sum(vel * vel, axis=1))
    cap = cfg.speed_cap_factor * state.pref_speed
    over = speed > cap
    if np.any(over):
        vel[over] *= (cap[over] / speed[over])[:, None]
    pos = state.pos + dt * vel
    return CrowdState(pos, vel, state.goal.copy(),
                      state.pref_speed.copy(), state.radius.copy())


def _spawn(rng, cfg, pillars):
    """Place agents with clearance from walls, pillars, and each other."""
    n = cfg.n_neighbors + 1
    radius = rng.uniform(cfg.agent_radius_min, cfg.agent_radius_max, n)
    pref = rng.uniform(cfg.pref_speed_min, cfg.pref_speed_max, n)
    placed = np.empty((n, 2))
    for i in range(n):
        ok = False
        for _ in range(1000):
            p = rng.uniform(
                (-cfg.arena_half_x + radius[i] + 0.5,
                 -cfg.arena_half_y + radius[i] + 0.5),
                (cfg.arena_half_x - radius[i] - 0.5,
                 cfg.arena_half_y - radius[i] - 0.5))
            if any(np.hypot(*(p - placed[j])) < 2.0 * (radius[i] + radius[j])
                   for j in range(i)):
                continue
            if any(np.hypot(*(p - pk[:2])) < radius[i] + pk[2] + 0.4
                   for pk in pillars):
                continue
            placed[i] = p
            ok = True
            break
        if not ok:
            raise SpawnError(
                "could not place agent %d of %d after 1000 draws; the arena "
                "is too crowded" % (i + 1, n))
    goal = np.stack([_draw_goal(rng, cfg, pillars, radius[i]) for i in range(n)])
    return CrowdState(placed, np.zeros((n, 2)), goal, pref, radius)


def _draw_goal(rng, cfg, pillars, agent_radius):
    for _ in range(1000):
        g = rng.uniform((-cfg.arena_half_x + 1.0, -cfg.arena_half_y + 1.0),
                        (cfg.arena_half_x - 1.0, cfg.arena_half_y - 1.0))
        if all(np.hypot(*(g - pk[:2])) > agent_radius + pk[2] + 0.4
               for pk in pillars):
            return g
    raise SpawnError("could not draw a goal clear of the pillars")


def _spawn_pillars(rng, cfg):
    pillars = []
    for _ in range(cfg.n_pillars):
        for _ in range(1000):
            r = rng.uniform(cfg.pillar_radius_min, cfg.pillar_radius_max)
            c = rng.uniform((-cfg.arena_half_x + r + 1.5,
                             -cfg.arena_half_y + r + 1.5),
                            (cfg.arena_half_x - r - 1.5,
                             cfg.arena_half_y - r - 1.5))
            if all(np.hypot(*(c - p[:2])) > r + p[2] + 1.0 for p in pillars):
                pillars.append((c[0], c[1], r))
                break
        else:
            raise SpawnError("could not place pillars without overlap")
    return np.array(pillars, dtype=np.float64).reshape(-1, 3)


@dataclass
class EpisodeTracks:
    """World-frame tracks sampled at the dataset frame rate."""
    times: np.ndarray            # (T,)
    ego_pose: np.ndarray         # (T, 7) world frame, measurement noise applied
    ego_pose_true: np.ndarray    # (T, 7) noise-free camera poses
    neighbor_pos: np.ndarray     # (T, N, 2)
    neighbor_vel: np.ndarray     # (T, N, 2)
    neighbor_radius: np.ndarray  # (N,)
    ego_radius: float
    kp_noise: np.ndarray         # (T, N, 26, 2) pixel noise, zeros if disabled
    pillars: np.ndarray          # (K, 3)
    walls: tuple
    seed: int
    episode_index: int


def episode_seed(master_seed, episode_index):
    """Stable per-episode seed for the dynamics stream."""
    return np.random.SeedSequence([int(master_seed), int(episode_index), 0])


def episode_noise_seed(master_seed, episode_index):
    """Separate stream for measurement noise, same determinism contract."""
    return np.random.SeedSequence([int(master_seed), int(episode_index), 1])


def simulate_episode(cfg, master_seed, episode_index=0):
    """Run one episode; fully determined by (cfg, master seed, index)."""
    rng = np.random.default_rng(episode_seed(master_seed, episode_index))
    pillars = _spawn_pillars(rng, cfg)
    state = _spawn(rng, cfg, pillars)
    walls = cfg.walls

    n_steps = int(round(cfg.duration_s / cfg.sim_dt))
    keep_every = int(round((1.0 / cfg.fps) / cfg.sim_dt))
    n_agents = state.pos.shape[0]

    # heading smoothing: alpha for one sim step at time constant heading_tau
    alpha = 1.0 - float(np.exp(-cfg.sim_dt / cfg.heading_tau))
    goal0 = state.goal[0] - state.pos[0]
    heading_vec = goal0 / max(float(np.hypot(*goal0)), 1e-9)

    sampled_pos = []
    sampled_vel = []
    sampled_ego = []
    for step in range(n_steps + 1):
        if step % keep_every == 0:
            yaw = float(np.arctan2(heading_vec[1], heading_vec[0]))
            pose = np.empty(7)
            pose[:2] = state.pos[0]
            pose[2] = cfg.ego_height
            pose[3:7] = yaw_to_quaternion(yaw)
            sampled_ego.append(pose)
            sampled_pos.append(state.pos[1:].copy())
            sampled_vel.append(state.vel[1:].copy())
        if step == n_steps:
            break
        # re-aim agents that reached their goal
        for i in range(n_agents):
            if np.hypot(*(state.goal[i] - state.pos[i])) < cfg.goal_reach_dist:
                state.goal[i] = _draw_goal(rng, cfg, pillars, state.radius[i])
        state = step_social_force(state, pillars, walls, cfg, cfg.sim_dt)
        v0 = state.vel[0]
        if float(np.hypot(*v0)) > 1e-6:
            heading_vec = (1.0 - alpha) * heading_vec + alpha * v0
            norm = float(np.hypot(*heading_vec))
            if norm > 1e-9:
                heading_vec = heading_vec / norm

    ego_true = np.array(sampled_ego)
    t_count = ego_true.shape[0]
    ego_measured = np.array(ego_true, copy=True)
    n_nbr = n_agents - 1
    kp_noise = np.zeros((t_count, n_nbr, 26, 2))
    if cfg.noise:
        # fixed draw order from the dedicated noise stream: ego, keypoints
        rng_noise = np.random.default_rng(
            episode_noise_seed(master_seed, episode_index))
        if cfg.ego_noise_m > 0:
            ego_measured[:, :3] += rng_noise.normal(
                0.0, cfg.ego_noise_m, (t_count, 3))
        if cfg.keypoint_noise_px > 0 and n_nbr > 0:
            kp_noise = rng_noise.normal(
                0.0, cfg.keypoint_noise_px, (t_count, n_nbr, 26, 2))

    return EpisodeTracks(
        times=np.arange(t_count) / cfg.fps,
        ego_pose=ego_measured,
        ego_pose_true=ego_true,
        neighbor_pos=np.array(sampled_pos).reshape(t_count, n_nbr, 2),
        neighbor_vel=np.array(sampled_vel).reshape(t_count, n_nbr, 2),
        neighbor_radius=state.radius[1:].copy(),
        ego_radius=float(state.radius[0]),
        kp_noise=kp_noise,
        pillars=pillars,
        walls=walls,
        seed=int(master_seed),
        episode_index=int(episode_index),
    )
