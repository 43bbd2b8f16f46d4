"""Trajectory samples: window slicing, neighbor representations, generation.

A sample is one 10-point window (3 observed + 7 future at 2 fps) cut
from an episode with stride 1.  Ego poses are re-expressed relative to
the window's first observed pose; the original world pose is kept as
``ref_pose`` so consumers can map predictions back to the world frame.
Neighbors are stored as projected 26-keypoint pixel arrays for the
nearest five people visible at the window start (nearest first); the
center and bounding-box representations are derived views of those
keypoints.
"""
from dataclasses import dataclass, field
import json

import numpy as np

from .camera import HIP_CENTER_INDEX, NECK_INDEX, synthesize_keypoints
from .quat import normalize_relative
from .scene import encode_scene
from .socialforce import WorldConfig, simulate_episode

WINDOW_POINTS = 10


@dataclass
class TrajectorySample:
    sample_id: str
    source_seed: int
    ego_past: np.ndarray        # (t_obs, 7) relative frame
    ego_future: np.ndarray      # (t_pred, 7) relative frame
    neighbors: np.ndarray       # (5, t_obs, 52) keypoint pixels, zero-padded
    scene_semantic: np.ndarray  # (t_obs, 648)
    scene_depth: np.ndarray     # (t_obs, 648)
    ref_pose: np.ndarray        # (7,) world pose of the window start

    def validate(self, t_obs=3, t_pred=7, frame=(480, 270)):
        if t_obs + t_pred != WINDOW_POINTS:
            raise ValueError("t_obs + t_pred must be %d" % WINDOW_POINTS)
        checks = [
            ("ego_past", self.ego_past, (t_obs, 7)),
            ("ego_future", self.ego_future, (t_pred, 7)),
            ("neighbors", self.neighbors, (5, t_obs, 52)),
            ("scene_semantic", self.scene_semantic, (t_obs, 648)),
            ("scene_depth", self.scene_depth, (t_obs, 648)),
            ("ref_pose", self.ref_pose, (7,)),
        ]
        for name, arr, shape in checks:
            if arr.shape != shape:
                raise ValueError(
                    "sample %s: %s has shape %r, expected %r"
                    % (self.sample_id, name, arr.shape, shape))
        if not np.allclose(self.ego_past[0], (0, 0, 0, 1, 0, 0, 0), atol=1e-12):
            raise ValueError(
                "sample %s: first observed pose is not the identity"
                % self.sample_id)
        for label, seq in (("past", self.ego_past), ("future", self.ego_future)):
            norms = np.linalg.norm(seq[:, 3:7], axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-9):
                raise ValueError(
                    "sample %s: non-unit quaternion in ego_%s"
                    % (self.sample_id, label))
        kp = self.neighbors.reshape(5, t_obs, 26, 2)
        nz = kp[np.any(kp != 0.0, axis=3)]
        if nz.size and (np.any(nz[:, 0] < 0) or np.any(nz[:, 0] > frame[0])
                        or np.any(nz[:, 1] < 0) or np.any(nz[:, 1] > frame[1])):
            raise ValueError(
                "sample %s: keypoint outside the %dx%d frame"
                % (self.sample_id, frame[0], frame[1]))
        for name in ("scene_semantic", "scene_depth"):
            g = getattr(self, name)
            if np.any(g < 0.0) or np.any(g > 1.0):
                raise ValueError(
                    "sample %s: %s values leave [0, 1]" % (self.sample_id, name))


@dataclass
class DatasetManifest:
    sample_count: int
    split: str = "all"
    neighbor_mode: str = "pose"
    scene_modes: tuple = ("semantic", "depth")
    t_obs: int = 3
    t_pred: int = 7
    fps: float = 2.0
    master_seed: int = 0
    config_digest: str = ""
    world: dict = field(default_factory=dict)
    format_version: int = 1

    FIELD_ORDER = ("ego_past", "ego_future", "neighbors",
                   "scene_semantic", "scene_depth", "ref_pose")

    def dims(self):
        return {
            "ego_past": [self.t_obs, 7],
            "ego_future": [self.t_pred, 7],
            "neighbors": [5, self.t_obs, 52],
            "scene_semantic": [self.t_obs, 648],
            "scene_depth": [self.t_obs, 648],
            "ref_pose": [7],
        }

    def to_json(self):
        return json.dumps({
            "format_version": self.format_version,
            "sample_count": self.sample_count,
            "split": self.split,
            "neighbor_mode": self.neighbor_mode,
            "scene_modes": list(self.scene_modes),
            "t_obs": self.t_obs,
            "t_pred": self.t_pred,
            "fps": self.fps,
            "master_seed": self.master_seed,
            "config_digest": self.config_digest,
            "dims": self.dims(),
            "fields": list(self.FIELD_ORDER),
            "world": self.world,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line):
        d = json.loads(line)
        return cls(
            sample_count=d["sample_count"],
            split=d.get("split", "all"),
            neighbor_mode=d.get("neighbor_mode", "pose"),
            scene_modes=tuple(d.get("scene_modes", ("semantic", "depth"))),
            t_obs=d["t_obs"],
            t_pred=d["t_pred"],
            fps=d.get("fps", 2.0),
            master_seed=d.get("master_seed", 0),
            config_digest=d.get("config_digest", ""),
            world=d.get("world", {}),
            format_version=d.get("format_version", 1),
        )


def neighbor_representation(keypoints_seq, mode):
    """Derive the per-timestep neighbor vector from stored keypoints.

    keypoints_seq: (k, t_obs, 52), the first k slots of a sample's
    keypoint block.  Returns (t_obs, k*52) for 'pose', (t_obs, k*2) for
    'center', (t_obs, k*4) for 'bbox'; absent person-frames contribute
    zeros.
    """
    kp = np.asarray(keypoints_seq, dtype=np.float64)
    if kp.ndim != 3 or kp.shape[0] < 1 or kp.shape[2] != 52:
        raise ValueError(
            "expected a (k, t_obs, 52) keypoint block, got %r" % (kp.shape,))
    slots, t_obs = kp.shape[0], kp.shape[1]
    if mode == "pose":
        return np.transpose(kp, (1, 0, 2)).reshape(t_obs, slots * 52)
    pts = kp.reshape(slots, t_obs, 26, 2)
    if mode == "center":
        out = np.zeros((t_obs, slots, 2))
        for s in range(slots):
            for t in range(t_obs):
                neck = pts[s, t, NECK_INDEX]
                hip = pts[s, t, HIP_CENTER_INDEX]
                if np.any(neck != 0.0) and np.any(hip != 0.0):
                    out[t, s] = (neck + hip) / 2.0
        return out.reshape(t_obs, slots * 2)
    if mode == "bbox":
        out = np.zeros((t_obs, slots, 4))
        for s in range(slots):
            for t in range(t_obs):
                visible = pts[s, t][np.any(pts[s, t] != 0.0, axis=1)]
                if visible.size:
                    out[t, s] = (visible[:, 0].min(), visible[:, 1].min(),
                                 visible[:, 0].max(), visible[:, 1].max())
        return out.reshape(t_obs, slots * 4)
    raise ValueError("unknown neighbor mode %r (pose, center, or bbox)" % mode)


def _frame_observations(tracks, cfg):
    """Per-frame keypoints, visibility, and scene grids for an episode."""
    t_count = tracks.ego_pose.shape[0]
    n = tracks.neighbor_pos.shape[1]
    intr = cfg.intrinsics
    kps = np.zeros((t_count, n, 26, 2))
    visible = np.zeros((t_count, n), dtype=bool)
    sem = np.empty((t_count, 648))
    dep = np.empty((t_count, 648))
    for t in range(t_count):
        true_pose = tracks.ego_pose_true[t]
        for j in range(n):
            vel = tracks.neighbor_vel[t, j]
            heading = (np.arctan2(vel[1], vel[0])
                       if float(np.hypot(*vel)) > 1e-3 else 0.0)
            noise = tracks.kp_noise[t, j] if cfg.noise else None
            arr, count = synthesize_keypoints(
                tracks.neighbor_pos[t, j], heading, true_pose, intr, noise)
            kps[t, j] = arr
            visible[t, j] = count > 0
        sem[t] = encode_scene(true_pose, tracks.walls, tracks.pillars,
                              tracks.neighbor_pos[t], tracks.neighbor_radius,
                              "semantic")
        dep[t] = encode_scene(true_pose, tracks.walls, tracks.pillars,
                              tracks.neighbor_pos[t], tracks.neighbor_radius,
                              "depth")
    return kps, visible, sem, dep


def slice_samples(tracks, cfg):
    """Cut an episode into stride-1 windows of 10 points."""
    t_obs, t_pred = cfg.t_obs, cfg.t_pred
    if t_obs + t_pred != WINDOW_POINTS:
        raise ValueError(
            "t_obs + t_pred must total %d points, got %d + %d"
            % (WINDOW_POINTS, t_obs, t_pred))
    t_count = tracks.ego_pose.shape[0]
    if t_count < WINDOW_POINTS:
        raise ValueError(
            "episode has %d points, too short for a %d-point window"
            % (t_count, WINDOW_POINTS))

    kps, visible, sem, dep = _frame_observations(tracks, cfg)
    n = tracks.neighbor_pos.shape[1]
    samples = []
    for start in range(t_count - WINDOW_POINTS + 1):
        window = tracks.ego_pose[start:start + WINDOW_POINTS]
        rel = normalize_relative(window)
        # nearest-5 people visible at the window's first observed frame
        slot_block = np.zeros((5, t_obs, 52))
        if n > 0:
            ego_xy = tracks.ego_pose[start, :2]
            dists = np.hypot(*(tracks.neighbor_pos[start] - ego_xy).T)
            order = [j for j in np.argsort(dists, kind="stable")
                     if visible[start, j]][:5]
            for slot, j in enumerate(order):
                slot_block[slot] = kps[start:start + t_obs, j].reshape(t_obs, 52)
        samples.append(TrajectorySample(
            sample_id="e%04dw%02d" % (tracks.episode_index, start),
            source_seed=tracks.seed,
            ego_past=rel[:t_obs],
            ego_future=rel[t_obs:],
            neighbors=slot_block,
            scene_semantic=sem[start:start + t_obs].copy(),
            scene_depth=dep[start:start + t_obs].copy(),
            ref_pose=tracks.ego_pose[start].copy(),
        ))
    return samples


def generate_dataset(cfg, n_samples, master_seed, split="all", first_episode=0):
    """Simulate episodes until n_samples windows exist; deterministic."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    samples = []
    episode = first_episode
    while len(samples) < n_samples:
        tracks = simulate_episode(cfg, master_seed, episode)
        samples.extend(slice_samples(tracks, cfg))
        episode += 1
    samples = samples[:n_samples]
    manifest = DatasetManifest(
        sample_count=len(samples),
        split=split,
        t_obs=cfg.t_obs,
        t_pred=cfg.t_pred,
        fps=cfg.fps,
        master_seed=int(master_seed),
        config_digest=cfg.digest(),
        world=cfg.to_dict(),
    )
    return samples, manifest
