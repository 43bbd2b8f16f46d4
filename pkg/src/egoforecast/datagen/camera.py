"""Pinhole camera model and synthetic body keypoints.

World frame is z-up.  The camera looks along the wearer's heading:
camera Z (depth) is the rotated body-forward axis, camera X (image
right) the rotated negative body-left axis, camera Y (image down) the
rotated negative up axis.  Pixels: u = fx*X/Z + cx, v = fy*Y/Z + cy.

A nearby person is a fixed 1.7 m stick figure of 26 keypoints placed at
the person's position, rotated to their walking heading, projected per
frame.  A person with fewer than 13 keypoints inside the frame is
absent (all zeros).
"""
from dataclasses import dataclass

import numpy as np

from .quat import quat_rotate


@dataclass
class CameraIntrinsics:
    fx: float = 208.0
    fy: float = 208.0
    cx: float = 240.0
    cy: float = 135.0
    width: int = 480
    height: int = 270

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValueError(
                "principal point (%.1f, %.1f) outside the %dx%d frame"
                % (self.cx, self.cy, self.width, self.height))


MIN_DEPTH = 0.1          # meters; at or below this a point is absent
MIN_VISIBLE_KEYPOINTS = 13

# 26-keypoint stick figure, body frame: x forward, y left, z up, meters.
# Order: nose, eyes, ears, shoulders, elbows, wrists, hips, knees,
# ankles, head top, neck, hip center, big toes, small toes, heels.
KEYPOINT_NAMES = (
    "nose", "left_eye", "right_eye", "left_ear", "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist", "left_hip", "right_hip",
    "left_knee", "right_knee", "left_ankle", "right_ankle",
    "head", "neck", "hip_center",
    "left_big_toe", "right_big_toe", "left_small_toe", "right_small_toe",
    "left_heel", "right_heel",
)

KEYPOINT_OFFSETS = np.array([
    (0.08,  0.00, 1.60),   # nose
    (0.07,  0.03, 1.62),   # left eye
    (0.07, -0.03, 1.62),   # right eye
    (0.00,  0.07, 1.60),   # left ear
    (0.00, -0.07, 1.60),   # right ear
    (0.00,  0.20, 1.45),   # left shoulder
    (0.00, -0.20, 1.45),   # right shoulder
    (0.00,  0.25, 1.15),   # left elbow
    (0.00, -0.25, 1.15),   # right elbow
    (0.00,  0.27, 0.85),   # left wrist
    (0.00, -0.27, 0.85),   # right wrist
    (0.00,  0.15, 0.95),   # left hip
    (0.00, -0.15, 0.95),   # right hip
    (0.00,  0.16, 0.50),   # left knee
    (0.00, -0.16, 0.50),   # right knee
    (0.00,  0.17, 0.10),   # left ankle
    (0.00, -0.17, 0.10),   # right ankle
    (0.00,  0.00, 1.70),   # head top
    (0.00,  0.00, 1.50),   # neck
    (0.00,  0.00, 0.95),   # hip center
    (0.12,  0.14, 0.02),   # left big toe
    (0.12, -0.14, 0.02),   # right big toe
    (0.10,  0.20, 0.02),   # left small toe
    (0.10, -0.20, 0.02),   # right small toe
    (-0.06, 0.16, 0.02),   # left heel
    (-0.06, -0.16, 0.02),  # right heel
])

NECK_INDEX = KEYPOINT_NAMES.index("neck")
HIP_CENTER_INDEX = KEYPOINT_NAMES.index("hip_center")


def camera_axes(ego_pose):
    """(right, down, forward) unit vectors of the camera in world frame."""
    q = np.asarray(ego_pose, dtype=np.float64)[3:7]
    forward = quat_rotate(q, np.array([1.0, 0.0, 0.0]))
    right = quat_rotate(q, np.array([0.0, -1.0, 0.0]))
    down = quat_rotate(q, np.array([0.0, 0.0, -1.0]))
    return right, down, forward


def world_to_camera(ego_pose, points):
    """World (..., 3) points -> camera-frame (X right, Y down, Z depth)."""
    ego_pose = np.asarray(ego_pose, dtype=np.float64)
    right, down, forward = camera_axes(ego_pose)
    rel = np.asarray(points, dtype=np.float64) - ego_pose[:3]
    return np.stack([rel @ right, rel @ down, rel @ forward], axis=-1)


def project_point(ego_pose, intrinsics, world_point):
    """Pixel (u, v) for one world point, or None when not in view."""
    X, Y, Z = world_to_camera(ego_pose, np.asarray(world_point, dtype=np.float64))
    if Z <= MIN_DEPTH:
        return None
    u = intrinsics.fx * X / Z + intrinsics.cx
    v = intrinsics.fy * Y / Z + intrinsics.cy
    if not (0.0 <= u <= intrinsics.width and 0.0 <= v <= intrinsics.height):
        return None
    return (float(u), float(v))


def person_keypoints_world(position_2d, heading, z_ground=0.0):
    """26 world-frame keypoints for a person at (x, y) facing ``heading``."""
    c, s = np.cos(heading), np.sin(heading)
    off = KEYPOINT_OFFSETS
    world = np.empty((26, 3))
    world[:, 0] = position_2d[0] + c * off[:, 0] - s * off[:, 1]
    world[:, 1] = position_2d[1] + s * off[:, 0] + c * off[:, 1]
    world[:, 2] = z_ground + off[:, 2]
    return world


def synthesize_keypoints(position_2d, heading, ego_pose, intrinsics,
                         pixel_noise=None):
    """(26, 2) pixel array for one person, zeros when absent.

    ``pixel_noise``, when given, is a (26, 2) additive array applied to
    visible keypoints before clamping into the frame; invisible
    keypoints stay zero.  Returns (pixels, visible_count).
    """
    world = person_keypoints_world(position_2d, heading)
    cam = world_to_camera(ego_pose, world)
    out = np.zeros((26, 2))
    visible = 0
    for i in range(26):
        X, Y, Z = cam[i]
        if Z <= MIN_DEPTH:
            continue
        u = intrinsics.fx * X / Z + intrinsics.cx
        v = intrinsics.fy * Y / Z + intrinsics.cy
        if not (0.0 <= u <= intrinsics.width and 0.0 <= v <= intrinsics.height):
            continue
        if pixel_noise is not None:
            u = min(max(u + pixel_noise[i, 0], 0.0), float(intrinsics.width))
            v = min(max(v + pixel_noise[i, 1], 0.0), float(intrinsics.height))
        out[i] = (u, v)
        visible += 1
    if visible < MIN_VISIBLE_KEYPOINTS:
        return np.zeros((26, 2)), 0
    return out, visible
