from .quat import (canonicalize, denormalize_relative, normalize_relative,
                   quat_conjugate, quat_multiply, quat_rotate,
                   renormalize_pose_sequence, yaw_to_quaternion)
from .camera import (CameraIntrinsics, KEYPOINT_OFFSETS, project_point,
                     synthesize_keypoints)
from .scene import encode_scene
from .socialforce import (CrowdState, EpisodeTracks, SpawnError, WorldConfig,
                          simulate_episode, step_social_force)
from .samples import (DatasetManifest, TrajectorySample, generate_dataset,
                      neighbor_representation, slice_samples)
from .dataset_io import DatasetError, read_dataset, write_dataset

__all__ = [
    "yaw_to_quaternion", "quat_multiply", "quat_conjugate", "quat_rotate",
    "canonicalize", "normalize_relative", "denormalize_relative",
    "renormalize_pose_sequence",
    "CameraIntrinsics", "KEYPOINT_OFFSETS", "project_point",
    "synthesize_keypoints", "encode_scene",
    "WorldConfig", "CrowdState", "EpisodeTracks", "SpawnError",
    "step_social_force", "simulate_episode",
    "TrajectorySample", "DatasetManifest", "neighbor_representation",
    "slice_samples", "generate_dataset",
    "DatasetError", "write_dataset", "read_dataset",
]
