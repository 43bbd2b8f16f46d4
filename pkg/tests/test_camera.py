"""Pinhole projection and keypoint synthesis hand-value checks."""
import numpy as np

from egoforecast.datagen.camera import (HIP_CENTER_INDEX, KEYPOINT_NAMES,
                                        KEYPOINT_OFFSETS,
                                        MIN_VISIBLE_KEYPOINTS, NECK_INDEX,
                                        CameraIntrinsics, project_point,
                                        person_keypoints_world,
                                        synthesize_keypoints)
from egoforecast.datagen.quat import yaw_to_quaternion

EGO_H = 1.4


def _pose(x=0.0, y=0.0, z=EGO_H, yaw=0.0):
    return np.concatenate([[x, y, z], yaw_to_quaternion(yaw)])


def test_optical_axis_hits_principal_point():
    intr = CameraIntrinsics()
    pose = _pose()
    for depth in (0.5, 2.0, 7.0):
        uv = project_point(pose, intr, [depth, 0.0, EGO_H])
        assert uv == (240.0, 135.0)


def test_hand_evaluated_horizontal_pixel():
    # camera-frame (X, Y, Z) = (1, 0, 2) with fx = 240:
    # u = 240 * 1/2 + 240 = 360
    intr = CameraIntrinsics(fx=240.0)
    pose = _pose()
    # camera X is world -y for a yaw-0 pose; Z is world +x
    uv = project_point(pose, intr, [2.0, -1.0, EGO_H])
    assert uv is not None
    assert abs(uv[0] - 360.0) < 1e-9
    assert abs(uv[1] - 135.0) < 1e-9


def test_point_behind_camera_is_absent():
    intr = CameraIntrinsics()
    assert project_point(_pose(), intr, [-1.0, 0.0, EGO_H]) is None
    assert project_point(_pose(), intr, [0.05, 0.0, EGO_H]) is None


def test_point_outside_frame_is_absent():
    intr = CameraIntrinsics()
    assert project_point(_pose(), intr, [1.0, 50.0, EGO_H]) is None


def test_yawed_camera_looks_along_yaw():
    intr = CameraIntrinsics()
    pose = _pose(yaw=np.pi / 2)       # facing world +y
    uv = project_point(pose, intr, [0.0, 3.0, EGO_H])
    assert uv is not None
    assert abs(uv[0] - 240.0) < 1e-9
    assert abs(uv[1] - 135.0) < 1e-9


def test_keypoint_table_layout():
    assert len(KEYPOINT_NAMES) == 26
    assert KEYPOINT_OFFSETS.shape == (26, 3)
    assert KEYPOINT_NAMES[NECK_INDEX] == "neck"
    assert KEYPOINT_NAMES[HIP_CENTER_INDEX] == "hip_center"
    height = KEYPOINT_OFFSETS[:, 2].max() - KEYPOINT_OFFSETS[:, 2].min()
    assert 1.5 < height < 1.9         # human-sized skeleton


def test_person_ahead_is_centered_and_fully_visible():
    intr = CameraIntrinsics()
    pose = _pose()
    pixels, visible = synthesize_keypoints((3.0, 0.0), np.pi, pose, intr)
    assert visible == 26
    u = pixels[:, 0]
    assert abs(u.mean() - 240.0) < 1.0           # horizontally centered
    assert np.all(np.abs(u - 240.0) < 30.0)      # shoulder-width spread at 3 m
    assert np.all((pixels[:, 0] >= 0) & (pixels[:, 0] <= 480))
    assert np.all((pixels[:, 1] >= 0) & (pixels[:, 1] <= 270))


def test_person_behind_is_all_zeros():
    intr = CameraIntrinsics()
    pixels, visible = synthesize_keypoints((-3.0, 0.0), 0.0, _pose(), intr)
    assert visible == 0
    assert not pixels.any()


def test_partial_visibility_below_threshold_zeroes_out():
    intr = CameraIntrinsics()
    # person very close: most keypoints leave the frame
    pixels, visible = synthesize_keypoints((0.4, 0.0), np.pi, _pose(), intr)
    assert visible == 0 or visible >= MIN_VISIBLE_KEYPOINTS
    if visible == 0:
        assert not pixels.any()


def test_noise_applied_then_clamped():
    intr = CameraIntrinsics()
    noise = np.full((26, 2), 1e6)
    pixels, visible = synthesize_keypoints((3.0, 0.0), np.pi, _pose(), intr,
                                           pixel_noise=noise)
    assert visible == 26              # visibility decided before noise
    assert np.all(pixels[:, 0] == 480.0)
    assert np.all(pixels[:, 1] == 270.0)


def test_world_keypoints_follow_heading():
    w0 = person_keypoints_world((0.0, 0.0), 0.0)
    w90 = person_keypoints_world((0.0, 0.0), np.pi / 2)
    # rotating the person about z maps x offsets onto y
    np.testing.assert_allclose(w90[:, 1], w0[:, 0], atol=1e-12)
    np.testing.assert_allclose(w90[:, 0], -w0[:, 1], atol=1e-12)
    np.testing.assert_allclose(w90[:, 2], w0[:, 2], atol=1e-15)
