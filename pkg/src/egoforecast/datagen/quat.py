"""Quaternion helpers and relative-pose normalization.

Quaternions are (w, x, y, z), unit norm, sign-canonicalized so w >= 0
(and z >= 0 on the w = 0 boundary).  A pose is a 7-vector
(x, y, z, qw, qx, qy, qz).
"""
import numpy as np

IDENTITY_POSE = np.array([0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])


def canonicalize(q):
    """Resolve the double cover: flip sign so w >= 0, z >= 0 if w == 0."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = q
    if w < 0.0 or (w == 0.0 and z < 0.0):
        return -q
    return np.array(q, copy=True)


def yaw_to_quaternion(yaw):
    """Rotation about the vertical axis: (cos(yaw/2), 0, 0, sin(yaw/2))."""
    return canonicalize([np.cos(yaw / 2.0), 0.0, 0.0, np.sin(yaw / 2.0)])


def quat_multiply(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q, v):
    """Rotate 3-vector(s) v by unit quaternion q; v may be (..., 3)."""
    v = np.asarray(v, dtype=np.float64)
    w = q[0]
    u = np.asarray(q[1:4])
    uv = np.cross(u, v)
    return v + 2.0 * w * uv + 2.0 * np.cross(u, uv)


def _check_unit(q, where):
    n = float(np.linalg.norm(q))
    if abs(n - 1.0) > 1e-6:
        raise ValueError(
            "%s: quaternion %r has norm %.9f, expected unit" % (where, q, n))


def normalize_relative(poses):
    """Re-express a pose sequence relative to its own first pose.

    p'_t = R0^-1 (p_t - p0); q'_t = q0^-1 * q_t, sign-canonicalized.
    Row 0 becomes the exact identity pose.
    """
    poses = np.asarray(poses, dtype=np.float64)
    if poses.ndim != 2 or poses.shape[1] != 7 or poses.shape[0] < 1:
        raise ValueError("need an (n, 7) pose sequence, got %r" % (poses.shape,))
    for i, q in enumerate(poses[:, 3:7]):
        _check_unit(q, "pose %d" % i)
    p0 = poses[0, :3]
    q0_inv = quat_conjugate(poses[0, 3:7])
    out = np.empty_like(poses)
    out[0] = IDENTITY_POSE
    for t in range(1, poses.shape[0]):
        out[t, :3] = quat_rotate(q0_inv, poses[t, :3] - p0)
        out[t, 3:7] = canonicalize(quat_multiply(q0_inv, poses[t, 3:7]))
    return out


def denormalize_relative(rel_poses, ref_pose):
    """Inverse of :func:`normalize_relative` given the original first pose.

    Quaternions are sign-canonicalized, so the round trip reproduces
    poses up to quaternion sign.
    """
    rel = np.asarray(rel_poses, dtype=np.float64)
    ref = np.asarray(ref_pose, dtype=np.float64)
    if rel.ndim != 2 or rel.shape[1] != 7:
        raise ValueError("need an (n, 7) pose sequence, got %r" % (rel.shape,))
    if ref.shape != (7,):
        raise ValueError("reference pose must be a 7-vector, got %r" % (ref.shape,))
    _check_unit(ref[3:7], "reference pose")
    p0, q0 = ref[:3], ref[3:7]
    out = np.empty_like(rel)
    for t in range(rel.shape[0]):
        _check_unit(rel[t, 3:7], "pose %d" % t)
        out[t, :3] = quat_rotate(q0, rel[t, :3]) + p0
        out[t, 3:7] = canonicalize(quat_multiply(q0, rel[t, 3:7]))
    return out


def renormalize_pose_sequence(seq):
    """Clamp each pose's quaternion back to unit norm, canonical sign.

    Post-hoc cleanup for consumers of raw model outputs; never applied
    before metrics.
    """
    seq = np.array(seq, dtype=np.float64, copy=True)
    for t in range(seq.shape[0]):
        q = seq[t, 3:7]
        n = float(np.linalg.norm(q))
        if n < 1e-12:
            seq[t, 3:7] = (1.0, 0.0, 0.0, 0.0)
        else:
            seq[t, 3:7] = canonicalize(q / n)
    return seq
