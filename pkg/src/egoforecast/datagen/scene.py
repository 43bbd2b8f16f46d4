"""Ego-centric polar scene encodings.

The grid covers the forward 120 degree field of view with 36 angular
columns and 18 radial bins out to 12 m, flattened row-major by angle
then radius into 648 values.

Semantic mode marks each cell 0 (free), 0.5 (person), or 1 (obstacle):
a column's cells are labeled by the nearest obstacle hit along the
column's center ray (walls and pillars occlude what lies behind), and
people snap to the cell containing them when not occluded.

Depth mode gives each cell min(nearest hit along the column, outer bin
edge) / 12, people included as circular hits, so a column with a hit at
6 m ramps up with the bins and plateaus at 0.5 beyond the hit.  All
values lie in [0, 1].
"""
import numpy as np

from .camera import camera_axes

N_ANGULAR = 36
N_RADIAL = 18
FOV_DEG = 120.0
R_MAX = 12.0

FREE, PERSON, OBSTACLE = 0.0, 0.5, 1.0


def _ray_wall_distance(origin, direction, walls):
    """Distance to the arena rectangle from inside, along direction."""
    xmin, xmax, ymin, ymax = walls
    best = np.inf
    dx, dy = direction
    if dx > 1e-12:
        best = min(best, (xmax - origin[0]) / dx)
    elif dx < -1e-12:
        best = min(best, (xmin - origin[0]) / dx)
    if dy > 1e-12:
        best = min(best, (ymax - origin[1]) / dy)
    elif dy < -1e-12:
        best = min(best, (ymin - origin[1]) / dy)
    return max(best, 0.0)


def _ray_circle_distance(origin, direction, center, radius):
    """Nearest positive intersection of a ray with a circle, or inf."""
    oc = np.asarray(origin) - np.asarray(center)
    b = float(oc @ direction)
    c = float(oc @ oc) - radius * radius
    disc = b * b - c
    if disc < 0.0:
        return np.inf
    root = np.sqrt(disc)
    t1 = -b - root
    if t1 > 0.0:
        return t1
    t2 = -b + root
    if t2 > 0.0:
        return t2
    return np.inf


def _column_directions(ego_pose):
    """Unit 2D direction of each angular column's center ray."""
    _, _, forward = camera_axes(ego_pose)
    yaw = float(np.arctan2(forward[1], forward[0]))
    half = np.deg2rad(FOV_DEG) / 2.0
    step = np.deg2rad(FOV_DEG) / N_ANGULAR
    angles = yaw - half + (np.arange(N_ANGULAR) + 0.5) * step
    return np.stack([np.cos(angles), np.sin(angles)], axis=1), yaw


def _obstacle_hits(origin, dirs, walls, pillars):
    hits = np.empty(N_ANGULAR)
    for a in range(N_ANGULAR):
        d = _ray_wall_distance(origin, dirs[a], walls)
        for px, py, pr in pillars:
            d = min(d, _ray_circle_distance(origin, dirs[a], (px, py), pr))
        hits[a] = d
    return hits


def encode_scene(ego_pose, walls, pillars, persons, person_radii, mode):
    """One 648-vector for the view from ``ego_pose``.

    persons: (N, 2) world positions (may be empty); person_radii: (N,).
    mode: 'semantic' or 'depth'.
    """
    ego_pose = np.asarray(ego_pose, dtype=np.float64)
    origin = ego_pose[:2]
    pillars = np.asarray(pillars, dtype=np.float64).reshape(-1, 3)
    persons = np.asarray(persons, dtype=np.float64).reshape(-1, 2)
    dirs, yaw = _column_directions(ego_pose)
    obstacle_hit = _obstacle_hits(origin, dirs, walls, pillars)

    half = np.deg2rad(FOV_DEG) / 2.0
    step = np.deg2rad(FOV_DEG) / N_ANGULAR
    r_step = R_MAX / N_RADIAL

    if mode == "semantic":
        grid = np.full((N_ANGULAR, N_RADIAL), FREE)
        for a in range(N_ANGULAR):
            hit = obstacle_hit[a]
            if hit < R_MAX:
                grid[a, int(hit / r_step)] = OBSTACLE
        for p in persons:
            rel = p - origin
            dist = float(np.hypot(*rel))
            if dist < 1e-9 or dist >= R_MAX:
                continue
            ang = np.arctan2(rel[1], rel[0]) - yaw
            ang = (ang + np.pi) % (2.0 * np.pi) - np.pi
            if abs(ang) >= half:
                continue
            a = int((ang + half) / step)
            a = min(a, N_ANGULAR - 1)
            if dist >= obstacle_hit[a]:
                continue          # occluded by a wall or pillar
            r = int(dist / r_step)
            if grid[a, r] != OBSTACLE:
                grid[a, r] = PERSON
        return grid.reshape(-1)

    if mode == "depth":
        hits = np.array(obstacle_hit, copy=True)
        for p, pr in zip(persons, person_radii):
            for a in range(N_ANGULAR):
                d = _ray_circle_distance(origin, dirs[a], p, pr)
                if d < hits[a]:
                    hits[a] = d
        outer = (np.arange(N_RADIAL) + 1) * r_step
        grid = np.minimum(hits[:, None], outer[None, :]) / R_MAX
        return grid.reshape(-1)

    raise ValueError("unknown scene mode %r (use 'semantic' or 'depth')" % mode)
