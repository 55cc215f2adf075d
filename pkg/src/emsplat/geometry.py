"""Quaternion and rigid-transform helpers shared by the decoders and renderers."""

from __future__ import annotations

import numpy as np


def quat_to_rot(q):
    """Rotation matrices from unit quaternions (w, x, y, z). (4,)->(3,3) or (N,4)->(N,3,3)."""
    q = np.asarray(q)
    single = q.ndim == 1
    w, x, y, z = np.moveaxis(q[None, :] if single else q, -1, 0)
    R = np.stack(
        [
            1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
            2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y),
        ],
        axis=-1,
    ).reshape(*w.shape, 3, 3)
    return R[0] if single else R


def quat_to_rot_backward(q, dR):
    """Chain dL/dR back to dL/dq for unit quaternions. Shapes mirror quat_to_rot."""
    q = np.asarray(q)
    single = q.ndim == 1
    qq = q[None, :] if single else q
    dd = dR[None, :, :] if single else dR
    w, x, y, z = np.moveaxis(qq, -1, 0)
    o = np.zeros_like(w)
    # d(R)/d(component), each (N, 3, 3), rows match quat_to_rot's layout
    dRw = 2 * np.stack([o, -z, y, z, o, -x, -y, x, o], axis=-1).reshape(*w.shape, 3, 3)
    dRx = 2 * np.stack([o, y, z, y, -2 * x, -w, z, w, -2 * x], axis=-1).reshape(*w.shape, 3, 3)
    dRy = 2 * np.stack([-2 * y, x, w, x, o, z, -w, z, -2 * y], axis=-1).reshape(*w.shape, 3, 3)
    dRz = 2 * np.stack([-2 * z, -w, x, w, -2 * z, y, x, y, o], axis=-1).reshape(*w.shape, 3, 3)
    dq = np.stack(
        [np.einsum("nij,nij->n", dd, d) for d in (dRw, dRx, dRy, dRz)],
        axis=-1,
    )
    return dq[0] if single else dq


def rotate(q, vecs):
    """Apply the rotation encoded by quaternion q to row vectors (N, 3)."""
    R = quat_to_rot(q)
    return np.asarray(vecs) @ R.T


def world_to_local(q, origin, points):
    """Express world points in the frame whose pose is (origin, q).

    q rotates frame axes into world coordinates, so the inverse rotation is R^T.
    """
    R = quat_to_rot(q)
    return (np.asarray(points) - np.asarray(origin)) @ R


def normalize_rows(v, eps=0.0):
    v = np.asarray(v)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if eps:
        n = np.maximum(n, eps)
    return v / n
