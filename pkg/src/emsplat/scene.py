"""Scene state: gaussian positions, unified embeddings, shared environment descriptor.

Every gaussian stores exactly a 3-vector position and a 32-dim embedding; all
other attributes are decoded on demand. A single 4-dim environment descriptor
is shared by the whole scene.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EMBED_DIM = 32
ENV_DIM = 4
PARAMS_PER_GAUSSIAN = 3 + EMBED_DIM  # 35


@dataclass
class GaussianScene:
    """The entire learnable scene state besides decoder weights."""

    positions: np.ndarray  # (N, 3) meters
    embeddings: np.ndarray  # (N, 32)
    env_descriptor: np.ndarray  # (4,)

    @property
    def active_count(self):
        return self.positions.shape[0]

    def validate(self):
        n = self.positions.shape[0]
        if self.positions.shape != (n, 3):
            raise ValueError(f"positions must be (N, 3), got {self.positions.shape}")
        if self.embeddings.shape != (n, EMBED_DIM):
            raise ValueError(
                f"embeddings must be (N, {EMBED_DIM}), got {self.embeddings.shape}"
            )
        if self.env_descriptor.shape != (ENV_DIM,):
            raise ValueError(f"env_descriptor must be ({ENV_DIM},)")
        if not np.all(np.isfinite(self.positions)):
            bad = int(np.argwhere(~np.isfinite(self.positions).all(axis=1))[0, 0])
            raise ValueError(f"non-finite position at index {bad}")
        return self

    def astype(self, dtype):
        return GaussianScene(
            self.positions.astype(dtype),
            self.embeddings.astype(dtype),
            self.env_descriptor.astype(dtype),
        )

    def copy(self):
        return GaussianScene(
            self.positions.copy(), self.embeddings.copy(), self.env_descriptor.copy()
        )


@dataclass
class DecodedGaussian:
    """All render-ready attributes of one gaussian, for inspection and tests."""

    covariance: np.ndarray  # (3, 3) symmetric PSD, meters^2
    scale: np.ndarray  # (3,) positive, meters
    rotation: np.ndarray  # (4,) unit quaternion
    alpha: float  # visible-light opacity, (0, 1)
    beta: float  # lidar opacity, (0, 1)
    color: np.ndarray  # (3,) in (0, 1)
    intensity: float  # (0, 1)
    raydrop: float  # [0, 1], probability of a valid return
    semantic: np.ndarray  # (3,)


@dataclass
class ParameterBudget:
    """Per-gaussian float counts of this representation vs explicit storage."""

    per_gaussian_ours: int
    per_gaussian_explicit: int
    sh_order_h: int
    semantic_dim_d: int
    reduction_fraction: float


def init_scene_from_points(points, seed, embed_std=0.1):
    """Seed a scene from raw points: positions copied, embeddings ~ N(0, embed_std^2).

    Deterministic under a fixed seed; env descriptor starts at zero.
    """
    points = np.asarray(points, dtype=np.float32)
    if points.size == 0:
        raise ValueError("empty point set")
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"points must be (N, 3), got {points.shape}")
    finite = np.isfinite(points).all(axis=1)
    if not finite.all():
        raise ValueError(f"non-finite coordinate at index {int(np.argwhere(~finite)[0, 0])}")
    rng = np.random.default_rng(seed)
    n = points.shape[0]
    embeddings = (embed_std * rng.standard_normal((n, EMBED_DIM))).astype(np.float32)
    env = np.zeros(ENV_DIM, dtype=np.float32)
    return GaussianScene(points.copy(), embeddings, env).validate()


def parameter_budget(h, d):
    """Float counts per gaussian for SH order slots h and semantic dim d.

    Explicit layout: position 3 + covariance 6 + color 3 + opacity 1 + color
    SH 3h + lidar opacity 1 + intensity 1 + intensity SH h + raydrop 1 +
    semantic d. Ours is always position 3 + embedding 32.
    """
    if h < 0 or d < 0:
        raise ValueError("h and d must be non-negative")
    explicit = 3 + 6 + 3 + 1 + 3 * h + 1 + 1 + h + 1 + d
    return ParameterBudget(
        per_gaussian_ours=PARAMS_PER_GAUSSIAN,
        per_gaussian_explicit=explicit,
        sh_order_h=h,
        semantic_dim_d=d,
        reduction_fraction=1.0 - PARAMS_PER_GAUSSIAN / explicit,
    )
