"""3D vector algebra, rigid transforms, and superposition oracles.

Everything here works on plain ``numpy`` arrays of shape (3,) in double
precision. The scalar helpers (`dot`, `cross`, ...) spell out the component
arithmetic so that results are bitwise reproducible and exactly symmetric
under argument negation — the descriptor layer's permutation- and
mirror-exactness guarantees depend on that.

Two tolerance constants are used throughout the package:

* ``EPS_GEOM`` (1e-9) — geometric classification: "is this angle 0 or pi",
  "are these positions coincident". Well above f64 noise, well below any
  chemically meaningful scale.
* ``EPS_ALG`` (1e-12) — algebraic identities (orthogonality of rotation
  matrices, unit norms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateVector

EPS_GEOM = 1e-9
EPS_ALG = 1e-12


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """Build a finite 3-vector as a float64 array."""
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector components must be finite, got {v}")
    return v


def as_vec3(v) -> np.ndarray:
    """Coerce a length-3 sequence to a finite float64 array."""
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"vector components must be finite, got {a}")
    return a


def dot(a: np.ndarray, b: np.ndarray) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def norm(a: np.ndarray) -> float:
    return math.sqrt(dot(a, a))


def normalize(a: np.ndarray) -> np.ndarray:
    """Unit vector along ``a``; raises DegenerateVector below 1e-12 norm."""
    n = norm(a)
    if n <= EPS_ALG:
        raise DegenerateVector(f"cannot normalize near-zero vector {a}")
    return a / n


def clamp_unit(x: float) -> float:
    """Clamp a cosine to [-1, 1] before arccos."""
    return -1.0 if x < -1.0 else (1.0 if x > 1.0 else x)


@dataclass(frozen=True)
class RigidTransform:
    """Rotation plus translation.

    Proper rotations (det +1) model the invariance group; reflections
    (det -1) are permitted only when constructed deliberately, e.g. via
    :func:`mirror_xy`, and exist for the chirality test oracles.
    """

    rotation: np.ndarray
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = as_vec3(self.translation)
        if R.shape != (3, 3):
            raise ValueError("rotation must be a 3x3 matrix")
        if not np.allclose(R @ R.T, np.eye(3), atol=1e-10):
            raise ValueError("rotation matrix is not orthogonal")
        if abs(abs(float(np.linalg.det(R))) - 1.0) > 1e-10:
            raise ValueError("rotation matrix determinant must be +-1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @property
    def is_reflection(self) -> bool:
        return float(np.linalg.det(self.rotation)) < 0.0


def apply_transform(t: RigidTransform, p: np.ndarray, is_direction: bool = False) -> np.ndarray:
    """Apply ``t`` to a point, or rotation-only to a direction."""
    out = t.rotation @ p
    if not is_direction:
        out = out + t.translation
    return out


def compose(t2: RigidTransform, t1: RigidTransform) -> RigidTransform:
    """The transform equivalent to applying ``t1`` then ``t2``."""
    return RigidTransform(
        rotation=t2.rotation @ t1.rotation,
        translation=t2.rotation @ t1.translation + t2.translation,
    )


def identity_transform() -> RigidTransform:
    return RigidTransform(rotation=np.eye(3))


def random_rotation(seed: int) -> RigidTransform:
    """Uniform random rotation (normalized-quaternion method), no translation.

    Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    return RigidTransform(rotation=_rotation_from_rng(rng))


def random_transform(seed: int, translation_scale: float = 10.0) -> RigidTransform:
    """Uniform random rotation plus a gaussian translation. Test plumbing."""
    rng = np.random.default_rng(seed)
    R = _rotation_from_rng(rng)
    return RigidTransform(rotation=R, translation=rng.normal(size=3) * translation_scale)


def _rotation_from_rng(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def mirror_xy() -> RigidTransform:
    """Reflection through the xy-plane (z negated). Chirality oracle."""
    return RigidTransform(rotation=np.diag([1.0, 1.0, -1.0]))


def kabsch_rmsd(points_a, points_b) -> float:
    """Minimal RMSD between two equal-length point sets over proper rigid motions.

    Reflections are deliberately excluded (the SVD determinant correction),
    so mirror images of non-planar sets have strictly positive RMSD.
    """
    A = np.asarray(points_a, dtype=float)
    B = np.asarray(points_b, dtype=float)
    if A.ndim != 2 or A.shape[1] != 3 or B.ndim != 2 or B.shape[1] != 3:
        raise ValueError("expected point sets of shape (n, 3)")
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"point sets differ in length: {A.shape[0]} vs {B.shape[0]}")
    if A.shape[0] < 3:
        raise ValueError("need at least 3 points")
    Ac = A - A.mean(axis=0)
    Bc = B - B.mean(axis=0)
    H = Ac.T @ Bc
    U, _, Vt = np.linalg.svd(H)
    sign = 1.0 if float(np.linalg.det(Vt.T @ U.T)) >= 0.0 else -1.0
    R = Vt.T @ np.diag([1.0, 1.0, sign]) @ U.T
    diff = Ac @ R.T - Bc
    return math.sqrt(float((diff * diff).sum()) / A.shape[0])
