"""Unit vectors, rotations and counter-based sampling on the sphere."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterRangeError

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SphereDirection:
    """A unit 3-vector."""

    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        norm = math.sqrt(self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2)
        if abs(norm - 1) > UNIT_TOL:
            raise ParameterRangeError(f"direction has norm {norm}, expected 1")

    @classmethod
    def from_vector(cls, v, normalize: bool = False) -> "SphereDirection":
        v = np.asarray(v, dtype=float)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "SphereDirection":
        """Polar angle theta from +z, azimuth phi from +x."""
        return cls.from_vector([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                                math.cos(theta)], normalize=True)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def dot(self, other) -> float:
        return float(np.dot(self.vector, as_unit(other)))

    def angle(self, other) -> float:
        return math.acos(max(-1.0, min(1.0, self.dot(other))))


def as_unit(v) -> np.ndarray:
    """Return a unit 3-vector as an array, rejecting vectors off the sphere."""
    if isinstance(v, SphereDirection):
        return v.vector
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ParameterRangeError(f"expected a 3-vector, got shape {arr.shape}")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1) > UNIT_TOL:
        raise ParameterRangeError(f"direction has norm {norm}, expected 1")
    return arr


def planar(angle: float) -> np.ndarray:
    """Unit vector at the given angle in the x-z plane (angle 0 is +z)."""
    return np.array([math.sin(angle), 0.0, math.cos(angle)])


def sgn(x):
    """Sign with sgn(0) = +1; ties have zero measure for every density used here."""
    return np.where(np.asarray(x) >= 0, 1, -1)


def philox(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for one shard, addressed by (seed, stream) alone."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(stream)]))


def uniform_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` independent uniform unit vectors, shape (n, 3)."""
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed rotation matrix (QR of a Gaussian matrix, det +1)."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def orthonormal_frame(pole: np.ndarray) -> tuple:
    """Two unit vectors completing ``pole`` to a right-handed orthonormal frame."""
    pole = pole / np.linalg.norm(pole)
    helper = np.array([1.0, 0.0, 0.0]) if abs(pole[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(pole, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(pole, e1)
    return e1, e2
