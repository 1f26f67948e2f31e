"""Pose coordinates, rotation matrices and the angle-rate map.

Frame conventions used throughout the package:

* Fixed frame: origin on the free surface, third axis pointing *down*.
  ``zeta`` is the submergence of the mass center G (positive below the
  surface).
* Body frame: origin at G.  The third body axis points into the same
  half-space as the fixed down axis; for port-starboard symmetric hulls
  the plane ``x2 = 0`` is the symmetry plane.
* Orientation: yaw ``psi`` about the down axis, then pitch ``theta``,
  then roll ``phi``.  The rotation matrix maps body components to fixed
  components, ``v_fixed = R @ v_body``, so its rows are the fixed axes
  expressed in body coordinates.

Coordinate order is ``(xi, eta, zeta, psi, theta, phi)`` everywhere; the
``CYCLIC`` indices (surge, sway, yaw) carry no hydrostatic restoring
force, the ``NONCYCLIC`` ones (heave, pitch, roll) do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GimbalLock

COORD_NAMES = ("xi", "eta", "zeta", "psi", "theta", "phi")
CYCLIC = (0, 1, 3)
NONCYCLIC = (2, 4, 5)

#: pitch range guard for the angle-rate map, radians
GIMBAL_GUARD = 1e-6


@dataclass(frozen=True)
class Pose:
    """Configuration of the body: position of G plus yaw-pitch-roll angles.

    ``zeta`` is positive downward.  ``theta`` must stay strictly inside
    ``(-pi/2, pi/2)`` so the angle-rate map remains invertible.
    """

    xi: float = 0.0
    eta: float = 0.0
    zeta: float = 0.0
    psi: float = 0.0
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        values = (self.xi, self.eta, self.zeta, self.psi, self.theta, self.phi)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"pose coordinates must be finite, got {values}")
        if abs(self.theta) >= math.pi / 2:
            raise GimbalLock(f"pitch {self.theta} outside (-pi/2, pi/2)")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.xi, self.eta, self.zeta, self.psi, self.theta, self.phi]
        )

    @classmethod
    def from_array(cls, q) -> "Pose":
        q = np.asarray(q, dtype=float)
        return cls(*q.tolist())

    def replace(self, **kwargs) -> "Pose":
        state = {name: getattr(self, name) for name in COORD_NAMES}
        state.update(kwargs)
        return Pose(**state)


def _pose_unchecked(q) -> Pose:
    """Pose without invariant checks, for integrator internals only.

    Adaptive steppers may probe configurations slightly past the pitch
    guard while locating the terminal event; those evaluations must not
    raise even though user-facing constructors would.
    """
    pose = object.__new__(Pose)
    for name, value in zip(COORD_NAMES, q):
        object.__setattr__(pose, name, float(value))
    return pose


def rotation_matrix(pose: Pose) -> np.ndarray:
    """Body-to-fixed rotation matrix for the pose's yaw-pitch-roll angles.

    The third row is ``(-sin(theta), cos(theta) sin(phi),
    cos(theta) cos(phi))``: the fixed down axis in body components.
    """
    cps, sps = math.cos(pose.psi), math.sin(pose.psi)
    cth, sth = math.cos(pose.theta), math.sin(pose.theta)
    cph, sph = math.cos(pose.phi), math.sin(pose.phi)
    return np.array(
        [
            [cps * cth, cps * sth * sph - sps * cph, cps * sth * cph + sps * sph],
            [sps * cth, sps * sth * sph + cps * cph, sps * sth * cph - cps * sph],
            [-sth, cth * sph, cth * cph],
        ]
    )


def k3_body(pose: Pose) -> np.ndarray:
    """Fixed down axis expressed in body coordinates (unit vector).

    Equals the third row of :func:`rotation_matrix` and is also the
    gradient of the depth function ``zeta + k3 . x`` with respect to the
    body point ``x``.
    """
    cth, sth = math.cos(pose.theta), math.sin(pose.theta)
    cph, sph = math.cos(pose.phi), math.sin(pose.phi)
    return np.array([-sth, cth * sph, cth * cph])


def _omega_matrix(theta: float, phi: float) -> np.ndarray:
    cth, sth = math.cos(theta), math.sin(theta)
    cph, sph = math.cos(phi), math.sin(phi)
    return np.array(
        [
            [-sth, 0.0, 1.0],
            [cth * sph, cph, 0.0],
            [cth * cph, -sph, 0.0],
        ]
    )


def omega_map(theta: float, phi: float) -> np.ndarray:
    """Matrix W mapping angle rates to the body-frame angular velocity.

    ``omega_body = W @ (psi_dot, theta_dot, phi_dot)``.  The determinant
    is ``-cos(theta)``, so the map degenerates at ``theta = +-pi/2``.

    Raises
    ------
    GimbalLock
        If ``|theta| >= pi/2 - GIMBAL_GUARD``.
    """
    if abs(theta) >= math.pi / 2 - GIMBAL_GUARD:
        raise GimbalLock(f"pitch {theta} within guard of pi/2")
    return _omega_matrix(theta, phi)


def omega_map_partials(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of :func:`omega_map` with respect to theta and phi."""
    cth, sth = math.cos(theta), math.sin(theta)
    cph, sph = math.cos(phi), math.sin(phi)
    d_theta = np.array(
        [
            [-cth, 0.0, 0.0],
            [-sth * sph, 0.0, 0.0],
            [-sth * cph, 0.0, 0.0],
        ]
    )
    d_phi = np.array(
        [
            [0.0, 0.0, 0.0],
            [cth * cph, -sph, 0.0],
            [-cth * sph, -cph, 0.0],
        ]
    )
    return d_theta, d_phi


@dataclass(frozen=True)
class R3Partials:
    """Derivatives of the depth row (third row of the rotation matrix).

    ``first[k]`` and ``second[k, r]`` are 3-vectors of partial
    derivatives with respect to the coordinates in :attr:`coords` order
    ``(zeta, theta, phi, psi)``.  The depth row does not involve zeta or
    psi, so those slices are identically zero; they are kept so callers
    can index by coordinate without special cases.
    """

    value: np.ndarray
    first: np.ndarray
    second: np.ndarray

    coords = ("zeta", "theta", "phi", "psi")

    @property
    def d_theta(self) -> np.ndarray:
        return self.first[1]

    @property
    def d_phi(self) -> np.ndarray:
        return self.first[2]


def partials_r3(pose: Pose) -> R3Partials:
    """First and second derivatives of the depth row of the rotation matrix.

    At zero angles the classic contractions hold: ``d/dtheta . x = -x1``,
    ``d/dphi . x = x2`` and both pure second derivatives contract to
    ``-x3`` while the mixed theta-phi term vanishes.
    """
    cth, sth = math.cos(pose.theta), math.sin(pose.theta)
    cph, sph = math.cos(pose.phi), math.sin(pose.phi)

    value = np.array([-sth, cth * sph, cth * cph])
    first = np.zeros((4, 3))
    first[1] = [-cth, -sth * sph, -sth * cph]
    first[2] = [0.0, cth * cph, -cth * sph]

    second = np.zeros((4, 4, 3))
    second[1, 1] = [sth, -cth * sph, -cth * cph]
    second[1, 2] = [0.0, -sth * cph, sth * sph]
    second[2, 1] = second[1, 2]
    second[2, 2] = [0.0, -cth * sph, -cth * cph]
    return R3Partials(value=value, first=first, second=second)
