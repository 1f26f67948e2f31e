"""Hydrostatic potential, generalized buoyancy forces and stability tests.

Sign conventions (documented once, used everywhere): the depth
coordinate ``zeta`` is positive *downward* and the free surface sits at
zero depth.  The scalar ``U`` carried around by this module is the force
function of the conservative effects, ``U = m g zeta + U_B``: its
gradient *is* the generalized force vector, and a stable equilibrium is
a maximum of ``U`` (equivalently a minimum of the potential energy
``-U``).  Most marine tools use z-up; mind the sign of ``zeta`` and of
``z_b_star`` when comparing.

Surge, sway and yaw never acquire a restoring force: the corresponding
entries of the generalized force vector are structural zeros, not small
numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clipping import (
    SubmergedSolid,
    WaterplaneProperties,
    cap_raw_moments,
    clip_by_waterplane,
    volume_and_first_moments,
    waterplane_properties,
)
from .errors import AsymmetricBody, NotAnEquilibrium, ZeroVolume
from .kinematics import NONCYCLIC, Pose, partials_r3, rotation_matrix
from .mesh import HullMesh


@dataclass(frozen=True)
class FluidEnvironment:
    """Fluid mass density (kg/m^3) and gravitational acceleration (m/s^2)."""

    rho: float = 1025.0
    g: float = 9.81

    def __post_init__(self):
        if self.rho <= 0 or self.g <= 0:
            raise ValueError("fluid density and gravity must be positive")


def potential(mesh: HullMesh, pose: Pose, env: FluidEnvironment) -> float:
    """Buoyancy force function: ``-rho g V * (depth of buoyancy center)``.

    Zero for a fully emerged body, ``-rho g V_total zeta`` plus a
    body-fixed constant once fully submerged, and never positive while
    the fixed origin sits on the free surface.
    """
    solid = clip_by_waterplane(mesh, pose)
    volume, first = volume_and_first_moments(solid)
    return -env.rho * env.g * (volume * pose.zeta + solid.plane_normal @ first)


def surface_term(
    mesh: HullMesh, pose: Pose, env: FluidEnvironment, origin_offset: float = 0.0
) -> float:
    """Waterplane quadratic integral ``1/2 * integral of depth^2 dS``.

    ``origin_offset`` is the depth of the fixed origin below the free
    surface; the integrand is the squared depth coordinate measured from
    that displaced origin.  With the origin on the surface every
    waterplane point has zero depth, so the term vanishes (to roundoff);
    this is the internal consistency check behind using the compact
    volume-only form of :func:`potential`.  Returned bare (units m^4);
    ``env`` is accepted for signature symmetry with the other operations
    and enters no arithmetic.
    """
    del env
    solid = clip_by_waterplane(mesh, pose)
    if not solid.cap_polygons:
        return 0.0
    area, first, second = cap_raw_moments(solid)
    c = pose.zeta - origin_offset
    n = solid.plane_normal
    return 0.5 * (c * c * area + 2.0 * c * (n @ first) + n @ second @ n)


def generalized_forces(mesh: HullMesh, pose: Pose, env: FluidEnvironment) -> np.ndarray:
    """Generalized buoyancy forces, coordinate order (xi..phi).

    Surge, sway and yaw entries are exactly zero.  Heave carries the
    Archimedean force ``-rho g V``; pitch and roll carry the moment
    integrals obtained by contracting the derivatives of the depth row
    with the first moments of the submerged region.
    """
    solid = clip_by_waterplane(mesh, pose)
    volume, first = volume_and_first_moments(solid)
    parts = partials_r3(pose)
    rg = env.rho * env.g
    forces = np.zeros(6)
    forces[2] = -rg * volume
    forces[4] = -rg * (parts.d_theta @ first)
    forces[5] = -rg * (parts.d_phi @ first)
    return forces


def buoyant_force_torque(mesh: HullMesh, pose: Pose, env: FluidEnvironment):
    """Resultant buoyant force and torque about G, fixed-frame components.

    The force is ``rho g V`` straight up (negative third component,
    since the fixed third axis points down); the torque is the lever of
    the buoyancy center about G.  Together they reproduce the power of
    the generalized forces for any motion:
    ``F . v_G + M . omega == Q . qdot``.
    """
    solid = clip_by_waterplane(mesh, pose)
    volume, first = volume_and_first_moments(solid)
    force = np.array([0.0, 0.0, -env.rho * env.g * volume])
    if volume > 0.0:
        lever = rotation_matrix(pose) @ (first / volume)
        torque = np.cross(lever, force)
    else:
        torque = np.zeros(3)
    return force, torque


def force_gradient(mesh: HullMesh, pose: Pose, env: FluidEnvironment) -> np.ndarray:
    """Configuration gradient of the generalized forces, 6x6, symmetric.

    Only the (zeta, theta, phi) block is nonzero.  Each entry combines a
    volume term (second derivatives of the depth row contracted with the
    first moments) and a waterplane term (product of depth-row first
    derivatives integrated exactly over the cap polygons).  For a fully
    submerged body the waterplane term is absent and the heave-heave
    entry vanishes.
    """
    solid = clip_by_waterplane(mesh, pose)
    _, first_mom = volume_and_first_moments(solid)
    area, cap_first, cap_second = cap_raw_moments(solid)
    parts = partials_r3(pose)

    # depth-function derivatives per non-cyclic coordinate: constant part
    # (offset derivative) and linear part (depth-row derivative)
    consts = (1.0, 0.0, 0.0)
    linears = (np.zeros(3), parts.d_theta, parts.d_phi)
    pidx = (0, 1, 2)  # rows of parts.first/.second for (zeta, theta, phi)

    rg = env.rho * env.g
    grad = np.zeros((6, 6))
    for a, qa in enumerate(NONCYCLIC):
        for b in range(a, len(NONCYCLIC)):
            qb = NONCYCLIC[b]
            vol_term = parts.second[pidx[a], pidx[b]] @ first_mom
            ca, cb = consts[a], consts[b]
            la, lb = linears[a], linears[b]
            wp_term = (
                ca * cb * area
                + ca * (lb @ cap_first)
                + cb * (la @ cap_first)
                + la @ cap_second @ lb
            )
            value = -rg * (vol_term + wp_term)
            grad[qa, qb] = value
            grad[qb, qa] = value
    return grad


@dataclass(frozen=True)
class HydrostaticState:
    """Everything hydrostatic about one pose, assembled in a single clip."""

    pose: Pose
    volume: float
    buoyancy_center: np.ndarray
    waterplane: WaterplaneProperties
    potential: float
    forces: np.ndarray
    solid: SubmergedSolid


def hydrostatic_state(mesh: HullMesh, pose: Pose, env: FluidEnvironment) -> HydrostaticState:
    """Clip once and assemble volume, centers, potential and forces."""
    solid = clip_by_waterplane(mesh, pose)
    volume, first = volume_and_first_moments(solid)
    center = first / volume if volume > 0.0 else np.zeros(3)
    wp = waterplane_properties(solid)
    parts = partials_r3(pose)
    rg = env.rho * env.g
    forces = np.zeros(6)
    forces[2] = -rg * volume
    forces[4] = -rg * (parts.d_theta @ first)
    forces[5] = -rg * (parts.d_phi @ first)
    value = -rg * (volume * pose.zeta + solid.plane_normal @ first)
    return HydrostaticState(pose, volume, center, wp, value, forces, solid)


def hessian_at_equilibrium(
    mesh: HullMesh,
    q_star: Pose,
    env: FluidEnvironment,
    mass: float | None = None,
    method: str = "auto",
    residual_tol: float = 1e-8,
) -> np.ndarray:
    """Hessian of the total force function at equilibrium, (zeta, theta, phi).

    With the symmetry claim on the mesh and the canonical zero-angle
    equilibrium the closed form applies::

        rho g [[-A,     A x_C,          0          ],
               [A x_C,  V z_B - S11,    0          ],
               [0,      0,              V z_B - S22]]

    otherwise (``method="general"`` or automatic fallback) the matrix is
    the non-cyclic block of :func:`force_gradient`, which is valid at
    any pose.  Gravity is linear in zeta and contributes nothing.

    Parameters
    ----------
    mass : float, optional
        Body mass for the equilibrium residual check; inferred from the
        Archimedean relation ``m = rho V*`` when omitted.
    method : {"auto", "closed_form", "general"}

    Raises
    ------
    NotAnEquilibrium
        If residual forces exceed ``residual_tol`` times the displacement.
    AsymmetricBody
        If ``method="closed_form"`` without the mesh symmetry claim.
    """
    solid = clip_by_waterplane(mesh, q_star)
    volume, first = volume_and_first_moments(solid)
    if volume <= 0.0:
        raise ZeroVolume("no submerged volume at the supposed equilibrium")
    m_eff = env.rho * volume if mass is None else mass
    displacement = m_eff * env.g

    forces = generalized_forces(mesh, q_star, env)
    resid = np.array(
        [
            m_eff * env.g + forces[2],
            forces[4] / max(mesh.diameter, 1e-300),
            forces[5] / max(mesh.diameter, 1e-300),
        ]
    )
    if np.max(np.abs(resid)) > residual_tol * displacement:
        raise NotAnEquilibrium(
            f"residual force {np.max(np.abs(resid)):.3e} exceeds "
            f"{residual_tol:.1e} * displacement"
        )

    if method not in ("auto", "closed_form", "general"):
        raise ValueError(f"unknown method {method!r}")
    zero_angles = max(abs(q_star.theta), abs(q_star.phi)) < 1e-9
    if method == "closed_form":
        if not mesh.symmetry_flag:
            raise AsymmetricBody("closed form requires the mesh symmetry claim")
        if not zero_angles:
            raise ValueError(
                "closed form is only valid at the canonical zero-angle "
                "equilibrium; use method='general' for trimmed or heeled poses"
            )
    use_closed = method == "closed_form" or (
        method == "auto" and mesh.symmetry_flag and zero_angles
    )

    if not use_closed:
        return force_gradient(mesh, q_star, env)[np.ix_(NONCYCLIC, NONCYCLIC)]

    wp = waterplane_properties(solid)
    z_b = first[2] / volume
    area = wp.area
    x_c = wp.x_c
    s11 = wp.second_moment[0, 0]
    s22 = wp.second_moment[1, 1]
    rg = env.rho * env.g
    return rg * np.array(
        [
            [-area, area * x_c, 0.0],
            [area * x_c, volume * z_b - s11, 0.0],
            [0.0, 0.0, volume * z_b - s22],
        ]
    )


def metacentric_heights(v_star: float, z_b_star: float, second_moment) -> tuple[float, float]:
    """Transverse and longitudinal metacentric heights.

    ``GM_T = S22 / V* - z_B*`` and ``GM_L = S11 / V* - z_B*`` where the
    second-moment tensor is taken about the projection of G on the
    static waterplane and ``z_B*`` is the body-frame depth of the
    buoyancy center below G (positive down).
    """
    if v_star <= 0.0:
        raise ZeroVolume("metacentric heights need positive submerged volume")
    s = np.asarray(second_moment, dtype=float)
    return float(s[1, 1] / v_star - z_b_star), float(s[0, 0] / v_star - z_b_star)


@dataclass(frozen=True)
class StabilityReport:
    """Equilibrium stiffness data and the restricted-problem verdict.

    ``margins`` are the two scalar stability margins in m^4,
    ``(S22 - V z_B, S11 - V z_B - A x_C^2)``; the configuration is
    pseudo-stable exactly when both are strictly positive, which matches
    the classic conditions ``GM_T > 0`` and
    ``Delta GM_L > rho g A x_C^2``.
    """

    hessian: np.ndarray
    gm_transverse: float
    gm_longitudinal: float
    z_b_star: float
    displacement: float
    pseudo_stable: bool
    margins: tuple[float, float]
    marginal: bool


def pseudo_stability_check(
    hessian,
    *,
    v_star: float,
    z_b_star: float,
    waterplane_area: float,
    x_c: float,
    second_moment,
    env: FluidEnvironment,
    margin_tol: float = 1e-9,
) -> StabilityReport:
    """Classify an equilibrium by the two scalar stability margins.

    The verdict must and does agree with negative definiteness of the
    Hessian tested by leading principal minors; disagreement outside the
    marginal band raises ``ValueError`` because it means the inputs are
    mutually inconsistent.  ``marginal`` flags margins within
    ``margin_tol`` (relative to the second-moment scale) of zero; it is
    a flag, not an error.
    """
    hessian = np.asarray(hessian, dtype=float)
    s = np.asarray(second_moment, dtype=float)
    gm_t, gm_l = metacentric_heights(v_star, z_b_star, s)
    displacement = env.rho * env.g * v_star

    margin_t = float(s[1, 1] - v_star * z_b_star)
    margin_l = float(s[0, 0] - v_star * z_b_star - waterplane_area * x_c**2)
    stable = margin_t > 0.0 and margin_l > 0.0

    scale = max(abs(s[0, 0]), abs(s[1, 1]), abs(v_star * z_b_star), waterplane_area * x_c**2)
    marginal = bool(
        min(abs(margin_t), abs(margin_l)) <= margin_tol * max(scale, 1e-300)
    )

    neg = -hessian
    minors = (
        neg[0, 0],
        np.linalg.det(neg[:2, :2]),
        np.linalg.det(neg),
    )
    stable_by_minors = all(m > 0.0 for m in minors)
    if stable_by_minors != stable and not marginal:
        raise ValueError(
            "stability verdict from margins disagrees with the Hessian minors; "
            "inconsistent inputs"
        )

    return StabilityReport(
        hessian=hessian,
        gm_transverse=gm_t,
        gm_longitudinal=gm_l,
        z_b_star=float(z_b_star),
        displacement=float(displacement),
        pseudo_stable=stable,
        margins=(margin_t, margin_l),
        marginal=marginal,
    )
