import math

import numpy as np
import pytest

import floatdyn as fd
from floatdyn import (
    Pose,
    buoyant_force_torque,
    clip_by_waterplane,
    force_gradient,
    generalized_forces,
    hessian_at_equilibrium,
    hydrostatic_state,
    metacentric_heights,
    potential,
    pseudo_stability_check,
    surface_term,
    volume_and_first_moments,
    waterplane_properties,
)
from floatdyn.errors import AsymmetricBody, NotAnEquilibrium, ZeroVolume
from floatdyn.kinematics import omega_map, rotation_matrix
from floatdyn.verification import random_partial_poses

RHO_G = 1000.0 * 9.81


class TestPotential:
    def test_fully_emerged_is_zero(self, cube, env):
        assert potential(cube, Pose(zeta=-0.8), env) == 0.0

    def test_half_submerged_cube_value(self, cube, env):
        # V = 0.5 at buoyancy-center depth 0.25
        assert potential(cube, Pose(zeta=0.0), env) == pytest.approx(
            -1000.0 * 9.81 * 0.5 * 0.25, rel=1e-14
        )

    def test_linear_in_depth_once_submerged(self, cube, env):
        values = [potential(cube, Pose(zeta=z), env) for z in (0.7, 1.0, 1.6)]
        assert values[0] == pytest.approx(-RHO_G * 0.7, rel=1e-13)
        slope1 = (values[1] - values[0]) / 0.3
        slope2 = (values[2] - values[1]) / 0.6
        assert slope1 == pytest.approx(-RHO_G, rel=1e-12)
        assert slope2 == pytest.approx(slope1, rel=1e-12)

    def test_never_positive(self, l_prism, env, rng):
        for pose in random_partial_poses(l_prism, 20, rng):
            assert potential(l_prism, pose, env) <= 1e-12


class TestSurfaceTerm:
    def test_vanishes_with_origin_on_surface(self, cube, env, rng):
        scale4 = cube.diameter**4
        for pose in random_partial_poses(cube, 25, rng):
            assert abs(surface_term(cube, pose, env)) < 1e-12 * scale4

    def test_offset_origin_level_cube(self, cube, env):
        h = 0.37
        # constant integrand h over the unit cap
        assert surface_term(cube, Pose(zeta=0.2), env, origin_offset=h) == pytest.approx(
            0.5 * 1.0 * h**2, rel=1e-12
        )

    def test_two_potential_forms_reconcile_under_origin_shift(self, cube, env, rng):
        # the volume+surface form with a shifted origin equals the compact
        # form plus rho g (V h + A h^2 / 2)
        h = 0.23
        rg = env.rho * env.g
        for pose in random_partial_poses(cube, 10, rng):
            solid = clip_by_waterplane(cube, pose)
            volume, first = volume_and_first_moments(solid)
            area = waterplane_properties(solid).area
            compact = potential(cube, pose, env)
            depth_integral = volume * pose.zeta + solid.plane_normal @ first
            shifted = rg * (-(depth_integral - volume * h)
                            + surface_term(cube, pose, env, origin_offset=h))
            assert shifted == pytest.approx(
                compact + rg * (volume * h + 0.5 * area * h * h), rel=1e-10
            )


class TestGeneralizedForces:
    def test_level_half_submerged_cube(self, cube, env):
        forces = generalized_forces(cube, Pose(zeta=0.0), env)
        assert forces[0] == 0.0 and forces[1] == 0.0 and forces[3] == 0.0
        assert forces[2] == pytest.approx(-RHO_G * 0.5, rel=1e-14)
        assert abs(forces[4]) < 1e-12 * RHO_G
        assert abs(forces[5]) < 1e-12 * RHO_G

    def test_fully_submerged_cube_any_angles(self, cube, env):
        forces = generalized_forces(cube, Pose(zeta=1.5, theta=0.4, phi=-0.8), env)
        assert forces[2] == pytest.approx(-RHO_G * 1.0, rel=1e-13)
        # centroid at the origin: no restoring moments
        assert abs(forces[4]) < 1e-12 * RHO_G
        assert abs(forces[5]) < 1e-12 * RHO_G

    def test_matches_trigonometric_moment_integrals(self, l_prism, env, rng):
        # pitch / roll entries written out with explicit trigonometry
        for pose in random_partial_poses(l_prism, 15, rng):
            solid = clip_by_waterplane(l_prism, pose)
            _, m = volume_and_first_moments(solid)
            cth, sth = math.cos(pose.theta), math.sin(pose.theta)
            cph, sph = math.cos(pose.phi), math.sin(pose.phi)
            rg = env.rho * env.g
            q_theta = rg * (cth * m[0] + sth * (sph * m[1] + cph * m[2]))
            q_phi = -rg * cth * (cph * m[1] - sph * m[2])
            forces = generalized_forces(l_prism, pose, env)
            assert forces[4] == pytest.approx(q_theta, rel=1e-12, abs=1e-9)
            assert forces[5] == pytest.approx(q_phi, rel=1e-12, abs=1e-9)

    def test_matches_finite_differences_of_potential(self, cube, env, rng):
        from floatdyn.verification import gradient_residual

        poses = random_partial_poses(cube, 20, rng)
        assert gradient_residual(cube, env, poses) < 1e-5


class TestBuoyantForceTorque:
    def test_level_cube_resultant(self, cube, env):
        force, torque = buoyant_force_torque(cube, Pose(zeta=0.0), env)
        np.testing.assert_allclose(force, [0.0, 0.0, -4905.0], rtol=1e-14)
        np.testing.assert_allclose(torque, np.zeros(3), atol=1e-10)

    def test_offset_buoyancy_center_lever(self, env):
        # box shifted along x1 fully submerged: B sits at +x1 from G
        mesh = fd.HullMesh(
            (fd.shapes.box(1.0, 1.0, 1.0).vertices + [0.3, 0.0, 0.0]),
            fd.shapes.box(1.0, 1.0, 1.0).triangles,
        )
        force, torque = buoyant_force_torque(mesh, Pose(zeta=2.0), env)
        np.testing.assert_allclose(force, [0.0, 0.0, -RHO_G], rtol=1e-13)
        np.testing.assert_allclose(
            torque, [0.0, RHO_G * 0.3, 0.0], rtol=1e-12, atol=1e-9
        )

    def test_power_identity(self, l_prism, env, rng):
        # F . v_G + M . omega equals Q . qdot for arbitrary rates
        for pose in random_partial_poses(l_prism, 5, rng):
            force, torque = buoyant_force_torque(l_prism, pose, env)
            forces = generalized_forces(l_prism, pose, env)
            r = rotation_matrix(pose)
            w = omega_map(pose.theta, pose.phi)
            for _ in range(20):
                qdot = rng.normal(size=6)
                v_g = qdot[:3]
                omega_body = w @ qdot[[3, 4, 5]]
                power_resultant = force @ v_g + torque @ (r @ omega_body)
                power_generalized = forces @ qdot
                assert power_resultant == pytest.approx(
                    power_generalized, rel=1e-9, abs=1e-9
                )


class TestForceGradient:
    def test_level_cube_heave_stiffness(self, cube, env):
        grad = force_gradient(cube, Pose(zeta=0.0), env)
        assert grad[2, 2] == pytest.approx(-RHO_G * 1.0, rel=1e-13)
        # only the restoring block is nonzero
        mask = np.zeros((6, 6), dtype=bool)
        mask[np.ix_((2, 4, 5), (2, 4, 5))] = True
        assert np.all(grad[~mask] == 0.0)

    def test_matches_finite_differences(self, cube, env, rng):
        step = 1e-6
        for pose in random_partial_poses(cube, 10, rng):
            grad = force_gradient(cube, pose, env)
            scale = np.abs(grad).max()
            for r in (2, 4, 5):
                q = pose.as_array()
                qp, qm = q.copy(), q.copy()
                qp[r] += step
                qm[r] -= step
                fd_col = (
                    generalized_forces(cube, Pose.from_array(qp), env)
                    - generalized_forces(cube, Pose.from_array(qm), env)
                ) / (2 * step)
                np.testing.assert_allclose(
                    grad[:, r], fd_col, atol=1e-5 * scale
                )

    def test_fully_submerged_loses_waterplane_stiffness(self, cube, env):
        grad = force_gradient(cube, Pose(zeta=2.0, theta=0.3, phi=0.2), env)
        assert grad[2, 2] == 0.0
        assert grad[2, 4] == 0.0 and grad[2, 5] == 0.0

    def test_symmetric(self, l_prism, env, rng):
        for pose in random_partial_poses(l_prism, 10, rng):
            grad = force_gradient(l_prism, pose, env)
            assert np.array_equal(grad, grad.T)


class TestHessianAtEquilibrium:
    def test_half_density_cube_closed_form(self, cube, env):
        h = hessian_at_equilibrium(cube, Pose(zeta=0.0), env)
        expected = RHO_G * np.diag([-1.0, 1.0 / 24.0, 1.0 / 24.0])
        np.testing.assert_allclose(h, expected, rtol=1e-13, atol=1e-9)

    def test_zero_pattern(self, barge, env):
        h = hessian_at_equilibrium(barge, Pose(zeta=0.0), env)
        assert h[0, 2] == 0.0 and h[1, 2] == 0.0
        assert h[2, 0] == 0.0 and h[2, 1] == 0.0

    def test_closed_form_matches_general_block(self, barge, env):
        h_closed = hessian_at_equilibrium(barge, Pose(zeta=0.0), env, method="closed_form")
        h_general = hessian_at_equilibrium(barge, Pose(zeta=0.0), env, method="general")
        assert np.abs(h_closed - h_general).max() <= 1e-8 * np.abs(h_closed).max()

    def test_not_an_equilibrium_rejected(self, cube, env):
        with pytest.raises(NotAnEquilibrium):
            hessian_at_equilibrium(cube, Pose(zeta=0.0), env, mass=900.0)
        with pytest.raises(NotAnEquilibrium):
            # strong pitch moment at a tilted non-equilibrium pose
            hessian_at_equilibrium(cube, Pose(zeta=0.2, theta=0.3), env)

    def test_asymmetric_body_requires_general_route(self, l_prism, env):
        pose = _level_equilibrium_pose(l_prism, env)
        with pytest.raises(AsymmetricBody):
            hessian_at_equilibrium(l_prism, pose, env, method="closed_form")

    def test_auto_falls_back_for_asymmetric_body(self, l_prism, env):
        pose = _level_equilibrium_pose(l_prism, env)
        auto = hessian_at_equilibrium(l_prism, pose, env)
        general = hessian_at_equilibrium(l_prism, pose, env, method="general")
        np.testing.assert_array_equal(auto, general)

    def test_zero_volume_rejected(self, cube, env):
        with pytest.raises(ZeroVolume):
            hessian_at_equilibrium(cube, Pose(zeta=-0.8), env)


def _level_equilibrium_pose(mesh, env):
    """Equilibrium of the uniform half-density body at zero angles."""
    from floatdyn import BodyProperties, find_equilibrium, inertia_from_mesh

    mass, inertia = inertia_from_mesh(mesh, env.rho / 2.0)
    body = BodyProperties(mass, inertia)
    return find_equilibrium(mesh, body, env, initial=(0.0, 0.0, 0.0)).pose


class TestMetacentricHeights:
    def test_half_density_cube_is_the_classic_negative(self, cube, env):
        solid = clip_by_waterplane(cube, Pose(zeta=0.0))
        volume, first = volume_and_first_moments(solid)
        wp = waterplane_properties(solid)
        gm_t, gm_l = metacentric_heights(volume, first[2] / volume, wp.second_moment)
        assert gm_t == pytest.approx(-1.0 / 12.0, abs=1e-10)
        assert gm_l == pytest.approx(-1.0 / 12.0, abs=1e-10)

    def test_barge_against_keel_reference_oracle(self, barge, env):
        # classic naval form: GM = KB + BM - KG measured from the keel
        draft, beam, length, height = 0.25, 1.0, 2.0, 0.5
        kb = draft / 2.0
        bm_t = length * beam**3 / 12.0 / (length * beam * draft)
        bm_l = beam * length**3 / 12.0 / (length * beam * draft)
        kg = height / 2.0
        solid = clip_by_waterplane(barge, Pose(zeta=0.0))
        volume, first = volume_and_first_moments(solid)
        wp = waterplane_properties(solid)
        gm_t, gm_l = metacentric_heights(volume, first[2] / volume, wp.second_moment)
        assert gm_t == pytest.approx(kb + bm_t - kg, rel=1e-9)
        assert gm_l == pytest.approx(kb + bm_l - kg, rel=1e-9)

    def test_square_section_makes_them_equal(self, env):
        # four-fold symmetry: S11 == S22 so both heights coincide
        mesh = fd.shapes.box(1.0, 1.0, 0.5)
        solid = clip_by_waterplane(mesh, Pose(zeta=0.1))
        volume, first = volume_and_first_moments(solid)
        wp = waterplane_properties(solid)
        gm_t, gm_l = metacentric_heights(volume, first[2] / volume, wp.second_moment)
        assert gm_t == pytest.approx(gm_l, rel=1e-12)

    def test_zero_volume_raises(self):
        with pytest.raises(ZeroVolume):
            metacentric_heights(0.0, 0.1, np.eye(3))


class TestPseudoStability:
    def _report(self, mesh, env, pose=Pose(zeta=0.0)):
        solid = clip_by_waterplane(mesh, pose)
        volume, first = volume_and_first_moments(solid)
        wp = waterplane_properties(solid)
        hessian = hessian_at_equilibrium(mesh, pose, env)
        return pseudo_stability_check(
            hessian,
            v_star=volume,
            z_b_star=first[2] / volume,
            waterplane_area=wp.area,
            x_c=wp.x_c,
            second_moment=wp.second_moment,
            env=env,
        )

    def test_half_density_cube_not_stable(self, cube, env):
        report = self._report(cube, env)
        assert not report.pseudo_stable
        assert report.gm_transverse == pytest.approx(-1.0 / 12.0, abs=1e-10)
        assert report.margins[0] < 0.0

    def test_barge_stable(self, barge, env):
        report = self._report(barge, env)
        assert report.pseudo_stable
        assert report.margins[0] > 0.0 and report.margins[1] > 0.0
        assert not report.marginal
        assert report.displacement == pytest.approx(RHO_G * 0.5, rel=1e-12)

    def test_centered_floating_center_reduces_second_condition(self, barge, env):
        # x_C = 0: the longitudinal margin is V * GM_L exactly
        report = self._report(barge, env)
        assert report.margins[1] == pytest.approx(
            0.5 * report.gm_longitudinal, rel=1e-12
        )

    def test_verdict_matches_hessian_minors(self, cube, barge, env):
        for mesh in (cube, barge):
            report = self._report(mesh, env)
            neg = -report.hessian
            minors = [neg[0, 0], np.linalg.det(neg[:2, :2]), np.linalg.det(neg)]
            assert report.pseudo_stable == all(m > 0 for m in minors)

    def test_marginal_flag(self, env):
        # doctor the margins to sit at zero: flag raised, no exception
        hessian = np.diag([-1.0, 0.0, 0.0])
        report = pseudo_stability_check(
            hessian,
            v_star=1.0,
            z_b_star=0.1,
            waterplane_area=1.0,
            x_c=0.0,
            second_moment=np.diag([0.1, 0.1, 0.0]),
            env=env,
        )
        assert report.marginal


class TestOffsetFloatingCenter:
    """Raked hull: the waterplane centroid is ahead of G at equilibrium,
    so the heave-pitch coupling entries of the Hessian are nonzero and
    the second stability condition carries its quadratic penalty."""

    def test_equilibrium_with_offset_floating_center(self, raked_prism, env):
        mesh, pose, body = raked_prism
        forces = generalized_forces(mesh, pose, env)
        assert abs(body.mass * env.g + forces[2]) < 1e-9 * body.mass * env.g
        assert abs(forces[4]) < 1e-9 * body.mass * env.g
        wp = waterplane_properties(clip_by_waterplane(mesh, pose))
        assert abs(wp.x_c) > 0.05  # genuinely offset

    def test_coupling_entry_sign_against_force_gradient(self, raked_prism, env):
        mesh, pose, body = raked_prism
        closed = hessian_at_equilibrium(mesh, pose, env, method="closed_form")
        general = hessian_at_equilibrium(mesh, pose, env, method="general")
        assert np.abs(closed - general).max() <= 1e-8 * np.abs(closed).max()
        wp = waterplane_properties(clip_by_waterplane(mesh, pose))
        assert closed[0, 1] == pytest.approx(
            env.rho * env.g * wp.area * wp.x_c, rel=1e-12
        )
        assert closed[0, 1] > 0.0
        # the independent route: finite differences of the pitch force
        # with respect to draft
        h = 1e-6
        fd_entry = (
            generalized_forces(mesh, pose.replace(zeta=pose.zeta + h), env)[4]
            - generalized_forces(mesh, pose.replace(zeta=pose.zeta - h), env)[4]
        ) / (2 * h)
        assert fd_entry == pytest.approx(closed[0, 1], rel=1e-6)

    def test_stability_margin_carries_the_offset_penalty(self, raked_prism, env):
        mesh, pose, body = raked_prism
        solid = clip_by_waterplane(mesh, pose)
        volume, first = volume_and_first_moments(solid)
        wp = waterplane_properties(solid)
        hessian = hessian_at_equilibrium(mesh, pose, env)
        report = pseudo_stability_check(
            hessian,
            v_star=volume,
            z_b_star=first[2] / volume,
            waterplane_area=wp.area,
            x_c=wp.x_c,
            second_moment=wp.second_moment,
            env=env,
        )
        z_b = first[2] / volume
        assert report.margins[1] == pytest.approx(
            wp.second_moment[0, 0] - volume * z_b - wp.area * wp.x_c**2, rel=1e-12
        )
        assert report.margins[1] < wp.second_moment[0, 0] - volume * z_b
        assert report.pseudo_stable


class TestSmallHeelRestoringMoment:
    def test_heel_moment_slope_equals_weighted_metacentric_height(self, barge, env):
        # classic relation: near upright equilibrium the restoring heel
        # moment is -(displacement * GM_T) per radian; the left side comes
        # from clipped-moment finite differences only
        solid = clip_by_waterplane(barge, Pose(zeta=0.0))
        volume, first = volume_and_first_moments(solid)
        wp = waterplane_properties(solid)
        gm_t, gm_l = metacentric_heights(volume, first[2] / volume, wp.second_moment)
        displacement = env.rho * env.g * volume
        h = 1e-6
        slope_phi = (
            generalized_forces(barge, Pose(zeta=0.0, phi=h), env)[5]
            - generalized_forces(barge, Pose(zeta=0.0, phi=-h), env)[5]
        ) / (2 * h)
        assert slope_phi == pytest.approx(-displacement * gm_t, rel=1e-7)
        slope_theta = (
            generalized_forces(barge, Pose(zeta=0.0, theta=h), env)[4]
            - generalized_forces(barge, Pose(zeta=0.0, theta=-h), env)[4]
        ) / (2 * h)
        assert slope_theta == pytest.approx(-displacement * gm_l, rel=1e-7)


class TestHydrostaticState:
    def test_cyclic_forces_are_structural_zeros(self, l_prism, env, rng):
        for pose in random_partial_poses(l_prism, 10, rng):
            state = hydrostatic_state(l_prism, pose, env)
            assert state.forces[0] == 0.0
            assert state.forces[1] == 0.0
            assert state.forces[3] == 0.0
            assert state.potential <= 1e-12

    def test_consistent_with_individual_operations(self, cube, env):
        pose = Pose(zeta=0.1, theta=0.15, phi=-0.1)
        state = hydrostatic_state(cube, pose, env)
        assert state.potential == potential(cube, pose, env)
        np.testing.assert_array_equal(
            state.forces, generalized_forces(cube, pose, env)
        )
