import math

import numpy as np
import pytest

from floatdyn import (
    GimbalLock,
    Pose,
    k3_body,
    omega_map,
    partials_r3,
    rotation_matrix,
)
from floatdyn.kinematics import omega_map_partials


def random_poses(rng, n, max_angle=1.4):
    poses = []
    for _ in range(n):
        poses.append(
            Pose(
                xi=rng.uniform(-5, 5),
                eta=rng.uniform(-5, 5),
                zeta=rng.uniform(-2, 2),
                psi=rng.uniform(-math.pi, math.pi),
                theta=rng.uniform(-max_angle, max_angle),
                phi=rng.uniform(-math.pi, math.pi),
            )
        )
    return poses


class TestRotationMatrix:
    def test_identity_at_zero_angles(self):
        assert np.array_equal(rotation_matrix(Pose()), np.eye(3))

    def test_third_row_near_pitch_limit(self):
        # close to pitch +pi/2 the down axis aligns with the first body axis
        pose = Pose(theta=math.pi / 2 - 1e-9)
        np.testing.assert_allclose(
            rotation_matrix(pose)[2], [-1.0, 0.0, 0.0], atol=1e-8
        )

    def test_third_row_at_quarter_roll(self):
        pose = Pose(phi=math.pi / 2)
        np.testing.assert_allclose(
            rotation_matrix(pose)[2], [0.0, 1.0, 0.0], atol=1e-15
        )

    def test_orthogonality_and_determinant_bulk(self):
        rng = np.random.default_rng(7)
        for pose in random_poses(rng, 10_000):
            r = rotation_matrix(pose)
            assert abs(r[0] @ r[1]) < 1e-12
            assert abs(r[0] @ r[2]) < 1e-12
            assert abs(r[1] @ r[2]) < 1e-12
            assert abs(r[0] @ r[0] - 1) < 1e-12
            assert abs(np.linalg.det(r) - 1.0) < 1e-12

    def test_third_row_is_k3_body(self):
        rng = np.random.default_rng(3)
        for pose in random_poses(rng, 50):
            np.testing.assert_array_equal(rotation_matrix(pose)[2], k3_body(pose))


class TestK3Body:
    def test_zero_angles(self):
        np.testing.assert_array_equal(k3_body(Pose()), [0.0, 0.0, 1.0])

    def test_pure_pitch(self):
        v = k3_body(Pose(theta=0.3))
        np.testing.assert_allclose(v, [-math.sin(0.3), 0.0, math.cos(0.3)], rtol=1e-15)

    def test_unit_norm(self):
        rng = np.random.default_rng(11)
        for pose in random_poses(rng, 200):
            assert abs(np.linalg.norm(k3_body(pose)) - 1.0) < 1e-12


class TestOmegaMap:
    def test_zero_angles_permutation(self):
        w = omega_map(0.0, 0.0)
        rates = np.array([1.5, -2.0, 0.7])  # (psi, theta, phi) rates
        np.testing.assert_array_equal(w @ rates, [0.7, -2.0, 1.5])

    def test_pure_yaw_rate(self):
        w = omega_map(0.2, 0.1)
        omega = w @ np.array([1.0, 0.0, 0.0])
        expected = [
            -math.sin(0.2),
            math.cos(0.2) * math.sin(0.1),
            math.cos(0.2) * math.cos(0.1),
        ]
        np.testing.assert_allclose(omega, expected, rtol=1e-15)

    def test_determinant_magnitude(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            theta = rng.uniform(-1.5, 1.5)
            phi = rng.uniform(-math.pi, math.pi)
            det = np.linalg.det(omega_map(theta, phi))
            assert det < 0.0
            assert abs(abs(det) - math.cos(theta)) < 1e-12

    def test_gimbal_guard(self):
        with pytest.raises(GimbalLock):
            omega_map(math.pi / 2 - 1e-9, 0.0)

    def test_partials_match_finite_differences(self):
        rng = np.random.default_rng(9)
        h = 1e-6
        for _ in range(50):
            theta = rng.uniform(-1.3, 1.3)
            phi = rng.uniform(-3.0, 3.0)
            d_th, d_ph = omega_map_partials(theta, phi)
            fd_th = (omega_map(theta + h, phi) - omega_map(theta - h, phi)) / (2 * h)
            fd_ph = (omega_map(theta, phi + h) - omega_map(theta, phi - h)) / (2 * h)
            np.testing.assert_allclose(d_th, fd_th, atol=1e-8)
            np.testing.assert_allclose(d_ph, fd_ph, atol=1e-8)

    def test_rotation_rate_reconstruction(self):
        # along a smooth angle trajectory, Rdot must equal R [omega]_x
        def angles(t):
            return 0.4 * math.sin(t), 0.5 * math.sin(0.7 * t), 0.6 * math.cos(1.3 * t)

        def rates(t, h=1e-6):
            a0 = np.array(angles(t - h))
            a1 = np.array(angles(t + h))
            return (a1 - a0) / (2 * h)

        for t in np.linspace(0.0, 5.0, 23):
            psi, theta, phi = angles(t)
            dpsi, dtheta, dphi = rates(t)
            omega = omega_map(theta, phi) @ np.array([dpsi, dtheta, dphi])
            skew = np.array(
                [
                    [0.0, -omega[2], omega[1]],
                    [omega[2], 0.0, -omega[0]],
                    [-omega[1], omega[0], 0.0],
                ]
            )
            pose = Pose(psi=psi, theta=theta, phi=phi)
            r = rotation_matrix(pose)
            h = 1e-6
            psi_p, theta_p, phi_p = angles(t + h)
            psi_m, theta_m, phi_m = angles(t - h)
            r_dot_fd = (
                rotation_matrix(Pose(psi=psi_p, theta=theta_p, phi=phi_p))
                - rotation_matrix(Pose(psi=psi_m, theta=theta_m, phi=phi_m))
            ) / (2 * h)
            np.testing.assert_allclose(r @ skew, r_dot_fd, atol=1e-6)


class TestPartialsR3:
    def test_values_at_upright_pose(self):
        parts = partials_r3(Pose())
        np.testing.assert_array_equal(parts.d_theta, [-1.0, 0.0, 0.0])
        np.testing.assert_array_equal(parts.d_phi, [0.0, 1.0, 0.0])
        x = np.array([1.7, -0.3, 2.2])
        # contractions with a body point reproduce the classic table
        assert parts.d_theta @ x == -x[0]
        assert parts.d_phi @ x == x[1]
        assert parts.second[1, 1] @ x == -x[2]
        assert parts.second[2, 2] @ x == -x[2]
        assert parts.second[1, 2] @ x == 0.0

    def test_zeta_and_psi_rows_vanish(self):
        rng = np.random.default_rng(13)
        for pose in random_poses(rng, 20):
            parts = partials_r3(pose)
            assert np.all(parts.first[0] == 0.0)
            assert np.all(parts.first[3] == 0.0)
            assert np.all(parts.second[0] == 0.0)
            assert np.all(parts.second[:, 0] == 0.0)
            assert np.all(parts.second[3] == 0.0)

    def test_first_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(17)
        h = 1e-6
        for pose in random_poses(rng, 100):
            parts = partials_r3(pose)
            fd_th = (
                k3_body(pose.replace(theta=pose.theta + h))
                - k3_body(pose.replace(theta=pose.theta - h))
            ) / (2 * h)
            fd_ph = (
                k3_body(pose.replace(phi=pose.phi + h))
                - k3_body(pose.replace(phi=pose.phi - h))
            ) / (2 * h)
            np.testing.assert_allclose(parts.d_theta, fd_th, atol=1e-6)
            np.testing.assert_allclose(parts.d_phi, fd_ph, atol=1e-6)

    def test_second_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(19)
        h = 1e-5
        for pose in random_poses(rng, 30):
            parts = partials_r3(pose)
            fd_thth = (
                k3_body(pose.replace(theta=pose.theta + h))
                - 2 * k3_body(pose)
                + k3_body(pose.replace(theta=pose.theta - h))
            ) / h**2
            np.testing.assert_allclose(parts.second[1, 1], fd_thth, atol=1e-5)
            fd_thph = (
                k3_body(pose.replace(theta=pose.theta + h, phi=pose.phi + h))
                - k3_body(pose.replace(theta=pose.theta + h, phi=pose.phi - h))
                - k3_body(pose.replace(theta=pose.theta - h, phi=pose.phi + h))
                + k3_body(pose.replace(theta=pose.theta - h, phi=pose.phi - h))
            ) / (4 * h**2)
            np.testing.assert_allclose(parts.second[1, 2], fd_thph, atol=1e-5)


class TestPose:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Pose(zeta=float("nan"))

    def test_rejects_gimbal_pitch(self):
        with pytest.raises(GimbalLock):
            Pose(theta=math.pi / 2)

    def test_array_round_trip(self):
        pose = Pose(0.1, -0.2, 0.3, 0.4, -0.5, 0.6)
        assert Pose.from_array(pose.as_array()) == pose
