"""Normal modes of small motions about a pseudo-stable equilibrium.

Linearizing the reduced heave-pitch-roll problem yields a standard
``c eta = lambda m eta`` generalized eigenproblem with stiffness
``c = -H`` (the negated force-function Hessian) and the reduced mass
matrix.  It is solved by symmetric-definite reduction rather than by
expanding the characteristic determinant; tests keep the determinant
form as an oracle.

For the symmetric zero-angle equilibrium both matrices are block
diagonal and the roll mode decouples exactly: the solver detects that
structure and solves the blocks separately, so the roll eigenvector
comes out as a clean unit vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import IndefiniteMass, NonSymmetricInput, UnstableMode


@dataclass(frozen=True)
class ModalResult:
    """Eigenvalues, frequencies and shapes in (zeta, theta, phi) order.

    ``lambdas`` are ascending eigenvalues (1/s^2): squared angular
    frequencies ``omega = sqrt(lambda)`` for positive values.
    ``frequencies_hz`` is ``sqrt(lambda)/(2 pi)`` (nan where the mode is
    not oscillatory).  ``mode_shapes[:, i]`` is the i-th shape,
    normalized so the shapes are orthonormal in the mass metric.
    """

    lambdas: np.ndarray
    omegas: np.ndarray
    frequencies_hz: np.ndarray
    mode_shapes: np.ndarray
    stiffness: np.ndarray
    mass: np.ndarray

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.lambdas > 0.0))


def _check_symmetric(name, mat, tol=1e-8):
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (3, 3):
        raise NonSymmetricInput(f"{name} must be 3x3")
    scale = max(np.abs(mat).max(), 1e-300)
    if np.abs(mat - mat.T).max() > tol * scale:
        raise NonSymmetricInput(f"{name} is not symmetric")
    return 0.5 * (mat + mat.T)


def normal_modes(hessian, reduced_mass) -> ModalResult:
    """Solve ``det(c - lambda m) = 0`` with ``c = -hessian``.

    Raises :class:`IndefiniteMass` if the reduced mass matrix is not
    positive definite and :class:`NonSymmetricInput` on asymmetric
    arguments.  Eigenvalues may be negative (unstable equilibria); they
    are reported, not suppressed.
    """
    c = _check_symmetric("stiffness (negated Hessian)", -np.asarray(hessian, float))
    m = _check_symmetric("reduced mass matrix", reduced_mass)
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteMass("reduced mass matrix is not positive definite") from exc

    scale_c = max(np.abs(c).max(), 1e-300)
    scale_m = max(np.abs(m).max(), 1e-300)
    decoupled = (
        abs(c[0, 2]) <= 1e-14 * scale_c
        and abs(c[1, 2]) <= 1e-14 * scale_c
        and abs(m[0, 2]) <= 1e-14 * scale_m
        and abs(m[1, 2]) <= 1e-14 * scale_m
    )

    if decoupled:
        vals2, vecs2 = linalg.eigh(c[:2, :2], m[:2, :2])
        roll_val = c[2, 2] / m[2, 2]
        roll_vec = np.array([0.0, 0.0, 1.0 / math.sqrt(m[2, 2])])
        lambdas = np.concatenate([vals2, [roll_val]])
        shapes = np.zeros((3, 3))
        shapes[:2, :2] = vecs2
        shapes[:, 2] = roll_vec
        order = np.argsort(lambdas)
        lambdas = lambdas[order]
        shapes = shapes[:, order]
    else:
        lambdas, shapes = linalg.eigh(c, m)

    omegas = np.where(lambdas > 0.0, np.sqrt(np.abs(lambdas)), np.nan)
    freqs = omegas / (2.0 * math.pi)
    return ModalResult(
        lambdas=lambdas,
        omegas=omegas,
        frequencies_hz=freqs,
        mode_shapes=shapes,
        stiffness=c,
        mass=m,
    )


@dataclass(frozen=True)
class LinearizedOscillation:
    """Closed-form small-motion trajectory about the equilibrium.

    Evaluate with :meth:`deviations`; add the equilibrium coordinates to
    get absolute heave, pitch and roll.
    """

    modal: ModalResult
    cos_coeff: np.ndarray
    sin_coeff: np.ndarray

    def deviations(self, t) -> np.ndarray:
        """Deviation samples, shape (len(t), 3)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        omegas = self.modal.omegas
        phases = np.outer(t, omegas)
        amp = np.cos(phases) * self.cos_coeff + np.sin(phases) * self.sin_coeff
        return amp @ self.modal.mode_shapes.T

    def __call__(self, t) -> np.ndarray:
        return self.deviations(t)


def linearized_prediction(
    modal: ModalResult, initial_deviation, initial_rates
) -> LinearizedOscillation:
    """Superpose the modes matching an initial deviation and rate.

    Only meaningful at pseudo-stable equilibria: raises
    :class:`UnstableMode` if any eigenvalue is non-positive.  Serves as
    the small-amplitude oracle against the nonlinear reduced dynamics.
    """
    if not modal.all_positive:
        raise UnstableMode("linearized prediction needs all eigenvalues positive")
    eta0 = np.asarray(initial_deviation, dtype=float)
    etadot0 = np.asarray(initial_rates, dtype=float)
    # shapes are mass-orthonormal, so the mass metric inverts the basis
    proj = modal.mode_shapes.T @ modal.mass
    cos_coeff = proj @ eta0
    sin_coeff = (proj @ etadot0) / modal.omegas
    return LinearizedOscillation(modal, cos_coeff, sin_coeff)
