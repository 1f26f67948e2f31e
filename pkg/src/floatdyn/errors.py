"""Exception types shared across the package."""


class FloatDynError(Exception):
    """Base class for all package errors."""


class InvalidMesh(FloatDynError):
    """Mesh fails a structural invariant (degenerate face, negative volume, ...)."""


class NonWatertightMesh(InvalidMesh):
    """Edge pairing failed: the surface has a boundary or non-manifold edge."""


class ClipDegenerate(FloatDynError):
    """A waterline intersection loop failed to close or the clipped boundary leaks."""


class SelfIntersecting(FloatDynError):
    """Polygon edges cross each other; moments would be meaningless."""


class GimbalLock(FloatDynError):
    """Pitch too close to +-pi/2: the angle-rate map is not invertible."""


class EmptyMesh(InvalidMesh):
    """Mesh has no triangles."""


class NotAnEquilibrium(FloatDynError):
    """Residual generalized forces at the supposed equilibrium exceed tolerance."""


class AsymmetricBody(FloatDynError):
    """Operation requires the port-starboard symmetry claim on the mesh."""


class ZeroVolume(FloatDynError):
    """Submerged volume vanishes where a positive volume is required."""


class WontFloat(FloatDynError):
    """Body is at least as heavy as the fluid it could ever displace."""


class Diverged(FloatDynError):
    """Iterative solver hit its iteration or step limit without converging."""


class SingularJacobian(FloatDynError):
    """Equilibrium Jacobian is singular and every fallback failed."""


class SingularCyclicBlock(FloatDynError):
    """Cyclic block of the kinetic metric is not invertible (invalid metric)."""


class IndefiniteMass(FloatDynError):
    """Reduced mass matrix is not positive definite."""


class NonSymmetricInput(FloatDynError):
    """Matrix argument expected to be symmetric is not."""


class UnstableMode(FloatDynError):
    """Linearized prediction requested at an equilibrium with a non-positive mode."""


class ConfigError(FloatDynError):
    """Analysis configuration is malformed or inconsistent."""
