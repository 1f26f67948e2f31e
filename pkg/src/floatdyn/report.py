"""Analysis configuration, the JSON report and the standard pipeline.

The pipeline chains equilibrium search, the equilibrium Hessian,
metacentric heights, the stability verdict and normal modes, and bundles
the numbers into a versioned, round-trippable JSON report.  Mass
properties resolve in one of two ways: an explicit mass (mesh assumed
already centered on G unless ``cg`` says otherwise) or a uniform
density, in which case G lands at the volume centroid and the inertia
comes from exact mesh integrals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import BodyProperties, kinetic_metric, reduced_mass_matrix
from .equilibrium import find_equilibrium
from .errors import ConfigError
from .hydrostatics import (
    FluidEnvironment,
    hessian_at_equilibrium,
    hydrostatic_state,
    metacentric_heights,
    pseudo_stability_check,
)
from .mesh import inertia_from_mesh, load_mesh
from .oscillations import normal_modes

SCHEMA_VERSION = 1


@dataclass
class AnalysisConfig:
    """User-facing description of one analysis run."""

    mesh_path: str
    mass: float | None = None
    uniform_density: float | None = None
    inertia: list | None = None
    cg: list | None = None
    fluid_density: float = 1025.0
    gravity: float = 9.81
    initial_guess: tuple = (0.0, 0.0, 0.0)
    symmetry: bool = False
    solver: dict = field(default_factory=dict)
    integrator: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if (self.mass is None) == (self.uniform_density is None):
            raise ConfigError("give exactly one of 'mass' or 'uniform_density'")
        for name in ("mass", "uniform_density"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigError(f"'{name}' must be positive")
        if self.fluid_density <= 0 or self.gravity <= 0:
            raise ConfigError("'fluid_density' and 'gravity' must be positive")
        if len(tuple(self.initial_guess)) != 3:
            raise ConfigError("'initial_guess' must be (zeta0, theta0, phi0)")
        # normalize to JSON-native types so the config echo round-trips
        self.initial_guess = [float(x) for x in self.initial_guess]

    @classmethod
    def from_file(cls, path) -> "AnalysisConfig":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def environment(self) -> FluidEnvironment:
        return FluidEnvironment(rho=self.fluid_density, g=self.gravity)

    def to_dict(self) -> dict:
        return {
            name: getattr(self, name) for name in self.__dataclass_fields__
        }


def load_body(config: AnalysisConfig):
    """Resolve the mesh (re-centered on G) and the body mass properties.

    ``uniform_density`` pins the mass center to the volume centroid and
    derives the inertia from exact mesh integrals.  An explicit ``mass``
    assumes the mesh is already G-centered; giving ``cg`` (mesh
    coordinates of the mass center) requires an explicit ``inertia``
    about that point, because no consistent tensor can be derived for a
    non-centroidal mass center.
    """
    path = Path(config.mesh_path)
    if not path.exists():
        raise ConfigError(f"mesh file not found: {path}")
    mesh = load_mesh(path, symmetry_flag=config.symmetry)

    if config.uniform_density is not None:
        if config.cg is not None:
            raise ConfigError(
                "'cg' contradicts 'uniform_density': a uniform body has its "
                "mass center at the volume centroid"
            )
        mass, inertia = inertia_from_mesh(mesh, config.uniform_density)
        center = mesh.volume_centroid
    else:
        mass = float(config.mass)
        center = np.zeros(3) if config.cg is None else np.asarray(config.cg, float)
        if config.inertia is not None:
            inertia = np.asarray(config.inertia, dtype=float)
        elif config.cg is None:
            # uniform distribution scaled to the given mass
            density = mass / mesh.volume
            _, inertia = inertia_from_mesh(mesh, density)
        else:
            raise ConfigError(
                "'cg' needs an explicit 'inertia' about the mass center; a "
                "shape-derived tensor would be inconsistent with an "
                "off-centroid mass center"
            )
    if np.any(center != 0.0):
        mesh = mesh.translated(-center)
    body = BodyProperties(mass=mass, inertia=inertia)
    return mesh, body, center


@dataclass
class Report:
    """Versioned analysis report; all leaves are JSON-native types."""

    config: dict
    cg_shift: list
    equilibrium: dict
    hydrostatics: dict
    stability: dict
    modal: dict
    verification: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "cg_shift": self.cg_shift,
            "equilibrium": self.equilibrium,
            "hydrostatics": self.hydrostatics,
            "stability": self.stability,
            "modal": self.modal,
            "verification": self.verification,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def save(self, path):
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        data = dict(data)
        version = data.pop("schema_version")
        return cls(schema_version=version, **data)

    @classmethod
    def load(cls, path) -> "Report":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _listify(value):
    return np.asarray(value, dtype=float).tolist()


def run_analysis(config: AnalysisConfig):
    """Equilibrium, stability and modal pipeline for one configuration.

    Returns ``(report, objects)`` where ``objects`` carries the live
    mesh/body/equilibrium instances for callers that keep computing
    (simulation, verification).
    """
    mesh, body, cg_shift = load_body(config)
    env = config.environment()

    solver_opts = dict(config.solver)
    result = find_equilibrium(
        mesh,
        body,
        env,
        initial=tuple(config.initial_guess),
        tol=float(solver_opts.pop("tol", 1e-12)),
        max_iter=int(solver_opts.pop("max_iter", 60)),
    )

    state = hydrostatic_state(mesh, result.pose, env)
    hessian = hessian_at_equilibrium(mesh, result.pose, env, mass=body.mass)
    gm_t, gm_l = metacentric_heights(
        state.volume, state.buoyancy_center[2], state.waterplane.second_moment
    )
    stability = pseudo_stability_check(
        hessian,
        v_star=state.volume,
        z_b_star=float(state.buoyancy_center[2]),
        waterplane_area=state.waterplane.area,
        x_c=state.waterplane.x_c,
        second_moment=state.waterplane.second_moment,
        env=env,
    )
    metric = kinetic_metric(body, result.pose.theta, result.pose.phi)
    m_red = reduced_mass_matrix(metric)
    modal = normal_modes(hessian, m_red)

    report = Report(
        config=config.to_dict(),
        cg_shift=_listify(cg_shift),
        equilibrium={
            "pose": {
                "xi": 0.0,
                "eta": 0.0,
                "zeta": result.pose.zeta,
                "psi": 0.0,
                "theta": result.pose.theta,
                "phi": result.pose.phi,
            },
            "residual": _listify(result.residual),
            "iterations": result.iterations,
            "waterline_distance": result.waterline_distance,
            "converged": result.converged,
        },
        hydrostatics={
            "volume": state.volume,
            "buoyancy_center": _listify(state.buoyancy_center),
            "z_b_star": float(state.buoyancy_center[2]),
            "waterplane_area": state.waterplane.area,
            "x_c": state.waterplane.x_c,
            "y_c": state.waterplane.y_c,
            "second_moment": _listify(state.waterplane.second_moment),
            "potential": state.potential,
        },
        stability={
            "hessian": _listify(stability.hessian),
            "gm_transverse": stability.gm_transverse,
            "gm_longitudinal": stability.gm_longitudinal,
            "displacement": stability.displacement,
            "pseudo_stable": stability.pseudo_stable,
            "margins": list(stability.margins),
            "marginal": stability.marginal,
        },
        modal={
            "lambdas": _listify(modal.lambdas),
            "omegas_rad_s": [
                None if not np.isfinite(w) else float(w) for w in modal.omegas
            ],
            "frequencies_hz": [
                None if not np.isfinite(f) else float(f) for f in modal.frequencies_hz
            ],
            "mode_shapes": _listify(modal.mode_shapes),
            "reduced_mass": _listify(m_red),
        },
    )
    objects = {
        "mesh": mesh,
        "body": body,
        "env": env,
        "equilibrium": result,
        "state": state,
        "stability": stability,
        "modal": modal,
        "reduced_mass": m_red,
    }
    return report, objects
