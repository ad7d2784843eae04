"""N-body gravity with anisotropic inertial memory.

Each body carries a symmetric memory tensor S that relaxes at rate lambda
and accumulates the outer product of its recent accelerations; the
effective mass matrix M = m0*I + kappa*S then resists acceleration along
recently pushed directions.  The gravity law is selectable: standard
inverse-square, an inverse-linear variant whose circular-orbit speed is
radius-independent, and a rippled inverse-square law modulated by
1 + A*sin(2*pi*r/wavelength + phase).

Bodies are hard spheres inside a reflecting box.  Collisions use the
scalar masses: the memory tensor modifies the force-to-acceleration map,
not momentum exchange.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import (
    ArgumentError,
    ConfigurationError,
    InitializationError,
    InvalidObjectError,
    NumericalBlowupError,
)
from ..numerics.linalg import invert_small_matrix
from ..numerics.rng import SeededRng
from ..protocol.fidelity import CostModel, Fidelity, apply_observation_noise
from ..protocol.metrics import domain_diagonal, nrmse
from ..protocol.requests import ClassicalRequest
from .base import EnvironmentAdapter, QuerySpec

_MAX_PLACEMENT_ATTEMPTS = 10_000


class GravityLaw(str, Enum):
    INVERSE_SQUARE = "inverse_square"
    INVERSE_LINEAR = "inverse_linear"
    RIPPLE = "ripple"

    @classmethod
    def parse(cls, text) -> "GravityLaw":
        if isinstance(text, cls):
            return text
        normalized = str(text).strip().lower().replace("-", "").replace("_", "")
        table = {
            "inversesquare": cls.INVERSE_SQUARE,
            "inverselinear": cls.INVERSE_LINEAR,
            "ripple": cls.RIPPLE,
        }
        if normalized not in table:
            raise ConfigurationError(
                f"unknown gravity law {text!r}; expected one of "
                "inverse_square, inverse_linear, ripple"
            )
        return table[normalized]


@dataclass
class ClassicalConfig:
    n_particles: int = 4
    dim: int = 2
    dt: float = 0.001
    budget: float = 200.0
    G: float = 1.0
    restitution: float = 1.0
    t_max: float = 300.0
    softening: float = 1e-4
    box_lo: tuple = None
    box_hi: tuple = None
    kappa: float = 0.0
    lambda_decay: float = 1.0
    gravity_law: GravityLaw = GravityLaw.INVERSE_SQUARE
    ripple_amplitude: float = 1.0
    ripple_wavelength: float = 10.0
    ripple_phase: float = 0.0
    radius_range: tuple = (0.1, 0.5)
    mass_range: tuple = (0.5, 5.0)
    velocity_sigma: float = 1.0

    def __post_init__(self):
        if self.n_particles < 1:
            raise ConfigurationError(f"n_particles must be >= 1, got {self.n_particles}")
        if self.dim not in (2, 3):
            raise ConfigurationError(f"dim must be 2 or 3, got {self.dim}")
        if self.dt <= 0 or self.t_max <= 0:
            raise ConfigurationError("dt and t_max must be positive")
        if self.kappa < 0:
            raise ConfigurationError(f"kappa must be >= 0, got {self.kappa}")
        if self.lambda_decay <= 0:
            raise ConfigurationError(
                f"lambda_decay must be > 0, got {self.lambda_decay}"
            )
        if not (0 <= self.restitution <= 1):
            raise ConfigurationError(
                f"restitution must lie in [0, 1], got {self.restitution}"
            )
        if self.softening < 0:
            raise ConfigurationError(f"softening must be >= 0, got {self.softening}")
        self.gravity_law = GravityLaw.parse(self.gravity_law)
        if self.box_lo is None:
            self.box_lo = (-10.0,) * self.dim
        if self.box_hi is None:
            self.box_hi = (10.0,) * self.dim
        self.box_lo = tuple(float(v) for v in self.box_lo)
        self.box_hi = tuple(float(v) for v in self.box_hi)
        if len(self.box_lo) != self.dim or len(self.box_hi) != self.dim:
            raise ConfigurationError("box bounds must have one entry per dimension")
        if any(lo >= hi for lo, hi in zip(self.box_lo, self.box_hi)):
            raise ConfigurationError("box_lo must be strictly below box_hi per axis")
        for name, rng_pair in (("radius_range", self.radius_range), ("mass_range", self.mass_range)):
            lo, hi = rng_pair
            if not (0 < lo <= hi):
                raise ConfigurationError(f"{name} must satisfy 0 < lo <= hi, got {rng_pair}")


@dataclass
class ParticleState:
    positions: np.ndarray  # (n, dim)
    velocities: np.ndarray  # (n, dim)
    masses: np.ndarray  # (n,) scalar rest masses
    radii: np.ndarray  # (n,)
    memory: np.ndarray  # (n, dim, dim) symmetric PSD tensors
    accelerations: np.ndarray  # (n, dim) from the last step

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def copy(self) -> "ParticleState":
        return ParticleState(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            masses=self.masses.copy(),
            radii=self.radii.copy(),
            memory=self.memory.copy(),
            accelerations=self.accelerations.copy(),
        )


def init_classical(config: ClassicalConfig, rng: SeededRng) -> ParticleState:
    """Draw a non-overlapping initial configuration inside the box."""
    n, dim = config.n_particles, config.dim
    radii = np.asarray(rng.uniform(config.radius_range[0], config.radius_range[1], size=n))
    masses = np.asarray(rng.uniform(config.mass_range[0], config.mass_range[1], size=n))
    velocities = np.asarray(rng.normal(0.0, config.velocity_sigma, size=(n, dim)))

    lo = np.array(config.box_lo)
    hi = np.array(config.box_hi)
    positions = np.zeros((n, dim))
    for i in range(n):
        for _ in range(_MAX_PLACEMENT_ATTEMPTS):
            candidate = lo + np.asarray(rng.uniform(0.0, 1.0, size=dim)) * (hi - lo)
            if np.any(candidate < lo + radii[i]) or np.any(candidate > hi - radii[i]):
                continue
            gaps = np.linalg.norm(positions[:i] - candidate, axis=1) - (radii[:i] + radii[i])
            if i == 0 or np.all(gaps > 0):
                positions[i] = candidate
                break
        else:
            raise InitializationError(
                f"could not place particle {i} after {_MAX_PLACEMENT_ATTEMPTS} attempts; "
                "box too crowded for the drawn radii"
            )

    return ParticleState(
        positions=positions,
        velocities=velocities,
        masses=masses,
        radii=radii,
        memory=np.zeros((n, dim, dim)),
        accelerations=np.zeros((n, dim)),
    )


def gravity_pair_force(
    x_i,
    x_j,
    m_i: float,
    m_j: float,
    law: GravityLaw,
    G: float = 1.0,
    softening: float = 0.0,
    ripple_amplitude: float = 1.0,
    ripple_wavelength: float = 10.0,
    ripple_phase: float = 0.0,
) -> np.ndarray:
    """Force exerted on body i by body j.

    All denominators use the softened distance r_s = sqrt(r^2 + eps^2); the
    ripple's sine argument keeps the raw separation so softening does not
    reshape the oscillation.
    """
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    diff = x_j - x_i
    r2 = float(np.dot(diff, diff))
    r = np.sqrt(r2)
    r_s = np.sqrt(r2 + softening * softening)
    law = GravityLaw.parse(law)
    if law is GravityLaw.INVERSE_SQUARE:
        mag = G * m_i * m_j / r_s**2
    elif law is GravityLaw.INVERSE_LINEAR:
        mag = G * m_i * m_j / r_s
    else:
        mag = (
            G
            * m_i
            * m_j
            / r_s**2
            * (1.0 + ripple_amplitude * np.sin(2.0 * np.pi * r / ripple_wavelength + ripple_phase))
        )
    return mag * diff / r_s


def total_forces(positions: np.ndarray, masses: np.ndarray, config: ClassicalConfig) -> np.ndarray:
    """Summed gravitational force on every body, softened pairwise."""
    n = positions.shape[0]
    if n == 1:
        return np.zeros_like(positions)
    diff = positions[None, :, :] - positions[:, None, :]  # [i, j] = x_j - x_i
    r2 = np.sum(diff * diff, axis=-1)
    np.fill_diagonal(r2, 1.0)  # placeholder; diagonal magnitude zeroed below
    r = np.sqrt(r2)
    r_s = np.sqrt(r2 + config.softening * config.softening)
    mm = config.G * masses[:, None] * masses[None, :]
    if config.gravity_law is GravityLaw.INVERSE_SQUARE:
        mag = mm / (r_s * r_s)
    elif config.gravity_law is GravityLaw.INVERSE_LINEAR:
        mag = mm / r_s
    else:
        mag = (
            mm
            / (r_s * r_s)
            * (
                1.0
                + config.ripple_amplitude
                * np.sin(2.0 * np.pi * r / config.ripple_wavelength + config.ripple_phase)
            )
        )
    np.fill_diagonal(mag, 0.0)
    return np.sum((mag / r_s)[:, :, None] * diff, axis=1)


def mass_tensor(m0: float, kappa: float, S: np.ndarray):
    """Effective mass matrix M = m0*I + kappa*S and its inverse."""
    S = np.asarray(S, dtype=float)
    if m0 <= 0:
        raise ArgumentError(f"rest mass must be > 0, got {m0}")
    M = m0 * np.eye(S.shape[0]) + kappa * S
    return M, invert_small_matrix(M)


def step_classical(
    state: ParticleState, config: ClassicalConfig, step_index: int | None = None
) -> ParticleState:
    """One semi-implicit Euler step; mutates and returns the state.

    Order: forces from current positions; a = M^-1 F using the memory tensor
    from the previous step; memory updated with the fresh acceleration;
    velocity then position update; collision resolution last.
    """
    dt = config.dt
    forces = total_forces(state.positions, state.masses, config)
    if config.kappa == 0.0:
        accel = forces / state.masses[:, None]
    else:
        accel = np.empty_like(forces)
        eye = np.eye(state.dim)
        for i in range(state.n):
            m_inv = invert_small_matrix(
                state.masses[i] * eye + config.kappa * state.memory[i]
            )
            accel[i] = m_inv @ forces[i]

    outer = np.einsum("ni,nj->nij", accel, accel)
    state.memory += dt * (-config.lambda_decay * state.memory + outer)
    state.velocities += dt * accel
    state.positions += dt * state.velocities
    resolve_collisions(state, config)
    state.accelerations = accel

    if not (np.all(np.isfinite(state.positions)) and np.all(np.isfinite(state.velocities))):
        raise NumericalBlowupError(
            f"non-finite particle state after step {step_index}", step=step_index
        )
    return state


def resolve_collisions(state: ParticleState, config: ClassicalConfig) -> ParticleState:
    """Elastic sphere-sphere impulses, then wall reflections.

    Pairs: de-penetrate to contact (split by inverse scalar mass) and apply
    the standard restitution impulse along the center line when approaching.
    Walls: reflect the position about the contact plane and flip the normal
    velocity component if it points outward.  Walls run last so the box
    invariant holds when both kinds of contact happen in one step.
    """
    e = config.restitution
    x, v, m, radii = state.positions, state.velocities, state.masses, state.radii
    n = state.n

    for i in range(n):
        for j in range(i + 1, n):
            d = x[j] - x[i]
            dist = float(np.linalg.norm(d))
            contact = radii[i] + radii[j]
            if dist >= contact or dist == 0.0:
                continue
            normal = d / dist
            inv_i, inv_j = 1.0 / m[i], 1.0 / m[j]
            overlap = contact - dist
            x[i] -= overlap * (inv_i / (inv_i + inv_j)) * normal
            x[j] += overlap * (inv_j / (inv_i + inv_j)) * normal
            closing = float(np.dot(v[i] - v[j], normal))
            if closing > 0:
                impulse = (1.0 + e) * closing / (inv_i + inv_j)
                v[i] -= impulse * inv_i * normal
                v[j] += impulse * inv_j * normal

    for axis in range(state.dim):
        lo_plane = config.box_lo[axis] + radii
        hi_plane = config.box_hi[axis] - radii
        below = x[:, axis] < lo_plane
        if np.any(below):
            x[below, axis] = 2.0 * lo_plane[below] - x[below, axis]
            outward = below & (v[:, axis] < 0)
            v[outward, axis] *= -e
        above = x[:, axis] > hi_plane
        if np.any(above):
            x[above, axis] = 2.0 * hi_plane[above] - x[above, axis]
            outward = above & (v[:, axis] > 0)
            v[outward, axis] *= -e
    return state


def validate_selection(n: int, selection) -> None:
    """Object ids must be distinct integers in range; raises InvalidObjectError."""
    seen = set()
    for entry in selection:
        oid = entry[0]
        if not isinstance(oid, (int, np.integer)) or isinstance(oid, bool):
            raise InvalidObjectError(f"object_id must be an integer, got {oid!r}")
        if not (0 <= oid < n):
            raise InvalidObjectError(
                f"object_id {oid} out of range; valid ids are 0..{n - 1}"
            )
        if oid in seen:
            raise InvalidObjectError(f"object_id {oid} selected twice")
        seen.add(oid)


def observe_positions(
    state: ParticleState, selection, model: CostModel, rng: SeededRng
) -> dict:
    """Noisy positions for the selected object ids; state untouched."""
    validate_selection(state.n, selection)
    out = {}
    for oid, fidelity in selection:
        out[int(oid)] = apply_observation_noise(
            state.positions[int(oid)], fidelity, model, rng
        )
    return out


def classical_truth(state: ParticleState) -> np.ndarray:
    """Flat vector of all positions, the prediction target."""
    return state.positions.reshape(-1).copy()


def format_positions(observed: dict) -> dict:
    """Render observed positions in the wire shape with 5-decimal strings."""
    return {
        f"object_{oid}": {"position": [f"{c:.5f}" for c in vec]}
        for oid, vec in sorted(observed.items())
    }


class ClassicalEnvironment(EnvironmentAdapter):
    kind = "classical"

    config: ClassicalConfig

    def reset(self) -> None:
        self.state = init_classical(self.config, self.rng_init)
        self.initial_state = self.state.copy()

    def step_many(self, steps: int, first_step_index: int = 0) -> None:
        for k in range(steps):
            step_classical(self.state, self.config, step_index=first_step_index + k)

    def measurement_cost(self, request: ClassicalRequest) -> float:
        return sum(self.cost_model.cost_of(f) for _, f in request.selection)

    def validate_request(self, request: ClassicalRequest) -> None:
        validate_selection(self.state.n, request.selection)

    def measure(self, request: ClassicalRequest, time: float) -> dict:
        observed = observe_positions(
            self.state, request.selection, self.cost_model, self.rng_noise
        )
        return format_positions(observed)

    def make_query(self, time: float) -> QuerySpec:
        arity = self.state.n * self.state.dim
        payload = {
            "time": time,
            "target": "positions of all objects, flattened per object then per axis",
            "arity": arity,
        }
        return QuerySpec(time=time, payload=payload, arity=arity)

    def truth_values(self, query: QuerySpec) -> np.ndarray:
        return classical_truth(self.state)

    def score_error(self, predicted: np.ndarray, truth: np.ndarray) -> float:
        diagonal = domain_diagonal(self.config.box_lo, self.config.box_hi)
        return nrmse(predicted, truth, diagonal)

    def initial_observation(self) -> dict:
        """Exact positions at t=0, disclosed free of charge in the briefing."""
        return format_positions(
            {i: self.initial_state.positions[i] for i in range(self.initial_state.n)}
        )

    def briefing_params(self) -> dict:
        cfg = self.config
        initial = self.initial_state
        return {
            "n_objects": cfg.n_particles,
            "dim": cfg.dim,
            "G": cfg.G,
            "box_lo": list(cfg.box_lo),
            "box_hi": list(cfg.box_hi),
            "budget": cfg.budget,
            "t_max": cfg.t_max,
            "dt": cfg.dt,
            "masses": [float(m) for m in initial.masses],
            "velocities": initial.velocities.tolist(),
            "radii": [float(r) for r in initial.radii],
            "costs": {f.value: self.cost_model.cost_of(f) for f in Fidelity},
            "noise": {f.value: self.cost_model.noise_sigma(f) for f in Fidelity},
            "initial_observation": self.initial_observation(),
        }
