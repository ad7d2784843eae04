"""2D incompressible flow in vorticity form on a periodic square.

Pseudo-spectral: the vorticity lives in Fourier space, velocities come from
the streamfunction inversion (which enforces incompressibility exactly),
nonlinear products are formed on the physical grid and dealiased with a
sharp 2/3 cutoff, and time stepping is classical RK4.  Initial conditions
are a randomly perturbed double shear layer.

An optional body force acts perpendicular to the local velocity with a
state-dependent coefficient: f = C * (v, -u), where C depends on local
kinetic energy, local vorticity, or a convex combination of the two.  Being
always orthogonal to u, the force steers the flow without doing work
directly; it enters the vorticity equation through its spectral curl.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import (
    ArgumentError,
    ConfigurationError,
    InvalidCoordinateError,
    NumericalBlowupError,
)
from ..numerics.grid import fft_forward, fft_inverse
from ..numerics.interp import bilinear_interpolate
from ..numerics.rng import SeededRng
from ..protocol.fidelity import CostModel, Fidelity, apply_observation_noise
from ..protocol.metrics import l2_error
from ..protocol.requests import FluidRequest
from .base import EnvironmentAdapter, QuerySpec

QUERY_POINTS_PER_PREDICTION = 10

SNAPSHOT_MAGIC = b"VORT"


class ForcingKind(str, Enum):
    NONE = "none"
    VELOCITY = "velocity"
    VORTICITY = "vorticity"
    COMBINED = "combined"

    @classmethod
    def parse(cls, text) -> "ForcingKind":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ConfigurationError(
                f"unknown forcing kind {text!r}; expected one of "
                "none, velocity, vorticity, combined"
            ) from None


@dataclass
class FluidConfig:
    n: int = 512
    L: float = 2.0 * np.pi
    nu: float = 0.001
    dt: float = 0.001
    budget: float = 200.0
    t_max: float = 60.0
    dealias_ratio: float = 2.0 / 3.0
    forcing: ForcingKind = ForcingKind.NONE
    gamma_velocity: float = 0.5
    beta_velocity: float = 3.0
    gamma_vorticity: float = 5.0
    beta_vorticity: float = np.pi / 16.0
    alpha: float = 0.5
    delta_range: tuple = (0.05, 0.2)
    perturbation_range: tuple = (0.15, 0.50)

    def __post_init__(self):
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ConfigurationError(f"n must be a power of two >= 4, got {self.n}")
        if self.L <= 0 or self.nu < 0 or self.dt <= 0 or self.t_max <= 0:
            raise ConfigurationError("L, dt, t_max must be positive and nu >= 0")
        if not (0 < self.dealias_ratio <= 1):
            raise ConfigurationError(
                f"dealias_ratio must lie in (0, 1], got {self.dealias_ratio}"
            )
        if not (0 <= self.alpha <= 1):
            raise ConfigurationError(f"alpha must lie in [0, 1], got {self.alpha}")
        self.forcing = ForcingKind.parse(self.forcing)


class VorticityField:
    """Spectral vorticity plus the cached wavenumber machinery."""

    def __init__(self, omega_hat: np.ndarray, n: int, L: float, dealias_ratio: float):
        self.n = int(n)
        self.L = float(L)
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.L / self.n)
        self.kx = k.reshape(self.n, 1)  # axis 0 is x
        self.ky = k.reshape(1, self.n)  # axis 1 is y
        self.ksq = self.kx**2 + self.ky**2
        ksq_safe = self.ksq.copy()
        ksq_safe[0, 0] = 1.0  # mean mode handled separately
        self.ksq_inv = 1.0 / ksq_safe
        self.ksq_inv[0, 0] = 0.0
        cutoff = dealias_ratio * np.max(np.abs(k))
        self.dealias_mask = (np.abs(self.kx) <= cutoff) & (np.abs(self.ky) <= cutoff)
        self.omega_hat = np.asarray(omega_hat, dtype=np.complex128)

    def copy(self) -> "VorticityField":
        dup = object.__new__(VorticityField)
        dup.__dict__.update(self.__dict__)
        dup.omega_hat = self.omega_hat.copy()
        return dup

    def dealias(self, spectral: np.ndarray) -> np.ndarray:
        return spectral * self.dealias_mask

    def physical_vorticity(self) -> np.ndarray:
        return fft_inverse(self.omega_hat).real

    def axis_points(self) -> np.ndarray:
        return np.arange(self.n) * (self.L / self.n)


def init_kelvin_helmholtz(config: FluidConfig, rng: SeededRng) -> VorticityField:
    """Double shear layer with a sinusoidal cross-stream perturbation.

    u(y) = tanh((y - L/4)/delta) - tanh((y - 3L/4)/delta) - 1 gives two
    opposing streams; v seeds the instability with one sine mode in x,
    enveloped by Gaussians centered on the two interfaces so the
    perturbation is local to the shear layers.
    """
    n, L = config.n, config.L
    delta = float(rng.uniform(*config.delta_range))
    perturbation = float(rng.uniform(*config.perturbation_range))

    coords = np.arange(n) * (L / n)
    x = coords.reshape(n, 1)
    y = coords.reshape(1, n)
    u = np.tanh((y - L / 4.0) / delta) - np.tanh((y - 3.0 * L / 4.0) / delta) - 1.0
    envelope = np.exp(-(((y - L / 4.0) / delta) ** 2)) + np.exp(
        -(((y - 3.0 * L / 4.0) / delta) ** 2)
    )
    v = perturbation * np.sin(2.0 * np.pi * x / L) * envelope

    u = np.broadcast_to(u, (n, n))
    field = VorticityField(np.zeros((n, n)), n, L, config.dealias_ratio)
    # omega = dv/dx - du/dy, taken spectrally
    u_hat = fft_forward(u)
    v_hat = fft_forward(v)
    omega_hat = 1j * field.kx * v_hat - 1j * field.ky * u_hat
    # start inside the dealiased band so the cutoff stays exact under stepping
    field.omega_hat = field.dealias(omega_hat)
    field.shear_delta = delta
    field.perturbation = perturbation
    return field


def velocity_from_vorticity(field: VorticityField) -> tuple:
    """Physical (u, v) from the streamfunction; divergence-free by construction."""
    psi_hat = field.omega_hat * field.ksq_inv
    u = fft_inverse(1j * field.ky * psi_hat).real
    v = fft_inverse(-1j * field.kx * psi_hat).real
    return u, v


def alien_coefficient(
    u: np.ndarray, v: np.ndarray, omega: np.ndarray, config: FluidConfig
) -> np.ndarray:
    """State-dependent magnitude of the perpendicular body force."""
    if u.shape != v.shape or u.shape != omega.shape:
        raise ArgumentError("u, v, omega must share a shape")
    kind = config.forcing
    if kind is ForcingKind.NONE:
        return np.zeros_like(u)
    if kind is ForcingKind.VELOCITY:
        return config.gamma_velocity * np.sin(config.beta_velocity * (u * u + v * v))
    if kind is ForcingKind.VORTICITY:
        return config.gamma_vorticity * np.cos(config.beta_vorticity * omega)
    c_vel = config.gamma_velocity * np.sin(config.beta_velocity * (u * u + v * v))
    c_vort = config.gamma_vorticity * np.cos(config.beta_vorticity * omega)
    return config.alpha * c_vel + (1.0 - config.alpha) * c_vort


def rhs(field: VorticityField, config: FluidConfig) -> np.ndarray:
    """Spectral tendency: advection + viscosity + curl of the body force."""
    omega_hat = field.omega_hat
    psi_hat = omega_hat * field.ksq_inv
    u = fft_inverse(1j * field.ky * psi_hat).real
    v = fft_inverse(-1j * field.kx * psi_hat).real
    omega_x = fft_inverse(1j * field.kx * omega_hat).real
    omega_y = fft_inverse(1j * field.ky * omega_hat).real
    advection = u * omega_x + v * omega_y
    tendency = -field.dealias(fft_forward(advection)) - config.nu * field.ksq * omega_hat

    if config.forcing is not ForcingKind.NONE:
        omega = fft_inverse(omega_hat).real
        coeff = alien_coefficient(u, v, omega, config)
        force_x = coeff * v
        force_y = -coeff * u
        curl_hat = 1j * field.kx * fft_forward(force_y) - 1j * field.ky * fft_forward(force_x)
        tendency += field.dealias(curl_hat)
    return tendency


def rk4_step(
    field: VorticityField, config: FluidConfig, step_index: int | None = None
) -> VorticityField:
    """Advance one dt with classical RK4; mutates and returns the field."""
    dt = config.dt
    base = field.omega_hat
    k1 = rhs(field, config)
    field.omega_hat = base + 0.5 * dt * k1
    k2 = rhs(field, config)
    field.omega_hat = base + 0.5 * dt * k2
    k3 = rhs(field, config)
    field.omega_hat = base + dt * k3
    k4 = rhs(field, config)
    field.omega_hat = base + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(field.omega_hat)):
        raise NumericalBlowupError(
            f"non-finite vorticity after step {step_index}", step=step_index
        )
    return field


def observe_vorticity(
    field: VorticityField, points, model: CostModel, rng: SeededRng
) -> list:
    """Noisy point probes of the physical vorticity; coordinates wrap."""
    for entry in points:
        px, py = entry[0], entry[1]
        if not (np.isfinite(px) and np.isfinite(py)):
            raise InvalidCoordinateError(f"non-finite probe coordinate ({px!r}, {py!r})")
    omega = field.physical_vorticity()
    values = []
    for px, py, fidelity in points:
        exact = bilinear_interpolate(omega, float(px), float(py), field.L, field.L)
        noisy = apply_observation_noise(np.array([exact]), fidelity, model, rng)
        values.append(float(noisy[0]))
    return values


def fluid_truth(field: VorticityField, query_points) -> np.ndarray:
    """Noiseless vorticity at the query points, the prediction target."""
    omega = field.physical_vorticity()
    return np.array(
        [bilinear_interpolate(omega, float(px), float(py), field.L, field.L) for px, py in query_points]
    )


def save_snapshot(field: VorticityField, time: float, path) -> None:
    """Row-major binary dump: magic, n, L, time, then the physical field."""
    omega = np.ascontiguousarray(field.physical_vorticity(), dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<qdd", field.n, field.L, float(time)))
        fh.write(omega.tobytes())


def load_snapshot(path) -> tuple:
    """Read a snapshot back as (omega physical array, L, time)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise ArgumentError(f"not a vorticity snapshot: bad magic {magic!r}")
        n, L, time = struct.unpack("<qdd", fh.read(24))
        data = np.frombuffer(fh.read(8 * n * n), dtype=np.float64).reshape(n, n)
    return data.copy(), L, time


class FluidEnvironment(EnvironmentAdapter):
    kind = "fluid"

    config: FluidConfig

    def reset(self) -> None:
        self.field = init_kelvin_helmholtz(self.config, self.rng_init)

    def step_many(self, steps: int, first_step_index: int = 0) -> None:
        for k in range(steps):
            rk4_step(self.field, self.config, step_index=first_step_index + k)

    def measurement_cost(self, request: FluidRequest) -> float:
        return sum(self.cost_model.cost_of(f) for _, _, f in request.selection)

    def measure(self, request: FluidRequest, time: float) -> dict:
        values = observe_vorticity(
            self.field, request.selection, self.cost_model, self.rng_noise
        )
        out = {}
        for idx, ((px, py, _), value) in enumerate(zip(request.selection, values)):
            out[f"point_{idx}"] = {
                "x": float(px),
                "y": float(py),
                "vorticity": value,
            }
        return out

    def make_query(self, time: float) -> QuerySpec:
        points = [
            (
                float(self.rng_query.uniform(0.0, self.config.L)),
                float(self.rng_query.uniform(0.0, self.config.L)),
            )
            for _ in range(QUERY_POINTS_PER_PREDICTION)
        ]
        payload = {
            "time": time,
            "points": [[px, py] for px, py in points],
            "target": "vorticity at each listed point, in order",
            "arity": len(points),
        }
        return QuerySpec(
            time=time, payload=payload, arity=len(points), meta={"points": points}
        )

    def truth_values(self, query: QuerySpec) -> np.ndarray:
        return fluid_truth(self.field, query.meta["points"])

    def score_error(self, predicted: np.ndarray, truth: np.ndarray) -> float:
        return l2_error(predicted, truth)

    def briefing_params(self) -> dict:
        cfg = self.config
        return {
            "L": cfg.L,
            "n": cfg.n,
            "nu": cfg.nu,
            "dt": cfg.dt,
            "budget": cfg.budget,
            "t_max": cfg.t_max,
            "shear_delta": self.field.shear_delta,
            "perturbation": self.field.perturbation,
            "costs": {f.value: self.cost_model.cost_of(f) for f in Fidelity},
            "noise": {f.value: self.cost_model.noise_sigma(f) for f in Fidelity},
        }
