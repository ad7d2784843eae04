"""Two particles in a 2D box, evolved on the joint n^4 grid.

Split-operator evolution: a half-step of the potential phase, a full kinetic
step in Fourier space, and another potential half-step.  The box is realized
as a smoothed rectangular well of large height; walls sit inside the periodic
computational domain so the spectral kinetic step never sees a discontinuity.

Two generalizations over the textbook setup:

* densities follow a generalized Born rule rho = |Psi|^p with p in {1, 2, 3};
  for p != 2 the evolution does not conserve the L_p norm, so the state is
  renormalized after every step, keeping the p-norm an invariant constraint;
* the initial product state is multiplied by exp(-lambda * |r1 - r2|^2),
  a spatial correlation factor that entangles the particles at lambda > 0.

Measuring a particle samples a grid cell from its marginal density and
collapses the joint state by a Gaussian kernel of one-cell width centered on
the sampled cell.  Observation noise applies to the reported position only,
never to the collapse center: fidelity modifies the sensor, not the physics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from ..errors import (
    ArgumentError,
    ConfigurationError,
    InitializationError,
    InvalidParticleError,
    NormalizationError,
    ObservationLimitError,
    TrialLimitError,
)
from ..numerics.rng import SeededRng
from ..protocol.fidelity import CostModel, Fidelity, apply_observation_noise
from ..protocol.requests import QuantumRequest
from .base import EnvironmentAdapter, QuerySpec

_MAX_DRAW_ATTEMPTS = 1000
_MASS_FLOOR = 1e-3


@dataclass
class QuantumConfig:
    n: int = 32
    domain: tuple = (10.0, 10.0)
    box: tuple = (8.0, 9.0)  # well interior, centered in the domain
    hbar: float = 1.0
    dt: float = 0.005
    well_height: float = 1000.0
    t_max: float = 30.0
    budget_per_trial: float = 30.0
    num_trials: int = 5
    p: float = 2.0
    lambda_ent: float = 0.0
    mass_ranges: tuple = ((0.0, 1.0), (0.0, 5.0))
    mean_ranges: tuple = ((0.0, 4.0), (0.0, 1.0))
    std_range: tuple = (0.0, 1.0)
    velocity_ranges: tuple = ((0.0, 2.0), (0.0, 3.0))
    collapse_width_cells: float = 1.0
    max_observations_per_trial: int = None

    def __post_init__(self):
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ConfigurationError(f"n must be a power of two >= 4, got {self.n}")
        if self.p < 1:
            raise ConfigurationError(f"p must be >= 1, got {self.p}")
        if self.lambda_ent < 0:
            raise ConfigurationError(f"lambda_ent must be >= 0, got {self.lambda_ent}")
        if self.dt <= 0 or self.t_max <= 0 or self.hbar <= 0:
            raise ConfigurationError("dt, t_max, hbar must be positive")
        if self.num_trials < 1:
            raise ConfigurationError(f"num_trials must be >= 1, got {self.num_trials}")
        self.domain = (float(self.domain[0]), float(self.domain[1]))
        self.box = (float(self.box[0]), float(self.box[1]))
        if any(b <= 0 for b in self.box) or any(d <= 0 for d in self.domain):
            raise ConfigurationError("domain and box extents must be positive")
        if self.domain[0] != self.domain[1]:
            raise ConfigurationError(
                "domain must be square (one grid spacing shared by all axes)"
            )
        if self.box[0] >= self.domain[0] or self.box[1] >= self.domain[1]:
            raise ConfigurationError("well box must fit strictly inside the domain")
        if self.max_observations_per_trial is None:
            # cheapest observation costs 2 units
            self.max_observations_per_trial = int(self.budget_per_trial // 2)

    @property
    def budget(self) -> float:
        return self.budget_per_trial


class JointWavefunction:
    """Complex amplitudes on the (n, n, n, n) grid for (x1, y1, x2, y2)."""

    def __init__(self, values: np.ndarray, config: QuantumConfig):
        self.values = np.asarray(values, dtype=np.complex128)
        self.n = config.n
        width = config.domain[0]
        self.h = width / config.n  # square domain: one spacing for every axis
        self.axis = -0.5 * width + np.arange(config.n) * self.h
        self.cell_area = self.h * self.h
        self.cell_volume = self.cell_area * self.cell_area

    def copy(self) -> "JointWavefunction":
        dup = object.__new__(JointWavefunction)
        dup.__dict__.update(self.__dict__)
        dup.values = self.values.copy()
        return dup


def lp_norm(psi: JointWavefunction, p: float) -> float:
    return float(np.sum(np.abs(psi.values) ** p) * psi.cell_volume)


def lp_normalize(psi: JointWavefunction, p: float) -> JointWavefunction:
    """Scale so that sum(|Psi|^p) * h^4 == 1; phases untouched."""
    total = lp_norm(psi, p)
    if not np.isfinite(total) or total <= 0:
        raise NormalizationError(f"cannot normalize field with L_{p} mass {total!r}")
    psi.values *= total ** (-1.0 / p)
    return psi


def _gaussian_packet(axis: np.ndarray, mean, std: float, mass: float, velocity, hbar: float):
    """2D Gaussian packet with a momentum boost phase exp(i m v.r / hbar)."""
    x = axis.reshape(-1, 1)
    y = axis.reshape(1, -1)
    envelope = np.exp(
        -((x - mean[0]) ** 2 + (y - mean[1]) ** 2) / (4.0 * std * std)
    )
    phase = np.exp(1j * mass * (velocity[0] * x + velocity[1] * y) / hbar)
    return envelope * phase


def draw_packet_parameters(config: QuantumConfig, rng: SeededRng) -> dict:
    """Masses, means, widths, velocities for both particles.

    Draws are redrawn (bounded attempts) when a mass is effectively zero or a
    width is below the 2h resolvability floor; a range that cannot produce a
    resolvable width raises an init error.
    """
    h = config.domain[0] / config.n
    params = {"masses": [], "means": [], "stds": [], "velocities": []}
    for k in (0, 1):
        mass = None
        for _ in range(_MAX_DRAW_ATTEMPTS):
            candidate = float(rng.uniform(*config.mass_ranges[k]))
            if candidate >= _MASS_FLOOR:
                mass = candidate
                break
        if mass is None:
            raise InitializationError(
                f"could not draw a positive mass for particle {k + 1} "
                f"from range {config.mass_ranges[k]}"
            )
        params["masses"].append(mass)
    for k in (0, 1):
        lo, hi = config.mean_ranges[k]
        params["means"].append((float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi))))
    for k in (0, 1):
        std = None
        for _ in range(_MAX_DRAW_ATTEMPTS):
            candidate = float(rng.uniform(*config.std_range))
            if candidate >= 2.0 * h:
                std = candidate
                break
        if std is None:
            raise InitializationError(
                f"packet width unresolvable: no draw from {config.std_range} "
                f"reaches the 2h floor {2.0 * h:.4f}"
            )
        params["stds"].append(std)
    for k in (0, 1):
        lo, hi = config.velocity_ranges[k]
        params["velocities"].append(
            (float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)))
        )
    return params


def init_wavefunction(
    config: QuantumConfig, rng: SeededRng, params: dict | None = None
) -> JointWavefunction:
    """Correlated product of two Gaussian packets, L_p normalized."""
    if params is None:
        params = draw_packet_parameters(config, rng)
    for std in params["stds"]:
        if std < 2.0 * (config.domain[0] / config.n):
            raise InitializationError(
                f"packet std {std} below the resolvability floor of two grid spacings"
            )

    psi = JointWavefunction(np.zeros((config.n,) * 4), config)
    packet_1 = _gaussian_packet(
        psi.axis, params["means"][0], params["stds"][0],
        params["masses"][0], params["velocities"][0], config.hbar,
    )
    packet_2 = _gaussian_packet(
        psi.axis, params["means"][1], params["stds"][1],
        params["masses"][1], params["velocities"][1], config.hbar,
    )
    joint = packet_1[:, :, None, None] * packet_2[None, None, :, :]

    if config.lambda_ent > 0:
        ax = psi.axis
        dx2 = (ax[:, None] - ax[None, :]) ** 2  # [i1, i2]
        correlation = np.exp(
            -config.lambda_ent
            * (dx2[:, None, :, None] + dx2[None, :, None, :])
        )
        joint = joint * correlation

    psi.values = joint
    return lp_normalize(psi, config.p)


def _smoothed_well_2d(config: QuantumConfig, axis: np.ndarray, h: float) -> np.ndarray:
    """Well potential on one particle's 2D grid.

    height * (1 - sx * sy) with logistic ramps at the box walls; the ramp
    scale h/2 makes the wall transition about two grid spacings wide.
    """
    half_x = config.box[0] / 2.0
    half_y = config.box[1] / 2.0
    scale = h / 2.0

    def ramp(t):
        return 1.0 / (1.0 + np.exp(-t / scale))

    x = axis.reshape(-1, 1)
    y = axis.reshape(1, -1)
    inside_x = ramp(x + half_x) * ramp(half_x - x)
    inside_y = ramp(y + half_y) * ramp(half_y - y)
    return config.well_height * (1.0 - inside_x * inside_y)


class Propagator:
    """Precomputed phase factors for one episode's masses."""

    def __init__(self, config: QuantumConfig, masses):
        self.config = config
        n = config.n
        width = config.domain[0]
        h = width / n
        axis = -0.5 * width + np.arange(n) * h

        well = _smoothed_well_2d(config, axis, h)
        potential = well[:, :, None, None] + well[None, None, :, :]
        self.half_potential_phase = np.exp(
            -1j * potential * config.dt / (2.0 * config.hbar)
        )

        k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
        k2 = k * k
        ksq_1 = k2[:, None, None, None] + k2[None, :, None, None]
        ksq_2 = k2[None, None, :, None] + k2[None, None, None, :]
        self.kinetic_phase = np.exp(
            -1j
            * config.hbar
            * config.dt
            * (ksq_1 / (2.0 * masses[0]) + ksq_2 / (2.0 * masses[1]))
        )


def propagate(psi: JointWavefunction, propagator: Propagator) -> JointWavefunction:
    """One split-operator step without renormalization."""
    values = psi.values
    values *= propagator.half_potential_phase
    spectral = scipy.fft.fftn(values, overwrite_x=True)
    spectral *= propagator.kinetic_phase
    values = scipy.fft.ifftn(spectral, overwrite_x=True)
    values *= propagator.half_potential_phase
    psi.values = values
    return psi


def strang_step(
    psi: JointWavefunction, propagator: Propagator, p: float
) -> JointWavefunction:
    """Split-operator step followed by the maintained L_p constraint."""
    return lp_normalize(propagate(psi, propagator), p)


def marginal_density(psi: JointWavefunction, particle: int, p: float) -> np.ndarray:
    """Single-particle density: sum of |Psi|^p over the partner, times h^2.

    The result sums to 1 when multiplied by the cell area.
    """
    if particle not in (1, 2):
        raise InvalidParticleError(f"particle must be 1 or 2, got {particle}")
    density = np.abs(psi.values) ** p
    axes = (2, 3) if particle == 1 else (0, 1)
    return density.sum(axis=axes) * psi.cell_area


def position_expectation(psi: JointWavefunction, particle: int, p: float) -> np.ndarray:
    """Mean position of one particle under the generalized density."""
    rho = marginal_density(psi, particle, p)
    weights = rho * psi.cell_area
    x = float(np.sum(weights.sum(axis=1) * psi.axis))
    y = float(np.sum(weights.sum(axis=0) * psi.axis))
    return np.array([x, y])


def measure_and_collapse(
    psi: JointWavefunction,
    particle: int,
    fidelity: Fidelity,
    model: CostModel,
    rng: SeededRng,
    p: float,
    collapse_width_cells: float = 1.0,
):
    """Sample a position, collapse the joint state around it, report noisily.

    Returns (reported position, psi).  The collapse kernel is centered on the
    exact sampled cell; only the report carries fidelity noise.
    """
    rho = marginal_density(psi, particle, p)
    weights = (rho * psi.cell_area).reshape(-1)
    weights = np.clip(weights, 0.0, None)
    idx = rng.choice_weighted(weights.size, weights)
    i, j = divmod(idx, psi.n)
    center = np.array([psi.axis[i], psi.axis[j]])

    sigma_c = collapse_width_cells * psi.h
    x = psi.axis.reshape(-1, 1)
    y = psi.axis.reshape(1, -1)
    kernel = np.exp(
        -((x - center[0]) ** 2 + (y - center[1]) ** 2) / (2.0 * sigma_c * sigma_c)
    )
    if particle == 1:
        psi.values *= kernel[:, :, None, None]
    else:
        psi.values *= kernel[None, None, :, :]
    lp_normalize(psi, p)

    reported = apply_observation_noise(center, fidelity, model, rng)
    return reported, psi


def region_probability(
    psi: JointWavefunction, particle: int, region, p: float
) -> float:
    """Probability mass of one particle inside an axis-aligned rectangle.

    ``region`` is (x_min, x_max, y_min, y_max); cells count when their
    centers fall inside.  An empty intersection gives 0.
    """
    x_min, x_max, y_min, y_max = (float(v) for v in region)
    if x_min > x_max or y_min > y_max:
        raise ArgumentError(f"malformed region {region}")
    rho = marginal_density(psi, particle, p)
    in_x = (psi.axis >= x_min) & (psi.axis <= x_max)
    in_y = (psi.axis >= y_min) & (psi.axis <= y_max)
    if not (np.any(in_x) and np.any(in_y)):
        return 0.0
    return float(rho[np.ix_(in_x, in_y)].sum() * psi.cell_area)


class QuantumEnvironment(EnvironmentAdapter):
    kind = "quantum"

    config: QuantumConfig

    def reset(self) -> None:
        self.params = draw_packet_parameters(self.config, self.rng_init)
        self.psi = init_wavefunction(self.config, self.rng_init, params=self.params)
        self.initial_values = self.psi.values.copy()
        self.propagator = Propagator(self.config, self.params["masses"])
        self.trial_index = 0
        self.observations_this_trial = 0

    def reset_trial(self) -> int:
        """Restore the stored initial state for the next trial.

        Observation-noise and query streams continue; only the wavefunction
        rewinds.  Returns the new trial index.
        """
        if self.trial_index + 1 >= self.config.num_trials:
            raise TrialLimitError(
                f"trial limit reached: {self.config.num_trials} trials allowed"
            )
        self.psi.values = self.initial_values.copy()
        self.trial_index += 1
        self.observations_this_trial = 0
        return self.trial_index

    def begin_prediction_phase(self) -> None:
        # queries ask about the uncollapsed trajectory, so rewind to the
        # shared initial state before evolving to the query times
        self.psi.values = self.initial_values.copy()

    def step_many(self, steps: int, first_step_index: int = 0) -> None:
        for _ in range(steps):
            strang_step(self.psi, self.propagator, self.config.p)

    def measurement_cost(self, request: QuantumRequest) -> float:
        return self.cost_model.cost_of(request.fidelity)

    def measure(self, request: QuantumRequest, time: float) -> dict:
        if request.particle not in (1, 2):
            raise InvalidParticleError(
                f"particle must be 1 or 2, got {request.particle}"
            )
        if self.observations_this_trial >= self.config.max_observations_per_trial:
            raise ObservationLimitError(
                f"observation limit reached: "
                f"{self.config.max_observations_per_trial} per trial"
            )
        self.observations_this_trial += 1
        reported, _ = measure_and_collapse(
            self.psi,
            request.particle,
            request.fidelity,
            self.cost_model,
            self.rng_noise,
            self.config.p,
            self.config.collapse_width_cells,
        )
        return {
            "particle": request.particle,
            "position": [float(reported[0]), float(reported[1])],
        }

    def make_query(self, time: float) -> QuerySpec:
        particle = int(self.rng_query.integers(1, 3))
        half_w = self.config.domain[0] / 2.0
        half_h = self.config.domain[1] / 2.0
        xs = sorted(float(self.rng_query.uniform(-half_w, half_w)) for _ in range(2))
        ys = sorted(float(self.rng_query.uniform(-half_h, half_h)) for _ in range(2))
        region = (xs[0], xs[1], ys[0], ys[1])
        payload = {
            "time": time,
            "particle": particle,
            "region": {
                "x_min": region[0],
                "x_max": region[1],
                "y_min": region[2],
                "y_max": region[3],
            },
            "target": "probability of finding the particle inside the region",
            "arity": 1,
        }
        return QuerySpec(
            time=time,
            payload=payload,
            arity=1,
            meta={"particle": particle, "region": region},
        )

    def truth_values(self, query: QuerySpec) -> np.ndarray:
        prob = region_probability(
            self.psi, query.meta["particle"], query.meta["region"], self.config.p
        )
        return np.array([prob])

    def score_error(self, predicted: np.ndarray, truth: np.ndarray) -> float:
        return float(abs(float(predicted[0]) - float(truth[0])))

    def briefing_params(self) -> dict:
        cfg = self.config
        return {
            "domain": list(cfg.domain),
            "box": list(cfg.box),
            "wall_x": cfg.box[0] / 2.0,
            "wall_y": cfg.box[1] / 2.0,
            "hbar": cfg.hbar,
            "entangled": cfg.lambda_ent > 0,
            "masses": [float(m) for m in self.params["masses"]],
            "means": [list(m) for m in self.params["means"]],
            "stds": [float(s) for s in self.params["stds"]],
            "velocities": [list(v) for v in self.params["velocities"]],
            "budget_per_trial": cfg.budget_per_trial,
            "num_trials": cfg.num_trials,
            "max_observations_per_trial": cfg.max_observations_per_trial,
            "t_max": cfg.t_max,
            "costs": {f.value: self.cost_model.cost_of(f) for f in Fidelity},
            "noise": {f.value: self.cost_model.noise_sigma(f) for f in Fidelity},
        }
