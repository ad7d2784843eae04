"""End-to-end guarantees, one test per advertised criterion.

Every numeric target here was frozen against an independent oracle: closed
form where one exists (orbit periods, viscous decay factors, noise sigmas),
a hand-mirrored reference integrator for code-path equivalence, and exact
budget arithmetic for the ledger.  Tests are ordered by number; conftest.py
prints a per-criterion verdict at the end of the run.
"""

import json
import math

import numpy as np
import pytest

import physprobe.errors as errors_module
from physprobe.envs import make_environment
from physprobe.envs.classical import (
    ClassicalConfig,
    GravityLaw,
    ParticleState,
    gravity_pair_force,
    observe_positions,
    resolve_collisions,
    step_classical,
    total_forces,
)
from physprobe.envs.fluid import (
    FluidConfig,
    ForcingKind,
    VorticityField,
    init_kelvin_helmholtz,
    rk4_step,
    velocity_from_vorticity,
)
from physprobe.envs.quantum import (
    Propagator,
    QuantumConfig,
    init_wavefunction,
    lp_norm,
    measure_and_collapse,
    position_expectation,
    propagate,
    strang_step,
)
from physprobe.errors import (
    InsufficientBudget,
    ObservationLimitError,
    ProtocolError,
    TimeLimitExceeded,
    TrialLimitError,
)
from physprobe.harness import EpisodeConfig, EpisodeSession, replay_episode, run_episode
from physprobe.harness.actions import parse_action
from physprobe.harness.baselines import ConstAccelAgent, ModelFitAgent
from physprobe.numerics.grid import fft_forward, fft_inverse
from physprobe.numerics.linalg import invert_small_matrix
from physprobe.numerics.rng import SeededRng, Stream
from physprobe.protocol.clock import Clock
from physprobe.protocol.fidelity import CostModel, Fidelity
from physprobe.protocol.metrics import domain_diagonal, l2_error
from physprobe.protocol.requests import (
    ClassicalRequest,
    FluidRequest,
    QuantumRequest,
)


def _two_body_state(radius=1.0, speed=0.5):
    # equal unit masses on a circular relative orbit of separation 2*radius
    return ParticleState(
        positions=np.array([[-radius, 0.0], [radius, 0.0]]),
        velocities=np.array([[0.0, -speed], [0.0, speed]]),
        masses=np.array([1.0, 1.0]),
        radii=np.array([0.01, 0.01]),
        memory=np.zeros((2, 2, 2)),
        accelerations=np.zeros((2, 2)),
    )


def test_p01_cost_ladder_and_budget_ledger():
    episode = EpisodeConfig(
        environment="classical",
        config={"n_particles": 4, "t_max": 20.0, "dt": 0.01, "budget": 200.0},
        seed=11,
    )
    session = EpisodeSession(episode)
    session.start()

    triple_high = json.dumps(
        {
            "selection": [{"object_id": i, "quality": "high"} for i in range(3)],
            "time_delta": 0.1,
        }
    )
    ladder = []
    for _ in range(6):
        batch = session.handle(triple_high)
        assert batch[-1]["type"] == "observation"
        ladder.append(batch[-1]["payload"]["remaining"])
    assert ladder == [170.0, 140.0, 110.0, 80.0, 50.0, 20.0]

    # a seventh 30-unit request exceeds the 20 left: rejected, nothing charged
    batch = session.handle(triple_high)
    assert batch[-1]["type"] == "error"
    assert batch[-1]["payload"]["code"] == "insufficient_budget"
    assert session.ledger.remaining == 20.0

    mixed = json.dumps(
        {
            "selection": [
                {"object_id": 0, "quality": "high"},
                {"object_id": 1, "quality": "medium"},
                {"object_id": 2, "quality": "low"},
                {"object_id": 3, "quality": "low"},
            ],
            "time_delta": 0.1,
        }
    )
    # 10 + 5 + 2 + 2 = 19 leaves exactly 1.0, which is below the cheapest
    # tier, so the same batch also opens the prediction phase
    batch = session.handle(mixed)
    assert batch[0]["type"] == "observation"
    assert batch[0]["payload"]["remaining"] == 1.0
    assert session.ledger.remaining == 1.0


def test_p02_two_body_circular_orbit_oracle():
    # mu = G(m1+m2) = 2, separation d = 2: omega = sqrt(mu/d^3) = 0.5,
    # per-body speed 0.5, analytic period T = 2*pi/omega = 4*pi
    config = ClassicalConfig(
        n_particles=2,
        dt=0.001,
        kappa=0.0,
        softening=1e-4,
        gravity_law=GravityLaw.INVERSE_SQUARE,
    )
    state = _two_body_state()
    period = 4.0 * math.pi
    steps = int(period / config.dt) + 600

    angles = np.empty(steps + 1)
    seps = np.empty(steps + 1)
    rel = state.positions[1] - state.positions[0]
    angles[0] = math.atan2(rel[1], rel[0])
    seps[0] = np.linalg.norm(rel)
    for k in range(steps):
        step_classical(state, config, step_index=k)
        rel = state.positions[1] - state.positions[0]
        angles[k + 1] = math.atan2(rel[1], rel[0])
        seps[k + 1] = np.linalg.norm(rel)

    # radius drift: per-body orbit radius is half the separation
    assert np.max(np.abs(seps / 2.0 - 1.0)) < 0.01

    swept = np.unwrap(angles) - angles[0]
    crossing = int(np.argmax(swept >= 2.0 * math.pi))
    assert crossing > 0, "orbit did not complete a revolution"
    frac = (2.0 * math.pi - swept[crossing - 1]) / (
        swept[crossing] - swept[crossing - 1]
    )
    measured = (crossing - 1 + frac) * config.dt
    assert abs(measured - period) / period < 0.02


def test_p03_inverse_linear_orbit_speed():
    # with F = G*m*M/r the circular speed sqrt(F*r/m) = sqrt(G*M) at every r
    big_mass, test_mass, g = 3.0, 1.0, 1.0
    expected = math.sqrt(g * big_mass)
    speeds = []
    for radius in (2.0, 4.0):
        force = gravity_pair_force(
            np.array([radius, 0.0]),
            np.array([0.0, 0.0]),
            test_mass,
            big_mass,
            GravityLaw.INVERSE_LINEAR,
            G=g,
            softening=0.0,
        )
        speed = math.sqrt(np.linalg.norm(force) * radius / test_mass)
        assert abs(speed - expected) / expected < 1e-6
        speeds.append(speed)
    # the defining signature of the law: orbital speed independent of radius
    assert abs(speeds[0] - speeds[1]) < 1e-9


def _tensor_path_step(state, config):
    """The dense-matrix acceleration route, mirrored with kappa = 0.

    Identical update order to the production integrator; only the fast
    scalar division is replaced by assembling and inverting m*I + kappa*S.
    """
    dt = config.dt
    forces = total_forces(state.positions, state.masses, config)
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
    return state


@pytest.mark.parametrize("masses", [(0.5, 1.0, 2.0), (1.3, 2.7, 0.9)])
def test_p04_zero_kappa_matches_scalar_path(masses):
    config = ClassicalConfig(n_particles=3, dt=1e-4, kappa=0.0, softening=1e-3)

    def fresh():
        # tight inner pair plus a distant third body; no collisions in 1e4 steps
        return ParticleState(
            positions=np.array([[-0.5, 0.0], [0.5, 0.0], [4.0, 0.0]]),
            velocities=np.array([[0.0, -0.8], [0.0, 0.4], [0.0, 0.3]]),
            masses=np.array(masses),
            radii=np.array([0.05, 0.05, 0.05]),
            memory=np.zeros((3, 2, 2)),
            accelerations=np.zeros((3, 2)),
        )

    fast, dense = fresh(), fresh()
    for k in range(10_000):
        step_classical(fast, config, step_index=k)
        _tensor_path_step(dense, config)

    for field in ("positions", "velocities", "memory", "accelerations"):
        diff = np.max(np.abs(getattr(fast, field) - getattr(dense, field)))
        assert diff < 1e-12, f"{field} diverged by {diff}"


def test_p05_fluid_single_mode_viscous_decay():
    n, nu = 64, 0.001
    config = FluidConfig(n=n, nu=nu, dt=0.001, forcing=ForcingKind.NONE)

    # omega = cos(x): exactly two spectral bins, each n^2/2 under the
    # unnormalized forward transform
    omega_hat = np.zeros((n, n), dtype=complex)
    omega_hat[1, 0] = n * n / 2.0
    omega_hat[-1, 0] = n * n / 2.0
    field = VorticityField(omega_hat, n, config.L, config.dealias_ratio)

    x = np.arange(n) * config.L / n
    assert np.allclose(
        fft_inverse(field.omega_hat).real, np.cos(x)[:, None], atol=1e-13
    )

    band = ~field.dealias_mask
    for k in range(1000):
        field = rk4_step(field, config, step_index=k)
        assert np.all(field.omega_hat[band] == 0.0), f"dealias band dirty at step {k}"

    amplitude = fft_inverse(field.omega_hat).real.max()
    expected = math.exp(-nu)  # e^{-nu k^2 t} with k = 1, t = 1
    assert abs(amplitude - expected) / expected < 1e-8


def test_p06_fluid_energy_monotone_without_injection():
    # shear-layer start, forcing machinery active but zero-amplitude
    config = FluidConfig(
        n=128,
        nu=0.001,
        dt=0.001,
        forcing=ForcingKind.COMBINED,
        gamma_velocity=0.0,
        gamma_vorticity=0.0,
    )
    field = init_kelvin_helmholtz(config, SeededRng(2024, Stream.INIT))
    cell = (config.L / config.n) ** 2

    def diagnostics(fld):
        u, v = velocity_from_vorticity(fld)
        energy = 0.5 * float(np.sum(u * u + v * v)) * cell
        div_hat = 1j * fld.kx * fft_forward(u) + 1j * fld.ky * fft_forward(v)
        divergence = float(np.max(np.abs(fft_inverse(div_hat))))
        return energy, divergence

    energy, divergence = diagnostics(field)
    assert divergence < 1e-10
    for k in range(1000):
        field = rk4_step(field, config, step_index=k)
        next_energy, divergence = diagnostics(field)
        assert next_energy <= energy + 1e-12, f"energy grew at step {k}"
        assert divergence < 1e-10, f"divergence {divergence} at step {k}"
        energy = next_energy


FROZEN_PACKETS = {
    "masses": [5.0, 6.0],
    "means": [(-0.4, -0.3), (0.4, 0.45)],
    "stds": [0.7, 0.7],
    "velocities": [(0.15, 0.10), (-0.12, -0.15)],
}


def test_p07_quantum_unitarity_and_packet_transport():
    config = QuantumConfig(n=32, dt=0.005, p=2.0, lambda_ent=0.0)
    psi = init_wavefunction(config, SeededRng(1, Stream.INIT), params=FROZEN_PACKETS)
    propagator = Propagator(config, np.array(FROZEN_PACKETS["masses"]))

    steps = 1000
    worst_drift = 0.0
    for _ in range(steps):
        propagate(psi, propagator)  # no renormalization anywhere in this loop
        worst_drift = max(worst_drift, abs(math.sqrt(lp_norm(psi, 2.0)) - 1.0))
    assert worst_drift < 1e-10

    elapsed = steps * config.dt
    for particle, index in ((1, 0), (2, 1)):
        start = np.array(FROZEN_PACKETS["means"][index])
        velocity = np.array(FROZEN_PACKETS["velocities"][index])
        expected = start + velocity * elapsed

        # free spreading keeps the packet more than 3 sigma inside the well
        mass = FROZEN_PACKETS["masses"][index]
        sigma0 = FROZEN_PACKETS["stds"][index]
        sigma_t = sigma0 * math.sqrt(
            1.0 + (config.hbar * elapsed / (2.0 * mass * sigma0**2)) ** 2
        )
        half_box = np.array(config.box) / 2.0
        assert np.all(np.abs(expected) + 3.0 * sigma_t < half_box)

        centroid = position_expectation(psi, particle, config.p)
        displacement = np.linalg.norm(velocity * elapsed)
        error = np.linalg.norm(centroid - expected)
        assert error / displacement < 0.02


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_p08_generalized_collapse_sampling(p):
    config = QuantumConfig(
        n=16, dt=0.005, p=p, lambda_ent=5.0, std_range=(1.25, 2.0)
    )
    params = {
        "masses": [0.8, 2.0],
        "means": [(1.0, 1.5), (0.5, 0.5)],
        "stds": [1.3, 1.5],
        "velocities": [(0.5, 0.3), (1.0, 0.8)],
    }
    psi = init_wavefunction(config, SeededRng(3, Stream.INIT), params=params)
    propagator = Propagator(config, np.array(params["masses"]))
    for _ in range(10):
        strang_step(psi, propagator, p)

    model = CostModel()
    collapse_rng = SeededRng(50, Stream.NOISE)
    # collapsing particle 1 localizes particle 2 through the correlation term,
    # concentrating the marginal enough for a 1e4-sample TV comparison
    measure_and_collapse(psi, 1, Fidelity.HIGH, model, collapse_rng, p)

    # brute-force marginal: sum |psi|^p h^4 over the partner coordinates
    target = (np.abs(psi.values) ** p).sum(axis=(0, 1)) * psi.cell_volume
    target = target.reshape(-1)
    assert abs(target.sum() - 1.0) < 1e-9

    draws = 10_000
    counts = np.zeros(config.n * config.n)
    sample_rng = SeededRng(51, Stream.NOISE)
    for _ in range(draws):
        work = psi.copy()
        reported, _ = measure_and_collapse(
            work, 2, Fidelity.HIGH, model, sample_rng, p
        )
        i = int(np.argmin(np.abs(psi.axis - reported[0])))
        j = int(np.argmin(np.abs(psi.axis - reported[1])))
        counts[i * config.n + j] += 1.0

    total_variation = 0.5 * np.abs(counts / draws - target).sum()
    assert total_variation < 0.03


def test_p09_observation_noise_calibration():
    state = ParticleState(
        positions=np.array([[1.0, -2.0], [3.5, 0.25], [-4.0, 4.0], [0.0, 0.0]]),
        velocities=np.zeros((4, 2)),
        masses=np.ones(4),
        radii=np.full(4, 0.1),
        memory=np.zeros((4, 2, 2)),
        accelerations=np.zeros((4, 2)),
    )
    model = CostModel()
    rng = SeededRng(123, Stream.NOISE)
    repeats = 10_000
    for fidelity, sigma in (
        (Fidelity.LOW, 0.1),
        (Fidelity.MEDIUM, 0.01),
        (Fidelity.HIGH, 0.001),
    ):
        selection = [(i, fidelity) for i in range(state.n)]
        residuals = np.empty((repeats, state.n, 2))
        for k in range(repeats):
            observed = observe_positions(state, selection, model, rng)
            for i in range(state.n):
                residuals[k, i] = observed[i] - state.positions[i]
        sample_std = float(np.std(residuals))
        assert abs(sample_std - sigma) / sigma < 0.05


def test_p10_metric_spot_checks():
    diagonal = domain_diagonal((-10.0, -10.0), (10.0, 10.0))
    assert abs(diagonal - 28.2843) < 5e-5
    assert abs(diagonal - math.sqrt(800.0)) < 1e-12

    assert l2_error(np.array([3.0, 4.0]), np.zeros(2)) == 5.0

    fixtures = (
        ("classical", ClassicalConfig(n_particles=3, t_max=5.0, dt=0.01),
         np.array([1.2, -3.4, 5.6, 0.0, 2.0, -1.0])),
        ("fluid", FluidConfig(n=32, t_max=5.0, dt=0.01),
         np.array([0.3, -0.2, 1.7])),
        ("quantum", QuantumConfig(n=16, t_max=2.0, dt=0.01, std_range=(1.3, 2.0)),
         np.array([0.42])),
    )
    for kind, config, vector in fixtures:
        env = make_environment(kind, config, seed=9)
        assert env.score_error(vector, vector.copy()) == 0.0


class ScriptedAgent:
    """Plays a fixed list of measurement turns, then two bad replies and
    zero-filled answers; deterministic, so its transcript replays bitwise."""

    def __init__(self, measurement_lines):
        self.queue = list(measurement_lines)
        self.bad_answers = ['not even json', '{"predictions": [1.0, 2.0, 3.0]}']
        self.predicting = False
        self.arity = None
        self.turns = 0

    def respond(self, envelopes):
        self.turns += 1
        for envelope in envelopes:
            if envelope["type"] == "prediction_query":
                self.predicting = True
                self.arity = envelope["payload"]["query"]["arity"]
        if not self.predicting:
            return self.queue.pop(0)
        if self.bad_answers:
            return self.bad_answers.pop(0)
        return json.dumps({"predictions": [0.0] * self.arity})


def _classical_script():
    def act(entries, dt=0.5):
        return json.dumps({"selection": entries, "time_delta": dt})

    low = lambda ids: [{"object_id": i, "quality": "low"} for i in ids]
    high = lambda ids: [{"object_id": i, "quality": "high"} for i in ids]
    lines = ["this is not json"]
    lines += [act(low([0]))] * 36                      # 36 x 2 = 72 spent
    lines += [act(high([0, 1, 2, 3]))]                 # 40 > 28, rejected
    lines += [act([{"object_id": 0, "quality": "high"},
                   {"object_id": 1, "quality": "medium"}])]  # 15, leaves 13
    lines += [act(high([0, 1, 2, 3]))]                 # rejected again
    lines += [act(low([0, 1, 2, 3]))]                  # 8, leaves 5
    lines += [act(low([0, 1, 2]))]                     # 6 > 5, rejected
    lines += [act(low([0, 1]))]                        # 4, leaves 1 < min cost
    return lines


def _fluid_script():
    def act(points, dt=0.05):
        return json.dumps({"selection": points, "time_delta": dt})

    def probes(k, quality):
        return [
            {"x": 0.5 + 0.3 * i, "y": 1.0 + 0.2 * i, "quality": quality}
            for i in range(k)
        ]

    lines = ["{broken"]
    lines += [act(probes(1, "low"))] * 36
    lines += [act(probes(4, "high"))]
    lines += [act([{"x": 0.1, "y": 0.2, "quality": "high"},
                   {"x": 0.3, "y": 0.4, "quality": "medium"}])]
    lines += [act(probes(4, "high"))]
    lines += [act(probes(4, "low"))]
    lines += [act(probes(3, "low"))]
    lines += [act(probes(2, "low"))]
    return lines


def _quantum_script():
    low = json.dumps({"particle": 1, "quality": "low", "time_delta": 0.1})
    high = json.dumps({"particle": 2, "quality": "high", "time_delta": 0.1})
    lines = []
    for _ in range(2):  # trials 1 and 2: burn 20 units in ten cheap looks
        lines += ["???"] + [low] * 8 + [high] + [low] * 2
    lines += [low] * 6 + [high] * 9 + [low] * 4  # trial 3 ends the phase
    return lines


P11_EPISODES = {
    "classical": (
        {"n_particles": 4, "t_max": 50.0, "dt": 0.01, "budget": 100.0},
        _classical_script,
    ),
    "fluid": (
        {"n": 32, "t_max": 10.0, "dt": 0.01, "budget": 100.0},
        _fluid_script,
    ),
    "quantum": (
        {
            "n": 16,
            "t_max": 5.0,
            "dt": 0.01,
            "budget_per_trial": 20.0,
            "num_trials": 3,
            "std_range": (1.3, 2.0),
            "max_observations_per_trial": 15,
        },
        _quantum_script,
    ),
}


@pytest.mark.parametrize("kind", ["classical", "fluid", "quantum"])
def test_p11_fifty_turn_replay_is_bitwise(kind):
    config, script = P11_EPISODES[kind]
    episode = EpisodeConfig(environment=kind, config=dict(config), seed=31)
    agent = ScriptedAgent(script())
    record = run_episode(episode, agent)

    assert record.aborted is None
    assert record.score is not None
    assert agent.turns == 50
    assert not agent.queue and not agent.bad_answers

    fresh, mismatches = replay_episode(record)
    assert mismatches == []
    assert json.dumps(fresh.to_dict(), sort_keys=True) == json.dumps(
        record.to_dict(), sort_keys=True
    )


QUIET = {
    "noise": {Fidelity.LOW: 2e-9, Fidelity.MEDIUM: 1e-9, Fidelity.HIGH: 0.0}
}


def test_p12_baselines_recover_simple_worlds():
    # a single free body follows an exact quadratic (zero-acceleration)
    # trajectory, which the constant-acceleration fit must nail
    episode = EpisodeConfig(
        environment="classical",
        config={
            "n_particles": 1,
            "kappa": 0.0,
            "box_lo": (-100.0, -100.0),
            "box_hi": (100.0, 100.0),
            "t_max": 10.0,
            "dt": 0.01,
            "budget": 200.0,
        },
        seed=5,
        cost_model=CostModel(**QUIET),
    )
    record = run_episode(episode, ConstAccelAgent())
    assert record.score is not None and record.score < 1e-6

    episode = EpisodeConfig(
        environment="classical",
        config={
            "n_particles": 2,
            "kappa": 0.0,
            "gravity_law": "inverse_linear",
            "t_max": 10.0,
            "dt": 0.01,
            "budget": 200.0,
        },
        seed=5,
        cost_model=CostModel(**QUIET),
    )
    agent = ModelFitAgent()
    run_episode(episode, agent)
    assert agent.selected_law == "inverse_linear"
    assert agent.fit_errors["inverse_linear"] < 1e-6


EXAMPLE_ACTIONS = {
    "classical": (
        '{"selection": [{"object_id": 0, "quality": "high"},'
        ' {"object_id": 2, "quality": "low"}], "time_delta": 0.5}'
    ),
    "fluid": (
        '{"selection": [{"x": 0.1, "y": 0.2, "quality": "high"},'
        ' {"x": 0.3, "y": 0.4, "quality": "medium"}], "time_delta": 0.1}'
    ),
    "quantum": '{"particle": 1, "quality": "HIGH", "time_delta": 0.5}',
}


def test_p13_wire_grammar_and_error_codes():
    parsed = parse_action(EXAMPLE_ACTIONS["classical"], "classical")
    assert isinstance(parsed, ClassicalRequest)
    assert parsed.selection == ((0, Fidelity.HIGH), (2, Fidelity.LOW))
    assert parsed.time_delta == 0.5

    parsed = parse_action(EXAMPLE_ACTIONS["fluid"], "fluid")
    assert isinstance(parsed, FluidRequest)
    assert parsed.selection == (
        (0.1, 0.2, Fidelity.HIGH),
        (0.3, 0.4, Fidelity.MEDIUM),
    )

    parsed = parse_action(EXAMPLE_ACTIONS["quantum"], "quantum")
    assert isinstance(parsed, QuantumRequest)
    assert parsed.particle == 1 and parsed.fidelity is Fidelity.HIGH

    for spelling in ("HIGH", "High", "hIgH"):
        assert Fidelity.parse(spelling) is Fidelity.HIGH
        request = parse_action(
            '{"particle": 2, "quality": "%s", "time_delta": 1.0}' % spelling,
            "quantum",
        )
        assert request.fidelity is Fidelity.HIGH

    triggered = set()

    def crafted(raw, kind="classical"):
        with pytest.raises(ProtocolError) as info:
            parse_action(raw, kind)
        triggered.add(info.value.code)

    crafted("not json at all")
    crafted('{"time_delta": 1.0}')
    crafted('{"selection": [{"object_id": 0, "quality": "low"}],'
            ' "time_delta": 1.0, "extra": true}')
    crafted('{"selection": [], "time_delta": 1.0}')
    crafted('{"selection": [{"object_id": -3, "quality": "low"}], "time_delta": 1.0}')
    crafted('{"selection": [{"object_id": 0, "quality": "ultra"}], "time_delta": 1.0}')
    crafted('{"selection": [{"object_id": 0, "quality": "low"}], "time_delta": 0}')
    crafted('{"selection": [{"x": "west", "y": 0.2, "quality": "low"}],'
            ' "time_delta": 1.0}', kind="fluid")
    crafted('{"particle": 7, "quality": "low", "time_delta": 1.0}', kind="quantum")

    # codes that only fire against live episode state
    episode = EpisodeConfig(
        environment="classical",
        config={"n_particles": 2, "t_max": 5.0, "dt": 0.01, "budget": 5.0},
        seed=2,
    )
    session = EpisodeSession(episode)
    session.start()
    batch = session.handle('{"predictions": [1.0, 2.0, 3.0, 4.0]}')
    triggered.add(batch[-1]["payload"]["code"])  # answers during measurement
    batch = session.handle(
        '{"selection": [{"object_id": 0, "quality": "high"}], "time_delta": 1.0}'
    )
    triggered.add(batch[-1]["payload"]["code"])  # 10 > budget of 5
    batch = session.handle(
        '{"selection": [{"object_id": 0, "quality": "low"}], "time_delta": 100.0}'
    )
    assert batch[-1]["type"] == "prediction_query"
    batch = session.handle('{"predictions": [1.0]}')  # arity is 4
    triggered.add(batch[-1]["payload"]["code"])

    # harness-internal guards; the session converts these into phase flips or
    # trial rollovers, so they are raised directly here
    clock = Clock(dt=1.0, t_max=1.0)
    clock.advance(1.0)
    with pytest.raises(TimeLimitExceeded) as info:
        clock.advance(1.0)
    triggered.add(info.value.code)

    quantum_config = QuantumConfig(
        n=16, t_max=2.0, dt=0.01, num_trials=1, std_range=(1.3, 2.0),
        max_observations_per_trial=1,
    )
    env = make_environment("quantum", quantum_config, seed=4)
    with pytest.raises(TrialLimitError) as info:
        env.reset_trial()
    triggered.add(info.value.code)

    request = parse_action(
        '{"particle": 1, "quality": "low", "time_delta": 0.1}', "quantum"
    )
    env.measure(request, 0.1)
    with pytest.raises(ObservationLimitError) as info:
        env.measure(request, 0.2)
    triggered.add(info.value.code)

    defined = {ProtocolError.code}
    for name in dir(errors_module):
        obj = getattr(errors_module, name)
        if isinstance(obj, type) and issubclass(obj, ProtocolError):
            defined.add(obj.code)
    assert triggered == defined
