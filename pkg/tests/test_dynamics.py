import math

import numpy as np
import pytest

from dickestark.dynamics import (
    diagonal_part,
    energy_expectation,
    evolve,
    fidelity,
    observables,
    propagate,
    propagator,
    to_rotating_frame,
)
from dickestark.effective import (
    ResonanceTarget,
    build_effective_hamiltonian,
    delta_minus,
    delta_plus,
    rabi_frequency,
    solve_first_order_resonance,
)
from dickestark.model import (
    BasisKind,
    ModelParams,
    Operator,
    StateVector,
    build_hamiltonian,
    build_space,
    dicke_state,
    ladder_coupling,
)


def random_state(space, rng):
    amps = rng.normal(size=space.dimension) + 1j * rng.normal(size=space.dimension)
    return StateVector(space, amps / np.linalg.norm(amps))


@pytest.fixture
def small_system():
    params = ModelParams(n_qubits=3, omega_q=0.9, coupling=0.08, stark_u=-0.6, n_max=4)
    space = build_space(params, BasisKind.SYMMETRIC)
    return params, space, build_hamiltonian(params, space)


class TestPropagator:
    def test_zero_time_is_identity(self, small_system):
        _, space, h = small_system
        u = propagator(h, 0.0)
        assert np.max(np.abs(u.matrix - np.eye(space.dimension))) < 1e-12

    def test_unitary(self, small_system):
        _, space, h = small_system
        u = propagator(h, 7.3)
        defect = np.max(np.abs(u.matrix.conj().T @ u.matrix - np.eye(space.dimension)))
        assert defect < 1e-10

    def test_preserves_norm(self, small_system):
        _, space, h = small_system
        rng = np.random.default_rng(3)
        u = propagator(h, 11.0)
        for _ in range(5):
            psi = random_state(space, rng)
            assert np.linalg.norm(u.matrix @ psi.amplitudes) == pytest.approx(1.0, abs=1e-12)

    def test_group_property(self, small_system):
        _, _, h = small_system
        u1 = propagator(h, 2.2)
        u2 = propagator(h, 5.9)
        u12 = propagator(h, 8.1)
        assert np.max(np.abs(u1.matrix @ u2.matrix - u12.matrix)) < 1e-10

    def test_rejects_non_hermitian(self, small_system):
        _, space, _ = small_system
        bad = Operator(space, np.triu(np.ones((space.dimension, space.dimension))))
        with pytest.raises(ValueError):
            propagator(bad, 1.0)


class TestEvolve:
    def test_final_state_matches_propagator(self, small_system):
        _, space, h = small_system
        rng = np.random.default_rng(11)
        psi0 = random_state(space, rng)
        traj = evolve(psi0, h, duration=13.0, samples=57)
        direct = propagator(h, 13.0).matrix @ psi0.amplitudes
        assert np.max(np.abs(traj.states[-1] - direct)) < 1e-10

    def test_diagonal_hamiltonian_freezes_populations(self, small_system):
        _, space, h = small_system
        rng = np.random.default_rng(5)
        psi0 = random_state(space, rng)
        traj = evolve(psi0, diagonal_part(h), duration=9.0, samples=40)
        assert np.max(np.abs(traj.populations - traj.populations[0])) < 1e-12

    def test_norm_conservation(self, small_system):
        _, space, h = small_system
        rng = np.random.default_rng(17)
        psi0 = random_state(space, rng)
        traj = evolve(psi0, h, duration=200.0, samples=400)
        norms = np.linalg.norm(traj.states, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-10

    def test_energy_conservation(self, small_system):
        _, space, h = small_system
        rng = np.random.default_rng(23)
        psi0 = random_state(space, rng)
        traj = evolve(psi0, h, duration=150.0, samples=150)
        energies = [energy_expectation(traj.state_at(i), h) for i in range(150)]
        scale = max(abs(energies[0]), 1.0)
        assert np.max(np.abs(np.asarray(energies) - energies[0])) / scale < 1e-10

    def test_ladder_first_step_transfer(self):
        # Pair-creating resonance from the collective ground state: after a
        # half oscillation nearly all population sits in (k=1, n=1).
        base = dict(n_qubits=4, omega_r=1.0, coupling=0.006, stark_u=-0.5, n_max=8)
        omega_q = solve_first_order_resonance(
            ResonanceTarget("atc", 1, 0, 0), ModelParams(**base)
        )
        params = ModelParams(omega_q=omega_q, **base)
        space = build_space(params, BasisKind.SYMMETRIC)
        h = build_hamiltonian(params, space)
        psi0 = dicke_state(space, 0, 0)
        duration = math.pi / (2 * rabi_frequency(0, 0, params))
        traj = evolve(psi0, h, duration, samples=100)
        assert traj.final.population(1, 1) >= 0.98

    @pytest.mark.parametrize(
        "kind,n0,k0,start",
        [("tc", 0, 1, (1, 1)), ("atc", 0, 0, (0, 0))],
    )
    def test_effective_two_level_matches_full(self, kind, n0, k0, start):
        # Selective step at its resonance: the rank-2 effective model tracks
        # the exact populations within 0.02 over one Rabi period.
        base = dict(n_qubits=4, omega_r=1.0, coupling=0.006, stark_u=-0.5, n_max=8)
        target = ResonanceTarget(kind, 1, n0, k0)
        omega_q = solve_first_order_resonance(target, ModelParams(**base))
        params = ModelParams(omega_q=omega_q, **base)
        space = build_space(params, BasisKind.SYMMETRIC)
        h_full = build_hamiltonian(params, space)
        h_eff = build_effective_hamiltonian(target, params, space)
        psi0 = dicke_state(space, *start)
        period = math.pi / rabi_frequency(n0, k0, params)
        t_full = evolve(psi0, h_full, period, samples=160)
        t_eff = evolve(psi0, h_eff, period, samples=160)
        assert np.max(np.abs(t_full.populations - t_eff.populations)) < 0.02

    def test_argument_validation(self, small_system):
        params, space, h = small_system
        psi0 = dicke_state(space, 0, 0)
        with pytest.raises(ValueError):
            evolve(psi0, h, duration=1.0, samples=1)
        other = build_space(ModelParams(n_qubits=2, n_max=4), BasisKind.SYMMETRIC)
        with pytest.raises(ValueError):
            evolve(dicke_state(other, 0, 0), h, duration=1.0)


class TestObservables:
    def test_basis_state(self):
        params = ModelParams(n_qubits=4, n_max=3)
        space = build_space(params, BasisKind.SYMMETRIC)
        nq, nph, pops = observables(dicke_state(space, 2, 0))
        assert nq == pytest.approx(2.0)
        assert nph == pytest.approx(0.0)
        assert pops[(2, 0)] == pytest.approx(1.0)

    def test_superposition(self):
        params = ModelParams(n_qubits=4, n_max=3)
        space = build_space(params, BasisKind.SYMMETRIC)
        amps = np.zeros(space.dimension, dtype=complex)
        amps[space.index(0, 0)] = 1 / math.sqrt(2)
        amps[space.index(2, 2)] = 1 / math.sqrt(2)
        nq, nph, pops = observables(StateVector(space, amps))
        assert nq == pytest.approx(1.0)
        assert nph == pytest.approx(1.0)
        assert sum(pops.values()) == pytest.approx(1.0, abs=1e-10)


class TestFidelity:
    def test_identical_and_orthogonal(self):
        params = ModelParams(n_qubits=2, n_max=2)
        space = build_space(params, BasisKind.SYMMETRIC)
        a = dicke_state(space, 0, 0)
        b = dicke_state(space, 1, 1)
        assert fidelity(a, a) == pytest.approx(1.0)
        assert fidelity(a, b) == pytest.approx(0.0)

    def test_space_mismatch(self):
        s1 = build_space(ModelParams(n_qubits=2, n_max=2), BasisKind.SYMMETRIC)
        s2 = build_space(ModelParams(n_qubits=2, n_max=3), BasisKind.SYMMETRIC)
        with pytest.raises(ValueError):
            fidelity(dicke_state(s1, 0, 0), dicke_state(s2, 0, 0))


class TestRotatingFrame:
    def test_identity_at_zero(self, small_system):
        _, space, h = small_system
        rng = np.random.default_rng(2)
        psi = random_state(space, rng)
        out = to_rotating_frame(psi, diagonal_part(h), 0.0)
        assert np.allclose(out.amplitudes, psi.amplitudes)

    def test_populations_invariant(self, small_system):
        _, space, h = small_system
        rng = np.random.default_rng(4)
        psi = random_state(space, rng)
        out = to_rotating_frame(psi, diagonal_part(h), 37.0)
        assert np.allclose(np.abs(out.amplitudes), np.abs(psi.amplitudes))

    def test_rejects_nondiagonal(self, small_system):
        _, space, h = small_system
        psi = dicke_state(space, 0, 0)
        with pytest.raises(ValueError):
            to_rotating_frame(psi, h, 1.0)

    def test_matches_channelwise_interaction_picture(self):
        # Oracle: integrate the interaction-picture Hamiltonian assembled
        # channel by channel, i d psi/dt = sum_c Omega_c (M_c e^{i delta_c t}
        # + h.c.) psi, with fixed-step fourth-order stepping, and compare to
        # the frame-transformed exact evolution.
        params = ModelParams(n_qubits=2, omega_q=0.9, coupling=0.05, stark_u=-0.8, n_max=3)
        space = build_space(params, BasisKind.SYMMETRIC)
        h = build_hamiltonian(params, space)
        h0 = diagonal_part(h)

        channels = []
        for n in range(params.n_max):
            for k in range(params.n_qubits):
                omega = (
                    params.coupling
                    * ladder_coupling(k, params.n_qubits)
                    * math.sqrt(n + 1)
                    / math.sqrt(params.n_qubits)
                )
                up_tc = np.zeros((space.dimension, space.dimension), dtype=complex)
                up_tc[space.index(k + 1, n), space.index(k, n + 1)] = omega
                channels.append((up_tc, delta_minus(n, k, params)))
                up_atc = np.zeros((space.dimension, space.dimension), dtype=complex)
                up_atc[space.index(k + 1, n + 1), space.index(k, n)] = omega
                channels.append((up_atc, delta_plus(n, k, params)))

        mats = np.array([m for m, _ in channels])
        deltas = np.array([d for _, d in channels])

        def h_int(t):
            phased = np.tensordot(np.exp(1j * deltas * t), mats, axes=1)
            return phased + phased.conj().T

        amps = np.zeros(space.dimension, dtype=complex)
        for cell in ((0, 1), (1, 0), (2, 2)):
            amps[space.index(*cell)] = 1 / math.sqrt(3)
        psi0 = StateVector(space, amps)

        duration, steps = 20.0, 10_000
        dt = duration / steps
        psi = psi0.amplitudes.copy()
        t = 0.0
        for _ in range(steps):
            k1 = -1j * (h_int(t) @ psi)
            k2 = -1j * (h_int(t + dt / 2) @ (psi + dt / 2 * k1))
            k3 = -1j * (h_int(t + dt / 2) @ (psi + dt / 2 * k2))
            k4 = -1j * (h_int(t + dt) @ (psi + dt * k3))
            psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt

        exact = to_rotating_frame(propagate(h, psi0, duration), h0, duration)
        assert np.linalg.norm(exact.amplitudes - psi) < 1e-6


class TestTrajectoryCsv:
    def test_columns_and_axis(self, tmp_path, small_system):
        from dickestark.dynamics import write_trajectory_csv

        params, space, h = small_system
        traj = evolve(dicke_state(space, 0, 0), h, duration=5.0, samples=10)
        path = tmp_path / "traj.csv"
        write_trajectory_csv(path, traj, coupling=params.coupling)
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        assert header[:4] == ["t", "lambda_t", "nq", "nph"]
        assert header[4] == "pop_k0_n0"
        assert len(header) == 4 + space.dimension
        assert len(lines) == 11
        first = lines[1].split(",")
        assert float(first[1]) == pytest.approx(params.coupling * float(first[0]))


class TestExcitationStructure:
    def test_total_excitation_conserved_without_pair_terms(self):
        # Zeroing the matrix elements between (k, n) and (k+1, n+1) leaves a
        # Hamiltonian that commutes with the total excitation number exactly.
        params = ModelParams(n_qubits=3, omega_q=0.7, coupling=0.2, stark_u=-1.1, n_max=4)
        space = build_space(params, BasisKind.SYMMETRIC)
        h = np.array(build_hamiltonian(params, space).matrix)
        for k in range(params.n_qubits):
            for n in range(params.n_max):
                i, j = space.index(k + 1, n + 1), space.index(k, n)
                h[i, j] = 0.0
                h[j, i] = 0.0
        total = np.diag([k + n for k, n in space.labels()]).astype(float)
        assert np.max(np.abs(h @ total - total @ h)) == 0.0
