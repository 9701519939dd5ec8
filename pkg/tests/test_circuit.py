import math

import numpy as np
import pytest
import scipy.constants as const
from hypothesis import given, settings
from hypothesis import strategies as st

from oscim.circuit import (
    CircuitParams,
    Method,
    build_connectivity,
    coordination_number,
    default_params,
    initial_pump_voltage,
    initial_state,
    lagrange_params,
    map_from_algorithm,
    map_to_algorithm,
    noise_voltage,
    pump_resistance,
    quantize_weights,
    with_pump_capacitance,
)
from oscim.problems import IsingInstance, from_maxcut
from oscim.state import AlgorithmState, OscillatorState

from conftest import random_instance

FERRO = IsingInstance(np.array([[0, 1.0], [1.0, 0]]))
ANTI = IsingInstance(np.array([[0, -1.0], [-1.0, 0]]))


class TestDefaults:
    def test_reference_coordination_gives_500_ohm(self):
        assert default_params(gamma=47.94).R == pytest.approx(500.0, rel=1e-15)

    def test_derived_frequency_and_current(self):
        p = default_params()
        assert p.omega0 == pytest.approx(2 * math.pi * 1e9, rel=1e-12)
        assert p.I_p == pytest.approx(1e-5, rel=1e-12)
        assert 1 / math.sqrt(p.L_p * p.C_0p) == pytest.approx(2 * p.omega0, rel=1e-12)

    def test_component_values(self):
        p = default_params(FERRO)
        assert p.C_s == pytest.approx(1e-9 / (2 * math.pi))
        assert p.L_s == pytest.approx(1e-9 / (2 * math.pi))
        assert p.C_p == pytest.approx(0.01e-9 / (4 * math.pi))
        assert p.L_p == pytest.approx(100e-9 / (4 * math.pi))
        assert p.C_N == pytest.approx(0.1e-9 / (2 * math.pi))
        assert (p.C_0, p.A_sat, p.T) == (0.0, 0.01, 300.0)
        assert math.isinf(p.R_p) and p.lossless_pump
        assert p.R == pytest.approx(500 / 47.94)
        assert p.G_0 == pytest.approx(1 / p.R)
        assert p.G_N == pytest.approx(1 / (p.R * 1e-4))

    def test_plain_has_no_conductance(self):
        p = default_params(FERRO, "plain")
        assert p.method is Method.PLAIN
        assert p.G_0 == 0 and p.G_N == 0

    def test_pump_quality(self):
        p = default_params(FERRO, Q_p=500)
        assert math.sqrt(p.L_p / p.C_p) == pytest.approx(100.0, rel=1e-12)
        assert p.R_p == pytest.approx(50_000.0, rel=1e-12)
        assert p.Q_p == pytest.approx(500.0, rel=1e-12)
        assert pump_resistance(100, p) == pytest.approx(1e4)

    def test_lagrange_params_at_500_ohm(self):
        lp = lagrange_params(default_params(gamma=47.94))
        assert lp.kappa == pytest.approx(1.5707963e6, rel=1e-6)
        assert lp.kappa_prime == pytest.approx(6.2831853e8, rel=1e-6)
        assert lp.alpha == pytest.approx(1.5, rel=1e-12)

    def test_validation(self):
        p = default_params()
        with pytest.raises(ValueError, match="plain"):
            p.replace(method="plain")
        with pytest.raises(ValueError, match="resonance"):
            p.replace(L_p=p.L_p * 1.01)
        with pytest.raises(ValueError):
            p.replace(R=0)
        with pytest.raises(ValueError):
            p.replace(G_0=-1)
        with pytest.raises(ValueError):
            default_params(IsingInstance(np.zeros((2, 2))))

    def test_retuned_pump_capacitance(self):
        p = with_pump_capacitance(default_params(), 1e-12)
        assert p.C_0p == pytest.approx(1e-12)
        assert 1 / math.sqrt(p.L_p * p.C_0p) == pytest.approx(2 * p.omega0, rel=1e-12)


class TestCoordination:
    def test_pair(self):
        assert coordination_number(FERRO) == 1

    def test_field_only(self):
        assert coordination_number(IsingInstance(np.zeros((2, 2)), [2, 2])) == 1


class TestConnectivity:
    def test_ferro(self):
        np.testing.assert_array_equal(build_connectivity(FERRO), [[1, -1], [-1, 1]])

    def test_anti(self):
        np.testing.assert_array_equal(build_connectivity(ANTI), [[1, 1], [1, 1]])

    def test_triangle_spectrum(self):
        X = build_connectivity(from_maxcut(3, [(1, 2, 1), (1, 3, 1), (2, 3, 1)]))
        # J = -1 everywhere: X = 2 I + (ones - I) = I + ones.
        np.testing.assert_allclose(np.linalg.eigvalsh(X), [1, 1, 4], atol=1e-12)

    def test_field_toggle(self):
        inst = IsingInstance(np.zeros((2, 2)), [2.0, -4.0])
        np.testing.assert_array_equal(np.diag(build_connectivity(inst)), [1, 2])
        np.testing.assert_array_equal(build_connectivity(inst, include_field=False), 0)

    @given(st.integers(0, 2**31 - 1), st.integers(2, 30))
    @settings(max_examples=30, deadline=None)
    def test_positive_semidefinite(self, seed, n):
        X = build_connectivity(random_instance(n, seed, values=(-2.0, -1.0, 0.0, 1.0, 0.5)))
        np.testing.assert_array_equal(X, X.T)
        assert np.linalg.eigvalsh(X)[0] >= -1e-9 * np.linalg.norm(X)


class TestInitialState:
    def test_noise_voltage(self):
        V = noise_voltage(default_params())
        assert V == pytest.approx(math.sqrt(const.k * 300 / (1e-9 / (2 * math.pi))))
        assert 5.0e-6 < V < 5.2e-6

    def test_empty_instance_has_zero_pump(self):
        inst = IsingInstance(np.zeros((3, 3)))
        p = default_params(gamma=1.0, method="plain")
        assert initial_pump_voltage(inst, p) == 0

    def test_ferro_pair_pump(self):
        p = default_params(FERRO, "plain")
        expected = 1.1 * 2 / (2 * p.R * p.C_N * p.omega0)
        assert initial_pump_voltage(FERRO, p) == pytest.approx(expected, rel=1e-12)

    def test_uses_fiftieth_eigenvalue(self):
        inst = random_instance(60, 4)
        p = default_params(inst)
        lam = np.linalg.eigvalsh(build_connectivity(inst))[49]
        expected = 1.1 * (lam / (2 * p.R) + p.G_0) / (p.C_N * p.omega0)
        assert initial_pump_voltage(inst, p) == pytest.approx(expected, rel=1e-12)

    def test_modes(self):
        inst = random_instance(200, 1)
        p = default_params(inst)
        V = noise_voltage(p)
        s = initial_state(inst, p, 3, "ode_uniform")
        assert np.all(np.abs(s.A_s) <= V) and len(np.unique(s.A_s)) == 200
        b = initial_state(inst, p, 3, "sde_binary")
        assert set(np.abs(b.A_s)) == {V}
        assert 50 < np.sum(b.A_s > 0) < 150
        assert np.all(s.A_p == s.A_p[0]) and s.t == 0
        with pytest.raises(ValueError):
            initial_state(inst, p, 0, "gaussian")

    def test_seeded(self):
        inst = random_instance(5, 1)
        p = default_params(inst)
        np.testing.assert_array_equal(initial_state(inst, p, 9).A_s, initial_state(inst, p, 9).A_s)


class TestMapping:
    def test_saturated_spin(self):
        inst = IsingInstance(np.zeros((1, 1)), [1.0])
        p = default_params(inst)
        alg = map_to_algorithm(OscillatorState([0.01], [0.0]), inst, p)
        assert alg.x[0] == 1

    def test_isolated_plain_zero_pump(self):
        inst = IsingInstance(np.zeros((1, 1)))
        p = default_params(gamma=1, method="plain")
        assert map_to_algorithm(OscillatorState([0.0], [0.0]), inst, p).lam[0] == 0

    def test_augmented_offset(self):
        inst = IsingInstance(np.zeros((1, 1)))
        p = default_params(gamma=1)
        lam = map_to_algorithm(OscillatorState([0.0], [0.0]), inst, p).lam[0]
        assert lam == pytest.approx(-4 * p.R * (p.G_0 / 2 + 3 * p.G_N * p.A_sat**2 / 8))
        assert lam == pytest.approx(-3.5)

    @pytest.mark.parametrize("method", ["plain", "augmented"])
    def test_round_trip(self, method):
        inst = random_instance(20, 8, h_scale=0.5)
        p = default_params(inst, method)
        rng = np.random.default_rng(0)
        for _ in range(10):
            s = OscillatorState(rng.normal(0, 0.01, 20), rng.uniform(0, 0.2, 20))
            back = map_from_algorithm(map_to_algorithm(s, inst, p), inst, p)
            np.testing.assert_allclose(back.A_s, s.A_s, rtol=1e-12)
            np.testing.assert_allclose(back.A_p, s.A_p, rtol=1e-12, atol=1e-12 * np.abs(s.A_p).max())
            a = AlgorithmState(rng.normal(size=20), rng.normal(size=20))
            again = map_to_algorithm(map_from_algorithm(a, inst, p), inst, p)
            np.testing.assert_allclose(again.x, a.x, rtol=1e-12)
            np.testing.assert_allclose(again.lam, a.lam, rtol=1e-10, atol=1e-12)


class TestQuantize:
    @pytest.mark.parametrize("w, expected", [(2.5, 2.5), (0.3, 0.5), (1.0, 1.0), (0.25, 0.5),
                                             (0.2, 0.0), (9.0, 3.5), (-0.3, -0.5), (1.74, 1.5)])
    def test_values(self, w, expected):
        inst = IsingInstance(np.array([[0, w], [w, 0]]))
        assert quantize_weights(inst, (1, -1)).J.toarray()[0, 1] == expected

    def test_symmetric_and_idempotent(self):
        inst = random_instance(15, 2, values=(-3.3, -0.7, 0.0, 0.1, 1.26, 2.9))
        q = quantize_weights(inst, (1, -1))
        np.testing.assert_array_equal(q.J.toarray(), q.J.toarray().T)
        np.testing.assert_array_equal(quantize_weights(q, (1, -1)).J.toarray(), q.J.toarray())

    def test_bad_bits(self):
        with pytest.raises(ValueError):
            quantize_weights(FERRO, (-1, 1))
