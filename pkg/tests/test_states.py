import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiprobe.states import (
    CatState,
    CoherentState,
    FockState,
    NumericDensityMatrix,
    StateError,
    ThermalState,
    TruncationWarning,
    chi_analytic,
    chi_numeric,
    displacement_matrix,
    laguerre,
    parse_angle,
    parse_state_spec,
    to_density_matrix,
)

ANALYTIC_STATES = [
    FockState(0),
    FockState(3),
    FockState(5),
    CoherentState(0.5 + 0.2j),
    CoherentState(-0.9j),
    ThermalState(0.0),
    ThermalState(1.3),
    CatState(1.0, math.pi / 2, +1),
    CatState(0.8 - 0.3j, 0.7, -1),
]


class TestChiAnalytic:
    @pytest.mark.parametrize("state", ANALYTIC_STATES, ids=repr)
    def test_normalization_at_origin(self, state):
        assert chi_analytic(state, 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_fock5_laguerre_value(self):
        # L5(x) = (-x^5 + 25x^4 - 200x^3 + 600x^2 - 600x + 120)/120 spelled out
        x = 1.0
        l5 = (-x**5 + 25 * x**4 - 200 * x**3 + 600 * x**2 - 600 * x + 120) / 120
        assert l5 == pytest.approx(-7.0 / 15.0)
        assert chi_analytic(FockState(5), 1.0) == pytest.approx(
            math.exp(-0.5) * l5, rel=1e-14)

    def test_fock5_matches_numeric(self):
        rho = to_density_matrix(FockState(5), 30)
        for b in (0.7, 0.3 + 1.1j, -1.8j):
            assert chi_numeric(rho, b) == pytest.approx(
                chi_analytic(FockState(5), b), abs=1e-8)

    def test_cat_quarter_phase_separates_diagonal_and_interference(self):
        # at varphi = pi/2 the real part carries exactly the central
        # (diagonal) term and the imaginary part exactly the interference
        # Gaussians; chi is purely real where those Gaussians coincide
        state = CatState(1.0, math.pi / 2, +1)
        alpha = state.alpha
        for b in (0.4, 1.0 + 0.7j, 2.0, -1.3j):
            val = chi_analytic(state, b)
            central = math.exp(-0.5 * abs(b) ** 2) * math.cos(
                2.0 * (alpha * np.conj(b)).imag) / state.normalization
            gauss = 0.5 * (math.exp(-0.5 * abs(b - 2 * alpha) ** 2)
                           - math.exp(-0.5 * abs(b + 2 * alpha) ** 2))
            assert val.real == pytest.approx(central, abs=1e-14)
            assert val.imag == pytest.approx(-gauss / state.normalization, abs=1e-14)
        for b in (0.5j, 1.8j, -0.9j):  # perpendicular to alpha: purely real
            assert abs(chi_analytic(state, b).imag) < 1e-14

    def test_thermal_gaussian(self):
        state = ThermalState(1.3)
        assert chi_analytic(state, 0.9j) == pytest.approx(
            math.exp(-1.8 * 0.81), rel=1e-12)

    def test_numeric_matrix_rejected(self):
        rho = to_density_matrix(FockState(0), 8)
        with pytest.raises(StateError):
            chi_analytic(rho, 0.1)

    def test_laguerre_recurrence_against_explicit_polynomials(self):
        xs = np.linspace(0.0, 9.0, 7)
        assert laguerre(0, xs) == pytest.approx(np.ones_like(xs))
        assert laguerre(1, xs) == pytest.approx(1 - xs)
        assert laguerre(2, xs) == pytest.approx(0.5 * (xs**2 - 4 * xs + 2))
        assert laguerre(3, xs) == pytest.approx(
            (-xs**3 + 9 * xs**2 - 18 * xs + 6) / 6)


class TestChiNumeric:
    def test_vacuum_origin(self):
        rho = to_density_matrix(FockState(0), 30)
        assert chi_numeric(rho, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_unit_displacement(self):
        rho = to_density_matrix(FockState(0), 30)
        assert chi_numeric(rho, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-8)

    def test_fock3_random_points(self, rng):
        rho = to_density_matrix(FockState(3), 30)
        for _ in range(6):
            b = complex(*rng.uniform(-1.4, 1.4, size=2))
            assert chi_numeric(rho, b) == pytest.approx(
                chi_analytic(FockState(3), b), abs=1e-6)

    @pytest.mark.parametrize("state", ANALYTIC_STATES, ids=repr)
    def test_numeric_matches_analytic_at_dim40(self, state, rng):
        rho = to_density_matrix(state, 40)
        for _ in range(4):
            b = complex(*rng.uniform(-2.1, 2.1, size=2))
            assert chi_numeric(rho, b) == pytest.approx(
                chi_analytic(state, b), abs=1e-6)

    def test_tail_population_warns(self):
        m = np.zeros((8, 8), dtype=complex)
        m[7, 7] = 1.0
        rho = NumericDensityMatrix(8, m)
        with pytest.warns(TruncationWarning):
            chi_numeric(rho, 0.3)

    def test_displacement_unitary(self):
        d = displacement_matrix(0.4 - 0.2j, 24)
        assert np.max(np.abs(d @ d.conj().T - np.eye(24))) < 1e-10


class TestDensityMatrices:
    def test_fock2_one_hot(self):
        rho = to_density_matrix(FockState(2), 10)
        expect = np.zeros((10, 10))
        expect[2, 2] = 1.0
        assert np.max(np.abs(rho.matrix - expect)) == 0.0

    def test_coherent_poisson_diagonal(self):
        rho = to_density_matrix(CoherentState(0.5), 20)
        diag = np.diag(rho.matrix).real
        for n in range(8):
            expect = math.exp(-0.25) * 0.25**n / math.factorial(n)
            assert diag[n] == pytest.approx(expect, rel=1e-10)

    def test_thermal_zero_is_vacuum_projector(self):
        rho = to_density_matrix(ThermalState(0.0), 5)
        expect = np.zeros((5, 5))
        expect[0, 0] = 1.0
        assert np.max(np.abs(rho.matrix - expect)) == 0.0

    def test_insufficient_dim_rejected(self):
        with pytest.raises(StateError):
            to_density_matrix(FockState(5), 5)
        with pytest.raises(StateError):
            to_density_matrix(CoherentState(2.0), 6)
        with pytest.raises(StateError):
            to_density_matrix(ThermalState(2.0), 10)

    def test_validation_rejects_bad_matrices(self):
        with pytest.raises(StateError):
            NumericDensityMatrix(2, np.array([[1.0, 0.5], [0.0, 0.0]]))
        with pytest.raises(StateError):
            NumericDensityMatrix(2, 0.7 * np.eye(2))
        with pytest.raises(StateError):
            NumericDensityMatrix(2, np.array([[1.5, 0.0], [0.0, -0.5]]))

    def test_degenerate_cat_rejected(self):
        with pytest.raises(StateError):
            CatState(0.0, math.pi, +1)


BETAS = st.complex_numbers(min_magnitude=0.0, max_magnitude=2.5,
                           allow_nan=False, allow_infinity=False)


class TestChiProperties:
    @given(BETAS, st.sampled_from(ANALYTIC_STATES))
    def test_hermitian_symmetry(self, beta, state):
        left = chi_analytic(state, -beta)
        right = np.conj(chi_analytic(state, beta))
        assert left == pytest.approx(right, abs=1e-12)

    @given(BETAS, st.sampled_from(ANALYTIC_STATES))
    def test_bounded_by_one(self, beta, state):
        assert abs(chi_analytic(state, beta)) <= 1.0 + 1e-12

    def test_cat_interference_peaks_near_two_alpha(self):
        state = CatState(1.0, math.pi / 2, +1)
        alpha = state.alpha

        def interference(b):
            return abs(0.5 * (
                np.exp(-1j * state.varphi - 0.5 * abs(b - 2 * alpha) ** 2)
                + np.exp(1j * state.varphi - 0.5 * abs(b + 2 * alpha) ** 2)
            ) / state.normalization)

        at_peak = interference(2.0 * alpha)
        assert at_peak > interference(1.5 * alpha)
        assert at_peak > interference(2.5 * alpha)


class TestStateSpecs:
    def test_round_trips(self):
        assert parse_state_spec("fock:5") == FockState(5)
        assert parse_state_spec("coherent:0.5+0.2i") == CoherentState(0.5 + 0.2j)
        assert parse_state_spec("thermal:1.3") == ThermalState(1.3)
        cat = parse_state_spec("cat:1.0,pi/2,+")
        assert cat == CatState(1.0, math.pi / 2, +1)
        assert parse_state_spec("cat:0.5-0.5i,-pi/4,-").sign == -1

    @pytest.mark.parametrize("bad", [
        "fock", "fock:x", "coherent:zz", "thermal:-1", "cat:1.0,pi/2",
        "cat:1.0,pi/2,x", "squeezed:1.0",
    ])
    def test_rejects_malformed_specs(self, bad):
        with pytest.raises(StateError):
            parse_state_spec(bad)

    def test_angle_forms(self):
        assert parse_angle("pi/2") == pytest.approx(math.pi / 2)
        assert parse_angle("-pi") == pytest.approx(-math.pi)
        assert parse_angle("0.25") == 0.25
        assert parse_angle("2pi/3") == pytest.approx(2 * math.pi / 3)
