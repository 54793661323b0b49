import math

import numpy as np
import pytest

from chiprobe.catprep import (
    CatPrepError,
    MatricialChi,
    chi_prepared_cat,
    evolve_chi_e,
    evolve_chi_g,
    evolve_chi_pm,
    ground_half_chi,
    write_cat_csv,
)
from chiprobe.functionals import evaluate_functionals
from chiprobe.model import ConstantCoupling, DecoherenceParams, HarmonicCoupling
from chiprobe.oracle import (
    OracleConfig,
    evolve_master,
    pauli_expectations,
    plus_initial,
    postselect_qubit,
)
from chiprobe.states import FockState, chi_analytic, chi_numeric, displacement_matrix

TWO_PI = 2.0 * math.pi
ZERO_G = ConstantCoupling(0.0)


def drive(r=0.5, phi=0.0, kappa=0.0, r0=0.0):
    return HarmonicCoupling(r0=r0, r=r, phi=phi, omega=TWO_PI, kappa=kappa)


def vacuum_chi(beta):
    b = np.asarray(beta, dtype=complex)
    return np.exp(-0.5 * np.abs(b) ** 2)


def oracle_component_chi(joint, which, beta):
    """Block characteristic function straight from the joint matrix."""
    dim = joint.dim
    blocks = {
        "g": joint.matrix[:dim, :dim],
        "e": joint.matrix[dim:, dim:],
        "plus": joint.matrix[dim:, :dim],   # |e><g| weight
        "minus": joint.matrix[:dim, dim:],  # |g><e| weight
    }
    return complex(np.trace(blocks[which] @ displacement_matrix(beta, dim)))


class TestChiPm:
    def test_decoherence_free_is_pure_displacement(self):
        g = drive(r=0.4, phi=0.7)
        t = 2.0
        res = evaluate_functionals(g, t, DecoherenceParams(), TWO_PI)
        for sign in (+1, -1):
            for b in (0.3, -0.5 + 0.8j):
                got = evolve_chi_pm(ground_half_chi, sign, b, t,
                                    g, DecoherenceParams(), TWO_PI)
                want = ground_half_chi(b - sign * res.xi)
                assert got == pytest.approx(complex(want), abs=1e-10)

    def test_free_decay_at_origin(self):
        params = DecoherenceParams(gamma1=0.3, gamma2=0.1)
        t = 1.5
        got = evolve_chi_pm(ground_half_chi, -1, 0.0, t, ZERO_G, params, TWO_PI)
        assert got == pytest.approx(0.5 * math.exp(-params.gamma * t), rel=1e-9)

    def test_pauli_identities_against_oracle(self):
        params = DecoherenceParams(kappa=0.01 * TWO_PI, gamma1=0.012 * TWO_PI,
                                   gamma2=0.006 * TWO_PI, n_m=0.3)
        g = drive(r=0.5, kappa=params.kappa)
        t = 3.0
        joint = evolve_master(plus_initial(FockState(0), 30), g, t, params, TWO_PI)
        sx, sy = pauli_expectations(joint)
        mat = MatricialChi(vacuum_chi, g, params, TWO_PI)
        cp = mat.chi_plus(0.0, t)
        cm = mat.chi_minus(0.0, t)
        assert (cp + cm).real == pytest.approx(sx, abs=1e-6)
        assert (1j * (cp - cm)).real == pytest.approx(sy, abs=1e-6)

    def test_component_fields_match_oracle(self):
        params = DecoherenceParams(kappa=0.008 * TWO_PI, gamma1=0.01 * TWO_PI,
                                   gamma2=0.004 * TWO_PI, n_m=0.2)
        g = drive(r=0.4, phi=0.9, kappa=params.kappa)
        t = 2.0
        joint = evolve_master(plus_initial(FockState(0), 30), g, t, params, TWO_PI)
        mat = MatricialChi(vacuum_chi, g, params, TWO_PI)
        for b in (0.4 + 0.2j, -0.9j, 1.1):
            assert mat.chi_plus(b, t) == pytest.approx(
                oracle_component_chi(joint, "plus", b), abs=1e-5)
            assert mat.chi_minus(b, t) == pytest.approx(
                oracle_component_chi(joint, "minus", b), abs=1e-5)


class TestChiEG:
    def test_identity_limit(self):
        got = evolve_chi_e(ground_half_chi, 0.7 - 0.2j, 1.3, ZERO_G,
                           DecoherenceParams(), TWO_PI)
        assert got == pytest.approx(complex(ground_half_chi(0.7 - 0.2j)), abs=1e-12)

    def test_excited_population_decay(self):
        params = DecoherenceParams(gamma1=0.25)
        t = 2.0
        got = evolve_chi_e(ground_half_chi, 0.0, t, ZERO_G, params, TWO_PI)
        assert got == pytest.approx(0.5 * math.exp(-0.25 * t), rel=1e-10)
        joint = evolve_master(plus_initial(FockState(0), 12), ZERO_G, t,
                              params, TWO_PI)
        p_e = float(np.trace(joint.matrix[12:, 12:]).real)
        assert got == pytest.approx(p_e, abs=1e-7)

    def test_heating_evolution_matches_oracle_marginal(self):
        params = DecoherenceParams(kappa=0.4, n_m=0.5)
        betas = (0.5, 1.0 - 0.4j)
        for t in (0.4, 0.9, 1.6, 2.4, 3.5):
            joint = evolve_master(plus_initial(FockState(0), 24), ZERO_G, t,
                                  params, TWO_PI)
            for b in betas:
                want = oracle_component_chi(joint, "e", b)
                got = evolve_chi_e(ground_half_chi, b, t, ZERO_G, params, TWO_PI)
                assert got == pytest.approx(want, abs=1e-6)

    def test_gamma1_zero_keeps_homogeneous_solution(self):
        params = DecoherenceParams(kappa=0.05, gamma2=0.1, n_m=0.4)
        g = drive(r=0.3, kappa=params.kappa)
        got = evolve_chi_g(ground_half_chi, 0.6 + 0.1j, 2.0, g, params, TWO_PI)
        res = evaluate_functionals(g, 2.0, params, TWO_PI)
        heat = params.delta * (-math.expm1(-params.kappa * 2.0))
        b = 0.6 + 0.1j
        want = (math.exp(-heat * abs(b) ** 2)
                * np.exp(np.conj(res.lam) * b - res.lam * np.conj(b))
                * ground_half_chi(b * math.exp(-0.5 * params.kappa * 2.0)))
        assert got == pytest.approx(complex(want), abs=1e-10)

    def test_population_conservation(self):
        params = DecoherenceParams(kappa=0.02 * TWO_PI, gamma1=0.015 * TWO_PI,
                                   gamma2=0.007 * TWO_PI, n_m=0.4)
        g = drive(r=0.45, phi=1.7, kappa=params.kappa)
        mat = MatricialChi(vacuum_chi, g, params, TWO_PI)
        for t in (0.5, 1.0, 2.0, 3.0):
            total = mat.chi_e(0.0, t) + mat.chi_g(0.0, t)
            assert total == pytest.approx(1.0, abs=1e-8)

    def test_ground_component_matches_oracle(self):
        params = DecoherenceParams(kappa=0.01 * TWO_PI, gamma1=0.02 * TWO_PI,
                                   gamma2=0.005 * TWO_PI, n_m=0.3)
        g = drive(r=0.4, phi=0.5, kappa=params.kappa)
        t = 2.0
        joint = evolve_master(plus_initial(FockState(0), 30), g, t, params, TWO_PI)
        mat = MatricialChi(vacuum_chi, g, params, TWO_PI)
        rng = np.random.default_rng(5)
        for _ in range(10):
            b = complex(*rng.uniform(-1.2, 1.2, size=2))
            assert mat.chi_g(b, t) == pytest.approx(
                oracle_component_chi(joint, "g", b), abs=1e-4)


class TestPreparedCat:
    def test_decoherence_free_matches_ideal(self):
        g = drive(r=0.5, phi=math.pi / 3)
        t = 2.0
        grid = np.array([complex(x, y) for x in np.linspace(-1.5, 1.5, 7)
                         for y in np.linspace(-1.5, 1.5, 7)])
        for sign in (+1, -1):
            for varphi in (0.0, math.pi / 2, math.pi):
                prep = chi_prepared_cat(t, g, DecoherenceParams(), TWO_PI,
                                        varphi, sign)
                assert np.max(np.abs(prep(grid) - prep.ideal(grid))) < 1e-8

    def test_normalized_at_origin(self):
        params = DecoherenceParams(kappa=0.01 * TWO_PI, gamma1=0.01 * TWO_PI,
                                   gamma2=0.01 * TWO_PI, n_m=19.5)
        g = drive(r=0.5, kappa=params.kappa)
        prep = chi_prepared_cat(4.0, g, params, TWO_PI, math.pi / 2, +1)
        assert prep(0.0) == pytest.approx(1.0, abs=1e-12)

    def test_hermitian_symmetry(self):
        params = DecoherenceParams(kappa=0.01 * TWO_PI, gamma1=0.008 * TWO_PI,
                                   gamma2=0.004 * TWO_PI, n_m=0.4)
        g = drive(r=0.5, kappa=params.kappa)
        prep = chi_prepared_cat(3.0, g, params, TWO_PI, math.pi / 2, +1)
        for b in (0.4 + 0.9j, -1.2, 1.7j):
            assert prep(-b) == pytest.approx(np.conj(prep(b)), abs=1e-12)

    def test_matches_oracle_postselection(self):
        params = DecoherenceParams(kappa=0.01 * TWO_PI, gamma1=0.012 * TWO_PI,
                                   gamma2=0.006 * TWO_PI, n_m=0.3)
        g = drive(r=0.5, kappa=params.kappa)
        t = 3.0
        cfg = OracleConfig(dim=30)
        joint = evolve_master(plus_initial(FockState(0), cfg.dim), g, t,
                              params, TWO_PI, cfg)
        for sign, varphi in ((+1, math.pi / 2), (-1, 0.7)):
            osc, prob = postselect_qubit(joint, varphi, sign)
            prep = chi_prepared_cat(t, g, params, TWO_PI, varphi, sign)
            assert prep.probability == pytest.approx(prob, abs=1e-6)
            grid = [complex(x, y) for x in np.linspace(-1.5, 1.5, 4)
                    for y in np.linspace(-1.5, 1.5, 4)]
            worst = max(abs(prep(b) - chi_numeric(osc, b)) for b in grid)
            assert worst < 1e-4

    def test_interference_weaker_than_ideal(self):
        # half-quantum-occupation bath, four drive periods: the interference
        # peak at 2 alpha must come out strictly below the ideal value
        params = DecoherenceParams(kappa=0.0005 * TWO_PI,
                                   gamma1=0.004 * TWO_PI,
                                   gamma2=0.003 * TWO_PI, n_m=19.5)
        g = drive(r=0.5, kappa=params.kappa)
        prep = chi_prepared_cat(4.0, g, params, TWO_PI, math.pi / 2, +1)
        peak = 2.0 * prep.alpha
        assert abs(prep(peak).imag) < abs(prep.ideal(peak).imag)

    def test_central_peak_steepens_under_heating(self):
        params = DecoherenceParams(kappa=0.0005 * TWO_PI,
                                   gamma1=0.004 * TWO_PI,
                                   gamma2=0.003 * TWO_PI, n_m=19.5)
        g = drive(r=0.5, kappa=params.kappa)
        prep = chi_prepared_cat(4.0, g, params, TWO_PI, math.pi / 2, +1)
        direction = prep.alpha / abs(prep.alpha)
        s = np.linspace(0.05, 0.45, 9)
        betas = s * direction
        width_prep = np.polyfit(s**2, np.log(np.abs(prep(betas))), 1)[0]
        width_ideal = np.polyfit(s**2, np.log(np.abs(prep.ideal(betas))), 1)[0]
        assert width_prep < width_ideal  # more negative: narrower peak

    def test_null_postselection_raises(self):
        # zero drive leaves |+>; measuring the orthogonal outcome is null
        with pytest.raises(CatPrepError):
            chi_prepared_cat(1.0, drive(r=0.0), DecoherenceParams(), TWO_PI,
                             0.0, -1)

    def test_csv_writer(self, tmp_path):
        g = drive(r=0.5)
        prep = chi_prepared_cat(2.0, g, DecoherenceParams(), TWO_PI,
                                math.pi / 2, +1)
        betas = [0.0 + 0.0j, 0.5 + 0.5j]
        path = tmp_path / "cat.csv"
        write_cat_csv(betas, prep.ideal(np.array(betas)),
                      prep(np.array(betas)), path)
        lines = path.read_text().splitlines()
        assert lines[0] == ("beta_re,beta_im,chi_ideal_re,chi_ideal_im,"
                            "chi_prepared_re,chi_prepared_im")
        assert len(lines) == 3
