"""Brute-force master-equation integrator on the qubit (x) truncated-Fock
space; the independent ground truth for the analytic signal formula.

The frame is the interaction picture, where the drive Hamiltonian is

    H(t) = g(t) * sigma_z (x) (a e^{-i*omega*t} + a_dag e^{i*omega*t})

and the dissipators (picture-invariant here) are, with
D[A] rho = 2 A rho A_dag - A_dag A rho - rho A_dag A:

    (kappa/2)(n_m+1) D[a] + (kappa/2) n_m D[a_dag]
    (gamma1/2)(n_q+1) D[sigma_minus] + (gamma1/2) n_q D[sigma_plus]
    (gamma2/2) D[sigma_z]

Qubit basis order is (|g>, |e>); tensor order is qubit (x) oscillator, so a
joint matrix is (2*dim) x (2*dim) with the oscillator index fastest.
sigma_z = |e><e| - |g><g|, sigma_y = -i(|e><g| - |g><e|): the Bloch-equator
state (|g> + e^{i*phi}|e>)/sqrt(2) has <sigma_x> = cos(phi) and
<sigma_y> = -sin(phi) under these definitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .functionals import evaluate_functionals
from .model import CouplingProfile, DecoherenceParams, TWO_PI
from .states import (
    NumericDensityMatrix,
    OscillatorState,
    annihilation,
    chi_of,
    to_density_matrix,
)


class OracleError(RuntimeError):
    """Integration failed a validity check (trace drift, truncation leak)."""


class PostselectionError(RuntimeError):
    """Conditioning on an outcome of (numerically) zero probability."""


SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)   # |e><g|
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class OracleConfig:
    dim: int = 30
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step_fraction: float = 1.0 / 50.0

    def __post_init__(self) -> None:
        if self.dim < 4:
            raise ValueError("oscillator truncation must be at least 4")
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_step_fraction <= 0:
            raise ValueError("tolerances and step fraction must be positive")


@dataclass
class JointState:
    """Qubit (x) oscillator density matrix with validity checks."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2 * self.dim, 2 * self.dim):
            raise ValueError(f"joint matrix shape {m.shape} does not match dim {self.dim}")
        self.matrix = m

    def validate(self, trace_tol: float = 1e-8, eig_floor: float = -1e-6) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > 1e-8:
            raise OracleError("joint state lost Hermiticity beyond 1e-8")
        if abs(np.trace(m) - 1.0) > trace_tol:
            raise OracleError(f"joint state trace drifted by {abs(np.trace(m)-1.0):.2e}")
        if float(np.min(np.linalg.eigvalsh(m))) < eig_floor:
            raise OracleError("joint state developed an eigenvalue below the floor")


def qubit_state(c_g: complex, c_e: complex) -> np.ndarray:
    """Normalized qubit density matrix for c_g|g> + c_e|e>."""
    v = np.array([c_g, c_e], dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def joint_state(qubit_rho: np.ndarray, oscillator: OscillatorState | np.ndarray,
                dim: int) -> JointState:
    """Build qubit (x) oscillator from a qubit matrix and an oscillator state."""
    if isinstance(oscillator, np.ndarray):
        osc = oscillator
    else:
        osc = to_density_matrix(oscillator, dim).matrix
    return JointState(dim, np.kron(np.asarray(qubit_rho, dtype=complex), osc))


def plus_initial(oscillator: OscillatorState, dim: int) -> JointState:
    """The protocol's start: |+><+| (x) rho_0."""
    return joint_state(np.outer(KET_PLUS, KET_PLUS.conj()), oscillator, dim)


def _jump_terms(dim: int, params: DecoherenceParams):
    a = annihilation(dim)
    eye_q = np.eye(2, dtype=complex)
    eye_o = np.eye(dim, dtype=complex)
    candidates = [
        (0.5 * params.kappa * (params.n_m + 1.0), np.kron(eye_q, a)),
        (0.5 * params.kappa * params.n_m, np.kron(eye_q, a.conj().T)),
        (0.5 * params.gamma1 * (params.n_q + 1.0), np.kron(SIGMA_MINUS, eye_o)),
        (0.5 * params.gamma1 * params.n_q, np.kron(SIGMA_PLUS, eye_o)),
        (0.5 * params.gamma2, np.kron(SIGMA_Z, eye_o)),
    ]
    jumps = [(c, op, op.conj().T) for c, op in candidates if c > 0.0]
    k_sum = np.zeros((2 * dim, 2 * dim), dtype=complex)
    for c, op, op_dag in jumps:
        k_sum += c * (op_dag @ op)
    return jumps, k_sum


def evolve_master(initial: JointState, g: CouplingProfile, t: float,
                  params: DecoherenceParams, omega: float,
                  cfg: OracleConfig | None = None) -> JointState:
    """Integrate the full master equation from ``initial`` for time t.

    Raises OracleError on trace drift beyond 1e-6 or more than 1e-6
    population in the top three Fock levels (truncation leak).  The output is
    re-symmetrized once; no per-step adjustments are made.
    """
    cfg = cfg or OracleConfig()
    dim = initial.dim
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return JointState(dim, initial.matrix.copy())
    a = annihilation(dim)
    sz_a = np.kron(SIGMA_Z, a)
    sz_adag = np.kron(SIGMA_Z, a.conj().T)
    jumps, k_sum = _jump_terms(dim, params)
    n_tot = 2 * dim

    def rhs(tt, y):
        rho = y.reshape(n_tot, n_tot)
        phase = np.exp(-1.0j * omega * tt)
        h = g(tt) * (phase * sz_a + np.conj(phase) * sz_adag)
        out = -1.0j * (h @ rho - rho @ h)
        out -= k_sum @ rho + rho @ k_sum
        for c, op, op_dag in jumps:
            out += (2.0 * c) * (op @ rho @ op_dag)
        return out.ravel()

    sol = solve_ivp(
        rhs,
        (0.0, t),
        initial.matrix.ravel().astype(complex),
        method="RK45",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step_fraction * TWO_PI / omega,
        t_eval=(t,),
    )
    if not sol.success:
        raise OracleError(f"integrator failed: {sol.message}")
    rho = sol.y[:, -1].reshape(n_tot, n_tot)
    rho = 0.5 * (rho + rho.conj().T)
    drift = abs(np.trace(rho) - 1.0)
    if drift > 1e-6:
        raise OracleError(f"trace drifted by {drift:.2e}; step control failed")
    osc_pops = np.diag(rho).real[:dim] + np.diag(rho).real[dim:]
    leak = float(np.sum(osc_pops[dim - 3:]))
    if leak > 1e-6:
        raise OracleError(f"population {leak:.2e} in the top three Fock levels")
    out = JointState(dim, rho)
    out.validate(trace_tol=1e-6)
    return out


def pauli_expectations(state: JointState) -> tuple[float, float]:
    """(<sigma_x>, <sigma_y>) of the qubit; both in [-1, 1]."""
    eye_o = np.eye(state.dim, dtype=complex)
    sx = float(np.trace(state.matrix @ np.kron(SIGMA_X, eye_o)).real)
    sy = float(np.trace(state.matrix @ np.kron(SIGMA_Y, eye_o)).real)
    return sx, sy


def predicted_signal(state: OscillatorState, g: CouplingProfile, t: float,
                     params: DecoherenceParams, omega: float,
                     rel_tol: float = 1e-9) -> complex:
    """Analytic prediction chi(xi(g,t)) * e^{-f(g,t)} for the probe signal
    <sigma_x> + i <sigma_y> measured on the initial state |+><+| (x) rho_0."""
    res = evaluate_functionals(g, t, params, omega, rel_tol)
    return chi_of(state, res.xi) * math.exp(-res.f)


def oscillator_marginal(state: JointState) -> NumericDensityMatrix:
    """Partial trace over the qubit."""
    r = state.matrix.reshape(2, state.dim, 2, state.dim)
    return NumericDensityMatrix(state.dim, np.einsum("qmqn->mn", r))


def postselect_qubit(state: JointState, varphi: float, sign: int
                     ) -> tuple[NumericDensityMatrix, float]:
    """Condition the oscillator on the qubit outcome
    (|g> + sign * e^{i*varphi} |e>)/sqrt(2); returns (state, probability)."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    v = np.array([1.0, sign * np.exp(1.0j * varphi)], dtype=complex) / math.sqrt(2.0)
    r = state.matrix.reshape(2, state.dim, 2, state.dim)
    block = np.einsum("q,qmpn,p->mn", v.conj(), r, v)
    prob = float(np.trace(block).real)
    if prob < 1e-10:
        raise PostselectionError(f"outcome probability {prob:.2e} is numerically null")
    block = 0.5 * (block + block.conj().T) / prob
    return NumericDensityMatrix(state.dim, block), prob


def random_validation_tuples(count: int, seed: int, omega: float = TWO_PI):
    """Randomized (state, coupling, params, t) tuples inside truncation-safe
    bounds, for oracle-versus-analytic residual checks."""
    from .model import HarmonicCoupling
    from .states import CoherentState, FockState, ThermalState

    rng = np.random.default_rng(seed)
    tuples = []
    for k in range(count):
        kind = k % 4
        if kind == 0:
            state: OscillatorState = FockState(0)
        elif kind == 1:
            state = FockState(int(rng.integers(1, 4)))
        elif kind == 2:
            amp = rng.uniform(0.2, 1.0)
            ang = rng.uniform(0.0, TWO_PI)
            state = CoherentState(amp * np.exp(1.0j * ang))
        else:
            state = ThermalState(float(rng.uniform(0.05, 0.5)))
        n = int(rng.integers(1, 4))
        g = HarmonicCoupling(
            r0=float(rng.uniform(0.0, 0.3)) if k % 2 else 0.0,
            r=float(rng.uniform(0.1, 0.5)),
            phi=float(rng.uniform(0.0, TWO_PI)),
            omega=omega,
            kappa=float(rng.uniform(0.0, 0.02)) * omega,
        )
        params = DecoherenceParams(
            kappa=g.kappa,
            gamma1=float(rng.uniform(0.0, 0.02)) * omega,
            gamma2=float(rng.uniform(0.0, 0.02)) * omega,
            n_m=float(rng.uniform(0.0, 0.5)),
            n_q=0.2 if k % 3 == 0 else 0.0,
        )
        t = n * TWO_PI / omega
        tuples.append((state, g, params, t))
    return tuples


def signal_residual(state: OscillatorState, g: CouplingProfile, t: float,
                    params: DecoherenceParams, omega: float,
                    cfg: OracleConfig | None = None) -> float:
    """|oracle signal - analytic signal| for one configuration."""
    cfg = cfg or OracleConfig()
    joint = plus_initial(state, cfg.dim)
    evolved = evolve_master(joint, g, t, params, omega, cfg)
    sx, sy = pauli_expectations(evolved)
    return abs(complex(sx, sy) - predicted_signal(state, g, t, params, omega))
