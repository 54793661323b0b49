"""Semi-analytic evolution of the joint-state characteristic-function
components, and post-selected superposition-state preparation.

Decomposing the joint density matrix over qubit dyads gives four phase-space
functions chi_e, chi_g, chi_plus, chi_minus (weights of |e><e|, |g><g|,
|e><g|, |g><e|).  With qubit-bath occupation n_q = 0 they evolve in closed
form up to one time quadrature:

    chi_pm(b, t) = chi_pm(b e^{-k t/2} -+ xi, 0)
                   * exp(-delta (1 - e^{-k t}) |b -+ mu|^2 - nu)
    chi_e(b, t)  = exp(-gamma1 t - delta (1 - e^{-k t}) |b|^2
                       + lam b* - lam* b) * chi_e(b e^{-k t/2}, 0)
    chi_g(b, t)  = chibar_g(b, t) * [1 + gamma1 * int_0^t
                     chi_e(b e^{k (s-t)/2}, s) / chibar_g(b e^{k (s-t)/2}, s) ds]

where chibar_g is chi_e's twin with gamma1 = 0 and the drift conjugated.
Population conservation chi_e(0,t) + chi_g(0,t) = 1 holds exactly.

Measuring the qubit in (|g> + sign e^{i*varphi}|e>)/sqrt(2) projects the
oscillator onto a state whose characteristic function is the sign-weighted
component combination normalized by its own value at b = 0.  Starting from
the oscillator ground state this prepares a superposition of +-alpha with
alpha = xi/2 in the decoherence-free limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functionals import FunctionalResult, evaluate_functionals
from .model import CouplingProfile, DecoherenceParams, derive_rates
from .quadrature import QuadratureError, cumulative, simpson_uniform
from .states import CatState, chi_analytic

TWO_PI = 2.0 * math.pi


class CatPrepError(RuntimeError):
    """Ill-conditioned component ratio or a null post-selection."""


def ground_half_chi(beta):
    """Initial condition of every component for a ground-state oscillator."""
    b = np.asarray(beta, dtype=complex)
    return 0.5 * np.exp(-0.5 * np.abs(b) ** 2)


def _as_beta_array(beta):
    arr = np.asarray(beta, dtype=complex)
    return arr, arr.ndim == 0


def evolve_chi_pm(chi0, sign: int, beta, t: float, g: CouplingProfile,
                  params: DecoherenceParams, omega: float,
                  rel_tol: float = 1e-9):
    """Off-diagonal component at time t from its initial function ``chi0``."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    res = evaluate_functionals(g, t, params, omega, rel_tol)
    return _chi_pm_from(res, chi0, sign, beta, t, params)


def _chi_pm_from(res: FunctionalResult, chi0, sign, beta, t, params):
    arr, scalar = _as_beta_array(beta)
    kappa = params.kappa
    _, delta = derive_rates(params)
    heat = delta * (-math.expm1(-kappa * t))
    shrink = math.exp(-0.5 * kappa * t)
    shifted = arr * shrink - sign * res.xi
    out = np.asarray(chi0(shifted), dtype=complex) * np.exp(
        -heat * np.abs(arr - sign * res.mu) ** 2 - res.nu
    )
    return complex(out) if scalar else out


def evolve_chi_e(chi0, beta, t: float, g: CouplingProfile,
                 params: DecoherenceParams, omega: float,
                 rel_tol: float = 1e-9):
    """Excited-population component at time t (n_q treated as zero)."""
    res = evaluate_functionals(g, t, params, omega, rel_tol)
    return _chi_e_from(res, chi0, beta, t, params)


def _diag_factor(lam, drift_sign, arr, heat, decay):
    """Common closed-form factor of the diagonal components.

    drift_sign +1 gives exp(lam b* - lam* b) (excited), -1 its conjugate
    twin (ground, homogeneous part)."""
    drift = drift_sign * (lam * np.conj(arr) - np.conj(lam) * arr)
    return np.exp(-decay - heat * np.abs(arr) ** 2 + drift)


def _chi_e_from(res, chi0, beta, t, params):
    arr, scalar = _as_beta_array(beta)
    kappa = params.kappa
    _, delta = derive_rates(params)
    heat = delta * (-math.expm1(-kappa * t))
    shrink = math.exp(-0.5 * kappa * t)
    out = _diag_factor(res.lam, +1, arr, heat, params.gamma1 * t) \
        * np.asarray(chi0(arr * shrink), dtype=complex)
    return complex(out) if scalar else out


def _chi_g_bar_from(res, chi0, beta, t, params):
    arr, scalar = _as_beta_array(beta)
    kappa = params.kappa
    _, delta = derive_rates(params)
    heat = delta * (-math.expm1(-kappa * t))
    shrink = math.exp(-0.5 * kappa * t)
    out = _diag_factor(res.lam, -1, arr, heat, 0.0) \
        * np.asarray(chi0(arr * shrink), dtype=complex)
    return complex(out) if scalar else out


def _correction_integral(beta_arr, t, g, params, omega, rel_tol,
                         chi0_e, chi0_g, max_refinements=10):
    """gamma1 * int_0^t chi_e / chibar_g evaluated along the drifted argument.

    lam(s) at all grid nodes comes from one prefix integral per refinement
    level; the outer integral is a Simpson sum, doubled until stable.
    """
    kappa = params.kappa
    gamma1 = params.gamma1
    _, delta = derive_rates(params)
    n = int(max(32, 16 * math.ceil(t * omega / TWO_PI)))
    if n % 2:
        n += 1
    prev = None
    for _ in range(max_refinements):
        s = np.linspace(0.0, t, n + 1)
        prefix = cumulative(
            lambda u: 1.0j * g(u) * np.exp((1.0j * omega + 0.5 * kappa) * u), s
        )
        lam_s = np.exp(-0.5 * kappa * s) * prefix
        bs = beta_arr[None, :] * np.exp(0.5 * kappa * (s - t))[:, None]
        heat_s = delta * (-np.expm1(-kappa * s))[:, None]
        # chi0 arguments collapse to beta e^{-kappa t/2}, independent of s.
        arg0 = (beta_arr * math.exp(-0.5 * kappa * t))[None, :]
        drift = lam_s[:, None] * np.conj(bs) - np.conj(lam_s)[:, None] * bs
        gauss = heat_s * np.abs(bs) ** 2
        num = np.exp(-gamma1 * s[:, None] - gauss + drift) * chi0_e(arg0)
        den = np.exp(-gauss - drift) * chi0_g(arg0)
        if float(np.min(np.abs(den))) < 1e-14:
            raise CatPrepError(
                "chibar_g passes within 1e-14 of zero along the correction "
                "path; the component ratio is ill-conditioned"
            )
        vals = num / den
        integral = np.array(
            [simpson_uniform(vals[:, j], t / n) for j in range(vals.shape[1])],
            dtype=complex,
        )
        if prev is not None:
            err = float(np.max(np.abs(integral - prev)))
            if err <= max(rel_tol * float(np.max(np.abs(integral))), 1e-14):
                return gamma1 * integral
        prev = integral
        n *= 2
    raise QuadratureError("chi_g correction integral did not converge")


def evolve_chi_g(chi0_g, beta, t: float, g: CouplingProfile,
                 params: DecoherenceParams, omega: float,
                 rel_tol: float = 1e-9, chi0_e=None):
    """Ground-population component at time t.

    The feeding term from the excited component needs chi_e's initial
    function; it defaults to ``chi0_g`` (the symmetric initial condition of
    the probe protocol)."""
    chi0_e = chi0_e or chi0_g
    res = evaluate_functionals(g, t, params, omega, rel_tol)
    arr, scalar = _as_beta_array(beta)
    flat = np.atleast_1d(arr)
    hom = _chi_g_bar_from(res, chi0_g, flat, t, params)
    if params.gamma1 == 0.0 or t == 0.0:
        out = hom
    else:
        out = hom * (1.0 + _correction_integral(
            flat, t, g, params, omega, rel_tol, chi0_e, chi0_g))
    return complex(out[0]) if scalar else out.reshape(arr.shape)


@dataclass
class MatricialChi:
    """The four component evaluators for one initial oscillator chi.

    ``initial_chi`` is the full characteristic function of the oscillator
    state at t = 0; each component starts at half of it, matching the
    (|g> + |e>)/sqrt(2) (x) rho_0 protocol initial condition."""

    initial_chi: object
    g: CouplingProfile
    params: DecoherenceParams
    omega: float
    rel_tol: float = 1e-9

    def _chi0(self, beta):
        return 0.5 * np.asarray(self.initial_chi(beta), dtype=complex)

    def _functionals(self, t: float) -> FunctionalResult:
        if not hasattr(self, "_cache"):
            self._cache: dict[float, FunctionalResult] = {}
        if t not in self._cache:
            self._cache[t] = evaluate_functionals(self.g, t, self.params,
                                                  self.omega, self.rel_tol)
        return self._cache[t]

    def chi_plus(self, beta, t: float):
        return _chi_pm_from(self._functionals(t), self._chi0, +1, beta, t, self.params)

    def chi_minus(self, beta, t: float):
        return _chi_pm_from(self._functionals(t), self._chi0, -1, beta, t, self.params)

    def chi_e(self, beta, t: float):
        return _chi_e_from(self._functionals(t), self._chi0, beta, t, self.params)

    def chi_g(self, beta, t: float):
        return evolve_chi_g(self._chi0, beta, t, self.g, self.params, self.omega,
                            self.rel_tol, chi0_e=self._chi0)


class PreparedCat:
    """Callable characteristic function of the post-selected oscillator state,
    with the outcome probability and the ideal decoherence-free target."""

    def __init__(self, t: float, g: CouplingProfile, params: DecoherenceParams,
                 omega: float, varphi: float, sign: int, rel_tol: float = 1e-9):
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        self.varphi = float(varphi)
        self.sign = sign
        self._t = t
        self._g = g
        self._params = params
        self._omega = omega
        self._rel_tol = rel_tol
        self._res = evaluate_functionals(g, t, params, omega, rel_tol)
        self.alpha = self._res.xi / 2.0
        norm = complex(self._numerator(np.zeros(1, dtype=complex))[0])
        if abs(norm) < 1e-12:
            raise CatPrepError("null post-selection: normalization vanishes")
        self._norm = norm
        # Components carry weight 1/2 each, so the outcome probability is
        # half the unnormalized combination at beta = 0.
        self.probability = 0.5 * norm.real

    def _numerator(self, flat):
        res, t, params = self._res, self._t, self._params
        ce = _chi_e_from(res, ground_half_chi, flat, t, params)
        hom = _chi_g_bar_from(res, ground_half_chi, flat, t, params)
        if params.gamma1 > 0.0:
            corr = _correction_integral(flat, t, self._g, params, self._omega,
                                        self._rel_tol, ground_half_chi,
                                        ground_half_chi)
            cg = hom * (1.0 + corr)
        else:
            cg = hom
        cp = _chi_pm_from(res, ground_half_chi, +1, flat, t, params)
        cm = _chi_pm_from(res, ground_half_chi, -1, flat, t, params)
        phase = np.exp(-1.0j * self.varphi)
        return ce + cg + self.sign * (phase * cp + np.conj(phase) * cm)

    def __call__(self, beta):
        arr, scalar = _as_beta_array(beta)
        flat = np.atleast_1d(arr).ravel()
        vals = self._numerator(flat) / self._norm
        return complex(vals[0]) if scalar else vals.reshape(arr.shape)

    def ideal(self, beta):
        """Characteristic function of the decoherence-free target state."""
        state = CatState(alpha=self.alpha, varphi=self.varphi, sign=self.sign)
        arr, scalar = _as_beta_array(beta)
        flat = np.atleast_1d(arr).ravel()
        vals = np.array([chi_analytic(state, b) for b in flat])
        return complex(vals[0]) if scalar else vals.reshape(arr.shape)


def chi_prepared_cat(t: float, g: CouplingProfile, params: DecoherenceParams,
                     omega: float, varphi: float, sign: int,
                     rel_tol: float = 1e-9) -> PreparedCat:
    """Evaluator for the post-selected state prepared from the oscillator
    ground state after driving for time t and measuring the qubit in
    (|g> + sign e^{i*varphi}|e>)/sqrt(2)."""
    return PreparedCat(t, g, params, omega, varphi, sign, rel_tol)


CAT_COLUMNS = ("beta_re", "beta_im", "chi_ideal_re", "chi_ideal_im",
               "chi_prepared_re", "chi_prepared_im")


def write_cat_csv(betas, ideal_vals, prepared_vals, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CAT_COLUMNS) + "\n")
        for b, ci, cp in zip(betas, ideal_vals, prepared_vals):
            fh.write(",".join(
                f"{v:.17g}" for v in
                (b.real, b.imag, ci.real, ci.imag, cp.real, cp.imag)
            ) + "\n")
