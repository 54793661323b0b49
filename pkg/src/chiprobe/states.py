"""Oscillator states with exact characteristic functions, plus truncated
Fock-basis realizations for brute-force checks.

Convention: chi(beta) = tr(rho * D(beta)) with D(beta) = exp(beta*a_dag -
conj(beta)*a).  Every closed form, dataset and test in this package uses this
single convention.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .model import as_phase_point


class StateError(ValueError):
    """Invalid state construction or an operation applied to the wrong kind."""


class TruncationWarning(UserWarning):
    """Significant population near the truncation edge."""


@dataclass(frozen=True)
class FockState:
    n: int

    def __post_init__(self) -> None:
        if self.n < 0 or int(self.n) != self.n:
            raise StateError(f"Fock index must be a nonnegative integer, got {self.n!r}")


@dataclass(frozen=True)
class CoherentState:
    alpha: complex

    def __post_init__(self) -> None:
        as_phase_point(self.alpha)


@dataclass(frozen=True)
class ThermalState:
    nbar: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.nbar) and self.nbar >= 0):
            raise StateError(f"nbar must be finite and >= 0, got {self.nbar!r}")


@dataclass(frozen=True)
class CatState:
    """Superposition of |alpha> and |-alpha> with relative phase exp(-i*varphi)
    and parity ``sign`` (+1 or -1)."""

    alpha: complex
    varphi: float
    sign: int

    def __post_init__(self) -> None:
        as_phase_point(self.alpha)
        if self.sign not in (+1, -1):
            raise StateError("cat sign must be +1 or -1")
        if self.normalization <= 0.0:
            raise StateError(
                "degenerate cat: 1 + sign*exp(-2|alpha|^2)*cos(varphi) must be > 0"
            )

    @property
    def normalization(self) -> float:
        return 1.0 + self.sign * math.exp(-2.0 * abs(self.alpha) ** 2) * math.cos(self.varphi)


@dataclass
class NumericDensityMatrix:
    """Truncated Fock-basis density matrix.

    Hermitian to 1e-12, trace one to 1e-10, eigenvalues >= -1e-10.
    """

    dim: int
    matrix: np.ndarray
    truncation_error: float = 0.0

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise StateError(f"matrix shape {m.shape} does not match dim {self.dim}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise StateError("density matrix is not Hermitian to 1e-12")
        if abs(np.trace(m).real - 1.0) > 1e-10 or abs(np.trace(m).imag) > 1e-10:
            raise StateError("density matrix trace deviates from 1 beyond 1e-10")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise StateError("density matrix has eigenvalue below -1e-10")
        self.matrix = m


OscillatorState = FockState | CoherentState | ThermalState | CatState | NumericDensityMatrix


def laguerre(n: int, x):
    """Laguerre polynomial L_n(x) by the stable upward three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def chi_analytic(state: OscillatorState, beta: complex) -> complex:
    """Exact characteristic function of an analytic state family."""
    b = as_phase_point(beta)
    if isinstance(state, FockState):
        x = abs(b) ** 2
        return complex(math.exp(-0.5 * x) * float(laguerre(state.n, x)))
    if isinstance(state, CoherentState):
        a = state.alpha
        return np.exp(-0.5 * abs(b) ** 2 + b * np.conj(a) - np.conj(b) * a)
    if isinstance(state, ThermalState):
        return complex(math.exp(-(state.nbar + 0.5) * abs(b) ** 2))
    if isinstance(state, CatState):
        a = state.alpha
        s = state.sign
        central = math.exp(-0.5 * abs(b) ** 2) * math.cos(2.0 * (a * np.conj(b)).imag)
        interference = 0.5 * (
            np.exp(-1.0j * state.varphi - 0.5 * abs(b - 2.0 * a) ** 2)
            + np.exp(1.0j * state.varphi - 0.5 * abs(b + 2.0 * a) ** 2)
        )
        return (central + s * interference) / state.normalization
    if isinstance(state, NumericDensityMatrix):
        raise StateError("numeric density matrix has no closed form; use chi_numeric")
    raise StateError(f"unknown state {state!r}")


def annihilation(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(1, dim)
    a[idx - 1, idx] = np.sqrt(idx)
    return a


def displacement_matrix(beta: complex, dim: int) -> np.ndarray:
    """exp(beta*a_dag - conj(beta)*a) in the truncated basis."""
    b = as_phase_point(beta)
    a = annihilation(dim)
    return expm(b * a.conj().T - np.conj(b) * a)


def chi_numeric(rho: NumericDensityMatrix, beta: complex) -> complex:
    """tr(rho * D(beta)) in the truncated basis.

    Warns when the state carries more than 1e-8 population in the top five
    Fock levels; the displacement matrix is unreliable there.
    """
    tail = float(np.sum(np.diag(rho.matrix).real[max(0, rho.dim - 5):]))
    if tail > 1e-8:
        warnings.warn(
            f"population {tail:.2e} within 5 levels of the truncation edge",
            TruncationWarning,
            stacklevel=2,
        )
    d = displacement_matrix(beta, rho.dim)
    return complex(np.trace(rho.matrix @ d))


def _coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, dim)))))
    amp = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * log_fact) * alpha ** n
    return amp.astype(complex)


def min_dim_for(state: OscillatorState) -> int:
    """Smallest truncation this module accepts for the given state."""
    if isinstance(state, FockState):
        return state.n + 1
    if isinstance(state, (CoherentState, CatState)):
        a2 = abs(state.alpha) ** 2
        return int(math.ceil(a2 + 6.0 * math.sqrt(a2 + 1.0)))
    if isinstance(state, ThermalState):
        if state.nbar == 0.0:
            return 1  # exactly the vacuum
        return int(math.ceil(10.0 * (state.nbar + 1.0)))
    if isinstance(state, NumericDensityMatrix):
        return state.dim
    raise StateError(f"unknown state {state!r}")


def to_density_matrix(state: OscillatorState, dim: int) -> NumericDensityMatrix:
    """Truncated Fock-basis matrix, renormalized to trace one, with the
    pre-normalization trace deficit recorded as the truncation error."""
    if isinstance(state, NumericDensityMatrix):
        if dim != state.dim:
            raise StateError("re-truncation of a numeric matrix is not supported")
        return state
    need = min_dim_for(state)
    if dim < need:
        raise StateError(f"dim={dim} too small for {state!r}; need at least {need}")
    if isinstance(state, FockState):
        m = np.zeros((dim, dim), dtype=complex)
        m[state.n, state.n] = 1.0
        return NumericDensityMatrix(dim, m, 0.0)
    if isinstance(state, CoherentState):
        v = _coherent_vector(state.alpha, dim)
        m = np.outer(v, v.conj())
    elif isinstance(state, ThermalState):
        nb = state.nbar
        if nb == 0.0:
            m = np.zeros((dim, dim), dtype=complex)
            m[0, 0] = 1.0
            return NumericDensityMatrix(dim, m, 0.0)
        n = np.arange(dim)
        p = np.exp(n * math.log(nb / (nb + 1.0)) - math.log(nb + 1.0))
        m = np.diag(p).astype(complex)
    elif isinstance(state, CatState):
        v = (_coherent_vector(state.alpha, dim)
             + state.sign * np.exp(-1.0j * state.varphi) * _coherent_vector(-state.alpha, dim))
        v = v / math.sqrt(2.0 * state.normalization)
        m = np.outer(v, v.conj())
    else:
        raise StateError(f"unknown state {state!r}")
    trace = float(np.trace(m).real)
    return NumericDensityMatrix(dim, m / trace, abs(1.0 - trace))


def chi_of(state: OscillatorState, beta: complex) -> complex:
    """Characteristic function of any supported state at one point."""
    if isinstance(state, NumericDensityMatrix):
        return chi_numeric(state, beta)
    return chi_analytic(state, beta)


_PI_TOKEN = re.compile(r"^\s*(-?)\s*(?:(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)\s*\*?\s*)?pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str) -> float:
    """Parse an angle: plain float, or pi forms like 'pi/2', '-pi', '0.5pi'."""
    m = _PI_TOKEN.match(text)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        return sign * num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise StateError(f"cannot parse angle {text!r}") from None


def _parse_complex(text: str) -> complex:
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError:
        raise StateError(f"cannot parse complex number {text!r}") from None


def parse_state_spec(spec: str) -> OscillatorState:
    """Parse the state mini-grammar: ``fock:5``, ``coherent:0.5+0.2i``,
    ``thermal:1.3``, ``cat:1.0,pi/2,+``."""
    kind, sep, rest = spec.partition(":")
    kind = kind.strip().lower()
    if not sep:
        raise StateError(f"state spec {spec!r} is missing ':'")
    if kind == "fock":
        try:
            return FockState(int(rest))
        except ValueError:
            raise StateError(f"bad Fock index in {spec!r}") from None
    if kind == "coherent":
        return CoherentState(_parse_complex(rest))
    if kind == "thermal":
        try:
            return ThermalState(float(rest))
        except ValueError:
            raise StateError(f"bad thermal occupation in {spec!r}") from None
    if kind == "cat":
        parts = rest.split(",")
        if len(parts) != 3:
            raise StateError(f"cat spec needs alpha,varphi,sign: {spec!r}")
        sign_text = parts[2].strip()
        if sign_text not in ("+", "-"):
            raise StateError(f"cat sign must be '+' or '-': {spec!r}")
        return CatState(
            alpha=_parse_complex(parts[0]),
            varphi=parse_angle(parts[1]),
            sign=+1 if sign_text == "+" else -1,
        )
    raise StateError(f"unknown state kind {kind!r} in {spec!r}")
