"""Domain types shared by all modules: decoherence rates, coupling profiles,
phase-space points.

Unit conventions
----------------
Every frequency and rate in this package is ANGULAR (radians per unit time);
times carry the inverse unit.  The oscillator frequency ``omega`` is an
explicit parameter everywhere, never baked into a profile or a rate.  The
harmonic measurement protocol restricts interaction times to integer multiples
of the oscillator period, ``t_n = n * 2*pi / omega``; that restriction is
imposed by the reconstruction planner, not by these types.  Any operation that
multiplies a rate by a time treats the product as dimensionless.

The command-line layer converts user-facing frequencies ("100MHz*2pi") into
angular values; in-process code never sees anything but angular quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class ModelError(ValueError):
    """Invalid domain-type construction or use."""


def as_phase_point(beta: complex) -> complex:
    """Validate a phase-space coordinate: finite real and imaginary parts."""
    b = complex(beta)
    if not (math.isfinite(b.real) and math.isfinite(b.imag)):
        raise ModelError(f"phase-space point must be finite, got {beta!r}")
    return b


def _require_nonneg(name: str, value: float) -> float:
    v = float(value)
    if not math.isfinite(v) or v < 0.0:
        raise ModelError(f"{name} must be finite and >= 0, got {value!r}")
    return v


@dataclass(frozen=True)
class DecoherenceParams:
    """Oscillator damping kappa, qubit damping gamma1, qubit dephasing gamma2,
    and the bath occupations n_m (oscillator) and n_q (qubit).

    Derived quantities:
      gamma = gamma1 * (n_q + 1/2) + 2 * gamma2   (coherence decay rate)
      delta = n_m + 1/2                            (thermal phase-space width)
    """

    kappa: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    n_m: float = 0.0
    n_q: float = 0.0

    def __post_init__(self) -> None:
        for name in ("kappa", "gamma1", "gamma2", "n_m", "n_q"):
            _require_nonneg(name, getattr(self, name))

    @property
    def gamma(self) -> float:
        return self.gamma1 * (self.n_q + 0.5) + 2.0 * self.gamma2

    @property
    def delta(self) -> float:
        return self.n_m + 0.5


def derive_rates(params: DecoherenceParams) -> tuple[float, float]:
    """Return (gamma, delta) for the given decoherence parameters."""
    return params.gamma, params.delta


def _as_time_array(t):
    tt = np.asarray(t, dtype=float)
    return tt


def _maybe_scalar(values: np.ndarray, t) -> float | np.ndarray:
    if np.ndim(t) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class HarmonicCoupling:
    """Coupling oscillating at the mechanical frequency:

        g(t) = (omega / 2*pi) * exp(kappa*t/2) * (r0 + r * sin(phi - omega*t))

    The exponential prefactor compensates the oscillator damping so that the
    protocol's target point after n full periods is exactly n*r*e^{i*phi}.
    ``r0`` offsets the drive when hardware cannot produce negative couplings;
    it drops out of the full-period target.
    """

    r0: float = 0.0
    r: float = 0.0
    phi: float = 0.0
    omega: float = TWO_PI
    kappa: float = 0.0

    def __post_init__(self) -> None:
        _require_nonneg("r", self.r)
        _require_nonneg("kappa", self.kappa)
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ModelError(f"omega must be finite and > 0, got {self.omega!r}")
        if not math.isfinite(self.r0) or not math.isfinite(self.phi):
            raise ModelError("r0 and phi must be finite")

    def __call__(self, t):
        tt = _as_time_array(t)
        vals = (
            (self.omega / TWO_PI)
            * np.exp(0.5 * self.kappa * tt)
            * (self.r0 + self.r * np.sin(self.phi - self.omega * tt))
        )
        return _maybe_scalar(vals, t)


@dataclass(frozen=True)
class ConstantCoupling:
    """Time-independent coupling of strength g0."""

    g0: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.g0):
            raise ModelError(f"g0 must be finite, got {self.g0!r}")

    def __call__(self, t):
        tt = _as_time_array(t)
        vals = np.full(tt.shape, self.g0, dtype=float)
        return _maybe_scalar(vals, t)


@dataclass(frozen=True)
class SampledCoupling:
    """Coupling given by samples at strictly increasing times, linearly
    interpolated.  Evaluation outside the sampled range is an error."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        times = tuple(float(x) for x in self.times)
        values = tuple(float(x) for x in self.values)
        if len(times) != len(values):
            raise ModelError("times and values must have equal length")
        if len(times) < 2:
            raise ModelError("a sampled profile needs at least two knots")
        if any(not math.isfinite(x) for x in times + values):
            raise ModelError("sampled times and values must be finite")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ModelError("sampled times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        tt = _as_time_array(t)
        lo, hi = self.times[0], self.times[-1]
        if np.any(tt < lo) or np.any(tt > hi):
            raise ModelError(
                f"time outside sampled range [{lo}, {hi}]"
            )
        vals = np.interp(tt, self.times, self.values)
        return _maybe_scalar(vals, t)


CouplingProfile = HarmonicCoupling | ConstantCoupling | SampledCoupling


def eval_coupling(g: CouplingProfile, t: float) -> float:
    """Evaluate a coupling profile at a single time t >= 0."""
    if not (math.isfinite(t) and t >= 0.0):
        raise ModelError(f"time must be finite and >= 0, got {t!r}")
    return float(g(t))
