"""Measurement protocol: map phase-space targets to drive parameters, simulate
finite-shot Pauli measurements, and filter the decoherence attenuation out of
the data.

A target beta is reached with the harmonic drive after n full periods, where n
is the integer with (n-1)*r_max <= |beta| < n*r_max (ties go to the larger n),
r = |beta| / n and phi = arg beta.  The corrected estimate is

    chi_hat = (sx_hat + i * sy_hat) * e^{f},

and its quoted ``stderr`` is the full complex standard error
e^{f} * sqrt((1 - sx_hat^2)/m_x + (1 - sy_hat^2)/m_y), i.e. the root of the
summed variances of both quadratures (a per-component error would be smaller
by about sqrt(2)).

Randomness is counter-based: each grid point derives its own seed from
(master_seed, point_index) and each Pauli axis from a spawn key, so scans are
reproducible and independent of evaluation order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .functionals import damping_f, f_harmonic_approx, run_budget
from .model import (
    DecoherenceParams,
    HarmonicCoupling,
    TWO_PI,
    as_phase_point,
)
from .oracle import (
    OracleConfig,
    evolve_master,
    pauli_expectations,
    plus_initial,
    predicted_signal,
)
from .states import OscillatorState


class ReachError(ValueError):
    """Target point needs more drive periods than allowed."""


class SignalRangeError(ValueError):
    """Simulated signal components must lie in [-1, 1]."""


@dataclass(frozen=True)
class ProtocolPoint:
    """Drive parameters and shot plan for one phase-space target."""

    beta: complex
    r: float
    phi: float
    n: int
    t: float
    f: float
    budget: int


@dataclass(frozen=True)
class MeasurementRecord:
    point: ProtocolPoint
    m_x: int
    m_y: int
    sx_hat: float
    sy_hat: float
    chi_hat: complex
    stderr: float
    seed: int
    engine: str

    @property
    def chi_raw(self) -> complex:
        return complex(self.sx_hat, self.sy_hat)

    @property
    def overshoot(self) -> bool:
        """True when noise pushed the corrected estimate outside |chi| <= 1."""
        return abs(self.chi_hat) > 1.0


@dataclass(frozen=True)
class ShotPolicy:
    """Either noiseless means ('infinite') or budgets from run_budget(f, eps)."""

    target_rel_error: float | None = None

    @classmethod
    def infinite(cls) -> "ShotPolicy":
        return cls(None)

    @classmethod
    def budgeted(cls, eps: float) -> "ShotPolicy":
        if not (0.0 < eps < 1.0):
            raise ValueError("target relative error must be in (0, 1)")
        return cls(eps)

    @property
    def is_infinite(self) -> bool:
        return self.target_rel_error is None


@dataclass
class ScanResult:
    records: list[MeasurementRecord]
    failures: list[tuple[int, complex, str]]


def plan_point(beta: complex, r_max: float, params: DecoherenceParams,
               omega: float, *, n_max: int = 64, r0: float = 0.0,
               f_mode: str = "exact", target_rel_error: float | None = None,
               rel_tol: float = 1e-9) -> ProtocolPoint:
    """Map a target point to (r, phi, n), interaction time, attenuation
    exponent and shot budget.

    ``f_mode`` selects the exact quadrature ("exact", default: used for the
    correction) or the first-order closed form ("approx": planning only).
    beta = 0 yields the r = 0 plan whose record is synthesized exactly.
    """
    b = as_phase_point(beta)
    if r_max <= 0:
        raise ValueError("r_max must be > 0")
    if b == 0:
        n, r, phi = 1, 0.0, 0.0
    else:
        n = int(math.floor(abs(b) / r_max)) + 1
        if n > n_max:
            raise ReachError(
                f"|beta|={abs(b):.4g} needs n={n} periods, beyond n_max={n_max}"
            )
        r = abs(b) / n
        phi = math.atan2(b.imag, b.real)
    t = n * TWO_PI / omega
    if f_mode == "exact":
        g = HarmonicCoupling(r0=r0, r=r, phi=phi, omega=omega, kappa=params.kappa)
        f = damping_f(g, t, params, omega, rel_tol)
    elif f_mode == "approx":
        f = f_harmonic_approx(r0, r, phi, n, params, omega)
    else:
        raise ValueError(f"unknown f_mode {f_mode!r}")
    budget = 0 if target_rel_error is None else run_budget(f, target_rel_error)
    return ProtocolPoint(beta=b, r=r, phi=phi, n=n, t=t, f=f, budget=budget)


def simulate_runs(true_signal: complex, m_x: int, m_y: int, seed: int
                  ) -> tuple[float, float]:
    """Shot-averaged (sx_hat, sy_hat) from m_x and m_y two-outcome runs.

    Each run yields +-1 with P(+1) = (1 + component)/2; the estimate is the
    sample mean.  Deterministic for a given seed, with independent streams
    per axis.
    """
    s = complex(true_signal)
    if abs(s.real) > 1.0 + 1e-12 or abs(s.imag) > 1.0 + 1e-12:
        raise SignalRangeError(f"signal components out of [-1, 1]: {s!r}")
    if m_x < 1 or m_y < 1:
        raise ValueError("shot counts must be >= 1")
    out = []
    for axis, (component, shots) in enumerate(((s.real, m_x), (s.imag, m_y))):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(axis,))
        )
        p = min(max(0.5 * (1.0 + component), 0.0), 1.0)
        hits = rng.binomial(shots, p)
        out.append((2.0 * hits - shots) / shots)
    return out[0], out[1]


def correct_decoherence(sx_hat: float, sy_hat: float, f: float,
                        m_x: int | None = None, m_y: int | None = None
                        ) -> tuple[complex, float]:
    """Invert the attenuation: chi_hat = (sx_hat + i sy_hat) e^{f}.

    With shot counts given, also return the corrected complex standard error;
    without them (noiseless data) the error is zero.  Values with
    |chi_hat| > 1 are legitimate noise excursions and are not clamped.
    """
    if f < 0:
        raise ValueError("f must be >= 0")
    scale = math.exp(f)
    chi_hat = complex(sx_hat, sy_hat) * scale
    if m_x and m_y:
        var = (1.0 - sx_hat**2) / m_x + (1.0 - sy_hat**2) / m_y
        stderr = scale * math.sqrt(max(var, 0.0))
    else:
        stderr = 0.0
    return chi_hat, stderr


def point_seed(master_seed: int, index: int) -> int:
    """Per-point seed, stable under reordering of the grid scan."""
    return int(np.random.SeedSequence(entropy=(master_seed, index)).generate_state(1)[0])


def _true_signal(state: OscillatorState, point: ProtocolPoint, r0: float,
                 params: DecoherenceParams, omega: float, engine: str,
                 oracle_cfg: OracleConfig | None, rel_tol: float) -> complex:
    g = HarmonicCoupling(r0=r0, r=point.r, phi=point.phi, omega=omega,
                         kappa=params.kappa)
    if engine == "analytic":
        return predicted_signal(state, g, point.t, params, omega, rel_tol)
    if engine == "oracle":
        cfg = oracle_cfg or OracleConfig()
        joint = plus_initial(state, cfg.dim)
        evolved = evolve_master(joint, g, point.t, params, omega, cfg)
        sx, sy = pauli_expectations(evolved)
        return complex(sx, sy)
    raise ValueError(f"unknown engine {engine!r}")


def _measure_point(state, index, beta, r_max, params, omega, policy, seed,
                   engine, oracle_cfg, n_max, r0, f_mode, rel_tol):
    point = plan_point(
        beta, r_max, params, omega, n_max=n_max, r0=r0, f_mode=f_mode,
        target_rel_error=policy.target_rel_error, rel_tol=rel_tol,
    )
    if point.beta == 0:
        # chi(0) = 1 is known a priori; emit the exact record without shots.
        return MeasurementRecord(point, 0, 0, 1.0, 0.0, 1.0 + 0.0j, 0.0, 0, engine)
    signal = _true_signal(state, point, r0, params, omega, engine, oracle_cfg, rel_tol)
    if policy.is_infinite:
        sx_hat = min(max(signal.real, -1.0), 1.0)
        sy_hat = min(max(signal.imag, -1.0), 1.0)
        chi_hat, stderr = correct_decoherence(sx_hat, sy_hat, point.f)
        return MeasurementRecord(point, 0, 0, sx_hat, sy_hat, chi_hat, stderr, 0, engine)
    m = point.budget
    seed_k = point_seed(seed, index)
    sx_hat, sy_hat = simulate_runs(signal, m, m, seed_k)
    chi_hat, stderr = correct_decoherence(sx_hat, sy_hat, point.f, m, m)
    return MeasurementRecord(point, m, m, sx_hat, sy_hat, chi_hat, stderr, seed_k, engine)


def scan_grid(state: OscillatorState, grid, r_max: float,
              params: DecoherenceParams, omega: float, *,
              policy: ShotPolicy | None = None, seed: int = 0,
              engine: str = "analytic", oracle_cfg: OracleConfig | None = None,
              n_max: int = 64, r0: float = 0.0, f_mode: str = "exact",
              rel_tol: float = 1e-9, threads: int | None = None) -> ScanResult:
    """Measure every grid point; per-point failures are collected and the scan
    continues.  Records come back in grid order regardless of thread count."""
    policy = policy or ShotPolicy.infinite()
    betas = [as_phase_point(b) for b in grid]

    def work(item):
        index, beta = item
        try:
            return index, _measure_point(
                state, index, beta, r_max, params, omega, policy, seed,
                engine, oracle_cfg, n_max, r0, f_mode, rel_tol,
            ), None
        except Exception as exc:  # per-point isolation, scan continues
            return index, None, f"{type(exc).__name__}: {exc}"

    if threads is not None and threads <= 1:
        outcomes = [work(item) for item in enumerate(betas)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, enumerate(betas)))

    records: list[MeasurementRecord] = []
    failures: list[tuple[int, complex, str]] = []
    for index, record, message in outcomes:
        if record is not None:
            records.append(record)
        else:
            failures.append((index, betas[index], message))
    return ScanResult(records, failures)


def square_grid(extent: float, points: int) -> list[complex]:
    """Row-major lattice over [-extent, extent]^2 (imaginary part varies
    slowest)."""
    axis = np.linspace(-extent, extent, points)
    return [complex(x, y) for y in axis for x in axis]


RECORD_COLUMNS = (
    "beta_re", "beta_im", "r", "phi", "n", "t", "f", "m_x", "m_y",
    "sx_hat", "sy_hat", "chi_re_raw", "chi_im_raw", "chi_re", "chi_im",
    "stderr", "engine", "seed",
)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def record_row(rec: MeasurementRecord) -> list[str]:
    p = rec.point
    return [
        _fmt(p.beta.real), _fmt(p.beta.imag), _fmt(p.r), _fmt(p.phi),
        str(p.n), _fmt(p.t), _fmt(p.f), str(rec.m_x), str(rec.m_y),
        _fmt(rec.sx_hat), _fmt(rec.sy_hat),
        _fmt(rec.chi_raw.real), _fmt(rec.chi_raw.imag),
        _fmt(rec.chi_hat.real), _fmt(rec.chi_hat.imag),
        _fmt(rec.stderr), rec.engine, str(rec.seed),
    ]


def write_records_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(RECORD_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(record_row(rec)) + "\n")


def read_records_csv(path) -> list[dict]:
    """Rows of a records CSV as dicts with numeric fields parsed."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != list(RECORD_COLUMNS):
            raise ValueError(f"unexpected records header in {path}")
        rows = []
        for line in fh:
            parts = line.strip().split(",")
            row: dict = dict(zip(header, parts))
            for key in ("beta_re", "beta_im", "r", "phi", "t", "f", "sx_hat",
                        "sy_hat", "chi_re_raw", "chi_im_raw", "chi_re",
                        "chi_im", "stderr"):
                row[key] = float(row[key])
            for key in ("n", "m_x", "m_y", "seed"):
                row[key] = int(row[key])
            rows.append(row)
    return rows
