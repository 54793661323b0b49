"""Quadrature-moment estimation from small-radius signal data.

Along a ray of measurement targets xi = r * e^{i*phi}, the corrected signal is
the generating function of the quadrature X_theta = a e^{-i*theta} + a_dag
e^{i*theta} at angle theta = phi + pi/2:

    Re(chi_hat) = 1 - (1/2) r^2 <X^2> + (1/24) r^4 <X^4> - ...
    Im(chi_hat) =   -       r   <X>   + (1/6)  r^3 <X^3> - ...

i.e. the coefficient of r^k is (-1)^{ceil(k/2)} <X^k> / k!.  Weighted least
squares against these bases, with the constant term pinned to chi(0) = 1,
yields the moments; weights come from the per-component shot variances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .reconstruction import MeasurementRecord
from .states import OscillatorState, annihilation, min_dim_for, to_density_matrix


class FitError(ValueError):
    """Moment fit preconditions violated."""


MAX_SUPPORTED_ORDER = 8

# Margins keeping honest flags honest: a fitted vacuum must never read as
# squeezed or non-Gaussian through float noise alone.
_FLAG_EPS = 1e-6


@dataclass(frozen=True)
class MomentEstimate:
    order: int
    value: float
    stderr: float


@dataclass(frozen=True)
class MomentFitResult:
    theta: float
    even_moments: tuple[MomentEstimate, ...]
    odd_moments: tuple[MomentEstimate, ...]
    fit_residual: float
    r_values: tuple[float, ...]

    def moment(self, order: int) -> MomentEstimate:
        pool = self.even_moments if order % 2 == 0 else self.odd_moments
        for m in pool:
            if m.order == order:
                return m
        raise KeyError(f"order {order} not fitted")

    @property
    def squeezed(self) -> bool:
        """<X^2> below the vacuum value by more than three standard errors."""
        try:
            m2 = self.moment(2)
        except KeyError:
            return False
        return m2.value + 3.0 * m2.stderr + _FLAG_EPS < 1.0

    @property
    def fourth_cumulant(self) -> float | None:
        try:
            m1, m2 = self.moment(1).value, self.moment(2).value
            m3, m4 = self.moment(3).value, self.moment(4).value
        except KeyError:
            return None
        return m4 - 4.0 * m3 * m1 - 3.0 * m2**2 + 12.0 * m2 * m1**2 - 6.0 * m1**4

    @property
    def non_gaussian(self) -> bool:
        """Fourth cumulant significantly different from zero (3 sigma,
        first-order propagation, covariances neglected)."""
        k4 = self.fourth_cumulant
        if k4 is None:
            return False
        m1, m2 = self.moment(1), self.moment(2)
        m3, m4 = self.moment(3), self.moment(4)
        d1 = -4.0 * m3.value + 24.0 * m2.value * m1.value - 24.0 * m1.value**3
        d2 = -6.0 * m2.value + 12.0 * m1.value**2
        d3 = -4.0 * m1.value
        sigma = math.sqrt(
            (d1 * m1.stderr) ** 2 + (d2 * m2.stderr) ** 2
            + (d3 * m3.stderr) ** 2 + m4.stderr**2
        )
        return abs(k4) > 3.0 * sigma + _FLAG_EPS

    @property
    def variance_consistent(self) -> bool:
        try:
            return self.moment(2).value >= self.moment(1).value ** 2 - _FLAG_EPS
        except KeyError:
            return True


def geometric_radii(r_fit_max: float = 0.5, count: int = 12, span: float = 8.0
                    ) -> np.ndarray:
    """Geometrically spaced fit radii in (0, r_fit_max]."""
    if r_fit_max <= 0 or count < 2 or span <= 1:
        raise ValueError("need r_fit_max > 0, count >= 2, span > 1")
    return r_fit_max * np.geomspace(1.0 / span, 1.0, count)


def _component_variances(records: list[MeasurementRecord]):
    noiseless = all(rec.m_x == 0 and rec.m_y == 0 for rec in records)
    if noiseless:
        return None, None
    if any(rec.m_x == 0 or rec.m_y == 0 for rec in records):
        raise FitError("cannot mix noiseless and finite-shot records in one fit")
    scale = np.array([math.exp(2.0 * rec.point.f) for rec in records])
    var_re = scale * np.array(
        [max(1.0 - rec.sx_hat**2, 1.0 / rec.m_x) / rec.m_x for rec in records]
    )
    var_im = scale * np.array(
        [max(1.0 - rec.sy_hat**2, 1.0 / rec.m_y) / rec.m_y for rec in records]
    )
    return var_re, var_im


def _weighted_fit(design: np.ndarray, data: np.ndarray, variances):
    """Solve data ~ design @ coeffs; returns (coeffs, stderrs, residuals)."""
    col_scale = np.max(np.abs(design), axis=0)
    scaled = design / col_scale
    if variances is None:
        coeffs, *_ = np.linalg.lstsq(scaled, data, rcond=None)
        coeffs = coeffs / col_scale
        stderrs = np.zeros_like(coeffs)
    else:
        w = 1.0 / np.sqrt(variances)
        coeffs, *_ = np.linalg.lstsq(scaled * w[:, None], data * w, rcond=None)
        gram = (scaled * w[:, None]).T @ (scaled * w[:, None])
        cov = np.linalg.inv(gram)
        stderrs = np.sqrt(np.diag(cov)) / col_scale
        coeffs = coeffs / col_scale
    residuals = data - design @ coeffs
    return coeffs, stderrs, residuals


def fit_moments(records: list[MeasurementRecord], max_order: int = 4,
                r_cutoff: float = 1.0) -> MomentFitResult:
    """Fit quadrature moments through ``max_order`` from records sharing one
    ray direction.

    Requires at least max_order/2 + 2 distinct radii, all <= r_cutoff
    (series validity).  Radii enter as |beta| of the planned points; the
    quadrature angle is theta = phi + pi/2.
    """
    if not records:
        raise FitError("no records to fit")
    if max_order < 1 or max_order > MAX_SUPPORTED_ORDER:
        raise FitError(f"max_order must be in [1, {MAX_SUPPORTED_ORDER}]")
    phis = [rec.point.phi for rec in records if abs(rec.point.beta) > 0]
    if not phis:
        raise FitError("all records sit at the origin")
    phi = phis[0]
    if any(abs(math.remainder(p - phi, 2.0 * math.pi)) > 1e-9 for p in phis):
        raise FitError("records do not share a ray direction")
    radii = np.array([abs(rec.point.beta) for rec in records])
    used = [rec for rec, r in zip(records, radii) if r > 0]
    radii = radii[radii > 0]
    if np.any(radii > r_cutoff):
        raise FitError(f"radii beyond the series-validity cutoff {r_cutoff}")
    needed = max_order // 2 + 2
    if len(np.unique(radii)) < needed:
        raise FitError(f"need at least {needed} distinct radii, got {len(np.unique(radii))}")

    theta = phi + 0.5 * math.pi
    chi_vals = np.array([rec.chi_hat for rec in used])
    var_re, var_im = _component_variances(used)

    even_orders = list(range(2, max_order + 1, 2))
    odd_orders = list(range(1, max_order + 1, 2))

    even_moments: list[MomentEstimate] = []
    odd_moments: list[MomentEstimate] = []
    residual_sq = 0.0
    count = 0

    if even_orders:
        coeff = np.array([(-1.0) ** (k // 2) / math.factorial(k) for k in even_orders])
        design = coeff[None, :] * radii[:, None] ** np.array(even_orders)[None, :]
        vals, errs, res = _weighted_fit(design, chi_vals.real - 1.0, var_re)
        even_moments = [MomentEstimate(k, float(v), float(e))
                        for k, v, e in zip(even_orders, vals, errs)]
        residual_sq += float(np.sum(res**2))
        count += len(res)
    if odd_orders:
        coeff = np.array([(-1.0) ** ((k + 1) // 2) / math.factorial(k) for k in odd_orders])
        design = coeff[None, :] * radii[:, None] ** np.array(odd_orders)[None, :]
        vals, errs, res = _weighted_fit(design, chi_vals.imag, var_im)
        odd_moments = [MomentEstimate(k, float(v), float(e))
                       for k, v, e in zip(odd_orders, vals, errs)]
        residual_sq += float(np.sum(res**2))
        count += len(res)

    return MomentFitResult(
        theta=theta,
        even_moments=tuple(even_moments),
        odd_moments=tuple(odd_moments),
        fit_residual=math.sqrt(residual_sq / max(count, 1)),
        r_values=tuple(float(r) for r in radii),
    )


def quadrature_moment_analytic(state: OscillatorState, theta: float, k: int) -> float:
    """tr(rho X_theta^k) by explicit matrix powers in a truncated basis large
    enough that the power does not touch the truncation edge."""
    if k < 0 or k > MAX_SUPPORTED_ORDER:
        raise FitError(f"moment order must be in [0, {MAX_SUPPORTED_ORDER}]")
    dim = min_dim_for(state) + k + 4
    rho = to_density_matrix(state, dim)
    a = annihilation(dim)
    x = a * np.exp(-1.0j * theta) + a.conj().T * np.exp(1.0j * theta)
    return float(np.trace(rho.matrix @ np.linalg.matrix_power(x, k)).real)


MOMENT_COLUMNS = ("theta", "order", "estimate", "stderr", "flag_squeezed",
                  "flag_non_gaussian")


def moment_report_rows(result: MomentFitResult) -> list[list[str]]:
    rows = []
    flags = (str(int(result.squeezed)), str(int(result.non_gaussian)))
    estimates = sorted(result.even_moments + result.odd_moments, key=lambda m: m.order)
    for m in estimates:
        rows.append([
            f"{result.theta:.17g}", str(m.order), f"{m.value:.17g}",
            f"{m.stderr:.17g}", *flags,
        ])
    return rows


def write_moment_csv(result: MomentFitResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(MOMENT_COLUMNS) + "\n")
        for row in moment_report_rows(result):
            fh.write(",".join(row) + "\n")
