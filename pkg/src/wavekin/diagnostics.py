"""Moments, inequality checks, energy budget, and the stationary-exponent scan."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collision import (RadialGrid, Spectrum, TriadTable,
                        interaction_magnitude_values, q_direct_values)
from .dispersion import DispersionLaw

__all__ = [
    "MomentRecord",
    "moment",
    "radial_momentum_moment",
    "holder_check",
    "energy_budget_residual",
    "kz_exponent_scan",
]


@dataclass
class MomentRecord:
    """Weighted moments of one spectrum snapshot: exponent -> sum(f * E^n * vol)."""

    time: float
    values: dict[float, float] = field(default_factory=dict)


def moment(spectrum: Spectrum, n: float, law=None) -> float:
    """M_n[f] = sum_i f_i * E(k_i)^n * vol_i (d-dimensional radial measure)."""
    if n < 0:
        raise ValueError("moment exponent must be nonnegative")
    law = law or DispersionLaw(dim=spectrum.grid.dim)
    e = law.energy(spectrum.grid.nodes)
    return float(np.sum(spectrum.values * e ** n * spectrum.grid.vol))


def radial_momentum_moment(spectrum: Spectrum) -> float:
    """Vector momentum of a radial spectrum.

    Identically zero by symmetry: the integrand f(|k|) k integrates to the
    zero vector over every sphere, so no vector sum is ever formed.
    """
    return 0.0


def holder_check(spectrum: Spectrum, n: float, p: float, M: float,
                 law=None, rel_tol: float = 1e-12):
    """Moment interpolation inequality M_n <= M_p^t * M_M^(1-t) with
    t = (M - n)/(M - p), for M > n > p >= 0.

    Holds exactly for any nonnegative discrete measure; returns
    ``(passed, margin)`` where margin = rhs - lhs (>= -rel_tol * rhs to pass).
    """
    if not (M > n > p >= 0):
        raise ValueError(f"need M > n > p >= 0, got M={M}, n={n}, p={p}")
    m_n = moment(spectrum, n, law)
    m_p = moment(spectrum, p, law)
    m_M = moment(spectrum, M, law)
    rhs = m_p ** ((M - n) / (M - p)) * m_M ** ((n - p) / (M - p))
    margin = rhs - m_n
    return margin >= -rel_tol * max(rhs, 1e-300), margin


def energy_budget_residual(trajectory, params):
    """Residual of d/dt M_1 + dissipation along a recorded run.

    The derivative is taken by centered differences of the recorded energy
    moment; the dissipation integral is recorded by the run loop with the
    same volume weights.  Returns ``(times, residuals)`` normalized by
    M_1(0) / t_end.
    """
    times = np.asarray(trajectory.times, dtype=float)
    if len(times) < 3:
        raise ValueError("need at least 3 recorded samples")
    m1 = np.asarray(trajectory.moments[1.0], dtype=float)
    diss = np.asarray(trajectory.dissipation, dtype=float)
    dm = (m1[2:] - m1[:-2]) / (times[2:] - times[:-2])
    r = dm + 2.0 * params.nu * diss[1:-1]
    t_end = times[-1] - times[0]
    scale = m1[0] / t_end if m1[0] > 0 else 1.0
    return times[1:-1], r / scale


def _vee_refine(xs: np.ndarray, rs: np.ndarray, i: int) -> float:
    """Continuous minimizer estimate for a V-shaped residual curve: intersect
    the secant lines of the two flanks around the discrete argmin."""
    if i < 2 or i > len(xs) - 3:
        return float(xs[i])
    sl = (rs[i - 1] - rs[i - 2]) / (xs[i - 1] - xs[i - 2])
    sr = (rs[i + 2] - rs[i + 1]) / (xs[i + 2] - xs[i + 1])
    if sl >= 0 or sr <= 0:
        return float(xs[i])
    bl = rs[i - 1] - sl * xs[i - 1]
    br = rs[i + 1] - sr * xs[i + 1]
    x = (br - bl) / (sl - sr)
    if not xs[i - 1] <= x <= xs[i + 1]:
        return float(xs[i])
    return float(x)


def kz_exponent_scan(grid: RadialGrid, table: TriadTable, exponent_range,
                     band, law=None, amplitude: float = 1.0):
    """Stationarity residual of power-law spectra k**(-x) over a band.

    For each exponent the collision operator is evaluated on f = k**(-x)
    (zero beyond the grid) and its band-integrated magnitude is normalized by
    the band-integrated interaction magnitude, so the result is invariant
    under f -> lambda * f.  Returns ``(exponents, residuals, argmin_x)``
    where argmin_x refines the discrete minimum by intersecting the flank
    secants of the V-shaped curve.
    """
    exponents = np.asarray(exponent_range, dtype=float)
    if exponents.ndim != 1 or len(exponents) < 3:
        raise ValueError("exponent_range must provide at least 3 exponents")
    lo, hi = float(band[0]), float(band[1])
    if lo >= hi:
        raise ValueError("band must be an increasing pair")
    if lo < 10.0 * grid.k_min * (1 - 1e-12) or hi > grid.k_max / 10.0 * (1 + 1e-12):
        raise ValueError(
            "band must stay at least a decade away from both grid edges "
            f"(grid [{grid.k_min:g}, {grid.k_max:g}], band [{lo:g}, {hi:g}])")
    mask = (grid.nodes >= lo) & (grid.nodes <= hi)
    if not np.any(mask):
        raise ValueError("band contains no grid nodes")
    w_band = grid.vol[mask]

    residuals = np.empty(len(exponents))
    for m, x in enumerate(exponents):
        f = amplitude * grid.nodes ** (-x)
        q = q_direct_values(f, table)
        mag = float(np.sum(interaction_magnitude_values(f, table)[mask] * w_band))
        if mag <= 0:
            raise ValueError("collision operator vanishes identically on the band "
                             "(kernel_constant = 0?); the scan is undefined")
        residuals[m] = float(np.sum(np.abs(q[mask]) * w_band)) / mag
    i = int(np.argmin(residuals))
    return exponents, residuals, _vee_refine(exponents, residuals, i)
