"""Resonance-surface geometry and reduced one-dimensional quadrature weights.

For a radial integrand F(|w|), the surface integrals over the gain surface
(E(|p-w|) + E(|w|) = E(|p|)) and the loss surface (E(|p|) + E(|w|) = E(|p+w|))
collapse to one-dimensional integrals in the partner magnitude u = |w|:

    int_S F(|w|) dsigma / |grad H|  =  angular_factor * int F(u) * weight(u, p) du

The weight densities are derived by reducing the delta function in spherical
coordinates around the p axis (law-of-cosines angle, Jacobian 1/E'(r)); the
Monte Carlo oracle below integrates the smeared delta directly in R^d and is
the arbiter for the overall constants.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dispersion import DispersionLaw

__all__ = [
    "SurfaceKind",
    "ReducedWeightTable",
    "angular_factor",
    "solve_s",
    "gain_weight",
    "loss_weight",
    "build_weight_table",
    "reduced_integral",
    "mc_surface_oracle",
    "loss_u_max",
]


class SurfaceKind(enum.Enum):
    GAIN = "gain"
    LOSS = "loss"


def angular_factor(dim: int) -> float:
    """Angular measure left after the delta reduction: 2*pi in 3-d, the two
    mirror branches in 2-d."""
    if dim == 3:
        return 2.0 * math.pi
    if dim == 2:
        return 2.0
    raise ValueError(f"dim must be 2 or 3, got {dim}")


# ---------------------------------------------------------------------------
# Surface parametrization s(alpha)
# ---------------------------------------------------------------------------

def _h_gain(alpha, s, p, law: DispersionLaw):
    w = np.hypot(alpha * p, s)
    pw = np.hypot((1.0 - alpha) * p, s)
    return law.energy(pw) + law.energy(w) - law.energy(p)


def solve_s(alpha, p_mag: float, law: DispersionLaw | None = None,
            tol_factor: float = 1e-14, newton_steps: int = 2):
    """Transverse offset s(alpha) of the gain surface around axis point alpha*p.

    Monotonicity of the defect in s makes bracketed bisection safe; the
    bracket is tightened to ``tol_factor * p_mag`` and polished with a couple
    of Newton steps.  Vectorized over ``alpha``.
    """
    law = law or DispersionLaw()
    alpha = np.asarray(alpha, dtype=float)
    scalar = alpha.ndim == 0
    alpha = np.atleast_1d(alpha)
    if np.any((alpha < 0) | (alpha > 1)):
        raise ValueError("alpha must lie in [0, 1]")
    if p_mag <= 0:
        raise ValueError("p_mag must be positive")

    lo = np.zeros_like(alpha)
    hi = np.full_like(alpha, p_mag)
    interior = (alpha > 0) & (alpha < 1)
    # ~47 halvings take the bracket from p to 1e-14 * p
    n_iter = max(1, int(math.ceil(math.log2(1.0 / tol_factor))))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        h = _h_gain(alpha, mid, p_mag, law)
        take_hi = h > 0
        hi = np.where(interior & take_hi, mid, hi)
        lo = np.where(interior & ~take_hi, mid, lo)
    s = np.where(interior, 0.5 * (lo + hi), 0.0)

    for _ in range(newton_steps):
        wmag = np.hypot(alpha * p_mag, s)
        pwmag = np.hypot((1.0 - alpha) * p_mag, s)
        h = law.energy(pwmag) + law.energy(wmag) - law.energy(p_mag)
        with np.errstate(divide="ignore", invalid="ignore"):
            dh = s * (law.energy_prime(pwmag) / np.where(pwmag > 0, pwmag, 1.0)
                      + law.energy_prime(wmag) / np.where(wmag > 0, wmag, 1.0))
            step = np.where(dh > 0, h / np.where(dh > 0, dh, 1.0), 0.0)
        s = np.where(interior, np.clip(s - step, lo, hi), s)

    resid = np.abs(_h_gain(alpha, s, p_mag, law))
    bad = interior & (resid > 1e-12 * law.energy(p_mag))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise RuntimeError(
            f"solve_s failed to converge at alpha={alpha[i]}: residual "
            f"{resid[i]:.3e}, bracket [{lo[i]:.17g}, {hi[i]:.17g}]")
    return float(s[0]) if scalar else s


# ---------------------------------------------------------------------------
# Reduced weight densities
# ---------------------------------------------------------------------------

def _sin_angle(a, b, c):
    """Sine of the angle opposite side c in a triangle with sides a, b, c,
    via Kahan's numerically robust area formula."""
    hi = np.maximum(np.maximum(a, b), c)
    lo = np.minimum(np.minimum(a, b), c)
    md = a + b + c - hi - lo
    t = (hi + (md + lo)) * (lo - (hi - md)) * (lo + (hi - md)) * (hi + (md - lo))
    area = 0.25 * np.sqrt(np.maximum(t, 0.0))
    return 2.0 * area / (a * b)


def gain_weight(u, p_mag: float, law: DispersionLaw | None = None, dim: int = 3):
    """Reduced density for the gain surface at partner magnitude u in (0, p)."""
    law = law or DispersionLaw()
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > p_mag * (1 + 1e-15))):
        raise ValueError("gain partner magnitude must lie in [0, p_mag]")
    rb = law.partner_gain(p_mag, np.minimum(u, p_mag))
    rb_pow = np.power(rb, 2.0 - law.gamma)
    if dim == 3:
        return u * rb_pow / (law.gamma * law.sqrt_sigma * p_mag)
    sinphi = _sin_angle(np.full_like(u, p_mag), np.where(u > 0, u, 1.0), rb)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = rb_pow / (law.gamma * law.sqrt_sigma * p_mag * sinphi)
    # both endpoints are integrable singularities in 2-d; surface them as inf
    return np.where((u > 0) & (u < p_mag) & (sinphi > 0), w, np.inf)


def loss_weight(u, p_mag: float, law: DispersionLaw | None = None, dim: int = 3):
    """Reduced density for the loss surface at partner magnitude u >= 0."""
    law = law or DispersionLaw()
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("loss partner magnitude must be nonnegative")
    rc = law.partner_loss(p_mag, u)
    rc_pow = np.power(rc, 2.0 - law.gamma)
    if dim == 3:
        return u * rc_pow / (law.gamma * law.sqrt_sigma * p_mag)
    sintheta = _sin_angle(np.full_like(u, p_mag), np.where(u > 0, u, 1.0), rc)
    # u -> 0 limit: the resonant angle tends to pi/2, sine to 1
    sintheta = np.where(u > 0, sintheta, 1.0)
    return rc_pow / (law.gamma * law.sqrt_sigma * p_mag * np.where(sintheta > 0, sintheta, 1.0))


def loss_u_max(p_mag: float, k_max: float, law: DispersionLaw | None = None) -> float:
    """Largest partner u with partner_loss(p, u) <= k_max (0 if none)."""
    law = law or DispersionLaw()
    e = law.energy(k_max) - law.energy(p_mag)
    if e <= 0:
        return 0.0
    return float(law.energy_inverse(e))


# ---------------------------------------------------------------------------
# Quadrature tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedWeightTable:
    """Open quadrature for the reduced surface integral at one p.

    ``weights`` already contain the weight density times the quadrature
    increment, so the surface integral of F is
    ``angular_factor * sum(F(nodes) * weights)``.
    """

    p_mag: float
    kind: SurfaceKind
    nodes: np.ndarray
    weights: np.ndarray
    angular_factor: float

    def integrate(self, test_fn) -> float:
        return self.angular_factor * float(np.dot(np.asarray(test_fn(self.nodes), dtype=float),
                                                  self.weights))


def _chebyshev_cells(n_cells: int) -> np.ndarray:
    """Cell boundaries on [0, 1] clustered toward both endpoints."""
    j = np.arange(n_cells + 1, dtype=float)
    return 0.5 * (1.0 - np.cos(math.pi * j / n_cells))


def build_weight_table(p_mag: float, kind: SurfaceKind,
                       law: DispersionLaw | None = None, dim: int = 3,
                       n_cells: int = 64, quad_order: int = 4,
                       u_max: float | None = None) -> ReducedWeightTable:
    """Composite Gauss-Legendre table for the reduced surface integral.

    Node placement is open (no endpoint is ever evaluated), with cells graded
    toward the endpoints to absorb the integrable singularities.  Nodes are
    laid out in u/p so tables at different p coincide after rescaling.
    """
    law = law or DispersionLaw()
    if p_mag <= 0:
        raise ValueError("p_mag must be positive")
    if kind is SurfaceKind.GAIN:
        v_hi = 1.0
    else:
        v_hi = (u_max if u_max is not None else 4.0 * p_mag) / p_mag
        if v_hi <= 0:
            raise ValueError("loss table needs a positive truncation u_max")
    bounds = _chebyshev_cells(n_cells) * v_hi
    gx, gw = np.polynomial.legendre.leggauss(quad_order)
    half = 0.5 * (bounds[1:] - bounds[:-1])
    mid = 0.5 * (bounds[1:] + bounds[:-1])
    v = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    dv = (half[:, None] * gw[None, :]).ravel()
    u = v * p_mag
    if kind is SurfaceKind.GAIN:
        dens = gain_weight(u, p_mag, law, dim)
    else:
        dens = loss_weight(u, p_mag, law, dim)
    return ReducedWeightTable(p_mag=p_mag, kind=kind, nodes=u,
                              weights=dens * dv * p_mag,
                              angular_factor=angular_factor(dim))


def reduced_integral(p_mag: float, kind: SurfaceKind, test_fn,
                     law: DispersionLaw | None = None, dim: int = 3,
                     n_cells: int = 64, quad_order: int = 4,
                     u_max: float | None = None) -> float:
    """Surface integral of a radial test function via the reduced weights."""
    table = build_weight_table(p_mag, kind, law, dim, n_cells, quad_order, u_max)
    return table.integrate(test_fn)


# ---------------------------------------------------------------------------
# Monte Carlo oracle
# ---------------------------------------------------------------------------

def mc_surface_oracle(p_mag: float, kind: SurfaceKind, test_fn,
                      epsilon: float, n_samples: int,
                      law: DispersionLaw | None = None, dim: int = 3,
                      u_max: float | None = None, seed: int = 0):
    """Smeared-delta estimate of the surface integral, independent of the
    reduced weights.

    Replaces delta(H) by a top-hat of width ``epsilon`` (in energy units) and
    samples w uniformly on a box around the surface, with p along the first
    axis.  Returns ``(estimate, standard_error)``.  The loss surface is
    unbounded, so it is truncated to |w| <= u_max (default 4p) and the same
    truncation must be applied to the reduced quadrature being checked.
    """
    law = law or DispersionLaw()
    if epsilon >= law.energy(p_mag):
        raise ValueError("epsilon must be small relative to energy(p_mag)")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.Generator(np.random.Philox(key=seed))

    if kind is SurfaceKind.GAIN:
        # surface is inside the ball B(p/2, p/2); margin covers the smearing
        margin = p_mag * (0.05 + 5.0 * epsilon / law.energy(p_mag))
        lo = np.full(dim, -0.5 * p_mag - margin)
        hi = np.full(dim, 0.5 * p_mag + margin)
        lo[0] = -margin
        hi[0] = p_mag + margin
    else:
        # loss partners sit in the forward half-space (w . p >= 0 for gamma < 2)
        um = u_max if u_max is not None else 4.0 * p_mag
        margin = 0.05 * um + 5.0 * epsilon * p_mag / law.energy(p_mag)
        lo = np.full(dim, -um - margin)
        hi = np.full(dim, um + margin)
        lo[0] = -margin

    volume = float(np.prod(hi - lo))
    total = 0.0
    total_sq = 0.0
    seen = 0
    chunk = 1 << 19
    while seen < n_samples:
        m = min(chunk, n_samples - seen)
        w = lo + (hi - lo) * rng.random((m, dim))
        wmag = np.sqrt(np.sum(w * w, axis=1))
        if kind is SurfaceKind.GAIN:
            shifted = w.copy()
            shifted[:, 0] -= p_mag
            other = np.sqrt(np.sum(shifted * shifted, axis=1))
            h = law.energy(other) + law.energy(wmag) - law.energy(p_mag)
            inside = np.abs(h) <= 0.5 * epsilon
        else:
            shifted = w.copy()
            shifted[:, 0] += p_mag
            other = np.sqrt(np.sum(shifted * shifted, axis=1))
            h = law.energy(p_mag) + law.energy(wmag) - law.energy(other)
            inside = (np.abs(h) <= 0.5 * epsilon) & (wmag <= (u_max if u_max is not None else 4.0 * p_mag))
        vals = np.zeros(m)
        if np.any(inside):
            vals[inside] = np.asarray(test_fn(wmag[inside]), dtype=float) / epsilon
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        seen += m

    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    estimate = volume * mean
    stderr = volume * math.sqrt(var / n_samples)
    return estimate, stderr
