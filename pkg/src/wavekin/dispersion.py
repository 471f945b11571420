"""Power-law dispersion of capillary-type waves and on-shell partner closure.

Everything downstream (surface weights, kernel, collision quadrature) goes
through this module, so the power evaluations are arranged to keep the
resonance closure E(a) = E(b) + E(c) good to near machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DispersionLaw"]


def _pow_gamma(x, gamma):
    """x**gamma using sqrt/cbrt factorizations for the common exponents."""
    x = np.asarray(x, dtype=float)
    if gamma == 1.5:
        return x * np.sqrt(x)
    if gamma == 2.0:
        return x * x
    return np.power(x, gamma)


def _pow_inv_gamma(y, gamma):
    """y**(1/gamma) with the same special-casing as :func:`_pow_gamma`."""
    y = np.asarray(y, dtype=float)
    if gamma == 1.5:
        c = np.cbrt(y)
        return c * c
    if gamma == 2.0:
        return np.sqrt(y)
    return np.power(y, 1.0 / gamma)


@dataclass(frozen=True)
class DispersionLaw:
    """Isotropic dispersion E(k) = sqrt(sigma) * k**gamma.

    gamma = 3/2 with surface tension sigma is the deep-water capillary law;
    general gamma in (1, 2] is supported for the surface-geometry machinery.
    """

    gamma: float = 1.5
    sigma: float = 1.0
    dim: int = 3

    def __post_init__(self):
        if not 1.0 < self.gamma <= 2.0:
            raise ValueError(f"gamma must lie in (1, 2], got {self.gamma}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")

    @property
    def sqrt_sigma(self) -> float:
        return float(np.sqrt(self.sigma))

    def energy(self, k_mag):
        """Wave energy at wavenumber magnitude ``k_mag`` (>= 0)."""
        k = np.asarray(k_mag, dtype=float)
        if np.any(k < 0):
            raise ValueError("wavenumber magnitude must be nonnegative")
        return self.sqrt_sigma * _pow_gamma(k, self.gamma)

    def energy_prime(self, k_mag):
        """dE/dk, used by the surface-weight Jacobians."""
        k = np.asarray(k_mag, dtype=float)
        return self.gamma * self.sqrt_sigma * _pow_gamma(k, self.gamma) / np.where(k > 0, k, 1.0)

    def energy_inverse(self, e):
        """Wavenumber magnitude with the given energy (>= 0)."""
        e = np.asarray(e, dtype=float)
        if np.any(e < 0):
            raise ValueError("energy must be nonnegative")
        return _pow_inv_gamma(e / self.sqrt_sigma, self.gamma)

    def _gain_complement(self, a, c):
        """1 - (c/a)^gamma, stable in both the c->0 and c->a regimes."""
        a = np.asarray(a, dtype=float)
        c = np.asarray(c, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(a > 0, (c - a) / np.where(a > 0, a, 1.0), 0.0)
            comp = -np.expm1(self.gamma * np.log1p(np.maximum(rel, -1.0)))
        return np.clip(comp, 0.0, 1.0)

    def partner_gain(self, a, c):
        """Magnitude b with E(b) = E(a) - E(c); requires 0 <= c <= a.

        Evaluated as a * (1 - (c/a)^gamma)^(1/gamma) through expm1/log1p so
        the partner round trip (the involution b <-> c) keeps ~1e-14 relative
        accuracy even for strongly unequal partners.
        """
        a = np.asarray(a, dtype=float)
        c = np.asarray(c, dtype=float)
        if np.any(c > a * (1.0 + 1e-15)):
            raise ValueError("partner_gain requires c <= a (no real partner otherwise)")
        return a * _pow_inv_gamma(self._gain_complement(a, c), self.gamma)

    def partner_loss(self, a, c):
        """Magnitude a' with E(a') = E(a) + E(c)."""
        a = np.asarray(a, dtype=float)
        c = np.asarray(c, dtype=float)
        if np.any(a < 0) or np.any(c < 0):
            raise ValueError("magnitudes must be nonnegative")
        return _pow_inv_gamma(_pow_gamma(a, self.gamma) + _pow_gamma(c, self.gamma), self.gamma)

    def gain_deficit(self, a, c):
        """a - partner_gain(a, c), evaluated without catastrophic cancellation.

        For c << a the direct difference loses all significant digits; the
        expm1/log1p route keeps full relative accuracy, which the kernel
        needs for its near-collinear L-terms.
        """
        a = np.asarray(a, dtype=float)
        comp = self._gain_complement(a, c)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = -np.expm1(np.log(np.where(comp > 0, comp, 1.0)) / self.gamma)
        return a * np.where(comp > 0, frac, 1.0)

    def loss_excess(self, a, c):
        """partner_loss(a, c) - a, accurate for c << a (same idea as
        :meth:`gain_deficit`)."""
        a = np.asarray(a, dtype=float)
        c = np.asarray(c, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = _pow_gamma(np.where(a > 0, c / np.where(a > 0, a, 1.0), 0.0), self.gamma)
            frac = np.expm1(np.log1p(x) / self.gamma)
        return np.where(a > 0, a * frac, c)
