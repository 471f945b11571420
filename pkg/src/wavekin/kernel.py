"""Three-wave interaction kernel on the resonance manifold.

The kernel is radial: it depends on the triad only through the three
magnitudes (a, b, c) with E(a) = E(b) + E(c), via the pairwise dot products
fixed by k = k1 + k2.  No d-dimensional vectors are ever materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import DispersionLaw

__all__ = [
    "OnShellTriad",
    "L_pair",
    "make_triad",
    "v_bracket",
    "v_kernel",
    "v_kernel_sq",
    "kernel_prefactor",
    "default_kernel_constant",
]


def kernel_prefactor(sigma: float = 1.0) -> float:
    """The 1/(8*pi*sqrt(2*sigma)) normalization in front of the kernel."""
    return 1.0 / (8.0 * math.pi * math.sqrt(2.0 * sigma))


def default_kernel_constant(sigma: float = 1.0) -> float:
    """Constant multiplying the prefactor-free |bracket|^2 in the collision
    operator: the 4*pi of the interaction rate times the squared kernel
    prefactor.  Kept as a single configurable knob."""
    return 4.0 * math.pi * kernel_prefactor(sigma) ** 2


def L_pair(x_mag, y_mag, dot_xy):
    """L_{x,y} = x . y + |x| |y|."""
    return np.asarray(dot_xy, dtype=float) + np.asarray(x_mag, dtype=float) * np.asarray(y_mag, dtype=float)


@dataclass(frozen=True)
class OnShellTriad:
    """Resonant triad k = k1 + k2 with E(a) = E(b) + E(c), stored by magnitude.

    ``delta_b = a - b`` and ``delta_c = a - c`` are carried explicitly because
    the kernel's cancelled L-forms need them to full relative accuracy for
    near-degenerate triads.
    """

    a: float
    b: float
    c: float
    delta_b: float
    delta_c: float

    @property
    def dot_12(self) -> float:
        """k1 . k2 = (a^2 - b^2 - c^2) / 2."""
        return 0.5 * ((self.delta_b + self.c) * (self.b + self.delta_c) - 2.0 * self.b * self.c)

    @property
    def dot_01(self) -> float:
        """k . k1 = (a^2 + b^2 - c^2) / 2."""
        return self.dot_12 + self.b * self.b

    @property
    def dot_02(self) -> float:
        """k . k2 = (a^2 - b^2 + c^2) / 2."""
        return self.dot_12 + self.c * self.c

    def validate(self, law: DispersionLaw, tol: float = 1e-12) -> None:
        ea, eb, ec = law.energy(self.a), law.energy(self.b), law.energy(self.c)
        if abs(ea - eb - ec) > tol * max(ea, 1e-300):
            raise ValueError(f"triad off-shell: E residual {ea - eb - ec:.3e}")
        for x, y, dot in ((self.b, self.c, self.dot_12),
                          (self.a, self.b, self.dot_01),
                          (self.a, self.c, self.dot_02)):
            if x > 0 and y > 0 and abs(dot) > x * y * (1.0 + tol):
                raise ValueError(
                    f"triad not realizable: |cos| = {abs(dot) / (x * y):.17g} for "
                    f"pair ({x:.6g}, {y:.6g})")


def make_triad(a: float, c: float, law: DispersionLaw | None = None) -> OnShellTriad:
    """Gain-oriented triad with top magnitude a and partner c in (0, a).

    Loss-oriented triads are built as ``make_triad(partner_loss(a, c), c)``
    with the roles relabeled by the caller.
    """
    law = law or DispersionLaw()
    if not 0 < c < a:
        raise ValueError(f"make_triad requires 0 < c < a, got a={a}, c={c}")
    b = float(law.partner_gain(a, c))
    delta_b = float(law.gain_deficit(a, c))
    triad = OnShellTriad(a=a, b=b, c=c, delta_b=delta_b, delta_c=a - c)
    triad.validate(law)
    return triad


def _bracket_from_parts(a, b, c, delta_b, delta_c):
    """Prefactor-free angular combination of the three L-terms.

    Uses the algebraically cancelled forms
        L_{k1,k2}  = (a^2 - (b - c)^2) / 2 = (delta_b + c)(b + delta_c) / 2
        L_{k,-k1}  = (c^2 - delta_b^2) / 2
        L_{k,-k2}  = (b^2 - delta_c^2) / 2
    which stay accurate when one partner is much smaller than the other two.
    """
    L12 = 0.5 * (delta_b + c) * (b + delta_c)
    Lm1 = 0.5 * (c - delta_b) * (c + delta_b)
    Lm2 = 0.5 * (b - delta_c) * (b + delta_c)
    sab = np.sqrt(a * b)
    sac = np.sqrt(a * c)
    sbc = np.sqrt(b * c)
    return L12 / (a * sbc) - Lm1 / (c * sab) - Lm2 / (b * sac)


def v_bracket(triad: OnShellTriad) -> float:
    """Dimensionless bracket; |bracket| <= 6 on shell."""
    if min(triad.a, triad.b, triad.c) <= 0:
        raise ValueError("kernel undefined at zero magnitude (measure-zero endpoint)")
    return float(_bracket_from_parts(triad.a, triad.b, triad.c,
                                     triad.delta_b, triad.delta_c))


def v_kernel(triad: OnShellTriad, law: DispersionLaw | None = None) -> float:
    """Interaction kernel V including the 1/(8*pi*sqrt(2*sigma)) prefactor."""
    law = law or DispersionLaw()
    root = math.sqrt(law.energy(triad.a) * law.energy(triad.b) * law.energy(triad.c))
    return kernel_prefactor(law.sigma) * root * v_bracket(triad)


def v_kernel_sq(triad: OnShellTriad, law: DispersionLaw | None = None) -> float:
    """|V|^2; only this enters the collision operator."""
    v = v_kernel(triad, law)
    return v * v


def bracket_sq_arrays(a, b, c, delta_b, delta_c, law: DispersionLaw):
    """Vectorized E(a)E(b)E(c) * bracket^2 (prefactor-free |V|^2 up to the
    configurable kernel constant); the collision table builder's hot path."""
    br = _bracket_from_parts(a, b, c, delta_b, delta_c)
    return law.energy(a) * law.energy(b) * law.energy(c) * br * br
