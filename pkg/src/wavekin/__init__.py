"""Radial three-wave kinetic solver for slightly viscous capillary waves.

The package integrates

    df/dt + 2*nu*(k^2 + rho*k^4) f = Q[f]

for radial spectra f(t, |k|), where Q is the three-wave resonant collision
operator of capillary wave turbulence, reduced to one-dimensional quadrature
over the gain and loss resonance surfaces.
"""

__version__ = "0.1.0"

from .collision import (RadialGrid, Spectrum, TriadTable, build_triad_table,
                        interpolate_f, q_conservative, q_direct, weak_form)
from .config import SimConfig, parse_config
from .dispersion import DispersionLaw
from .evolution import PhysicsParams, SchemeConfig, Trajectory, run, step

__all__ = [
    "DispersionLaw",
    "RadialGrid",
    "Spectrum",
    "TriadTable",
    "build_triad_table",
    "interpolate_f",
    "q_direct",
    "q_conservative",
    "weak_form",
    "SimConfig",
    "parse_config",
    "PhysicsParams",
    "SchemeConfig",
    "Trajectory",
    "run",
    "step",
    "__version__",
]
