"""Time integration of df/dt = Q[f] - 2*nu*(k^2 + rho*k^4) f.

Two schemes:

``rk4_if``
    Classical RK4 on the integrating-factor transform.  The stiff damping is
    integrated exactly by exponential factors (all of them decaying, so the
    hyperviscous k^4 rates at the top of the grid cost nothing), while the
    collision term stays explicit.

``euler_truncated``
    The positivity-preserving construction: one forward Euler step on the
    radially truncated spectrum f_R, with the step size capped by the inverse
    of (max loss-rate coefficient + max damping rate inside the truncation),
    which keeps the update nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collision import (Spectrum, TriadTable, q_conservative_values,
                        q_direct_values, q_split_values)
from .diagnostics import moment
from .dispersion import DispersionLaw

__all__ = [
    "PhysicsParams",
    "SchemeConfig",
    "Trajectory",
    "BlowupError",
    "PositivityError",
    "damping_rate",
    "step",
    "run",
]


class BlowupError(RuntimeError):
    pass


class PositivityError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhysicsParams:
    nu: float = 0.0
    rho: float = 0.0
    dispersion: DispersionLaw = field(default_factory=DispersionLaw)

    def __post_init__(self):
        if self.nu < 0 or self.rho < 0:
            raise ValueError("viscosity coefficients must be nonnegative")


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "rk4_if"
    dt: float = 1e-2
    t_end: float = 1.0
    truncation_radius: float | None = None
    positivity_mode: str = "clip"

    def __post_init__(self):
        if self.scheme not in ("rk4_if", "euler_truncated"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.scheme == "euler_truncated" and not (self.truncation_radius or 0) > 0:
            raise ValueError("euler_truncated needs a positive truncation_radius")
        if self.positivity_mode not in ("clip", "reject-step"):
            raise ValueError(f"unknown positivity_mode {self.positivity_mode!r}")


def damping_rate(k_mag, params: PhysicsParams):
    """2*nu*(k^2 + rho*k^4)."""
    k = np.asarray(k_mag, dtype=float)
    k2 = k * k
    return 2.0 * params.nu * (k2 + params.rho * k2 * k2)


@dataclass
class Trajectory:
    """Recorded output of a run: per-record moments and per-request snapshots."""

    times: np.ndarray
    moments: dict[float, np.ndarray]
    dissipation: np.ndarray
    clipped_mass: np.ndarray
    min_f: np.ndarray
    snapshots: list[Spectrum]
    final: Spectrum
    monitor_breaches: list[str] = field(default_factory=list)


class _Stepper:
    """One-step advance, shared by step() and run()."""

    def __init__(self, params: PhysicsParams, scheme: SchemeConfig,
                 table: TriadTable, conservative: bool = True):
        self.params = params
        self.scheme = scheme
        self.table = table
        k = table.grid.nodes
        self.damping = damping_rate(k, params)
        self.q = q_conservative_values if conservative else q_direct_values
        if scheme.scheme == "euler_truncated":
            self.trunc_mask = k <= scheme.truncation_radius
            self.damping_cap = float(np.max(self.damping[self.trunc_mask])) \
                if np.any(self.trunc_mask) else 0.0

    def _rk4_if(self, f: np.ndarray, dt: float) -> np.ndarray:
        e_half = np.exp(-0.5 * dt * self.damping)
        e_full = e_half * e_half
        qa = self.q(f, self.table)
        qb = self.q(e_half * (f + 0.5 * dt * qa), self.table)
        qc = self.q(e_half * f + 0.5 * dt * qb, self.table)
        qd = self.q(e_full * f + dt * e_half * qc, self.table)
        return e_full * f + (dt / 6.0) * (e_full * qa + 2.0 * e_half * (qb + qc) + qd)

    def _euler_truncated(self, f: np.ndarray, dt: float):
        f_r = np.where(self.trunc_mask, f, 0.0)
        q = q_direct_values(f_r, self.table)
        _, q_minus = q_split_values(f_r, self.table)
        c_f = float(max(0.0, np.max(q_minus)))
        cap = c_f + self.damping_cap
        h_r = 1.0 / cap if cap > 0 else np.inf
        dt_eff = min(dt, h_r)
        return f + dt_eff * (q - self.damping * f_r), dt_eff

    def advance(self, f: np.ndarray, dt: float):
        """Returns (new values, dt actually taken, clipped mass)."""
        if self.scheme.scheme == "euler_truncated":
            out, dt_eff = self._euler_truncated(f, dt)
        else:
            out, dt_eff = self._rk4_if(f, dt), dt

        if self.scheme.positivity_mode == "reject-step":
            halvings = 0
            while np.any(out < 0):
                halvings += 1
                if halvings > 20:
                    raise PositivityError(
                        "step rejected 20 times without restoring positivity")
                dt_eff = 0.5 * dt_eff
                if self.scheme.scheme == "euler_truncated":
                    out, dt_eff = self._euler_truncated(f, dt_eff)
                else:
                    out = self._rk4_if(f, dt_eff)
            return out, dt_eff, 0.0

        clipped = out < 0
        clip_mass = 0.0
        if np.any(clipped):
            clip_mass = float(np.sum(-out[clipped] * self.table.grid.vol[clipped]))
            out = np.where(clipped, 0.0, out)
        return out, dt_eff, clip_mass


def step(spectrum: Spectrum, params: PhysicsParams, scheme: SchemeConfig,
         table: TriadTable, conservative: bool = True) -> Spectrum:
    """Advance one step of size scheme.dt (or the positivity cap, if smaller)."""
    stepper = _Stepper(params, scheme, table, conservative)
    out, dt_eff, _ = stepper.advance(spectrum.values.copy(), scheme.dt)
    return Spectrum(spectrum.grid, out, spectrum.time + dt_eff)


def run(initial: Spectrum, params: PhysicsParams, scheme: SchemeConfig,
        table: TriadTable, *, conservative: bool = True,
        snapshot_times=(), moment_exponents=(1.0,), moment_every: int = 1,
        monitors: dict | None = None, moment_ceiling: float | None = None) -> Trajectory:
    """Integrate to t_end, recording moments and snapshots along the way.

    ``monitors`` may carry thresholds ``c0`` (on M_{1/3}), ``c1`` (M_1) and
    ``c2`` (M_{N+3}) with the order ``N``; breaches are recorded, while
    ``moment_ceiling`` on any tracked moment aborts the run (boundedness is
    expected for nu > 0, so exceeding the ceiling flags a discretization
    failure, not physics).
    """
    monitors = monitors or {}
    n_order = float(monitors.get("N", 3.0))
    exps = sorted(set(float(x) for x in moment_exponents)
                  | {1.0 / 3.0, 1.0, n_order + 3.0})
    law = table.law
    grid = initial.grid
    e = law.energy(grid.nodes)
    diss_weight = e * (grid.nodes ** 2 + params.rho * grid.nodes ** 4) * grid.vol

    stepper = _Stepper(params, scheme, table, conservative)
    f = initial.values.copy()
    t = 0.0

    times = [0.0]
    moments = {x: [] for x in exps}
    dissipation = []
    clip_log = [0.0]
    min_log = [float(np.min(f))]
    snapshots = []
    breaches: list[str] = []
    snap_left = sorted(float(s) for s in snapshot_times)

    def record(tv, fv):
        spec = Spectrum(grid, fv.copy(), tv)
        for x in exps:
            moments[x].append(moment(spec, x, law))
        dissipation.append(float(np.sum(fv * diss_weight)))
        m = {x: moments[x][-1] for x in exps}
        if moment_ceiling is not None:
            worst = max(m.values())
            if worst > moment_ceiling:
                raise BlowupError(
                    f"moment ceiling exceeded at t={tv:.6g}: {worst:.6g} > "
                    f"{moment_ceiling:.6g} (discretization failure suspected)")
        for key, exp in (("c0", 1.0 / 3.0), ("c1", 1.0), ("c2", n_order + 3.0)):
            bound = monitors.get(key)
            if bound is not None and m[exp] > bound:
                breaches.append(f"{key} breached at t={tv:.6g}: "
                                f"M_{exp:g}={m[exp]:.6g} > {bound:.6g}")
        return spec

    spec0 = record(0.0, f)
    while snap_left and snap_left[0] <= 0.0:
        snapshots.append(spec0.copy(time=0.0))
        snap_left.pop(0)

    steps_done = 0
    clip_acc = 0.0
    while t < scheme.t_end * (1 - 1e-12):
        dt = min(scheme.dt, scheme.t_end - t)
        f, dt_eff, clip = stepper.advance(f, dt)
        t += dt_eff
        clip_acc += clip
        steps_done += 1
        at_end = t >= scheme.t_end * (1 - 1e-12)
        if steps_done % moment_every == 0 or at_end:
            times.append(t)
            spec = record(t, f)
            clip_log.append(clip_acc)
            min_log.append(float(np.min(f)))
            clip_acc = 0.0
            while snap_left and snap_left[0] <= t * (1 + 1e-12):
                snapshots.append(spec.copy(time=t))
                snap_left.pop(0)

    final = Spectrum(grid, f, t)
    return Trajectory(
        times=np.asarray(times),
        moments={x: np.asarray(v) for x, v in moments.items()},
        dissipation=np.asarray(dissipation),
        clipped_mass=np.asarray(clip_log),
        min_f=np.asarray(min_log),
        snapshots=snapshots,
        final=final,
        monitor_breaches=breaches,
    )
