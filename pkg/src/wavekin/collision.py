"""Reduced radial collision operator on a discrete wavenumber grid.

The operator is assembled from a precomputed triad table.  Each gain entry is
one quadrature node of one output node's gain-surface integral (the triad
anchored at its top magnitude a = grid node, partners b and c below); each
loss entry is a node of the loss-surface integral (partner a' above).  The
direct evaluation sums both blocks per the reduced operator; the conservative
evaluation instead scatters each gain-anchored triad's interaction to the
grid with stencil weights that interpolate the energy exactly, so the
discrete energy moment of the output vanishes identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import DispersionLaw
from .geometry import angular_factor, gain_weight, loss_weight
from .kernel import bracket_sq_arrays, default_kernel_constant

__all__ = [
    "RadialGrid",
    "Spectrum",
    "TriadTable",
    "build_triad_table",
    "interpolate_f",
    "q_direct",
    "q_direct_values",
    "q_conservative",
    "q_conservative_values",
    "q_split_values",
    "interaction_magnitude_values",
    "triad_rates",
    "weak_form",
    "CollisionError",
]


class CollisionError(RuntimeError):
    pass


_SPHERE_AREA = {2: 2.0 * math.pi, 3: 4.0 * math.pi}


@dataclass
class RadialGrid:
    """Strictly increasing wavenumber magnitudes with d-dimensional cell
    volumes, so that sum(g(nodes) * vol) approximates the integral of a
    radial g over R^d."""

    nodes: np.ndarray
    spacing: str
    dim: int
    boundaries: np.ndarray = field(init=False, repr=False)
    widths: np.ndarray = field(init=False, repr=False)
    vol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 8:
            raise ValueError("grid needs at least 8 nodes")
        if nodes[0] <= 0:
            raise ValueError("k_min must be positive")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.spacing == "log":
            ratios = nodes[1:] / nodes[:-1]
            if np.max(ratios) - np.min(ratios) > 1e-12 * np.mean(ratios):
                raise ValueError("log grid spacing ratio is not constant")
            inner = np.sqrt(nodes[1:] * nodes[:-1])
            r = ratios[0]
            bounds = np.concatenate([[nodes[0] / math.sqrt(r)], inner,
                                     [nodes[-1] * math.sqrt(r)]])
        else:
            inner = 0.5 * (nodes[1:] + nodes[:-1])
            h = nodes[1] - nodes[0]
            bounds = np.concatenate([[max(nodes[0] - 0.5 * h, 0.0)], inner,
                                     [nodes[-1] + 0.5 * (nodes[-1] - nodes[-2])]])
        self.nodes = nodes
        self.boundaries = bounds
        self.widths = np.diff(bounds)
        self.vol = _SPHERE_AREA[self.dim] * nodes ** (self.dim - 1) * self.widths
        if np.any(self.vol <= 0):
            raise ValueError("volume weights must be positive")

    @classmethod
    def log(cls, k_min: float, k_max: float, n: int, dim: int = 3) -> "RadialGrid":
        return cls(np.geomspace(k_min, k_max, n), "log", dim)

    @classmethod
    def linear(cls, k_min: float, k_max: float, n: int, dim: int = 3) -> "RadialGrid":
        return cls(np.linspace(k_min, k_max, n), "linear", dim)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def k_min(self) -> float:
        return float(self.nodes[0])

    @property
    def k_max(self) -> float:
        return float(self.nodes[-1])


@dataclass
class Spectrum:
    """Nonnegative radial wave density sampled on a grid at one time."""

    grid: RadialGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ValueError("spectrum values must match the grid")
        if np.any(v < 0):
            raise ValueError("spectrum values must be nonnegative")
        if not np.all(np.isfinite(v)):
            raise ValueError("spectrum values must be finite")
        self.values = v

    def copy(self, time: float | None = None) -> "Spectrum":
        return Spectrum(self.grid, self.values.copy(),
                        self.time if time is None else time)


def interpolate_f(spectrum: Spectrum, x, low_ext_exponent: float | None = None):
    """Log-log linear interpolation of the spectrum at magnitudes ``x``.

    Exact on power laws; 0 outside [k_min, k_max], except that with
    ``low_ext_exponent`` set, values below k_min follow
    f(k_min) * (x/k_min)**low_ext_exponent.  Falls back to linear-in-log-k
    interpolation where a bracketing value is zero.
    """
    nodes = spectrum.grid.nodes
    f = spectrum.values
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)

    j = np.clip(np.searchsorted(nodes, x) - 1, 0, len(nodes) - 2)
    x0 = nodes[j]
    x1 = nodes[j + 1]
    f0 = f[j]
    f1 = f[j + 1]
    t = np.log(np.maximum(x, 1e-300) / x0) / np.log(x1 / x0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lf0 = np.log(np.where(f0 > 0, f0, 1.0))
        lf1 = np.log(np.where(f1 > 0, f1, 1.0))
        loglog = np.exp((1.0 - t) * lf0 + t * lf1)
    lin = (1.0 - t) * f0 + t * f1
    vals = np.where((f0 > 0) & (f1 > 0), loglog, lin)
    vals = np.where(t <= 0, f0, np.where(t >= 1, f1, vals))
    out = np.where((x >= nodes[0]) & (x <= nodes[-1]), vals, 0.0)
    if low_ext_exponent is not None:
        below = x < nodes[0]
        out = np.where(below, f[0] * (x / nodes[0]) ** low_ext_exponent, out)
    return float(out[0]) if scalar else out


def _value_stencil(x, grid: RadialGrid):
    """Precomputed pieces of interpolate_f for a fixed set of magnitudes."""
    nodes = grid.nodes
    j = np.clip(np.searchsorted(nodes, x) - 1, 0, len(nodes) - 2).astype(np.int32)
    t = np.log(np.maximum(x, 1e-300) / nodes[j]) / np.log(nodes[j + 1] / nodes[j])
    inside = (x >= nodes[0]) & (x <= nodes[-1])
    return j, t, inside


def _gather(f, logf, j, t, inside):
    f0 = f[j]
    f1 = f[j + 1]
    loglog = np.exp((1.0 - t) * logf[j] + t * logf[j + 1])
    lin = (1.0 - t) * f0 + t * f1
    vals = np.where((f0 > 0) & (f1 > 0), loglog, lin)
    vals = np.where(t <= 0, f0, np.where(t >= 1, f1, vals))
    return np.where(inside, vals, 0.0)


def _energy_stencil(e_target, e_nodes, x, grid: RadialGrid):
    """Two-point scatter stencil linear in energy; weights sum to one and
    reproduce e_target exactly, which is what makes the conservative form's
    energy moment vanish identically."""
    nodes = grid.nodes
    j = np.clip(np.searchsorted(nodes, x) - 1, 0, len(nodes) - 2).astype(np.int32)
    beta = (e_nodes[j + 1] - e_target) / (e_nodes[j + 1] - e_nodes[j])
    valid = (x >= nodes[0]) & (x <= nodes[-1])
    return j, beta, valid


@dataclass
class TriadTable:
    """Precomputed quadrature for the collision operator on one grid.

    Gain arrays hold one row per (output node, quadrature node in u): the
    anchored triad (a = nodes[g_ia], b, c) with its quadrature weight (surface
    density times Gauss-Legendre increment times the angular factor), squared
    kernel, interpolation stencils for off-grid values, and energy-exact
    scatter stencils.  Loss arrays are the same for the loss surface, where
    the partner a' = partner_loss(a, u) lies above the anchor.
    """

    grid: RadialGrid
    law: DispersionLaw
    quad_order: int
    closed_system: bool
    kernel_constant: float

    g_ia: np.ndarray
    g_b: np.ndarray
    g_c: np.ndarray
    g_w: np.ndarray
    g_ksq: np.ndarray
    g_bj: np.ndarray
    g_bt: np.ndarray
    g_bin: np.ndarray
    g_cj: np.ndarray
    g_ct: np.ndarray
    g_cin: np.ndarray
    g_sbj: np.ndarray
    g_sbw: np.ndarray
    g_sbv: np.ndarray
    g_scj: np.ndarray
    g_scw: np.ndarray
    g_scv: np.ndarray

    l_ia: np.ndarray
    l_ap: np.ndarray
    l_c: np.ndarray
    l_w: np.ndarray
    l_ksq: np.ndarray
    l_aj: np.ndarray
    l_at: np.ndarray
    l_ain: np.ndarray
    l_cj: np.ndarray
    l_ct: np.ndarray
    l_cin: np.ndarray

    g_wk: np.ndarray = field(init=False, repr=False)
    l_wk: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.g_wk = self.kernel_constant * self.g_w * self.g_ksq
        self.l_wk = self.kernel_constant * self.l_w * self.l_ksq

    @property
    def n_gain(self) -> int:
        return len(self.g_ia)

    @property
    def n_loss(self) -> int:
        return len(self.l_ia)


def _gl_cells(bounds: np.ndarray, gx: np.ndarray, gw: np.ndarray):
    half = 0.5 * (bounds[1:] - bounds[:-1])
    mid = 0.5 * (bounds[1:] + bounds[:-1])
    u = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    return u, w


def _cell_bounds(lo: float, hi: float, interior: np.ndarray,
                 breakpoints=()) -> np.ndarray:
    pts = [lo, hi]
    pts.extend(interior[(interior > lo) & (interior < hi)].tolist())
    for bp in breakpoints:
        if lo < bp < hi:
            pts.append(bp)
    return np.unique(np.asarray(pts, dtype=float))


def build_triad_table(grid: RadialGrid, law: DispersionLaw | None = None,
                      quad_order: int = 4, closed_system: bool = False,
                      kernel_constant: float | None = None) -> TriadTable:
    """Assemble the quadrature table for the collision operator.

    Cells follow the grid cells, with extra splits where a partner magnitude
    crosses a grid edge (the integrand kinks there because f is zero beyond
    the grid).  In closed-system mode, triads with any leg outside
    [k_min, k_max] are dropped altogether, which makes the conservative form
    exactly energy-conserving on the grid; in open mode those triads are kept
    and act as sources/sinks across the grid edges.
    """
    law = law or DispersionLaw(dim=grid.dim)
    if law.dim != grid.dim:
        raise ValueError("dispersion law and grid disagree on the dimension")
    if quad_order < 1:
        raise ValueError("quad_order must be >= 1")
    kc = default_kernel_constant(law.sigma) if kernel_constant is None else kernel_constant
    ang = angular_factor(grid.dim)
    gx, gw = np.polynomial.legendre.leggauss(quad_order)
    nodes = grid.nodes
    e_nodes = law.energy(nodes)
    e_min, e_max = e_nodes[0], e_nodes[-1]
    k_min, k_max = grid.k_min, grid.k_max

    gain = {k: [] for k in ("ia", "b", "c", "w", "ksq", "eb", "ec")}
    loss = {k: [] for k in ("ia", "ap", "c", "w", "ksq")}

    for i, a in enumerate(nodes):
        ea = e_nodes[i]
        # --- gain surface: u in (0, a), partner b = partner_gain(a, u)
        c_hi = float(law.energy_inverse(ea - e_min)) if ea > e_min else 0.0
        if closed_system:
            lo, hi = k_min, min(c_hi, a)
        else:
            lo, hi = 0.0, a
        if hi > lo:
            bounds = _cell_bounds(lo, hi, nodes, breakpoints=(c_hi,))
            u, w = _gl_cells(bounds, gx, gw)
            b = law.partner_gain(a, u)
            db = law.gain_deficit(a, u)
            ksq = bracket_sq_arrays(a, b, u, db, a - u, law)
            dens = gain_weight(u, a, law, grid.dim)
            gain["ia"].append(np.full(len(u), i, dtype=np.int32))
            gain["b"].append(b)
            gain["c"].append(u)
            gain["w"].append(ang * w * dens)
            gain["ksq"].append(ksq)
            # energy closure in energy space: E(b) := E(a) - E(c) exactly
            gain["ec"].append(law.energy(u))
            gain["eb"].append(ea - law.energy(u))

        # --- loss surface: u in (0, ...), partner a' = partner_loss(a, u)
        u_max = float(law.energy_inverse(e_max - ea)) if e_max > ea else 0.0
        if closed_system:
            lo, hi = k_min, u_max
        else:
            lo, hi = 0.0, k_max
        if hi > lo:
            bounds = _cell_bounds(lo, hi, nodes, breakpoints=(u_max,))
            u, w = _gl_cells(bounds, gx, gw)
            ap = law.partner_loss(a, u)
            ksq = bracket_sq_arrays(ap, a, u, law.loss_excess(a, u),
                                    law.loss_excess(u, a), law)
            dens = loss_weight(u, a, law, grid.dim)
            loss["ia"].append(np.full(len(u), i, dtype=np.int32))
            loss["ap"].append(ap)
            loss["c"].append(u)
            loss["w"].append(ang * w * dens)
            loss["ksq"].append(ksq)

    if not gain["ia"]:
        raise CollisionError("grid too coarse to host any gain quadrature node")

    def cat(parts, dtype=float):
        return (np.concatenate(parts).astype(dtype) if parts
                else np.zeros(0, dtype=dtype))

    g_ia = cat(gain["ia"], np.int32)
    g_b = cat(gain["b"])
    g_c = cat(gain["c"])
    g_eb = cat(gain["eb"])
    g_ec = cat(gain["ec"])
    l_ia = cat(loss["ia"], np.int32)
    l_ap = cat(loss["ap"])
    l_c = cat(loss["c"])

    g_bj, g_bt, g_bin = _value_stencil(g_b, grid)
    g_cj, g_ct, g_cin = _value_stencil(g_c, grid)
    l_aj, l_at, l_ain = _value_stencil(l_ap, grid)
    l_cj, l_ct, l_cin = _value_stencil(l_c, grid)
    g_sbj, g_sbw, g_sbv = _energy_stencil(g_eb, e_nodes, g_b, grid)
    g_scj, g_scw, g_scv = _energy_stencil(g_ec, e_nodes, g_c, grid)

    return TriadTable(
        grid=grid, law=law, quad_order=quad_order, closed_system=closed_system,
        kernel_constant=kc,
        g_ia=g_ia, g_b=g_b, g_c=g_c, g_w=cat(gain["w"]), g_ksq=cat(gain["ksq"]),
        g_bj=g_bj, g_bt=g_bt, g_bin=g_bin, g_cj=g_cj, g_ct=g_ct, g_cin=g_cin,
        g_sbj=g_sbj, g_sbw=g_sbw, g_sbv=g_sbv,
        g_scj=g_scj, g_scw=g_scw, g_scv=g_scv,
        l_ia=l_ia, l_ap=l_ap, l_c=l_c, l_w=cat(loss["w"]), l_ksq=cat(loss["ksq"]),
        l_aj=l_aj, l_at=l_at, l_ain=l_ain, l_cj=l_cj, l_ct=l_ct, l_cin=l_cin,
    )


def _check_finite(q: np.ndarray, table: TriadTable, label: str) -> None:
    if np.all(np.isfinite(q)):
        return
    i = int(np.flatnonzero(~np.isfinite(q))[0])
    raise CollisionError(
        f"non-finite {label} value at node {i} (k = {table.grid.nodes[i]:.6g})")


def _interaction_terms(f: np.ndarray, logf: np.ndarray, table: TriadTable):
    """Bilinear combinations for the gain and loss blocks."""
    fa = f[table.g_ia]
    fb = _gather(f, logf, table.g_bj, table.g_bt, table.g_bin)
    fc = _gather(f, logf, table.g_cj, table.g_ct, table.g_cin)
    gain = fb * fc - fa * fb - fa * fc

    fa_l = f[table.l_ia]
    fap = _gather(f, logf, table.l_aj, table.l_at, table.l_ain)
    fc_l = _gather(f, logf, table.l_cj, table.l_ct, table.l_cin)
    loss = fa_l * fc_l - fap * fa_l - fap * fc_l
    return gain, loss


def _logf(f: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.where(f > 0, f, 1.0))


def q_direct_values(f: np.ndarray, table: TriadTable) -> np.ndarray:
    """Direct evaluation on a raw value array (time-stepper inner loop)."""
    n = table.grid.n
    gain, loss = _interaction_terms(f, _logf(f), table)
    q = (np.bincount(table.g_ia, weights=table.g_wk * gain, minlength=n)
         - 2.0 * np.bincount(table.l_ia, weights=table.l_wk * loss, minlength=n))
    _check_finite(q, table, "q_direct")
    return q


def q_direct(spectrum: Spectrum, table: TriadTable) -> np.ndarray:
    """Q[f] at the grid nodes from the reduced two-surface quadrature."""
    return q_direct_values(spectrum.values, table)


def q_split_values(f: np.ndarray, table: TriadTable):
    """Decompose Q[f] = q_gain - f * q_minus at the nodes.

    q_gain collects every term not multiplied by f at the output node and is
    nonnegative for nonnegative f; q_minus is the loss-rate coefficient whose
    maximum bounds the positivity-preserving step size.
    """
    n = table.grid.n
    logf = _logf(f)
    fb = _gather(f, logf, table.g_bj, table.g_bt, table.g_bin)
    fc = _gather(f, logf, table.g_cj, table.g_ct, table.g_cin)
    fap = _gather(f, logf, table.l_aj, table.l_at, table.l_ain)
    fc_l = _gather(f, logf, table.l_cj, table.l_ct, table.l_cin)
    q_gain = (np.bincount(table.g_ia, weights=table.g_wk * fb * fc, minlength=n)
              + 2.0 * np.bincount(table.l_ia, weights=table.l_wk * fap * fc_l,
                                  minlength=n))
    q_minus = (np.bincount(table.g_ia, weights=table.g_wk * (fb + fc), minlength=n)
               + 2.0 * np.bincount(table.l_ia, weights=table.l_wk * (fc_l - fap),
                                   minlength=n))
    return q_gain, q_minus


def interaction_magnitude_values(f: np.ndarray, table: TriadTable) -> np.ndarray:
    """Sum of the absolute values of every bilinear term entering Q[f] at each
    node; the scale against which stationarity residuals are normalized."""
    n = table.grid.n
    logf = _logf(f)
    fa = f[table.g_ia]
    fb = _gather(f, logf, table.g_bj, table.g_bt, table.g_bin)
    fc = _gather(f, logf, table.g_cj, table.g_ct, table.g_cin)
    mag_g = fb * fc + fa * fb + fa * fc
    fa_l = f[table.l_ia]
    fap = _gather(f, logf, table.l_aj, table.l_at, table.l_ain)
    fc_l = _gather(f, logf, table.l_cj, table.l_ct, table.l_cin)
    mag_l = fa_l * fc_l + fap * fa_l + fap * fc_l
    return (np.bincount(table.g_ia, weights=table.g_wk * mag_g, minlength=n)
            + 2.0 * np.bincount(table.l_ia, weights=table.l_wk * mag_l, minlength=n))


def triad_rates_values(f: np.ndarray, table: TriadTable) -> np.ndarray:
    gain, _ = _interaction_terms(f, _logf(f), table)
    return table.g_wk * gain * table.grid.vol[table.g_ia]


def triad_rates(spectrum: Spectrum, table: TriadTable) -> np.ndarray:
    """R_t for every gain-anchored triad: the full interaction measure
    element, including the anchor cell volume."""
    return triad_rates_values(spectrum.values, table)


def q_conservative_values(f: np.ndarray, table: TriadTable) -> np.ndarray:
    n = table.grid.n
    r = triad_rates_values(f, table)
    acc = np.bincount(table.g_ia, weights=r, minlength=n)
    for j, beta, valid in ((table.g_sbj, table.g_sbw, table.g_sbv),
                           (table.g_scj, table.g_scw, table.g_scv)):
        rv = np.where(valid, r, 0.0)
        acc -= np.bincount(j, weights=rv * beta, minlength=n)
        acc -= np.bincount(j + 1, weights=rv * (1.0 - beta), minlength=n)
    q = acc / table.grid.vol
    _check_finite(q, table, "q_conservative")
    return q


def q_conservative(spectrum: Spectrum, table: TriadTable) -> np.ndarray:
    """Q[f] by scattering each anchored triad to the grid.

    Deposits +R_t at the anchor and -R_t split over each partner's stencil;
    the stencil weights interpolate the energy exactly, so the volume-weighted
    energy moment of the result is zero to rounding.
    """
    return q_conservative_values(spectrum.values, table)


def weak_form(spectrum: Spectrum, table: TriadTable, phi) -> float:
    """Triple-integral functional sum_t R_t * (phi(a) - phi(b) - phi(c)).

    With phi = energy this telescopes to zero over the anchored triad set;
    with phi = 1 it returns minus the total interaction rate (mass is not
    conserved by three-wave interactions).
    """
    r = triad_rates(spectrum, table)
    a = table.grid.nodes[table.g_ia]
    pa = np.asarray(phi(a), dtype=float)
    pb = np.asarray(phi(table.g_b), dtype=float)
    pc = np.asarray(phi(table.g_c), dtype=float)
    return float(np.sum(r * (pa - pb - pc)))
