"""Run configuration: strict JSON parsing with exhaustive validation.

Unknown keys are rejected and every violation is reported with its field
path, so a bad config fails with the full list of problems rather than the
first one.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .collision import RadialGrid, Spectrum
from .dispersion import DispersionLaw
from .evolution import PhysicsParams, SchemeConfig

__all__ = ["SimConfig", "ConfigError", "parse_config", "load_config",
           "build_initial", "write_snapshot", "read_snapshot"]


class ConfigError(ValueError):
    """Carries the complete list of validation errors."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class CollisionOptions:
    quad_order: int = 4
    closed_system: bool = True
    conservative: bool = True
    kernel_constant: float | None = None


@dataclass(frozen=True)
class OutputPlan:
    snapshot_times: tuple[float, ...] = ()
    moment_exponents: tuple[float, ...] = (1.0 / 3.0, 1.0, 3.0)
    moment_every: int = 1
    directory: str | None = None


@dataclass(frozen=True)
class MonitorPlan:
    c0: float | None = None
    c1: float | None = None
    c2: float | None = None
    N: float = 3.0
    ceiling: float | None = None


@dataclass(frozen=True)
class GridSpec:
    k_min: float
    k_max: float
    n: int
    spacing: str = "log"

    def build(self, dim: int) -> RadialGrid:
        if self.spacing == "log":
            return RadialGrid.log(self.k_min, self.k_max, self.n, dim)
        return RadialGrid.linear(self.k_min, self.k_max, self.n, dim)


@dataclass(frozen=True)
class InitialCondition:
    kind: str
    center: float = 1.0
    width: float = 0.3
    amplitude: float = 1.0
    exponent: float = 17.0 / 4.0
    band: tuple[float, float] = (0.1, 10.0)
    path: str = ""


@dataclass(frozen=True)
class SimConfig:
    physics: PhysicsParams
    grid: GridSpec
    scheme: SchemeConfig
    initial: InitialCondition
    collision: CollisionOptions = field(default_factory=CollisionOptions)
    output: OutputPlan = field(default_factory=OutputPlan)
    monitors: MonitorPlan = field(default_factory=MonitorPlan)
    seed: int = 0
    config_hash: str = ""

    def build_grid(self) -> RadialGrid:
        return self.grid.build(self.physics.dispersion.dim)


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, msg: str):
        self.errors.append(f"{path}: {msg}")

    def section(self, data: dict, path: str, known: set[str]) -> dict:
        if not isinstance(data, dict):
            self.fail(path, f"must be an object, got {type(data).__name__}")
            return {}
        for key in data:
            if key not in known:
                self.fail(f"{path}.{key}", "unknown key")
        return data

    def number(self, data: dict, path: str, key: str, default=None, *,
               lo=None, hi=None, lo_open=False, hi_open=False,
               allow_none=False, integer=False):
        if key not in data:
            if default is None and not allow_none:
                self.fail(f"{path}.{key}", "required")
            return default
        v = data[key]
        if v is None and allow_none:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{path}.{key}", f"must be a number, got {v!r}")
            return default
        if integer and int(v) != v:
            self.fail(f"{path}.{key}", f"must be an integer, got {v!r}")
            return default
        if lo is not None and (v <= lo if lo_open else v < lo):
            self.fail(f"{path}.{key}",
                      f"must be {'>' if lo_open else '>='} {lo}, got {v!r}")
            return default
        if hi is not None and (v >= hi if hi_open else v > hi):
            self.fail(f"{path}.{key}",
                      f"must be {'<' if hi_open else '<='} {hi}, got {v!r}")
            return default
        return int(v) if integer else float(v)

    def choice(self, data: dict, path: str, key: str, options, default=None):
        if key not in data:
            if default is None:
                self.fail(f"{path}.{key}", "required")
            return default
        v = data[key]
        if v not in options:
            self.fail(f"{path}.{key}", f"must be one of {sorted(options)}, got {v!r}")
            return default
        return v

    def flag(self, data: dict, path: str, key: str, default: bool) -> bool:
        v = data.get(key, default)
        if not isinstance(v, bool):
            self.fail(f"{path}.{key}", f"must be a boolean, got {v!r}")
            return default
        return v


def _canonical_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def parse_config(text: str) -> SimConfig:
    """Parse and validate a JSON run configuration.

    Raises :class:`ConfigError` listing every violation; returns a fully
    populated :class:`SimConfig` otherwise.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    ck = _Checker()
    top = ck.section(raw, "config", {"physics", "grid", "scheme",
                                     "initial_condition", "collision",
                                     "output", "monitors", "seed"})

    phys = ck.section(top.get("physics", {}), "physics",
                      {"nu", "rho", "gamma", "sigma", "dim"})
    nu = ck.number(phys, "physics", "nu", 0.0, lo=0.0)
    rho = ck.number(phys, "physics", "rho", 0.0, lo=0.0)
    gamma = ck.number(phys, "physics", "gamma", 1.5, lo=1.0, lo_open=True, hi=2.0)
    sigma = ck.number(phys, "physics", "sigma", 1.0, lo=0.0, lo_open=True)
    dim = ck.choice(phys, "physics", "dim", (2, 3), 3)

    if "grid" not in top:
        ck.fail("grid", "required section")
    grd = ck.section(top.get("grid", {}), "grid", {"k_min", "k_max", "n", "spacing"})
    k_min = ck.number(grd, "grid", "k_min", lo=0.0, lo_open=True)
    k_max = ck.number(grd, "grid", "k_max", lo=0.0, lo_open=True)
    if k_min is not None and k_max is not None and k_max <= k_min:
        ck.fail("grid.k_max", f"must exceed k_min={k_min}")
    n = ck.number(grd, "grid", "n", lo=8, integer=True)
    spacing = ck.choice(grd, "grid", "spacing", ("log", "linear"), "log")

    if "scheme" not in top:
        ck.fail("scheme", "required section")
    sch = ck.section(top.get("scheme", {}), "scheme",
                     {"kind", "dt", "t_end", "truncation_radius", "positivity_mode"})
    kind = ck.choice(sch, "scheme", "kind", ("rk4_if", "euler_truncated"), "rk4_if")
    dt = ck.number(sch, "scheme", "dt", lo=0.0, lo_open=True)
    t_end = ck.number(sch, "scheme", "t_end", lo=0.0, lo_open=True)
    radius = ck.number(sch, "scheme", "truncation_radius", allow_none=True,
                       default=None, lo=0.0, lo_open=True)
    pos_mode = ck.choice(sch, "scheme", "positivity_mode",
                         ("clip", "reject-step"), "clip")
    if kind == "euler_truncated" and radius is None:
        ck.fail("scheme.truncation_radius", "required for euler_truncated")

    if "initial_condition" not in top:
        ck.fail("initial_condition", "required section")
    ic = ck.section(top.get("initial_condition", {}), "initial_condition",
                    {"kind", "center", "width", "amplitude", "exponent",
                     "band", "path"})
    ic_kind = ck.choice(ic, "initial_condition", "kind",
                        ("gaussian_bump", "power_law", "from_file"))
    center = ck.number(ic, "initial_condition", "center", 1.0, lo=0.0, lo_open=True)
    width = ck.number(ic, "initial_condition", "width", 0.3, lo=0.0, lo_open=True)
    amplitude = ck.number(ic, "initial_condition", "amplitude", 1.0, lo=0.0)
    exponent = ck.number(ic, "initial_condition", "exponent", 17.0 / 4.0)
    band = ic.get("band", [0.1, 10.0])
    if (not isinstance(band, (list, tuple)) or len(band) != 2
            or not all(isinstance(b, (int, float)) and not isinstance(b, bool)
                       for b in band)
            or band[0] >= band[1] or band[0] <= 0):
        ck.fail("initial_condition.band", f"must be an increasing positive pair, got {band!r}")
        band = (0.1, 10.0)
    path = ic.get("path", "")
    if ic_kind == "from_file" and not path:
        ck.fail("initial_condition.path", "required for from_file")

    col = ck.section(top.get("collision", {}), "collision",
                     {"quad_order", "closed_system", "conservative", "kernel_constant"})
    quad_order = ck.number(col, "collision", "quad_order", 4, lo=1, integer=True)
    closed = ck.flag(col, "collision", "closed_system", True)
    conservative = ck.flag(col, "collision", "conservative", True)
    kconst = ck.number(col, "collision", "kernel_constant", allow_none=True,
                       default=None, lo=0.0)

    out = ck.section(top.get("output", {}), "output",
                     {"snapshot_times", "moment_exponents", "moment_every", "directory"})
    snaps = out.get("snapshot_times", [])
    if not isinstance(snaps, (list, tuple)) or not all(
            isinstance(s, (int, float)) and not isinstance(s, bool) for s in snaps):
        ck.fail("output.snapshot_times", f"must be a list of numbers, got {snaps!r}")
        snaps = []
    elif t_end is not None and any(s < 0 or s > t_end for s in snaps):
        ck.fail("output.snapshot_times", f"times must lie within [0, t_end={t_end}]")
    exps = out.get("moment_exponents", [1.0 / 3.0, 1.0, 3.0])
    if not isinstance(exps, (list, tuple)) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) and x >= 0
            for x in exps):
        ck.fail("output.moment_exponents", f"must be nonnegative numbers, got {exps!r}")
        exps = [1.0]
    elif 1.0 not in [float(x) for x in exps]:
        ck.fail("output.moment_exponents", "must include 1 (the energy moment)")
    every = ck.number(out, "output", "moment_every", 1, lo=1, integer=True)
    directory = out.get("directory")
    if directory is not None and not isinstance(directory, str):
        ck.fail("output.directory", f"must be a string, got {directory!r}")
        directory = None

    mon = ck.section(top.get("monitors", {}), "monitors",
                     {"c0", "c1", "c2", "N", "ceiling"})
    c0 = ck.number(mon, "monitors", "c0", allow_none=True, default=None, lo=0.0)
    c1 = ck.number(mon, "monitors", "c1", allow_none=True, default=None, lo=0.0)
    c2 = ck.number(mon, "monitors", "c2", allow_none=True, default=None, lo=0.0)
    n_order = ck.number(mon, "monitors", "N", 3.0, lo=0.0)
    ceiling = ck.number(mon, "monitors", "ceiling", allow_none=True, default=None,
                        lo=0.0, lo_open=True)

    seed = ck.number(top, "config", "seed", 0, lo=0, integer=True)

    if ck.errors:
        raise ConfigError(ck.errors)

    law = DispersionLaw(gamma=gamma, sigma=sigma, dim=dim)
    return SimConfig(
        physics=PhysicsParams(nu=nu, rho=rho, dispersion=law),
        grid=GridSpec(k_min=k_min, k_max=k_max, n=n, spacing=spacing),
        scheme=SchemeConfig(scheme=kind, dt=dt, t_end=t_end,
                            truncation_radius=radius, positivity_mode=pos_mode),
        initial=InitialCondition(kind=ic_kind, center=center, width=width,
                                 amplitude=amplitude, exponent=exponent,
                                 band=(float(band[0]), float(band[1])), path=path),
        collision=CollisionOptions(quad_order=quad_order, closed_system=closed,
                                   conservative=conservative, kernel_constant=kconst),
        output=OutputPlan(snapshot_times=tuple(float(s) for s in snaps),
                          moment_exponents=tuple(float(x) for x in exps),
                          moment_every=every, directory=directory),
        monitors=MonitorPlan(c0=c0, c1=c1, c2=c2, N=n_order, ceiling=ceiling),
        seed=seed,
        config_hash=_canonical_hash(raw),
    )


def load_config(path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def build_initial(cfg: SimConfig, grid: RadialGrid) -> Spectrum:
    k = grid.nodes
    ic = cfg.initial
    if ic.kind == "gaussian_bump":
        f = ic.amplitude * np.exp(-0.5 * ((k - ic.center) / ic.width) ** 2)
    elif ic.kind == "power_law":
        lo, hi = ic.band
        f = np.where((k >= lo) & (k <= hi), ic.amplitude * k ** (-ic.exponent), 0.0)
    elif ic.kind == "from_file":
        nodes, values, _ = read_snapshot(ic.path)
        if len(nodes) != len(k) or not np.allclose(nodes, k, rtol=1e-12):
            raise ConfigError(
                ["initial_condition.path: snapshot grid does not match the config grid"])
        f = values
    else:  # pragma: no cover - parse_config already rejects this
        raise ConfigError([f"initial_condition.kind: unknown kind {ic.kind!r}"])
    return Spectrum(grid, f, 0.0)


# ---------------------------------------------------------------------------
# Snapshot files
# ---------------------------------------------------------------------------

def write_snapshot(path, spectrum: Spectrum, config_hash: str = "") -> None:
    """CSV snapshot with a '#' key=value header; round-trips exactly."""
    grid = spectrum.grid
    lines = [
        "# wavekin spectrum v1",
        f"# config_hash={config_hash}",
        f"# time={float(spectrum.time)!r}",
        f"# k_min={float(grid.k_min)!r}",
        f"# k_max={float(grid.k_max)!r}",
        f"# n={grid.n}",
        f"# spacing={grid.spacing}",
        f"# dim={grid.dim}",
        "k,f",
    ]
    lines.extend(f"{float(k)!r},{float(v)!r}"
                 for k, v in zip(grid.nodes, spectrum.values))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path):
    """Read a snapshot CSV; returns (nodes, values, header dict)."""
    header: dict[str, str] = {}
    ks: list[float] = []
    vs: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = body.split("=", 1)
                    header[key.strip()] = val.strip()
                continue
            if line == "k,f":
                continue
            a, b = line.split(",")
            ks.append(float(a))
            vs.append(float(b))
    return np.asarray(ks), np.asarray(vs), header
