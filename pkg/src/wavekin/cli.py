"""Command line interface: simulate, geometry, kz-scan, oracle.

Every subcommand reads a JSON config, writes '#'-headed CSV streams plus a
rendered PNG for each stream into the output directory, and finishes with a
MANIFEST.json recording the config hash, code version, and file list.  On
failure the partial outputs are kept and the manifest marks the run
incomplete.  Outputs are byte-identical for identical config and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .collision import build_triad_table
from .config import (ConfigError, SimConfig, build_initial, load_config,
                     write_snapshot)
from .diagnostics import kz_exponent_scan
from .evolution import run as run_evolution
from .geometry import (SurfaceKind, build_weight_table, gain_weight,
                       loss_weight, loss_u_max, mc_surface_oracle, solve_s)
from . import plots

__all__ = ["main", "run_cli"]


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: dict, columns: list[str], rows) -> None:
    lines = [f"# wavekin {path.stem} v1"]
    lines.extend(f"# {k}={v}" for k, v in header.items())
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) if isinstance(x, float) else str(x)
                              for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class _Manifest:
    def __init__(self, out_dir: Path, command: str, cfg: SimConfig | None,
                 seed: int, threads: int):
        self.out_dir = out_dir
        self.data = {
            "tool": "wavekin",
            "code_version": __version__,
            "command": command,
            "config_hash": cfg.config_hash if cfg else "",
            "seed": seed,
            "threads": threads,
            "files": [],
            "complete": False,
            "error": None,
        }

    def add(self, path: Path):
        self.data["files"].append(path.name)

    def finish(self, error: str | None = None):
        self.data["complete"] = error is None
        self.data["error"] = error
        path = self.out_dir / "MANIFEST.json"
        path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")


def _out_dir(args, cfg: SimConfig) -> Path:
    out = args.out or cfg.output.directory or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    out = _out_dir(args, cfg)
    manifest = _Manifest(out, "simulate", cfg, seed, args.threads)
    try:
        grid = cfg.build_grid()
        law = cfg.physics.dispersion
        table = build_triad_table(grid, law, cfg.collision.quad_order,
                                  cfg.collision.closed_system,
                                  cfg.collision.kernel_constant)
        initial = build_initial(cfg, grid)
        traj = run_evolution(
            initial, cfg.physics, cfg.scheme, table,
            conservative=cfg.collision.conservative,
            snapshot_times=cfg.output.snapshot_times,
            moment_exponents=cfg.output.moment_exponents,
            moment_every=cfg.output.moment_every,
            monitors={"c0": cfg.monitors.c0, "c1": cfg.monitors.c1,
                      "c2": cfg.monitors.c2, "N": cfg.monitors.N},
            moment_ceiling=cfg.monitors.ceiling,
        )

        exps = sorted(traj.moments)
        cols = ["time"] + [f"M[{e!r}]" for e in exps] + \
            ["dissipation", "clipped_mass", "min_f"]
        rows = [
            [float(t)] + [float(traj.moments[e][i]) for e in exps]
            + [float(traj.dissipation[i]), float(traj.clipped_mass[i]),
               float(traj.min_f[i])]
            for i, t in enumerate(traj.times)
        ]
        mpath = out / "moments.csv"
        _write_csv(mpath, {"config_hash": cfg.config_hash,
                           "code_version": __version__,
                           "nu": _fmt(cfg.physics.nu),
                           "rho": _fmt(cfg.physics.rho)}, cols, rows)
        manifest.add(mpath)

        for i, spec in enumerate(traj.snapshots):
            spath = out / f"spectrum_{i:04d}.csv"
            write_snapshot(spath, spec, cfg.config_hash)
            manifest.add(spath)
        fpath = out / "spectrum_final.csv"
        write_snapshot(fpath, traj.final, cfg.config_hash)
        manifest.add(fpath)

        for breach in traj.monitor_breaches:
            print(f"monitor: {breach}", file=sys.stderr)

        ppath = out / "moments.png"
        plots.plot_moments(traj.times, traj.moments, ppath)
        manifest.add(ppath)
        spec_list = traj.snapshots if traj.snapshots else [traj.final]
        ppath = out / "spectra.png"
        plots.plot_spectra(spec_list, ppath)
        manifest.add(ppath)
        manifest.finish()
        return 0
    except Exception as exc:
        manifest.finish(error=f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_geometry(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    manifest = _Manifest(out, "geometry", cfg, cfg.seed, args.threads)
    try:
        law = cfg.physics.dispersion
        dim = law.dim
        alphas = np.linspace(0.0, 1.0, 201)
        s_vals = solve_s(alphas, 1.0, law)
        spath = out / "geometry_s.csv"
        _write_csv(spath, {"config_hash": cfg.config_hash, "p": _fmt(1.0),
                           "gamma": _fmt(law.gamma)},
                   ["alpha", "s"], zip(alphas.tolist(), s_vals.tolist()))
        manifest.add(spath)

        gain_tab = build_weight_table(1.0, SurfaceKind.GAIN, law, dim)
        u_max = loss_u_max(1.0, cfg.grid.k_max / cfg.grid.k_min, law)
        loss_tab = build_weight_table(1.0, SurfaceKind.LOSS, law, dim,
                                      u_max=min(u_max, 8.0))
        wg = gain_weight(gain_tab.nodes, 1.0, law, dim)
        wl = loss_weight(loss_tab.nodes, 1.0, law, dim)
        wpath = out / "geometry_weights.csv"
        _write_csv(wpath, {"config_hash": cfg.config_hash, "p": _fmt(1.0),
                           "dim": str(dim),
                           "angular_factor": _fmt(gain_tab.angular_factor)},
                   ["surface", "u", "weight_density", "quad_weight"],
                   [("gain", float(u), float(w), float(q))
                    for u, w, q in zip(gain_tab.nodes, wg, gain_tab.weights)]
                   + [("loss", float(u), float(w), float(q))
                      for u, w, q in zip(loss_tab.nodes, wl, loss_tab.weights)])
        manifest.add(wpath)

        ppath = out / "geometry.png"
        plots.plot_geometry(alphas, s_vals, gain_tab.nodes, wg,
                            loss_tab.nodes, wl, ppath)
        manifest.add(ppath)
        manifest.finish()
        return 0
    except Exception as exc:
        manifest.finish(error=f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_kz_scan(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    manifest = _Manifest(out, "kz-scan", cfg, cfg.seed, args.threads)
    try:
        grid = cfg.build_grid()
        law = cfg.physics.dispersion
        table = build_triad_table(grid, law, cfg.collision.quad_order,
                                  closed_system=False,
                                  kernel_constant=cfg.collision.kernel_constant)
        band = (args.band_lo if args.band_lo is not None else 10.0 * grid.k_min,
                args.band_hi if args.band_hi is not None else grid.k_max / 10.0)
        exponents = np.linspace(args.x_from, args.x_to, args.steps)
        xs, rs, xstar = kz_exponent_scan(grid, table, exponents, band, law)
        i_min = int(np.argmin(rs))
        kpath = out / "kz_scan.csv"
        _write_csv(kpath, {"config_hash": cfg.config_hash,
                           "band_lo": _fmt(band[0]), "band_hi": _fmt(band[1]),
                           "argmin_exponent": _fmt(xstar)},
                   ["exponent", "residual", "is_argmin"],
                   [(float(x), float(r), int(i == i_min))
                    for i, (x, r) in enumerate(zip(xs, rs))])
        manifest.add(kpath)
        ppath = out / "kz_scan.png"
        plots.plot_kz_scan(xs, rs, xstar, ppath)
        manifest.add(ppath)
        print(f"argmin exponent: {xstar:.6f}")
        manifest.finish()
        return 0
    except Exception as exc:
        manifest.finish(error=f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1


_ORACLE_TESTS = [
    ("1", lambda u: np.ones_like(u)),
    ("u", lambda u: u),
    ("u^2", lambda u: u * u),
    ("sqrt(u)", lambda u: np.sqrt(u)),
    ("1/(1+u^2)", lambda u: 1.0 / (1.0 + u * u)),
    ("exp(-u)", lambda u: np.exp(-u)),
]


def _cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    out = _out_dir(args, cfg)
    manifest = _Manifest(out, "oracle", cfg, seed, args.threads)
    try:
        law = cfg.physics.dispersion
        dim = law.dim
        rows = []
        labels = []
        rel = []
        sig = []
        t0 = time.time()
        for p in (0.5, 1.0, 2.0):
            eps = args.epsilon * float(law.energy(p))
            for kind in (SurfaceKind.GAIN, SurfaceKind.LOSS):
                u_max = 4.0 * p if kind is SurfaceKind.LOSS else None
                tab = build_weight_table(p, kind, law, dim, n_cells=96,
                                         quad_order=6, u_max=u_max)
                for name, fn in _ORACLE_TESTS:
                    reduced = tab.integrate(fn)
                    est, se = mc_surface_oracle(
                        p, kind, fn, eps, args.samples, law, dim,
                        u_max=u_max, seed=seed + len(rows))
                    diff = (est - reduced) / reduced
                    nsig = abs(est - reduced) / se if se > 0 else 0.0
                    ok = abs(diff) <= 0.02 and nsig <= 3.0
                    rows.append((kind.value, float(p), name, float(reduced),
                                 float(est), float(se), float(diff),
                                 float(nsig), int(ok)))
                    labels.append(f"{kind.value[0]},p={p:g},{name}")
                    rel.append(diff)
                    sig.append(nsig)
        opath = out / "oracle_report.csv"
        _write_csv(opath, {"config_hash": cfg.config_hash, "dim": str(dim),
                           "samples": str(args.samples),
                           "epsilon_rel": _fmt(args.epsilon)},
                   ["surface", "p", "test_fn", "reduced", "mc_estimate",
                    "mc_stderr", "rel_diff", "n_sigma", "pass"], rows)
        manifest.add(opath)
        ppath = out / "oracle.png"
        plots.plot_oracle(labels, rel, sig, ppath)
        manifest.add(ppath)
        n_fail = sum(1 for r in rows if not r[-1])
        print(f"oracle comparisons: {len(rows)} cases, {n_fail} failures "
              f"({time.time() - t0:.1f}s)")
        manifest.finish()
        return 0 if n_fail == 0 else 1
    except Exception as exc:
        manifest.finish(error=f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavekin",
        description="Radial three-wave kinetic solver for viscous capillary waves")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (results are thread-count independent)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")

    p = sub.add_parser("simulate", help="run the kinetic evolution")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("geometry", help="dump s(alpha) and weight tables")
    common(p)
    p.set_defaults(func=_cmd_geometry)

    p = sub.add_parser("kz-scan", help="stationary power-law exponent scan")
    common(p)
    p.add_argument("--from", dest="x_from", type=float, default=3.5)
    p.add_argument("--to", dest="x_to", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=31)
    p.add_argument("--band-lo", type=float, default=None)
    p.add_argument("--band-hi", type=float, default=None)
    p.set_defaults(func=_cmd_kz_scan)

    p = sub.add_parser("oracle", help="Monte Carlo check of the reduced weights")
    common(p)
    p.add_argument("--samples", type=int, default=4_000_000)
    p.add_argument("--epsilon", type=float, default=0.05,
                   help="delta smearing width relative to energy(p)")
    p.set_defaults(func=_cmd_oracle)
    return parser


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("configuration errors:", file=sys.stderr)
        for err in exc.errors:
            print(f"  {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
