"""Command-line entry point.

Subcommands: solve, norm, verify, counterexample.  Every run resolves a
full configuration, writes it to manifest.txt inside the output
directory, and emits CSV files with 17-significant-digit scientific
notation so identical config+seed reruns are byte-identical.

Exit codes: 0 success, 1 error, 2 an estimate check was flagged.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, ConfigError, RunConfig, parse_config
from .grid import GridSpec, SpaceTimeField, SpectralField
from .io import format_float, read_snapshot, write_csv, write_snapshot

FLAG_EXIT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zkb",
        description="Pseudo-spectral solver and estimate lab for the 2D "
                    "Zakharov-Kuznetsov-Burgers equation.")
    parser.add_argument("--version", action="version", version=f"zkb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output-dir", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("solve", help="integrate the equation from a config file")
    p.add_argument("--config", required=True)
    common(p)

    p = sub.add_parser("norm", help="space-time norms of a stored trajectory")
    p.add_argument("--input", required=True, help="directory written by zkb solve")
    p.add_argument("--family", default="Xsb1")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.5)
    common(p)

    p = sub.add_parser("verify", help="run one estimate check")
    p.add_argument("--estimate", required=True,
                   choices=("linear", "duhamel", "bilinear", "strichartz",
                            "bilinear-strichartz"))
    p.add_argument("--config", default=None)
    common(p)

    p = sub.add_parser("counterexample", help="second-iterate growth sweep")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--nmin", type=int, default=4)
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--quad", type=int, default=64)
    p.add_argument("--T", type=float, default=1.0)
    common(p)
    return parser


def _load_config(args) -> RunConfig:
    text = ""
    if getattr(args, "config", None):
        text = Path(args.config).read_text()
    cfg = parse_config(text, command=args.command)
    if args.command == "norm":
        cfg.values["norm.input"] = args.input
        cfg.values["norm.family"] = args.family
        cfg.values["norm.s"] = args.s
        cfg.values["norm.b"] = args.b
    if args.command == "counterexample":
        cfg.values["counterexample.s"] = args.s
        cfg.values["counterexample.nmin"] = args.nmin
        cfg.values["counterexample.nmax"] = args.nmax
        cfg.values["counterexample.quad"] = args.quad
        cfg.values["counterexample.T"] = args.T
    if args.output_dir is not None:
        cfg.values["output.dir"] = args.output_dir
    if args.seed is not None:
        cfg.values["run.seed"] = args.seed
    if args.threads is not None:
        cfg.values["run.threads"] = args.threads
    if cfg.values.get("output.dir") is None:
        cfg.values["output.dir"] = f"zkb_{cfg.command}_out"
    return cfg


def _prepare_output(cfg: RunConfig) -> Path:
    out = Path(cfg.values["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.txt").write_text("\n".join(cfg.manifest_lines()) + "\n")
    return out


def _initial_data(cfg: RunConfig, grid: GridSpec) -> SpectralField:
    from .fields import gaussian_bump, random_real_field
    from .grid import zero_field

    kind = cfg.values["data.kind"]
    if kind == "zero":
        return zero_field(grid)
    if kind == "gaussian":
        return gaussian_bump(grid, amplitude=cfg.values["data.amplitude"],
                             width=cfg.values["data.width"])
    rng = np.random.default_rng(cfg.seed)
    return random_real_field(grid, rng, decay=cfg.values["data.decay"],
                             amplitude=cfg.values["data.amplitude"])


def _run_solve(cfg: RunConfig) -> int:
    from .solver import (SolverBlowupError, SolverConfig, dissipation_residual,
                         solve)

    grid = GridSpec(nx=cfg.values["grid.nx"], ny=cfg.values["grid.ny"],
                    lx=cfg.values["grid.lx"], ly=cfg.values["grid.ly"],
                    dealias_fraction=cfg.values["grid.dealias_fraction"])
    scfg = SolverConfig(
        grid=grid, dt=cfg.values["solver.dt"], t_end=cfg.values["solver.t_end"],
        mode=cfg.values["solver.mode"], scheme=cfg.values["solver.scheme"],
        snapshot_stride=cfg.values["solver.snapshot_stride"],
        sobolev_s=tuple(cfg.values["diagnostics.sobolev_s"]),
        nonlinear=bool(cfg.values["solver.nonlinear"]))
    out = _prepare_output(cfg)
    v0 = _initial_data(cfg, grid)
    try:
        traj = solve(v0, scfg)
    except SolverBlowupError as exc:
        if exc.last_frame is not None:
            write_snapshot(exc.last_frame, out / "blowup.zkbf")
        print(f"error: {exc}", file=sys.stderr)
        return 1

    residual = dissipation_residual(traj)
    hs_keys = [k for k in traj.series if k.startswith("hs_")]
    header = ["t", "l2", *hs_keys, "dissipation_residual"]
    rows = []
    for j, t in enumerate(traj.series_times):
        rows.append([float(t), float(traj.series["l2"][j]),
                     *(float(traj.series[k][j]) for k in hs_keys),
                     float(residual[j])])
    write_csv(out / "series.csv", header, rows)
    for t, frame in zip(traj.times, traj.frames):
        step_index = int(round(t / scfg.dt))
        write_snapshot(frame, out / f"snap_{step_index:08d}.zkbf")
    print(f"solve: {scfg.n_steps} steps on {grid.nx}x{grid.ny}, "
          f"final l2 = {format_float(traj.series['l2'][-1])}")
    return 0


def read_trajectory(run_dir) -> SpaceTimeField:
    """Rebuild a uniformly sampled SpaceTimeField from a solve directory."""
    run_dir = Path(run_dir)
    manifest = {}
    for line in (run_dir / "manifest.txt").read_text().splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            manifest[k.strip()] = v.strip()
    dt = float(manifest["solver.dt"])
    stride = int(manifest["solver.snapshot_stride"])
    snaps = sorted(run_dir.glob("snap_*.zkbf"))
    if len(snaps) < 2:
        raise FileNotFoundError(f"no usable snapshots in {run_dir}")
    indices = [int(p.stem.split("_")[1]) for p in snaps]
    steps = np.diff(indices)
    if not np.all(steps == steps[0]):
        snaps = snaps[:-1]   # drop a non-uniform trailing frame
        indices = indices[:-1]
    fields = [read_snapshot(p) for p in snaps]
    frame_dt = dt * (indices[1] - indices[0])
    t0 = indices[0] * dt
    t1 = t0 + frame_dt * len(fields)
    return SpaceTimeField(fields[0].grid, t0, t1, tuple(fields))


def _run_norm(cfg: RunConfig) -> int:
    from .dyadic import NormSpec, norm, shell_breakdown

    out = _prepare_output(cfg)
    F = read_trajectory(cfg.values["norm.input"])
    spec = NormSpec(family=cfg.values["norm.family"], s=cfg.values["norm.s"],
                    b=cfg.values["norm.b"])
    if spec.family in ("Xsb1", "Xtsb1"):
        value = norm(F, spec)
        rows = [(n, m, l, v) for (n, m, l, v) in shell_breakdown(F)]
        write_csv(out / "shells.csv", ["N", "M", "L", "block_l2"], rows)
    else:
        value = norm(F.frames[-1], spec)
    print(f"norm {spec.family} s={spec.s:g} b={spec.b:g}: {format_float(value)}")
    (out / "norm.txt").write_text(format_float(value) + "\n")
    return 0


def _ensemble_from(cfg: RunConfig):
    from .estimates import EnsembleConfig, SpectrumSpec

    return EnsembleConfig(
        count=cfg.values["lab.count"], seed=cfg.seed,
        spectrum=SpectrumSpec(cfg.values["lab.spectrum"]),
        s=cfg.values["lab.s"], b=cfg.values["lab.b"],
        delta=cfg.values["lab.delta"], epsilon=cfg.values["lab.epsilon"],
        nmin_exp=cfg.values["lab.nmin_exp"], nmax_exp=cfg.values["lab.nmax_exp"],
        atoms_per_field=cfg.values["lab.atoms"],
        env_sigma=cfg.values["lab.env_sigma"])


def _run_verify(cfg: RunConfig, estimate: str) -> int:
    from . import estimates as est

    out = _prepare_output(cfg)
    ecfg = _ensemble_from(cfg)
    if estimate == "linear":
        report = est.check_linear_estimate(ecfg)
    elif estimate == "duhamel":
        report = est.check_duhamel_estimate(ecfg)
    elif estimate == "bilinear":
        report = est.check_bilinear_estimate(ecfg)
    elif estimate == "strichartz":
        report = est.check_strichartz(ecfg, cfg.values["lab.p"], cfg.values["lab.q"])
    else:
        report = est.check_bilinear_strichartz(
            ecfg, K=cfg.values["lab.K"], N1=cfg.values["lab.N1"],
            N2=cfg.values["lab.N2"], L1=cfg.values["lab.L1"],
            L2=cfg.values["lab.L2"])
    write_csv(out / "report.csv", ["sample", "shell", "ratio"],
              list(report.rows()))
    line = report.summary_line()
    (out / "summary.txt").write_text(line + "\n")
    print(line)
    return FLAG_EXIT if report.flagged else 0


def _run_counterexample(cfg: RunConfig) -> int:
    from .counterexample import (CounterexampleParams, build_data,
                                 second_iterate_norm)

    nmin = cfg.values["counterexample.nmin"]
    nmax = cfg.values["counterexample.nmax"]
    if nmin > nmax:
        print(f"error: nmin = {nmin} exceeds nmax = {nmax}", file=sys.stderr)
        return 1
    out = _prepare_output(cfg)
    s = cfg.values["counterexample.s"]
    quad = cfg.values["counterexample.quad"]
    horizon = cfg.values["counterexample.T"]
    rows = []
    n_list, norms = [], []
    for e in range(nmin, nmax + 1):
        n = float(2 ** e)
        p = CounterexampleParams(N=n, s=s, T=horizon, quad=quad)
        res = second_iterate_norm(p)
        data = build_data(p)
        rows.append([n, data.hs_norm(), res.value, res.t_max])
        n_list.append(n)
        norms.append(res.value)
        print(f"N=2^{e}: |u0|_Hs = {data.hs_norm():.6g}  "
              f"iterate = {res.value:.6g}  t_max = {res.t_max:g}")
    write_csv(out / "counterexample.csv",
              ["N", "norm_u0", "iterate_norm", "t_max"], rows)
    if len(n_list) >= 2:
        slope = float(np.polyfit(np.log2(n_list), np.log2(norms), 1)[0])
        print(f"slope = {slope:.4f} (prediction {-s - 0.25:+.2f})")
        (out / "slope.txt").write_text(f"{slope:.6f}\n")
    return 0


def run(cfg: RunConfig, estimate: str | None = None) -> int:
    """Dispatch a resolved configuration; returns the process exit code."""
    try:
        if cfg.command == "solve":
            return _run_solve(cfg)
        if cfg.command == "norm":
            return _run_norm(cfg)
        if cfg.command == "verify":
            if estimate is None:
                raise ValueError("verify needs an estimate name")
            return _run_verify(cfg, estimate)
        if cfg.command == "counterexample":
            return _run_counterexample(cfg)
        raise ValueError(f"unknown command {cfg.command!r}")
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg, estimate=getattr(args, "estimate", None))


if __name__ == "__main__":
    sys.exit(main())
