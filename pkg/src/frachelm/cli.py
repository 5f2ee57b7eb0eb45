"""Command-line driver: `frachelm <subcommand>`.

Subcommands: greens, incident, forward, farfield, invert, verify.
Exit codes: 0 success, 1 config/validation error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import ExperimentConfig, RunManifest, parse_config, validate_config
from .errors import ConfigParseError, ConfigValidationError, FracHelmError
from .fieldgrid import (BoxGrid, ComplexField, Potential, read_field,
                        set_fft_workers, stock_potential, write_field)
from .greens import QuadratureConfig, kernel_eval
from .params import ScatteringParams


def _load_config(path: str, *, inversion: bool = False) -> ExperimentConfig:
    with open(path) as fh:
        cfg = parse_config(fh.read())
    validate_config(cfg, inversion=inversion)
    if cfg["threads"]:
        set_fft_workers(cfg["threads"])
    return cfg


def _outdir(cfg: ExperimentConfig) -> str:
    out = cfg["output.dir"] or os.environ.get("FRACHELM_OUTDIR", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _params(cfg: ExperimentConfig, k=None) -> ScatteringParams:
    return ScatteringParams(s=cfg["s"], k=float(k if k is not None else cfg["k"]),
                            branch=cfg.branch_sign, k0=cfg["k0"])


def _grid(cfg: ExperimentConfig) -> BoxGrid:
    return BoxGrid(cfg["grid.L"], cfg["grid.n"])


def _potential(cfg: ExperimentConfig, grid: BoxGrid) -> Potential:
    kind = cfg["potential.kind"]
    if kind == "stock":
        return stock_potential(grid, sigma=cfg["potential.sigma"],
                               r_flat=cfg["potential.r_flat"],
                               r_cut=cfg["potential.r_cut"],
                               height=cfg["potential.height"])
    if kind == "zero":
        return Potential(grid, np.zeros(grid.shape))
    if kind == "file":
        f, _ = read_field(cfg["potential.file"])
        if f.grid != grid:
            raise ConfigValidationError("potential file grid does not match config grid")
        return Potential(grid, f.values.real)
    raise ConfigValidationError(f"unknown potential kind {kind!r}")


def _incident(cfg: ExperimentConfig, grid: BoxGrid, k: float) -> ComplexField:
    from .waves import bump_density, incident_on_grid, sphere_quadrature

    kind = cfg["incident.kind"]
    if kind == "plane":
        return incident_on_grid(grid, "plane", k, amplitude=cfg["incident.amplitude"],
                                theta=cfg["incident.theta"])
    sq = sphere_quadrature(cfg["incident.order"])
    if cfg["incident.density"] == "uniform":
        from .waves import HerglotzDensity
        dens = HerglotzDensity(sq, np.full(len(sq.nodes), 1.0 / (4.0 * np.pi)))
    else:
        dens = bump_density(sq, center=cfg["incident.bump_center"],
                            width=cfg["incident.bump_width"])
    return incident_on_grid(grid, "herglotz", k, amplitude=cfg["incident.amplitude"],
                            density=dens)


def _parse_radii(spec: str):
    """Comma list `0.5,1,2` or range `lo:hi:count[log]`."""
    spec = spec.strip()
    if ":" in spec:
        lo, hi, count = spec.split(":")
        log = count.endswith("log")
        count = int(count[:-3]) if log else int(count)
        lo, hi = float(lo), float(hi)
        return np.geomspace(lo, hi, count) if log else np.linspace(lo, hi, count)
    return np.array([float(p) for p in spec.split(",") if p.strip()])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_greens(args) -> int:
    params = ScatteringParams(s=args.s, k=args.k,
                              branch=+1 if args.branch == "+" else -1)
    quad = QuadratureConfig(eps=args.eps) if args.eps else QuadratureConfig()
    rows = ["r,re,im,est_error,method"]
    for r in _parse_radii(args.r):
        ev = kernel_eval(float(r), params, quad, method=args.method)
        rows.append(f"{float(r)!r},{ev.value.real!r},{ev.value.imag!r},"
                    f"{float(ev.est_error)!r},{ev.method}")
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_incident(args) -> int:
    cfg = _load_config(args.config) if args.config else ExperimentConfig()
    if args.type:
        cfg.values["incident.kind"] = args.type
    manifest = RunManifest(config_digest=cfg.digest(), code_version=__version__)
    grid = _grid(cfg)
    u = _incident(cfg, grid, cfg["k"])
    outdir = _outdir(cfg)
    out = os.path.join(outdir, args.out or "incident.fhf")
    write_field(out, u, meta={"s": cfg["s"], "k": cfg["k"], "grid": grid.n,
                              "kind": cfg["incident.kind"], "provenance": "frachelm incident"})
    manifest.stage("incident")
    manifest.add_output(out)
    manifest.write(os.path.join(outdir, "manifest.txt"))
    print(out)
    return 0


def cmd_forward(args) -> int:
    from .forward import picard_solve

    cfg = _load_config(args.config)
    manifest = RunManifest(config_digest=cfg.digest(), code_version=__version__)
    grid = _grid(cfg)
    params = _params(cfg)
    Q = _potential(cfg, grid)
    u_in = _incident(cfg, grid, params.k)
    manifest.stage("setup")
    rep = picard_solve(Q, u_in, params, tol=cfg["solver.tol"],
                       max_iter=cfg["solver.max_iter"])
    manifest.stage("solve")
    out = _outdir(cfg)
    meta = {"s": params.s, "k": params.k, "grid": grid.n,
            "provenance": "frachelm forward"}
    for name, fld in (("u.fhf", rep.u), ("u_sc.fhf", rep.u_sc)):
        path = os.path.join(out, name)
        write_field(path, fld, meta=meta)
        manifest.add_output(path)
    report = os.path.join(out, "forward_report.txt")
    with open(report, "w") as fh:
        fh.write(f"iterations = {rep.iterations}\n")
        fh.write(f"converged = {rep.converged}\n")
        fh.write(f"contraction_factor = {rep.contraction_factor!r}\n")
        fh.write("residual_history = " + ",".join(repr(r) for r in rep.residual_history) + "\n")
        ks = cfg["k_schedule"]
        if ks:
            from .forward import k_decay_study
            fit = k_decay_study(Q, lambda g, k: _incident(cfg, g, k), ks, params,
                                tol=cfg["solver.tol"], max_iter=cfg["solver.max_iter"])
            manifest.stage("k_decay_study")
            fh.write("k_schedule = " + ",".join(repr(float(k)) for k in ks) + "\n")
            fh.write(f"k_decay_slope = {fit.slope!r}\n")
            fh.write("k_decay_ratios = "
                     + ",".join(repr(float(y)) for y in fit.ordinates) + "\n")
    manifest.add_output(report)
    manifest.write(os.path.join(out, "manifest.txt"))
    print(report)
    return 0


def cmd_farfield(args) -> int:
    from .farfield import FarFieldSample, scattering_amplitudes
    from .forward import picard_solve
    from .waves import sphere_quadrature

    cfg = _load_config(args.config)
    manifest = RunManifest(config_digest=cfg.digest(), code_version=__version__)
    grid = _grid(cfg)
    params = _params(cfg)
    Q = _potential(cfg, grid)
    theta = np.asarray(cfg["incident.theta"])
    a = cfg["incident.amplitude"]
    u_in = _incident(cfg, grid, params.k)
    rep = picard_solve(Q, u_in, params, tol=cfg["solver.tol"],
                       max_iter=cfg["solver.max_iter"])
    manifest.stage("solve")
    sq = sphere_quadrature(max(2, int(np.ceil(np.sqrt(cfg["farfield.directions"])))))
    dirs = sq.nodes[:cfg["farfield.directions"]]
    vals = scattering_amplitudes(Q, rep.u, params, dirs)
    samples = [FarFieldSample(k=params.k, x_hat=tuple(d), theta=tuple(theta),
                              amplitude=a, value=complex(v))
               for d, v in zip(dirs, vals)]
    rows = ["k,xhat_x,xhat_y,xhat_z,theta_x,theta_y,theta_z,a,re,im"]
    for smp in samples:
        cols = [smp.k, *smp.x_hat, *smp.theta, smp.amplitude,
                smp.value.real, smp.value.imag]
        rows.append(",".join(repr(float(c)) for c in cols))
    out = _outdir(cfg)
    path = os.path.join(out, "farfield.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    manifest.add_output(path)
    manifest.write(os.path.join(out, "manifest.txt"))
    print(path)
    return 0


def cmd_invert(args) -> int:
    from .farfield import (BornFarFieldOracle, CsvFarFieldOracle,
                           NonlinearFarFieldOracle)
    from .inverse import sweep_and_reconstruct

    cfg = _load_config(args.config, inversion=True)
    manifest = RunManifest(config_digest=cfg.digest(), code_version=__version__)
    src_grid = _grid(cfg)
    Q = _potential(cfg, src_grid)
    params = _params(cfg)
    kind = cfg["probes.oracle"]
    if kind == "synthetic-born":
        oracle = BornFarFieldOracle(Q)
    elif kind == "nonlinear":
        oracle = NonlinearFarFieldOracle(Q, params, tol=cfg["solver.tol"])
    else:
        rows = np.loadtxt(cfg["probes.file"], delimiter=",", skiprows=1, ndmin=2)
        oracle = CsvFarFieldOracle(rows)
    rec_grid = BoxGrid(cfg["grid.L"], cfg["probes.n"])
    truth = _potential(cfg, rec_grid) if cfg["potential.kind"] != "file" else None
    res = sweep_and_reconstruct(oracle, rec_grid, cfg["probes.a"], k0=cfg["k0"],
                                l_min=cfg["probes.l_min"],
                                l_scale=cfg["probes.l_scale"], ground_truth=truth)
    manifest.stage("sweep")
    out = _outdir(cfg)
    path = os.path.join(out, "q_rec.fhf")
    write_field(path, ComplexField(rec_grid, res.q_rec.astype(complex)),
                meta={"s": params.s, "provenance": "frachelm invert",
                      "imag_residue": res.im_residue})
    manifest.add_output(path)
    report = os.path.join(out, "invert_report.csv")
    with open(report, "w") as fh:
        fh.write("metric,value\n")
        fh.write(f"probes,{res.probes}\n")
        fh.write(f"imag_residue,{res.im_residue!r}\n")
        fh.write(f"k_max,{res.k_used.max()!r}\n")
        if res.rel_l2_error is not None:
            fh.write(f"rel_l2_error,{res.rel_l2_error!r}\n")
    manifest.add_output(report)
    manifest.write(os.path.join(out, "manifest.txt"))
    print(report)
    return 0


def cmd_verify(args) -> int:
    from . import acceptance

    selected = None
    if args.criteria:
        selected = [int(c) for c in args.criteria.split(",")]
    results = acceptance.run_suite(selected=selected, stream=sys.stdout)
    return 0 if all(r.passed for r in results) else 2


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="frachelm", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int, default=0,
                    help="cap FFT worker threads (0 = all cores); results "
                         "are independent of the thread count")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("greens", help="evaluate the radial outgoing kernel")
    g.add_argument("--s", type=float, required=True)
    g.add_argument("--k", type=float, required=True)
    g.add_argument("--r", required=True, help="comma list or lo:hi:count[log]")
    g.add_argument("--method", default="auto",
                   choices=["auto", "pv", "subord", "eps"])
    g.add_argument("--branch", default="+", choices=["+", "-"])
    g.add_argument("--eps", type=float, default=0.0)
    g.add_argument("--out", default="")
    g.set_defaults(func=cmd_greens)

    i = sub.add_parser("incident", help="write an incident field file")
    i.add_argument("--type", choices=["plane", "herglotz"], default="")
    i.add_argument("--config", default="")
    i.add_argument("--out", default="")
    i.set_defaults(func=cmd_incident)

    for name, fn in (("forward", cmd_forward), ("farfield", cmd_farfield),
                     ("invert", cmd_invert)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.set_defaults(func=fn)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--suite", default="acceptance", choices=["acceptance"])
    v.add_argument("--criteria", default="",
                   help="comma-separated criterion numbers (default: all)")
    v.set_defaults(func=cmd_verify)

    args = ap.parse_args(argv)
    if args.threads:
        set_fft_workers(args.threads)
    try:
        return args.func(args)
    except (ConfigParseError, ConfigValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FracHelmError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
