"""Batch front end: geometry tooling, upscaling, macro runs, checks.

Every command is driven by flags or by a flat "key = value" config file
and writes plain-text artifacts, so runs are scriptable and diff-able.
Exit codes: 0 success, 1 validation or physics failure, 2 usage error.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__, geometry, io, macro
from . import verify as verify_mod
from .errors import ConfigError, ThermoporoError
from .params import (classify, coerce, limit_parameters_from_config,
                     parse_config_text)


def _resolve_threads(value):
    if value is not None:
        return value
    env = os.environ.get("THERMOPORO_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(
                f"THERMOPORO_THREADS must be an integer, got {env!r}"
            )
    return 1


def _outdir(args):
    path = args.out or "."
    os.makedirs(path, exist_ok=True)
    return path


def _load_config(path):
    try:
        with open(path) as f:
            text = f.read()
    except OSError as ex:
        raise ConfigError(f"cannot read config {path}: {ex.strerror}")
    return parse_config_text(text, path=path)


def _take(entries, key, kind, default=None, required=False):
    if key in entries:
        return coerce(entries.pop(key), kind, key)
    if required:
        raise ConfigError(f"config is missing required key {key!r}")
    return default


def _reject_unknown(entries, path):
    if entries:
        raise ConfigError(
            f"{path}: unknown config keys: " + ", ".join(sorted(entries))
        )


def _config_path(base_config, value):
    if os.path.isabs(value):
        return value
    return os.path.join(os.path.dirname(os.path.abspath(base_config)), value)


# ---------------------------------------------------------------------------
# geom


def _generate_geometry(args):
    dim = args.dim
    if args.preset == "laminate":
        g = geometry.generate_laminate(args.n, fluid_fraction=args.fraction,
                                       axis=args.axis, dim=dim)
    elif args.preset == "checkerboard":
        g = geometry.generate_checkerboard(args.n, dim=dim)
    elif args.preset == "channel":
        g = geometry.generate_channel(args.n, width=args.width,
                                      axis=args.axis, dim=dim)
    elif args.preset == "cube":
        g = geometry.generate_cube(args.n, a=args.size, dim=dim)
    else:
        g = geometry.generate_random_connected(
            args.n, dim=dim, solid_fraction=args.solid_fraction,
            seed=args.seed)
    return g


def _describe(g):
    perc = geometry.percolates(g, "fluid")
    return (f"dim = {g.dim}\nshape = {'x'.join(str(s) for s in g.n)}\n"
            f"porosity = {g.porosity:.17g}\n"
            f"fluid_connected = {geometry.connectivity(g, 'fluid')}\n"
            f"fluid_percolates = {' '.join(str(p) for p in perc)}")


def cmd_geom(args):
    if args.action == "generate":
        g = _generate_geometry(args)
        name = f"{args.preset}_{args.dim}d_n{args.n}.geom"
        path = os.path.join(_outdir(args), name)
        geometry.save_geometry(g, path, binary=args.binary)
        print(f"wrote {path}")
        print(_describe(g))
        return 0
    g = geometry.load_geometry(args.path)
    print(f"valid geometry file: {args.path}")
    print(_describe(g))
    return 0


# ---------------------------------------------------------------------------
# upscale


def cmd_upscale(args):
    entries = _load_config(args.config)
    geom_path = _config_path(args.config,
                             _take(entries, "geometry", str, required=True))
    params = limit_parameters_from_config(entries)
    name = _take(entries, "name", str, default="medium")
    refine = _take(entries, "refine", int, default=1)
    dt_kernel = _take(entries, "kernel.dt", float)
    t_kernel = _take(entries, "kernel.t", float)
    _reject_unknown(entries, args.config)

    g = geometry.load_geometry(geom_path)
    med = macro.assemble(
        g, params, tol=args.tol, refine=refine,
        dt_kernel=dt_kernel, t_kernel=t_kernel,
        threads=_resolve_threads(args.threads),
    )
    path = os.path.join(_outdir(args), name + ".medium")
    io.write_medium(med, path)
    d = med.dim
    print(f"wrote {path}")
    print(f"regime = {med.regime.value}")
    print(f"porosity = {med.m:.17g}")
    print("Btheta diag =", " ".join(f"{med.btheta[i, i]:.10g}" for i in range(d)))
    return 0


# ---------------------------------------------------------------------------
# macro


_PROFILES = {"constant", "ramp", "sine"}


def _profile_from_config(entries, prefix, path):
    kind = _take(entries, prefix + "profile", str, default="constant")
    if kind not in _PROFILES:
        raise ConfigError(
            f"{path}: {prefix}profile must be one of {sorted(_PROFILES)}"
        )
    if kind == "constant":
        return None
    if kind == "ramp":
        t_ramp = _take(entries, prefix + "t_ramp", float, default=0.1)
        if t_ramp <= 0:
            raise ConfigError(f"{path}: {prefix}t_ramp must be positive")
        return lambda t: min(t / t_ramp, 1.0)
    period = _take(entries, prefix + "period", float, default=1.0)
    if period <= 0:
        raise ConfigError(f"{path}: {prefix}period must be positive")
    return lambda t: np.sin(2.0 * np.pi * t / period)


def _velocity_bc_from_config(entries, path):
    kind = _take(entries, "bc.kind", str, default="none")
    if kind == "none":
        return None
    amplitude = _take(entries, "bc.amplitude", float, default=1.0)
    profile = _profile_from_config(entries, "bc.", path)
    if kind == "throughflow":
        axis = _take(entries, "bc.axis", int, default=0)
        return macro.uniform_throughflow(axis, amplitude, profile=profile)
    if kind == "compression":
        return macro.uniform_compression(amplitude, profile=profile)
    raise ConfigError(
        f"{path}: bc.kind must be none, throughflow, or compression"
    )


def _theta_bc_from_config(entries, path):
    if "theta.value" not in entries:
        return None
    value = _take(entries, "theta.value", float)
    profile = _profile_from_config(entries, "theta.", path)
    return macro.constant_wall_temperature(value, profile=profile)


def cmd_macro(args):
    entries = _load_config(args.config)
    medium_path = _config_path(args.config,
                               _take(entries, "medium", str, required=True))
    med = io.read_medium(medium_path)
    dom = geometry.MacroDomain(
        dim=_take(entries, "dim", int, default=med.dim),
        N=_take(entries, "N", int, required=True),
    )
    dt = _take(entries, "dt", float, required=True)
    T = _take(entries, "T", float, required=True)
    output_every = _take(entries, "output_every", int, default=1)
    picard_tol = _take(entries, "picard_tol", float, default=1e-8)
    convolution = _take(entries, "convolution", str, default="kernel")
    v0 = _velocity_bc_from_config(entries, args.config)
    theta0 = _theta_bc_from_config(entries, args.config)
    _reject_unknown(entries, args.config)

    prob = macro.MacroProblem(
        domain=dom, medium=med, dt=dt, T=T, v0=v0, theta0=theta0,
        picard_tol=picard_tol, convolution=convolution,
    )
    out = _outdir(args)
    grid = dom.grid()
    written = []

    def snapshot(state, k):
        path = os.path.join(out, f"snapshot_{k:06d}.vtk")
        io.write_vtk_cells(
            path, grid,
            scalars={"p": state.p, "theta": state.theta},
            vectors={"v": state.v, "w": state.w},
            title=f"t = {state.t:.10g}",
        )
        written.append(path)

    states, diagnostics = macro.run(prob, output_every=output_every)
    nsteps = int(round(T / dt))
    kept = [0] + [k for k in range(1, nsteps + 1)
                  if k % output_every == 0 or k == nsteps]
    # run() returns the same cadence; pair the states with step indices
    for state, k in zip(states, kept):
        snapshot(state, k)
    io.write_diagnostics_csv(os.path.join(out, "diagnostics.csv"), diagnostics)

    worst = max((d["mass_residual"] for d in diagnostics), default=0.0)
    print(f"wrote {len(written)} snapshots and diagnostics.csv to {out}")
    print(f"steps = {len(diagnostics)}")
    print(f"max_mass_residual = {worst:.6e}")
    return 0


# ---------------------------------------------------------------------------
# verify


def _suite_conduction(name, make, tol):
    g = make()
    errs = []
    lines = [f"[{name}] dns_conduction, drive along axis 0"]
    for eps in (0.5, 0.25, 0.125):
        r = verify_mod.dns_conduction(g, 1.0, 4.0, eps, [1.0] + [0.0] * (g.dim - 1),
                                      tol=tol)
        errs.append(r.rel_error)
        lines.append(f"  eps={eps:<6g} rel_error={r.rel_error:.6e}")
    ok = all(a >= b for a, b in zip(errs, errs[1:])) and errs[-1] <= 0.05
    lines.append(f"  non-increasing and final <= 5%: {ok}")
    return ok, lines


def _suite_stokes(tol):
    g = geometry.generate_channel(16, width=0.5, dim=2)
    lines = ["[stokes] dns_stokes tiling invariance, channel cell"]
    obs = {}
    for eps in (1.0, 0.5, 0.25):
        r = verify_mod.dns_stokes(g, 1.0, eps, [1.0, 0.0], tol=tol)
        obs[eps] = r.observable
        lines.append(f"  eps={eps:<6g} mean_velocity={r.observable[0]:.10e} "
                     f"rel_error={r.rel_error:.3e}")
    scale = max(abs(obs[1.0][0]), 1e-300)
    gap = max(abs(obs[a][0] - obs[b][0]) for a, b in ((1.0, 0.5), (0.5, 0.25)))
    ok = gap / scale <= 1e-7
    lines.append(f"  max tiling gap = {gap / scale:.3e} (tolerance 1e-07): {ok}")
    return ok, lines


def cmd_verify(args):
    tol = args.tol
    suites = []
    if args.suite in ("laminate", "all"):
        suites.append(_suite_conduction(
            "laminate", lambda: geometry.generate_laminate(32, 0.5, axis=0, dim=2),
            tol))
    if args.suite in ("checkerboard", "all"):
        suites.append(_suite_conduction(
            "checkerboard", lambda: geometry.generate_checkerboard(32, dim=2),
            tol))
    if args.suite in ("stokes", "all"):
        suites.append(_suite_stokes(tol))

    report = []
    passed = True
    for ok, lines in suites:
        report.extend(lines)
        passed = passed and ok
    report.append(f"result = {'pass' if passed else 'FAIL'}")
    text = "\n".join(report) + "\n"
    print(text, end="")
    if args.out:
        path = os.path.join(_outdir(args), f"verify_{args.suite}.txt")
        with open(path, "w") as f:
            f.write(text)
        print(f"wrote {path}")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# two-scale


def _parse_eps_list(spec):
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if "/" in tok:
            num, den = tok.split("/", 1)
            out.append(float(num) / float(den))
        else:
            out.append(float(tok))
    if not out:
        raise ConfigError("empty eps list")
    return out


def cmd_two_scale(args):
    eps = _parse_eps_list(args.eps)
    names = (sorted(verify_mod.TWO_SCALE_PRESETS)
             if args.preset == "all" else [args.preset])
    chunks = []
    for name in names:
        rep = verify_mod.run_preset(name, eps_list=eps)
        chunks.append(f"[{name}] {verify_mod.TWO_SCALE_PRESETS[name].note}\n"
                      + rep.as_text())
    text = "\n".join(chunks)
    print(text, end="")
    if args.out:
        path = os.path.join(_outdir(args), "two_scale.txt")
        with open(path, "w") as f:
            f.write(text)
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="thermoporo",
        description="Upscale voxel unit cells and march the homogenized "
                    "seepage/heat system.",
    )
    parser.add_argument("--version", action="version",
                        version=f"thermoporo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--tol", type=float, default=None,
                       help="linear solver tolerance")
        p.add_argument("--threads", type=int, default=None,
                       help="cell-solve threads (or THERMOPORO_THREADS)")

    g = sub.add_parser("geom", help="generate or validate voxel geometries")
    gsub = g.add_subparsers(dest="action", required=True)
    gg = gsub.add_parser("generate", help="write a preset geometry")
    gg.add_argument("--preset", required=True,
                    choices=["laminate", "checkerboard", "channel", "cube",
                             "random"])
    gg.add_argument("--n", type=int, default=16, help="voxels per axis")
    gg.add_argument("--dim", type=int, default=3, choices=[2, 3])
    gg.add_argument("--fraction", type=float, default=0.5,
                    help="laminate fluid layer fraction")
    gg.add_argument("--width", type=float, default=0.5,
                    help="channel fluid slab width")
    gg.add_argument("--size", type=float, default=0.5,
                    help="cube solid edge fraction")
    gg.add_argument("--axis", type=int, default=0,
                    help="laminate normal / channel direction")
    gg.add_argument("--solid-fraction", type=float, default=0.25,
                    help="random preset solid target")
    gg.add_argument("--seed", type=int, default=0)
    gg.add_argument("--binary", action="store_true",
                    help="write the single-byte-per-voxel variant")
    common(gg)
    gv = gsub.add_parser("validate", help="check a geometry file")
    gv.add_argument("path")
    common(gv)

    up = sub.add_parser("upscale", help="compute effective tensors")
    up.add_argument("--config", required=True)
    common(up)

    ma = sub.add_parser("macro", help="run the homogenized time stepper")
    ma.add_argument("--config", required=True)
    common(ma)

    ve = sub.add_parser("verify", help="fine-scale cross-checks")
    ve.add_argument("suite", choices=["laminate", "checkerboard", "stokes",
                                      "all"])
    common(ve)

    ts = sub.add_parser("two-scale", help="oscillatory pairing decay table")
    ts.add_argument("--preset", default="all",
                    choices=sorted(verify_mod.TWO_SCALE_PRESETS) + ["all"])
    ts.add_argument("--eps", default="1/4,1/8,1/16",
                    help="comma list, fractions allowed")
    common(ts)
    return parser


_DISPATCH = {
    "geom": cmd_geom,
    "upscale": cmd_upscale,
    "macro": cmd_macro,
    "verify": cmd_verify,
    "two-scale": cmd_two_scale,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", None) is None:
        args.tol = 1e-9
    try:
        return _DISPATCH[args.command](args)
    except (ThermoporoError, OSError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
