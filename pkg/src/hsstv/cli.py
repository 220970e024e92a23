"""Command-line interface: degrade, restore, cs, cs-restore, metrics, response,
export-rgb, sweep and import-raw.

Exit status is 0 on success, 2 on invalid input and 3 on a hard solver
failure. Solver warnings (max_iter reached, CG stalls) only show up in the
report.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
import sys

import numpy as np

from . import io as hio
from .admm import SolverError, run
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .cube import HsCube, ShapeError
from .degrade import add_mixed_noise, make_sampling_mask, observe_cs
from .linops import SamplingMask
from .metrics import SsimConfig, bandwise_metrics, psnr, spatial_response, spectral_response, ssim
from .problems import (NOISE_LEVELS, build_cs, build_denoise, epsilon_mixed, eta_mixed)

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("hsstv")


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _add_solver_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("problem and solver")
    g.add_argument("--config", help="YAML run configuration")
    g.add_argument("--reg", choices=["hsstv", "htv", "sstv", "asstv"])
    g.add_argument("--omega", type=float)
    g.add_argument("--p", type=int, choices=[1, 2])
    g.add_argument("--tau", type=_floats, help="ASSTV weights tau_v,tau_h,tau_b")
    g.add_argument("--level", choices=sorted(NOISE_LEVELS), help="preset noise level")
    g.add_argument("--sigma", type=float)
    g.add_argument("--sp", type=float, help="salt-and-pepper rate")
    g.add_argument("--lv", type=float, help="vertical line rate")
    g.add_argument("--lh", type=float, help="horizontal line rate")
    g.add_argument("--epsilon", type=float, help="override the l2-ball radius")
    g.add_argument("--eta", type=float, help="override the l1-ball radius")
    g.add_argument("--box", type=_floats, help="dynamic range lo,hi")
    g.add_argument("--gamma", type=float)
    g.add_argument("--max-iter", type=int)
    g.add_argument("--stop-tol", type=float)
    g.add_argument("--path", dest="solver_path", choices=["fft", "cg"])
    g.add_argument("--seed", type=int)
    g.add_argument("--report", help="JSON report path")
    g.add_argument("--trace", help="per-iteration CSV trace path")
    g.add_argument("--truth", help="ground-truth cube for metrics in the report")


def _config_from_args(args, task: str) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    cfg.task = task
    if getattr(args, "level", None):
        lvl = NOISE_LEVELS[args.level]
        cfg.noise.sigma, cfg.noise.s_p, cfg.noise.l_v, cfg.noise.l_h = (
            lvl.sigma, lvl.s_p, lvl.l_v, lvl.l_h)
        if cfg.regularizer.tau is None and args.level == "ii":
            cfg.regularizer.tau = [1.0, 1.0, 2.0]
    get = lambda name: getattr(args, name, None)  # noqa: E731
    overrides = {
        "regularizer.kind": get("reg"),
        "regularizer.omega": get("omega"),
        "regularizer.p": get("p"),
        "regularizer.tau": get("tau"),
        "noise.sigma": get("sigma") if task == "denoise" else None,
        "noise.s_p": get("sp"),
        "noise.l_v": get("lv"),
        "noise.l_h": get("lh"),
        "constraints.epsilon": get("epsilon"),
        "constraints.eta": get("eta"),
        "constraints.box": get("box"),
        "solver.gamma": get("gamma"),
        "solver.max_iter": get("max_iter"),
        "solver.stop_tol": get("stop_tol"),
        "solver.path": get("solver_path"),
        "seed": get("seed"),
        "paths.report": get("report"),
        "paths.trace": get("trace"),
        "paths.truth": get("truth"),
    }
    if task == "cs":
        overrides["cs.sigma"] = get("sigma")
        overrides["cs.rate"] = get("rate")
    return apply_overrides(cfg, overrides)


def _trace_rows(history):
    return [(n, float(ch), float(r)) for n, ch, r in history]


def _solve_and_report(problem, cfg: RunConfig, out_path, extra: dict):
    u, s, rep = run(problem, cfg.solver_config())
    restored = HsCube(problem.dims, u)
    hio.write_cube(out_path, restored)
    report = {
        "task": cfg.task,
        "epsilon": problem.epsilon,
        "eta": problem.eta,
        "solver": rep.as_dict(),
        "config": cfg.to_dict(),
        **extra,
    }
    if cfg.paths.truth:
        truth = hio.read_cube(cfg.paths.truth)
        report["metrics"] = {"psnr": hio.fmt_float(psnr(restored, truth)),
                             "ssim": ssim(restored, truth)}
    if cfg.paths.trace:
        hio.write_csv(cfg.paths.trace, ["iteration", "u_change", "primal_residual"],
                      _trace_rows(rep.history))
    if cfg.paths.report:
        hio.write_json(cfg.paths.report, report)
    status = "converged" if rep.converged else "max_iter reached"
    print(f"{status} after {rep.iterations} iterations; slacks "
          + ", ".join(f"{k}={v:.2e}" for k, v in rep.slacks.items()))
    return restored, rep


def cmd_degrade(args) -> int:
    cfg = _config_from_args(args, "denoise")
    params = cfg.noise_params()
    u = hio.read_cube(args.input)
    v, hit = add_mixed_noise(u, params, cfg.seed, cfg.box())
    hio.write_cube(args.output, v)
    if args.mask_out:
        hio.write_mask(args.mask_out, u.dims, np.flatnonzero(hit) + 1)
    eps = epsilon_mixed(params, u.dims)
    eta = eta_mixed(params, float(np.mean(v.data)), u.dims)
    print(f"epsilon={eps!r} eta={eta!r} corrupted={int(hit.sum())}")
    return EXIT_OK


def cmd_restore(args) -> int:
    cfg = _config_from_args(args, "denoise")
    v = hio.read_cube(args.observed)
    problem = build_denoise(v, cfg.regularizer_spec(), cfg.noise_params(), cfg.box(),
                            epsilon=cfg.constraints.epsilon, eta=cfg.constraints.eta,
                            path=cfg.solver.path)
    _solve_and_report(problem, cfg, args.output, {})
    return EXIT_OK


def cmd_cs(args) -> int:
    cfg = _config_from_args(args, "cs")
    u = hio.read_cube(args.input)
    mask = make_sampling_mask(u.dims, cfg.cs.rate, cfg.seed)
    obs = observe_cs(u, mask, cfg.cs.sigma, cfg.seed)
    hio.write_vector(args.observed, obs)
    hio.write_mask(args.mask, mask.dims, mask.kept)
    print(f"kept {mask.m} of {u.dims.nb} voxels")
    return EXIT_OK


def _load_mask(path) -> SamplingMask:
    dims, kept = hio.read_mask(path)
    return SamplingMask.from_kept(dims, kept)


def cmd_cs_restore(args) -> int:
    cfg = _config_from_args(args, "cs")
    mask = _load_mask(args.mask)
    obs = hio.read_vector(args.observed)
    problem = build_cs(obs, mask, cfg.regularizer_spec(), cfg.cs.sigma, cfg.box(),
                       epsilon=cfg.constraints.epsilon, path=cfg.solver.path)
    _solve_and_report(problem, cfg, args.output, {"m": mask.m, "rate": mask.rate})
    return EXIT_OK


def _ssim_cfg(args) -> SsimConfig:
    return SsimConfig(window=args.window, stride=args.stride)


def cmd_metrics(args) -> int:
    a, b = hio.read_cube(args.a), hio.read_cube(args.b)
    cfg = _ssim_cfg(args)
    bp, bs = bandwise_metrics(a, b, cfg)
    rows = [("all", float(psnr(a, b)), float(ssim(a, b, cfg)))]
    rows += [(k + 1, float(p), float(s)) for k, (p, s) in enumerate(zip(bp, bs))]
    if args.csv:
        hio.write_csv(args.csv, ["band", "psnr", "ssim"], rows)
    else:
        sys.stdout.write(hio.csv_text(["band", "psnr", "ssim"], rows))
    return EXIT_OK


def cmd_response(args) -> int:
    u = hio.read_cube(args.input)
    if (args.band is None) == (args.col is None):
        raise ValueError("give exactly one of --band (spatial) or --col (spectral)")
    if args.band is not None:
        prof, head = spatial_response(u, args.row, args.band), "col"
    else:
        prof, head = spectral_response(u, args.row, args.col), "band"
    rows = [(i + 1, float(x)) for i, x in enumerate(prof)]
    if args.csv:
        hio.write_csv(args.csv, [head, "value"], rows)
    else:
        sys.stdout.write(hio.csv_text([head, "value"], rows))
    return EXIT_OK


def cmd_export_rgb(args) -> int:
    u = hio.read_cube(args.input)
    if len(args.bands) != 3:
        raise ValueError("--bands needs exactly three indices")
    hio.export_rgb(args.output, u, tuple(args.bands))
    return EXIT_OK


def _sweep_point(task, observed, mask_path, truth_path, cfg_dict, omega):
    from .config import from_mapping

    cfg = from_mapping(cfg_dict)
    cfg.regularizer.omega = omega
    if task == "cs":
        mask = _load_mask(mask_path)
        problem = build_cs(hio.read_vector(observed), mask, cfg.regularizer_spec(),
                           cfg.cs.sigma, cfg.box(), epsilon=cfg.constraints.epsilon,
                           path=cfg.solver.path)
    else:
        problem = build_denoise(hio.read_cube(observed), cfg.regularizer_spec(),
                                cfg.noise_params(), cfg.box(), epsilon=cfg.constraints.epsilon,
                                eta=cfg.constraints.eta, path=cfg.solver.path)
    u, _, rep = run(problem, cfg.solver_config())
    truth = hio.read_cube(truth_path)
    restored = HsCube(problem.dims, u)
    return (float(omega), float(psnr(restored, truth)), float(ssim(restored, truth)),
            int(rep.iterations), bool(rep.converged))


def cmd_sweep(args) -> int:
    task = args.task
    cfg = _config_from_args(args, task)
    if task == "cs" and not args.mask:
        raise ValueError("CS sweeps need --mask")
    omegas = args.omegas if args.omegas else [round(0.01 * k, 2) for k in range(1, 21)]
    jobs = max(1, args.jobs)
    payload = (task, args.observed, args.mask, args.truth_cube, cfg.to_dict())
    if jobs == 1:
        rows = [_sweep_point(*payload, w) for w in omegas]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_sweep_point, *zip(*[payload + (w,) for w in omegas])))
    header = ["omega", "psnr", "ssim", "iterations", "converged"]
    rows = [(w, p, s, n, int(c)) for w, p, s, n, c in rows]
    if args.csv:
        hio.write_csv(args.csv, header, rows)
    else:
        sys.stdout.write(hio.csv_text(header, rows))
    return EXIT_OK


def cmd_import_raw(args) -> int:
    hio.write_cube(args.output, hio.import_raw(args.raw, args.header))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsstv", description="Hyperspectral restoration with HSSTV and ADMM")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="add Gaussian + sparse mixed noise")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mask-out", help="write the corrupted-voxel mask (HSM1)")
    _add_solver_args(p)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("restore", help="mixed-noise denoising")
    p.add_argument("observed")
    p.add_argument("output")
    _add_solver_args(p)
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("cs", help="random-sampling noisy observation")
    p.add_argument("input")
    p.add_argument("observed", help="output measurement vector (HSC1, M x 1 x 1)")
    p.add_argument("mask", help="output sampling mask (HSM1)")
    p.add_argument("--rate", type=float)
    _add_solver_args(p)
    p.set_defaults(func=cmd_cs)

    p = sub.add_parser("cs-restore", help="CS reconstruction")
    p.add_argument("observed")
    p.add_argument("mask")
    p.add_argument("output")
    p.add_argument("--rate", type=float, help=argparse.SUPPRESS)
    _add_solver_args(p)
    p.set_defaults(func=cmd_cs_restore)

    p = sub.add_parser("metrics", help="PSNR / SSIM, global and per band")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--csv")
    p.add_argument("--window", type=int, default=8)
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("response", help="spatial (--band) or spectral (--col) profile")
    p.add_argument("input")
    p.add_argument("--row", type=int, required=True)
    p.add_argument("--band", type=int)
    p.add_argument("--col", type=int)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_response)

    p = sub.add_parser("export-rgb", help="8-bit PNG from three bands")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--bands", type=_ints, default=[8, 16, 32])
    p.set_defaults(func=cmd_export_rgb)

    p = sub.add_parser("sweep", help="PSNR/SSIM versus omega")
    p.add_argument("observed")
    p.add_argument("truth_cube")
    p.add_argument("--task", choices=["denoise", "cs"], default="denoise")
    p.add_argument("--mask")
    p.add_argument("--omegas", type=_floats)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--rate", type=float, help=argparse.SUPPRESS)
    _add_solver_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("import-raw", help="convert raw + JSON sidecar to HSC1")
    p.add_argument("raw")
    p.add_argument("header")
    p.add_argument("output")
    p.set_defaults(func=cmd_import_raw)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, hio.FormatError, ShapeError, ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
