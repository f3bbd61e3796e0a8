"""Command line front end: ``robustcs <subcommand> ...``.

Exit status is 0 on success, 1 on invalid input and 2 when a solver
diverges.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench
from .signals import relative_error
from .solvers import DivergenceError, descent_constants
from .wavelets import phantom_shepp_logan, write_pgm

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED = 0, 1, 2


def _spec(args, **defaults) -> bench.ExperimentSpec:
    text = ""
    if getattr(args, "config", None):
        with open(args.config) as fh:
            text = fh.read()
    for kv in getattr(args, "set", None) or []:
        text += f"\n{kv}"
    spec = bench.parse_config(text, source=getattr(args, "config", None) or "<args>")
    kw = dict(defaults)
    if getattr(args, "seed", None) is not None:
        kw["master_seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        kw["trials"] = args.trials
    if getattr(args, "threads", None) is not None:
        kw["threads"] = args.threads
    if getattr(args, "out", None) is not None:
        kw["out"] = args.out
    if getattr(args, "allow_nonconvergent", False):
        kw["solver"] = spec.solver.with_(allow_nonconvergent=True)
    try:
        return spec.with_(**kw)
    except ValueError as exc:
        raise bench.ConfigError(str(exc)) from None


def _cmd_sweep(args) -> int:
    spec = _spec(args, kind="sparsity-sweep")
    rows = bench.run_sparsity_sweep(spec)
    text = bench.format_sweep_csv(rows)
    if spec.out:
        with open(spec.out, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(rows)} rows to {spec.out}")
    else:
        sys.stdout.write(text)
    failed = sum(r.failures for r in rows)
    if failed:
        print(f"warning: {failed} method-trial runs failed (see log)", file=sys.stderr)
    return EXIT_OK


def _cmd_image(args) -> int:
    spec = _spec(args, kind="image-recovery")
    report = bench.run_image_recovery(spec)
    status = EXIT_OK
    print(f"{report['image']} {report['side']}x{report['side']}, m={report['m']}, noise={report['noise']}")
    for e in report["methods"]:
        if "error" in e:
            print(f"  {e['method']:<11} {e['params']:<22} FAILED: {e['error']}")
            status = EXIT_DIVERGED
            continue
        print(f"  {e['method']:<11} {e['params']:<22} PSNR {e['psnr_db']:7.2f} dB  mu={e['mu_selected']:g}"
              f"  iters={e['iterations']}  init={e['init']}")
    if spec.out:
        print(f"report and reconstructions written to {spec.out}")
    return status


def _cmd_recover(args) -> int:
    spec = _spec(args, kind="single-recover")
    A, y, x_true = bench.load_instance(args.instance)
    method = bench.parse_methods(args.method)[0] if args.method else spec.methods[0]
    cfg = spec.solver if args.mu is None else spec.solver.with_(mu=args.mu)
    res = bench.run_single(method, A, y, cfg)
    print(f"method={method.name} params={method.params()} mu={cfg.mu:g} iterations={res.iterations} "
          f"converged={res.converged}")
    if x_true is not None:
        print(f"rel_err={relative_error(res.x_hat, x_true):.12e}")
    if args.out:
        np.save(args.out, res.x_hat)
    return EXIT_OK


def _cmd_gen_phantom(args) -> int:
    write_pgm(phantom_shepp_logan(args.side), args.out)
    print(f"wrote {args.side}x{args.side} phantom to {args.out}")
    return EXIT_OK


def _cmd_prox_check(args) -> int:
    rows = bench.prox_check(points=args.points, seed=args.seed or 0)
    print(f"{'penalty':<24}{'points':>7}{'skipped':>9}{'max |err|':>12}  result")
    for r in rows:
        print(f"{r.penalty:<24}{r.points:>7}{r.skipped:>9}{r.max_abs_err:>12.2e}  {'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_INVALID


def _cmd_check_config(args) -> int:
    spec = _spec(args, kind="config-check")
    cfg = spec.solver
    lam = cfg.lambda_max if cfg.lambda_max is not None else 1.0
    dc = descent_constants(cfg, lam)
    for name in ("c0", "c1", "c2", "c3"):
        print(f"{name} = {getattr(dc, name):.6g}")
    print(f"rho_min = {dc.rho_min:g}")
    print(f"rho_target = {dc.rho:g}")
    print(f"tau1 = {dc.tau1:g} (tau1 * lambda_max = {dc.tau1 * lam:g}, {'< 1' if dc.tau1 * lam < 1 else 'NOT < 1'})")
    print(f"rho >= rho_min: {'yes' if dc.rho >= dc.rho_min else 'no'}")
    if dc.sufficient:
        print("sufficient condition met")
    else:
        print("sufficient condition NOT met (experimental default)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robustcs", description="Robust sparse recovery experiments.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("config", nargs="?", help="flat key = value config file")
            p.add_argument("--set", action="append", metavar="KEY=VALUE", help="extra config line")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--trials", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--allow-nonconvergent", action="store_true",
                       help="permit epsilon = 0 with nonconvex penalties")

    p = sub.add_parser("sweep", help="success rate versus sparsity (CSV)")
    common(p)
    p.set_defaults(fn=_cmd_sweep)
    p = sub.add_parser("image", help="Haar-domain image recovery (PGM + JSON)")
    common(p)
    p.set_defaults(fn=_cmd_image)
    p = sub.add_parser("recover", help="solve a stored .npz instance")
    p.add_argument("instance")
    common(p, config=False)
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--method", help="e.g. lqla(q=0.5); default: first configured method")
    p.add_argument("--mu", type=float)
    p.set_defaults(fn=_cmd_recover)
    p = sub.add_parser("gen-phantom", help="write the Shepp-Logan phantom as PGM")
    p.add_argument("--side", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_phantom)
    p = sub.add_parser("prox-check", help="closed-form prox versus brute force")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=_cmd_prox_check)
    p = sub.add_parser("check-config", help="print descent constants for a config")
    common(p)
    p.set_defaults(fn=_cmd_check_config)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (DivergenceError, bench.OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
