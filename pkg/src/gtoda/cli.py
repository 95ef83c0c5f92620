"""Command-line driver: verification suites, flow trajectories,
stochastic simulations, constrained minimizers, and tau-function tables.

Exit codes: 0 success, 1 verification/numerical failure, 2 usage error.
"""
import argparse
import json
import sys

import numpy as np

from . import critical, flows, stochastic, tauexplicit, verify
from . import triangle as tri
from .errors import FactorizationBlowUp, GtodaError
from .triangle import Triangle


def _parse_lambda(s, n):
    if s is None:
        return np.zeros(n)
    lam = np.array([float(v) for v in s.split(",")], dtype=float)
    if lam.shape[0] != n:
        raise SystemExit(2)
    return lam


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _triangle_csv(traj):
    n = traj.n
    header = ["t"] + [f"x_{m}_{i}" for m in range(1, n + 1)
                      for i in range(1, m + 1)]
    lines = [",".join(header)]
    for j in range(traj.grid.shape[0]):
        row = [f"{traj.grid[j]:.10g}"] + [f"{v:.12g}" for v in traj.flats[j]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cmd_verify(args):
    try:
        reports = verify.run_suite(args.suite, quick=args.quick, seed=args.seed)
    except KeyError:
        print(f"unknown suite: {args.suite}", file=sys.stderr)
        return 2
    ok = all(r["pass"] for r in reports)
    for r in reports:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"[{status}] {r['check']}: max_residual={r['max_residual']:.3e} "
              f"tolerance={r['tolerance']:.3e}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(reports, fh, indent=2)
    return 0 if ok else 1


def cmd_flow(args):
    lam = _parse_lambda(args.lam, args.n)
    if args.start == "identity":
        X0 = Triangle(args.n)
    else:
        X0 = critical.critical_point(np.zeros(args.n), lam)
    cfg = flows.FlowConfig(dt=args.dt, t_end=args.t_end)
    try:
        traj = flows.integrate_triangle(X0, lam, cfg, field=args.field)
    except OverflowError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return 1
    except FactorizationBlowUp as exc:
        print(f"blow-up: {exc} at t={exc.time}", file=sys.stderr)
        return 1
    _emit(_triangle_csv(traj), args.out)
    return 0


def cmd_simulate(args):
    lam = _parse_lambda(args.lam, args.n)
    if args.n != 2:
        print("simulate supports n=2", file=sys.stderr)
        return 2
    cfg = stochastic.SdeConfig(eps=args.eps, lam=tuple(lam), dt=args.dt,
                               t_end=args.t_end, replicas=args.replicas,
                               seed=args.seed)
    if args.replicas < 100:
        samples = stochastic.pi2_stream(cfg, [cfg.t_end])[cfg.t_end]
        lines = ["x_1_1,x_2_1,x_2_2"]
        lines += [",".join(f"{v:.12g}" for v in row) for row in samples]
        _emit("\n".join(lines) + "\n", args.out)
        print("warning: too few replicas for a KS test; emitted samples only",
              file=sys.stderr)
        return 0
    tests = {"generator": stochastic.generator_test,
             "marginal": stochastic.marginal_match_test,
             "warren": stochastic.warren_match_test}
    rep = tests[args.test](cfg)
    text = json.dumps(rep, indent=2) + "\n"
    _emit(text, args.out)
    return 0 if rep["pass"] else 1


def cmd_critical(args):
    lam = _parse_lambda(args.lam, args.n)
    x = (np.array([float(v) for v in args.x.split(",")])
         if args.x else np.zeros(args.n))
    X = critical.critical_point(x, lam)
    rep = {"triangle": X.to_json(),
           "u": critical.F_lambda(X, lam),
           "grad_u": [float(v) for v in critical.grad_u(x, lam)],
           "residual": critical.critical_residual(X, lam)}
    _emit(json.dumps(rep, indent=2) + "\n", args.out)
    return 0


def cmd_tau(args):
    lam = _parse_lambda(args.lam, args.n)
    taus = [tauexplicit.tau_k(lam, k) for k in range(1, args.n + 1)]
    ts = np.arange(0.0, args.t_end + args.dt / 2, args.dt)
    header = ["t"] + [f"tau_{k}" for k in range(1, args.n + 1)]
    lines = [",".join(header)]
    for t in ts:
        lines.append(",".join([f"{t:.10g}"] + [f"{tk(t):.12g}" for tk in taus]))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _build_parser(defaults=None):
    """Build the argument parser; config-file defaults must be applied to
    every subparser, since subparser argument defaults override values
    set on the top-level parser."""
    ap = argparse.ArgumentParser(prog="gtoda")
    ap.add_argument("--config", help="key=value file applied as defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--lambda", dest="lam", default=None,
                       help="comma-separated drift values")
        p.add_argument("--t-end", dest="t_end", type=float, default=1.0)
        p.add_argument("--dt", type=float, default=1e-3)
        p.add_argument("--eps", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--replicas", type=int, default=10000)
        p.add_argument("--out", default=None)
        p.add_argument("--quick", action="store_true")

    pv = sub.add_parser("verify")
    pv.add_argument("suite", choices=list(verify.SUITES) + ["all"])
    common(pv)
    pv.set_defaults(func=cmd_verify)

    pf = sub.add_parser("flow")
    common(pf)
    pf.add_argument("--start", choices=["identity", "critical"],
                    default="identity")
    pf.add_argument("--field", choices=["rsk", "local"], default="rsk")
    pf.set_defaults(func=cmd_flow)

    ps = sub.add_parser("simulate")
    common(ps)
    ps.add_argument("--test", choices=["generator", "marginal", "warren"],
                    default="generator")
    ps.set_defaults(func=cmd_simulate)

    pc = sub.add_parser("critical")
    common(pc)
    pc.add_argument("--x", default=None, help="comma-separated bottom row")
    pc.set_defaults(func=cmd_critical)

    pt = sub.add_parser("tau")
    common(pt)
    pt.set_defaults(func=cmd_tau)
    subparsers = [pv, pf, ps, pc, pt]
    if defaults:
        for p in subparsers:
            p.set_defaults(**defaults)
    return ap


def _load_config(path):
    conf = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            k, v = line.split("=", 1)
            conf[k.strip().replace("-", "_")] = v.strip()
    return conf


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    defaults = None
    if "--config" in argv:
        path = argv[argv.index("--config") + 1]
        conf = _load_config(path)
        casts = {"n": int, "seed": int, "replicas": int,
                 "t_end": float, "dt": float, "eps": float,
                 "quick": lambda v: v.lower() in ("1", "true", "yes")}
        rename = {"lambda": "lam"}
        defaults = {rename.get(k, k): casts.get(k, str)(v)
                    for k, v in conf.items()}
    ap = _build_parser(defaults)
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except GtodaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
