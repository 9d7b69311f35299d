"""Command-line front end: classify, simulate, sweep, fit, audit, linear-decay.

Configuration files are YAML; unknown keys are rejected and a fully resolved
copy (defaults filled in) is echoed next to the outputs so any run can be
reproduced from its artifacts.

Exit codes: 0 success, 2 usage or configuration error, 3 inconclusive result
or diagnostic failure from a downstream module.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict

import yaml

from . import criticality, tfm
from .grid import make_grid
from .problem import InitialDataSpec, ProblemSpec
from .rundriver import RunConfig, Trajectory, matsumura_fit, run
from .sweep import (
    FitResult,
    SweepSpec,
    SweepTable,
    default_eps_list,
    fit_scaling,
    run_sweep,
)


class ConfigError(ValueError):
    pass


_REQUIRED = object()


def _resolve(cfg, schema, prefix=""):
    if not isinstance(cfg, dict):
        raise ConfigError(f"config section '{prefix or '<root>'}' must be a mapping")
    unknown = sorted(set(cfg) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config key '{prefix}{unknown[0]}'")
    out = {}
    for key, default in schema.items():
        loc = f"{prefix}{key}"
        if isinstance(default, dict):
            out[key] = _resolve(cfg.get(key, {}), default, loc + ".")
        elif key in cfg:
            out[key] = cfg[key]
        elif default is _REQUIRED:
            raise ConfigError(f"missing required config key '{loc}'")
        else:
            out[key] = default
    return out


def _data_schema():
    return {k: v for k, v in asdict(InitialDataSpec()).items()}


def _run_schema():
    return {k: v for k, v in asdict(RunConfig()).items()}


SIMULATE_SCHEMA = {
    "problem": {
        "model": _REQUIRED,
        "n": _REQUIRED,
        "p": _REQUIRED,
        "q": _REQUIRED,
        "eps": _REQUIRED,
        "data": _data_schema(),
    },
    "grid": {"L": _REQUIRED, "N": _REQUIRED},
    "run": _run_schema(),
    "linear": False,
    "trajectory": True,
}

SWEEP_SCHEMA = {
    "problem": {
        "model": _REQUIRED,
        "n": _REQUIRED,
        "p": _REQUIRED,
        "q": _REQUIRED,
        "data": _data_schema(),
    },
    "sweep": {
        "eps_list": None,
        "eps_start": 1.2,
        "eps_count": 6,
        "eps_ratio": 0.85,
        "grids": _REQUIRED,
        "jobs": 1,
    },
    "run": _run_schema(),
}


def _load_config(path, schema):
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    return _resolve(raw, schema)


def _echo_resolved(resolved, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "resolved.yaml")
    with open(path, "w") as fh:
        yaml.safe_dump(resolved, fh, sort_keys=True)
    return path


def _problem_from(resolved, eps=None):
    pr = resolved["problem"]
    return ProblemSpec(
        model=pr["model"],
        n=int(pr["n"]),
        p=float(pr["p"]),
        q=float(pr["q"]),
        eps=float(pr["eps"] if eps is None else eps),
        data=InitialDataSpec(**pr["data"]),
    )


def _g17(x):
    return format(float(x), ".17g")


# -- subcommands ----------------------------------------------------------------


def _cmd_classify(args):
    try:
        report = criticality.classify(args.p, args.q, args.n, tolerance=args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"regime={report.regime}")
    print(f"alpha_max={report.alpha_max:.12g}")
    print(f"n_half={args.n / 2:.12g}")
    print(f"fujita={report.fujita:.12g}")
    if report.regime != "supercritical_global":
        law = criticality.predicted_law(args.p, args.q, args.n, tolerance=args.tol)
        print(f"form={law.form}")
        print(f"kappa={law.kappa:.12g}")
        print(f"conjectural={law.conjectural}")
        print(f"description={law.description}")
    return 0


def _cmd_simulate(args):
    try:
        resolved = _load_config(args.config, SIMULATE_SCHEMA)
        problem = _problem_from(resolved)
        grid = make_grid(problem.n, float(resolved["grid"]["L"]), int(resolved["grid"]["N"]))
        config = RunConfig(**resolved["run"])
    except (ConfigError, ValueError, TypeError, OSError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out
    _echo_resolved(resolved, out)
    traj_path = os.path.join(out, "trajectory.bin") if resolved["trajectory"] else None
    result = run(problem, grid, config, linear=resolved["linear"],
                 trajectory_path=traj_path)
    hist = result.history.as_arrays()
    cols = list(hist)
    with open(os.path.join(out, "history.csv"), "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(hist["t"])):
            fh.write(",".join(_g17(hist[c][i]) for c in cols) + "\n")
    summary = {
        "status": result.status,
        "T_num": result.T_num,
        "resolution_limited": result.resolution_limited,
        "boundary_mass_max": result.boundary_mass_max,
        "dt_final": result.dt_final,
        "trajectory": traj_path,
    }
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"status={result.status} T_num={result.T_num:g} "
          f"boundary_mass_max={result.boundary_mass_max:g}")
    return 3 if result.status.startswith("inconclusive") else 0


def _sweep_spec_from(resolved, jobs=None):
    sw = resolved["sweep"]
    if sw["eps_list"]:
        eps = tuple(float(e) for e in sw["eps_list"])
    else:
        eps = default_eps_list(float(sw["eps_start"]), int(sw["eps_count"]),
                               float(sw["eps_ratio"]))
    pr = resolved["problem"]
    return SweepSpec(
        model=pr["model"], n=int(pr["n"]), p=float(pr["p"]), q=float(pr["q"]),
        data=InitialDataSpec(**pr["data"]), eps_list=eps,
        grids=tuple((float(L), int(N)) for L, N in sw["grids"]),
        config=RunConfig(**resolved["run"]),
        jobs=int(jobs if jobs is not None else sw["jobs"]),
    )


def _cmd_sweep(args):
    try:
        resolved = _load_config(args.config, SWEEP_SCHEMA)
        spec = _sweep_spec_from(resolved, jobs=args.jobs)
    except (ConfigError, ValueError, TypeError, OSError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = os.path.dirname(os.path.abspath(args.out))
    _echo_resolved(resolved, out_dir)
    table = run_sweep(spec)
    table.save(args.out)
    print(f"{len(table)} rows -> {args.out}")
    if table.flagged:
        print("warning: boundary-mass guard tripped on some rows", file=sys.stderr)
        return 3
    return 0


def _cmd_fit(args):
    try:
        table = SweepTable.load(args.table)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    kappa = args.kappa
    if args.law == "fixed-kappa" and kappa is None:
        if not table.rows:
            print("error: empty table and no --kappa given", file=sys.stderr)
            return 2
        r = table.rows[0]
        law = criticality.predicted_law(r.p, r.q, r.n)
        kappa = law.kappa
    try:
        fit = fit_scaling(table, args.law, kappa_predicted=kappa)
    except ValueError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(asdict(fit), indent=2, sort_keys=True))
    if args.out:
        fit.save(args.out)
    return 0


def _support_radius_of(data):
    if data["shape"] == "smooth_bump":
        return float(data["radius"])
    if data["shape"] == "gaussian":
        return 3.0 * float(data["width"])
    raise ValueError(f"data shape '{data['shape']}' has no compact support scale")


def _cmd_audit(args):
    try:
        traj = Trajectory.load(args.trajectory)
        h = traj.header
        r0 = r1 = _support_radius_of(h["data"])
        cutoff = tfm.CutoffSpec.default(h["p"], h["q"], r0, r1, traj.t_covered,
                                        n_points=args.points)
        report = tfm.audit_inequalities(traj, cutoff)
    except (OSError, ValueError, KeyError) as exc:
        print(f"audit error: {exc}", file=sys.stderr)
        return 3
    out = args.out or args.trajectory + ".audit.json"
    report.save(out)
    print(f"chain_pass={report.chain_pass} mono_pass={report.mono_pass} "
          f"c_psi_uniform_pass={report.c_psi_uniform_pass} "
          f"frame_pass={report.frame_pass} -> {out}")
    return 0


def _cmd_linear_decay(args):
    n = args.n
    L = args.L if args.L is not None else (400.0 if n == 1 else 100.0)
    N = args.N if args.N is not None else (4096 if n == 1 else 256)
    problem = ProblemSpec(
        model="damped_wave", n=n, p=2.0, q=2.0, eps=1.0,
        data=InitialDataSpec(shape="gaussian", width=args.width),
    )
    grid = make_grid(n, L, N)
    # decay measurement, not a blow-up certificate: let the diffusive tail
    # wrap around instead of aborting the run
    config = RunConfig(t_max=args.t_max, dt0=args.dt0, snapshot_every=10**9,
                       boundary_guard=False)
    result = run(problem, grid, config, linear=True)
    window = (args.window_lo, args.window_hi)
    slope_l2, slope_grad = matsumura_fit(result.history, window=window)
    print(f"slope_L2={slope_l2:.4f} target={-n / 4:.4f}")
    print(f"slope_grad={slope_grad:.4f} target={-n / 4 - 0.5:.4f}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="critwave",
        description="Blow-up laboratory for weakly coupled damped-wave and "
                    "reaction-diffusion systems on a periodic torus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="criticality regime and predicted lifespan law")
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--q", type=float, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--tol", type=float, default=1e-12)
    c.set_defaults(fn=_cmd_classify)

    s = sub.add_parser("simulate", help="run one problem from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=".")
    s.set_defaults(fn=_cmd_simulate)

    w = sub.add_parser("sweep", help="run an epsilon sweep from a config file")
    w.add_argument("--config", required=True)
    w.add_argument("--out", default="sweep.csv")
    w.add_argument("--jobs", type=int,
                   default=int(os.environ.get("CRITWAVE_JOBS", "0")) or None)
    w.set_defaults(fn=_cmd_sweep)

    f = sub.add_parser("fit", help="fit lifespans in a sweep table")
    f.add_argument("--table", required=True)
    f.add_argument("--law", choices=("critical", "subcritical", "fixed-kappa"),
                   required=True)
    f.add_argument("--kappa", type=float, default=None)
    f.add_argument("--out", default=None)
    f.set_defaults(fn=_cmd_fit)

    a = sub.add_parser("audit", help="inequality audit of a stored trajectory")
    a.add_argument("--trajectory", required=True)
    a.add_argument("--out", default=None)
    a.add_argument("--points", type=int, default=16)
    a.set_defaults(fn=_cmd_audit)

    d = sub.add_parser("linear-decay", help="decay-rate fit for the linear flow")
    d.add_argument("--n", type=int, choices=(1, 2), required=True)
    d.add_argument("--L", type=float, default=None)
    d.add_argument("--N", type=int, default=None)
    d.add_argument("--width", type=float, default=2.0)
    d.add_argument("--t-max", dest="t_max", type=float, default=520.0)
    d.add_argument("--dt0", type=float, default=0.5)
    d.add_argument("--window-lo", type=float, default=50.0)
    d.add_argument("--window-hi", type=float, default=500.0)
    d.set_defaults(fn=_cmd_linear_decay)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
