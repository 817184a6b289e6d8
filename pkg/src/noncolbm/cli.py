"""Command-line surface: path simulation, density evaluation, and the
statistical verification suites.  Every run echoes its effective
configuration and seed so results can be reproduced bitwise."""

import argparse
import concurrent.futures as cf
import hashlib
import json
import os
import sys

import numpy as np

from . import densities, paths, sde, verify
from .rng import substream

FMT = "%.17g"


def _fmt(v):
    return FMT % float(v)


def _parse_point(s):
    return np.array([float(v) for v in s.split(",")])


def _parse_points(s):
    return [_parse_point(p) for p in s.split(";") if p.strip()]


def _load_config(path):
    cfg = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            cfg[key.strip()] = val.strip()
    return cfg


def _effective(args, config, key, default, cast):
    """Precedence: explicit flag > config file > built-in default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in config:
        return cast(config[key])
    return default


def _resolve_seed(args, config):
    seed = _effective(args, config, "seed", None, int)
    if seed is None and "NONCOLBM_SEED" in os.environ:
        seed = int(os.environ["NONCOLBM_SEED"])
    if seed is None:
        seed = int.from_bytes(os.urandom(4), "big")
    return seed


def _digest(cfg):
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _echo_header(cfg):
    return "# config " + json.dumps(cfg, sort_keys=True) + "\n" \
        + "# digest " + _digest(cfg) + "\n"


def _write_csv(path, header_cfg, columns, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(_echo_header(header_cfg))
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def cmd_simulate(args, config):
    model = args.model
    n = _effective(args, config, "n", 2, int)
    T = _effective(args, config, "horizon", 1.0, float)
    steps = _effective(args, config, "steps", 256, int)
    reps = _effective(args, config, "reps", 1, int)
    threads = _effective(args, config, "threads", os.cpu_count() or 1, int)
    seed = _resolve_seed(args, config)
    out = args.out or f"{model}.csv"
    cfg = {"command": "simulate", "model": model, "n": n, "horizon": T,
           "steps": steps, "reps": reps, "seed": seed}
    print("seed", seed, "digest", _digest(cfg))

    if model in ("dyson", "noncolliding"):
        sde_cfg = sde.SDEConfig(n=n, horizon=T, dt=T / steps)
        sim = (sde.simulate_dyson if model == "dyson"
               else sde.simulate_noncolliding)
        res = sim(sde_cfg, T, seed=seed, reps=reps)
        columns = (["rep"] if reps > 1 else []) + ["time"] \
            + [f"x{i+1}" for i in range(n)]
        rows = []
        for r in range(reps):
            for k, t in enumerate(res.times):
                row = ([r] if reps > 1 else []) + [t] \
                    + list(res.states[r, k, :])
                rows.append(row)
        _write_csv(out, cfg, columns, rows)
        inc = np.diff(res.states[:, 1:, :], axis=1)
        print("summary: replicates=%d failed=%d increment_var=%.6g "
              "(expected ~ dt=%.6g)"
              % (reps, int(res.failed.sum()),
                 float(inc.var()) if inc.size else float("nan"), T / steps))
    elif model in ("gue", "goe", "xit"):
        grid = paths.TimeGrid.uniform(T, steps)

        def one(r):
            mp = paths.build_matrix_process(
                model, n, grid, substream(seed, r),
                T=T if model == "xit" else None)
            return paths.matrix_path_csv_rows(mp)

        with cf.ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
            all_rows = list(ex.map(one, range(reps)))
        columns = (["rep"] if reps > 1 else []) + ["time"]
        for i in range(n):
            for j in range(n):
                columns += [f"re{i+1}{j+1}", f"im{i+1}{j+1}"]
        rows = []
        for r, rws in enumerate(all_rows):
            for row in rws:
                rows.append(([r] if reps > 1 else []) + row)
        _write_csv(out, cfg, columns, rows)
        print("summary: replicates=%d grid_points=%d" % (reps, steps + 1))
    else:
        print("unknown model %r" % model, file=sys.stderr)
        return 2
    return 0


def cmd_density(args, config):
    name = args.name
    n = _effective(args, config, "n", 2, int)
    t = _effective(args, config, "t", 1.0, float)
    s = _effective(args, config, "s", 0.0, float)
    T = _effective(args, config, "horizon", 1.0, float)
    method = _effective(args, config, "method", "pfaffian", str)
    seed = _resolve_seed(args, config)
    xs = _parse_points(args.x) if args.x else [None]
    ys = _parse_points(args.y) if args.y else [None]
    cfg = {"command": "density", "name": name, "n": n, "t": t, "s": s,
           "horizon": T, "method": method, "seed": seed}
    print("seed", seed, "digest", _digest(cfg))

    rows = []
    columns = []
    try:
        if name == "f":
            columns = ["value"]
            for x in xs:
                for y in ys:
                    rows.append([densities.transition_density(t, x, y)])
        elif name == "survival":
            for x in xs:
                v = densities.survival_probability(
                    t, x, method=method, rng=substream(seed))
                if isinstance(v, densities.MCEstimate):
                    columns = ["value", "se"]
                    rows.append([v.mean, v.se])
                else:
                    columns = ["value"]
                    rows.append([v])
        elif name == "p":
            columns = ["value"]
            for x in xs:
                for y in ys:
                    rows.append([densities.h_transform_density(s, x, t, y)])
        elif name == "g":
            columns = ["value"]
            for x in xs:
                for y in ys:
                    rows.append([densities.finite_horizon_density(
                        T, s, x, t, y)])
        elif name in ("gue", "goe"):
            columns = ["value"]
            for x in xs:
                rows.append([densities.eigenvalue_density(name, x, t)])
        else:
            print("unknown density %r" % name, file=sys.stderr)
            return 2
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    out = args.out
    point_cols = []
    if xs[0] is not None:
        point_cols = [f"x{i+1}" for i in range(len(xs[0]))]
    full_rows = []
    idx = 0
    for x in xs:
        for y in (ys if name in ("f", "p", "g") else [None]):
            pt = list(x) if x is not None else []
            full_rows.append(pt + rows[idx])
            idx += 1
    columns = point_cols + columns
    if out:
        _write_csv(out, cfg, columns, full_rows)
    for row in full_rows:
        print(",".join(_fmt(v) for v in row))
    return 0


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (bool, np.bool_)):
        return bool(o)
    raise TypeError(type(o))


def cmd_verify(args, config):
    suite = args.suite
    n = _effective(args, config, "n", 2, int)
    T = _effective(args, config, "horizon", 1.0, float)
    reps = _effective(args, config, "reps", 10_000, int)
    samples = _effective(args, config, "samples", 100_000, int)
    seed = _resolve_seed(args, config)
    cfg = {"command": "verify", "suite": suite, "n": n, "horizon": T,
           "reps": reps, "samples": samples, "seed": seed}
    print("seed", seed, "digest", _digest(cfg))

    if suite == "hc":
        report = verify.run_suite_with_retry(verify.hc_suite, seed,
                                             samples=samples)
    elif suite == "imhof":
        report = verify.run_suite_with_retry(verify.imhof_suite, seed,
                                             n=n, horizon=T, reps=reps)
    elif suite == "marginals":
        report = verify.run_suite_with_retry(verify.marginals_suite, seed,
                                             n=n, horizon=T, reps=reps)
    elif suite == "densities":
        report = verify.run_suite_with_retry(verify.densities_suite, seed,
                                             mc_samples=samples)
    else:
        print("unknown suite %r" % suite, file=sys.stderr)
        return 2
    report["schema_version"] = 1
    report["config"] = cfg
    text = json.dumps(report, indent=2, sort_keys=True,
                      default=_json_default)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    if not report["passed"]:
        failing = [t["name"] for t in report["tests"] if not t["pass"]]
        print("FAILED: " + "; ".join(failing), file=sys.stderr)
        return 1
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="noncolbm",
        description="Noncolliding Brownian motion simulators, densities, "
                    "and statistical verification suites.")
    p.add_argument("--config", help="flat key=value configuration file")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="sample particle or matrix paths")
    ps.add_argument("--model", required=True,
                    choices=["dyson", "noncolliding", "gue", "goe", "xit"])
    ps.add_argument("--n", type=int)
    ps.add_argument("--horizon", type=float)
    ps.add_argument("--steps", type=int)
    ps.add_argument("--reps", type=int)
    ps.add_argument("--seed", type=int)
    ps.add_argument("--threads", type=int)
    ps.add_argument("--out")
    ps.set_defaults(func=cmd_simulate)

    pd = sub.add_parser("density", help="evaluate a named density")
    pd.add_argument("--name", required=True,
                    choices=["f", "survival", "p", "g", "gue", "goe"])
    pd.add_argument("--n", type=int)
    pd.add_argument("--t", type=float)
    pd.add_argument("--s", type=float)
    pd.add_argument("--horizon", type=float)
    pd.add_argument("--method", choices=["pfaffian", "quadrature",
                                         "montecarlo"])
    pd.add_argument("--x", help="point(s), e.g. '0,2' or '0,2;0,3'")
    pd.add_argument("--y", help="point(s) for transition densities")
    pd.add_argument("--seed", type=int)
    pd.add_argument("--out")
    pd.set_defaults(func=cmd_density)

    pv = sub.add_parser("verify", help="run a statistical suite")
    pv.add_argument("suite",
                    choices=["hc", "imhof", "marginals", "densities"])
    pv.add_argument("--n", type=int)
    pv.add_argument("--horizon", type=float)
    pv.add_argument("--reps", type=int)
    pv.add_argument("--samples", type=int)
    pv.add_argument("--seed", type=int)
    pv.add_argument("--threads", type=int)
    pv.add_argument("--out")
    pv.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _load_config(args.config) if args.config else {}
    return args.func(args, config)


if __name__ == "__main__":
    sys.exit(main())
