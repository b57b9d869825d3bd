"""Experiment orchestration: TOML config -> seeded runs -> CSV/JSON outputs.

Commands: run, sweep, lambda-c, qi-check, invariance, growth. Seed
precedence: --seed flag > PERCOLAB_SEED env > config key > generated (and
logged). Outputs are written atomically and every file carries the master
seed and config hash in a leading comment line, so recorded (config, seed)
pairs reproduce byte-identical bodies.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import groups, phase, process, qi, spaces
from .boolean import BooleanModel, clusters, crossing_proxy
from .errors import PercolabError, PreconditionError, SchemaError
from .rng import TAG_PARTITION, TAG_TRIAL, spawn_seed, stream

COMMANDS = ("run", "sweep", "lambda-c", "qi-check", "invariance", "growth")

_SPACE_KEYS = {"kind", "L", "padding", "group", "epsilon", "ambient_L"}
_SCHEMA = {
    "space": _SPACE_KEYS,
    "space2": _SPACE_KEYS,
    "map": {"kind", "alpha", "beta", "gamma", "gamma_factor"},
    "model": {"lambda", "lambda_grid", "bracket", "R", "snapshot"},
    "run": {"command", "trials", "seed", "out", "threads", "windows",
            "n_max", "measure_samples", "mc_samples"},
}
_GROUPS = {
    "z2-standard": groups.z2_standard,
    "z2-king": groups.z2_king,
    "heisenberg": groups.heisenberg,
}


def _key_line(path_text, key):
    for i, line in enumerate(path_text.splitlines(), start=1):
        if line.split("=")[0].strip() == key or line.strip() == f"[{key}]":
            return i
    return None


def parse_config(path):
    """Load and validate a TOML experiment config (strict: unknown keys are
    errors, with the offending line referenced)."""
    try:
        raw = open(path, "rb").read()
    except OSError as e:
        raise SchemaError(f"cannot read config: {e}")
    text = raw.decode("utf-8", errors="replace")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise SchemaError(f"TOML parse error: {e}")

    errors = []
    for table, content in doc.items():
        if table not in _SCHEMA:
            errors.append(f"unknown table [{table}] "
                          f"(line {_key_line(text, table)})")
            continue
        if not isinstance(content, dict):
            errors.append(f"[{table}] must be a table")
            continue
        for key in content:
            if key not in _SCHEMA[table]:
                errors.append(f"unknown key {table}.{key} "
                              f"(line {_key_line(text, key)})")
    for table in ("space", "model", "run"):
        if table not in doc:
            errors.append(f"missing required table [{table}]")
    if errors:
        raise SchemaError("; ".join(errors))

    model = doc["model"]
    if "lambda" in model and model["lambda"] < 0:
        raise SchemaError("model.lambda must be non-negative")
    if "lambda_grid" in model and any(x < 0 for x in model["lambda_grid"]):
        raise SchemaError("model.lambda_grid entries must be non-negative")
    if "R" not in model or model["R"] <= 0:
        raise SchemaError("model.R must be positive")
    run = doc["run"]
    cmd = run.get("command")
    if cmd not in COMMANDS:
        raise SchemaError(f"run.command must be one of {COMMANDS}")
    if cmd == "invariance" and "map" not in doc:
        raise SchemaError("command requires map")
    if cmd == "invariance" and "space2" not in doc:
        raise SchemaError("invariance requires a second space [space2]")
    if "seed" in run and run["seed"] < 0:
        raise SchemaError("run.seed must be non-negative")

    cfg = {
        "space": doc["space"],
        "space2": doc.get("space2"),
        "map": doc.get("map"),
        "model": model,
        "run": {
            "command": cmd,
            "trials": int(run.get("trials", 200)),
            "seed": run.get("seed"),
            "out": run.get("out", "out"),
            "threads": int(run.get("threads", 1)),
            "windows": run.get("windows"),
            "n_max": int(run.get("n_max", 16)),
            "measure_samples": int(run.get("measure_samples", 10000)),
            "mc_samples": int(run.get("mc_samples", 200000)),
        },
        "_raw": raw,
    }
    return cfg


def build_space(spec, R, seed=0):
    kind = spec.get("kind")
    L = float(spec.get("L", 10.0))
    padding = float(spec.get("padding", R))
    if kind == "euclidean":
        return spaces.EuclideanPlane(spaces.WindowSpec(L, padding))
    if kind == "hyperbolic":
        return spaces.HyperbolicDisk(spaces.WindowSpec(L, padding))
    if kind == "cayley":
        gname = spec.get("group", "z2-standard")
        if gname not in _GROUPS:
            raise SchemaError(f"unknown group {gname!r}")
        return groups.CayleyGraph(_GROUPS[gname](),
                                  spaces.WindowSpec(L, padding))
    if kind == "net":
        amb_L = float(spec.get("ambient_L", L))
        ambient = spaces.EuclideanPlane(spaces.WindowSpec(amb_L, 0.0))
        eps = float(spec.get("epsilon", 1.0))
        net = groups.epsilon_net(ambient, eps, stream(seed, TAG_PARTITION))
        return groups.net_graph(net)
    raise SchemaError(f"unknown space kind {kind!r}")


def build_map(cfg, dom, cod):
    spec = cfg["map"]
    kind = spec.get("kind")
    if kind == "identity":
        F = qi.identity_map(dom)
    elif kind == "z2-generator-change":
        F = qi.z2_generator_change(dom, cod)
    elif kind == "rounding-r2-to-z2":
        F = qi.rounding_map(dom, cod)
    elif kind == "net-discretization":
        F = qi.net_discretization_map(dom, cod)
    else:
        raise SchemaError(f"unknown map kind {kind!r}")
    for key, attr in (("alpha", "alpha"), ("beta", "beta"),
                      ("gamma", "gamma_qi")):
        if key in spec:
            setattr(F, attr, float(spec[key]))
    return F


def resolve_seed(args, cfg):
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("PERCOLAB_SEED")
    if env:
        return int(env)
    if cfg["run"]["seed"] is not None:
        return int(cfg["run"]["seed"])
    seed = spawn_seed()
    print(f"# generated seed: {seed}", file=sys.stderr)
    return seed


def _atomic_write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               prefix=".tmp_")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(cfg, seed):
    digest = hashlib.sha256(cfg["_raw"]).hexdigest()[:16]
    return f"seed={seed} config_sha256={digest}"


def _windows(cfg, default):
    w = cfg["run"]["windows"]
    if w is None:
        return default
    return [float(x) for x in w]


def cmd_run(cfg, seed, out):
    model = cfg["model"]
    lam = float(model["lambda"])
    R = float(model["R"])
    space = build_space(cfg["space"], R, seed)
    trials = cfg["run"]["trials"]
    row = phase.percolation_probability(space, lam, R, trials, seed,
                                        threads=cfg["run"]["threads"])
    curve = phase.PhaseCurve([row], seed)
    _atomic_write(os.path.join(out, "run.csv"),
                  curve.to_csv(_header(cfg, seed)))

    cfg_pt = process.sample_poisson(
        space, spaces.CellPartition.trivial_for(space),
        process.homogeneous(lam), seed=seed)
    bm = BooleanModel(space, cfg_pt, R)
    rep = clusters(bm)
    crossing_proxy(bm, rep)
    include_pts = bool(model.get("snapshot", False)) and not space.is_graph
    doc = rep.to_json(include_labels=include_pts,
                      points=cfg_pt.points if include_pts else None)
    doc = json.loads(doc)
    doc["header"] = _header(cfg, seed)
    doc["lambda"] = lam
    doc["R"] = R
    doc["L"] = space.window.radius
    _atomic_write(os.path.join(out, "clusters.json"),
                  json.dumps(doc, sort_keys=True, indent=2))
    return {"csv": "run.csv", "json": "clusters.json",
            "p_hat": row.p_hat}


def cmd_sweep(cfg, seed, out):
    model = cfg["model"]
    R = float(model["R"])
    lambdas = model.get("lambda_grid") or [model["lambda"]]
    trials = cfg["run"]["trials"]
    rows = []
    for L in _windows(cfg, [float(cfg["space"].get("L", 10.0))]):
        space = build_space({**cfg["space"], "L": L}, R, seed)
        curve = phase.sweep(space, lambdas, R, trials, seed)
        rows.extend(curve.rows)
    curve = phase.PhaseCurve(rows, seed)
    _atomic_write(os.path.join(out, "sweep.csv"),
                  curve.to_csv(_header(cfg, seed)))
    return {"csv": "sweep.csv", "rows": len(rows)}


def cmd_lambda_c(cfg, seed, out):
    model = cfg["model"]
    R = float(model["R"])
    bracket = model.get("bracket")
    if not bracket or len(bracket) != 2:
        raise SchemaError("lambda-c requires model.bracket = [lo, hi]")
    trials = cfg["run"]["trials"]
    results = {}
    rows = []
    for L in _windows(cfg, [float(cfg["space"].get("L", 10.0))]):
        space = build_space({**cfg["space"], "L": L}, R, seed)
        res = phase.estimate_lambda_c(space, R, bracket, trials=trials,
                                      seed=seed,
                                      threads=cfg["run"]["threads"])
        results[str(L)] = res.to_dict()
        rows.extend(res.rows)
    doc = {"header": _header(cfg, seed), "R": R, "results": results}
    _atomic_write(os.path.join(out, "lambda_c.json"),
                  json.dumps(doc, sort_keys=True, indent=2))
    curve = phase.PhaseCurve(rows, seed)
    _atomic_write(os.path.join(out, "lambda_c_rows.csv"),
                  curve.to_csv(_header(cfg, seed)))
    return {"json": "lambda_c.json", "results": {
        k: v["lambda_c_hat"] for k, v in results.items()}}


def cmd_qi_check(cfg, seed, out):
    if cfg["map"] is None or cfg["space2"] is None:
        raise SchemaError("command requires map")
    R = float(cfg["model"]["R"])
    dom = build_space(cfg["space"], R, seed)
    cod = build_space(cfg["space2"], R, seed)
    F = build_map(cfg, dom, cod)
    status = qi.qi_check(F, rng=stream(seed, TAG_TRIAL))
    doc = {
        "header": _header(cfg, seed),
        "map": F.name,
        "alpha": F.alpha, "beta": F.beta, "gamma": F.gamma_qi,
        "status": status.state,
        "detail": status.detail,
    }
    _atomic_write(os.path.join(out, "qi_check.json"),
                  json.dumps(doc, sort_keys=True, indent=2))
    return {"json": "qi_check.json", "status": status.state}


def cmd_invariance(cfg, seed, out):
    model = cfg["model"]
    lam = float(model["lambda"])
    R = float(model["R"])
    dom = build_space(cfg["space"], R, seed)
    cod = build_space(cfg["space2"], R, seed)
    F = build_map(cfg, dom, cod)
    # the supercritical leg needs the codomain window to hold alpha R + beta
    # + gamma; rebuild with that padding unless the config pinned one
    if "padding" not in cfg["space2"]:
        need = qi.radius_forward(R, F.alpha, F.beta) + F.gamma_qi
        cod = build_space({**cfg["space2"], "padding": need}, R, seed)
        F = build_map(cfg, dom, cod)
    wins = _windows(cfg, [16.0, 32.0])
    report = phase.invariance_experiment(
        F, lam, R, seed=seed, trials=cfg["run"]["trials"],
        domain_windows=tuple(wins[:2]), codomain_windows=tuple(wins[:2]),
        measure_samples=cfg["run"]["measure_samples"],
        mc_samples=cfg["run"]["mc_samples"], threads=cfg["run"]["threads"],
        gamma_factor=float(cfg["map"].get("gamma_factor", 1.0)))
    mu_csv = report.pop("mu_star_csv")
    _atomic_write(os.path.join(out, "mu_star.csv"),
                  f"# {_header(cfg, seed)}\n" + mu_csv)
    report["header"] = _header(cfg, seed)
    report["mu_star_csv"] = "mu_star.csv"
    _atomic_write(os.path.join(out, "invariance.json"),
                  json.dumps(report, sort_keys=True, indent=2))
    rows = [phase.CurveRow(**r) for side in
            ("domain", "codomain_low", "codomain_high")
            for r in report[side]["rows"]]
    curve = phase.PhaseCurve(rows, seed)
    _atomic_write(os.path.join(out, "invariance_rows.csv"),
                  curve.to_csv(_header(cfg, seed)))
    return {"json": "invariance.json", "agreement": report["agreement"]}


def cmd_growth(cfg, seed, out):
    spec = cfg["space"]
    if spec.get("kind") != "cayley":
        raise SchemaError("growth requires a cayley space")
    gname = spec.get("group", "z2-standard")
    if gname not in _GROUPS:
        raise SchemaError(f"unknown group {gname!r}")
    est = groups.growth_degree(_GROUPS[gname](), cfg["run"]["n_max"])
    lines = [f"# {_header(cfg, seed)}", "n,size"]
    lines += [f"{n},{s}" for n, s in est.ball_sizes]
    _atomic_write(os.path.join(out, "growth.csv"), "\n".join(lines) + "\n")
    doc = {"header": _header(cfg, seed), "group": gname,
           "fitted_degree": est.fitted_degree,
           "ball_sizes": est.ball_sizes}
    _atomic_write(os.path.join(out, "growth.json"),
                  json.dumps(doc, sort_keys=True, indent=2))
    return {"json": "growth.json", "fitted_degree": est.fitted_degree}


_DISPATCH = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "lambda-c": cmd_lambda_c,
    "qi-check": cmd_qi_check,
    "invariance": cmd_invariance,
    "growth": cmd_growth,
}


def run_config(cfg, seed, out_dir=None, override_trials=None,
               override_threads=None, override_window=None):
    run = cfg["run"]
    if override_trials is not None:
        run["trials"] = int(override_trials)
    if override_threads is not None:
        run["threads"] = int(override_threads)
    if override_window is not None:
        cfg["space"]["L"] = float(override_window)
    out = out_dir if out_dir is not None else run["out"]
    t0 = time.perf_counter()
    result = _DISPATCH[run["command"]](cfg, seed, out)
    result["command"] = run["command"]
    result["seed"] = seed
    result["out"] = out
    result["wall_clock_s"] = round(time.perf_counter() - t0, 3)
    from . import __version__
    result["version"] = __version__
    return result


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="percolab",
        description="Boolean percolation experiments on metric-measure "
                    "spaces")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("-c", "--config", required=True)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=None)
    ap.add_argument("--window", type=float, default=None)
    args = ap.parse_args(argv)

    try:
        cfg = parse_config(args.config)
        if cfg["run"]["command"] != args.command:
            cfg["run"]["command"] = args.command
            if args.command == "invariance" and cfg["map"] is None:
                raise SchemaError("command requires map")
        seed = resolve_seed(args, cfg)
        result = run_config(cfg, seed, args.out, args.trials, args.threads,
                            args.window)
    except SchemaError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except PreconditionError as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return 2
    except PercolabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(json.dumps(result, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
