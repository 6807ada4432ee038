"""Command line entry point.

Subcommands cover the full pipeline: dataset generation, model
training, tracking runs, safety-index synthesis, batch safety
evaluation, a scalability bench and SVG plotting. Every command is
driven by one JSON config with strict keys; a resolved copy of the
config is written next to the outputs so any artifact can be
regenerated from the files beside it.

Exit codes: 0 on success, 1 for config/user errors, 2 for internal or
solver failures. Errors are emitted as JSON on stderr.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import safety, simulate, synthesis
from .bounds import Box
from .encoder import EncodingError, SolverFailure, x_dot_max
from .milp import MilpOptions
from .mlp import (
    Dataset,
    ModelFormatError,
    init_network,
    load_model,
    mse,
    save_model,
    train,
    evaluate,
)
from .plots import heatmap_svg, phase_svg, trajectory_svg
from .simulate import (
    DEFAULT_DT,
    MilpController,
    ShootingController,
    aggregate_metrics,
    analytic_dynamics,
    gen_dataset,
    gen_reference,
    hand_spec,
    make_collision_task,
    make_following_task,
    phi0_spec,
    rollout,
)
from .synthesis import (
    GridChecker,
    ExactChecker,
    SearchSpace,
    count_infeasible,
    default_sampling_region,
    sample_states,
    synthesize_index,
)
from .util import named_rng


class ConfigError(ValueError):
    """User-facing configuration problem (exit code 1)."""


DEFAULT_CONFIG = {
    "seed": 0,
    "output_dir": "out",
    "model": {
        "hidden": [16],
        "epochs": 1000,
        "batch_size": 256,
        "learning_rate": 1e-3,
    },
    "dataset": {
        "size": 8000,
        "state_box": [[-6.0, 6.0], [-6.0, 6.0], [-0.5, 2.5],
                      [-2.0 * math.pi, 2.0 * math.pi]],
        "control_box": [[-4.0, 4.0], [-2.0, 2.0]],
    },
    "scenario": {
        "task": "tracking",
        "dt": DEFAULT_DT,
        "horizon": 200,
        "n_waypoints": 100,
        "u_box": [[-4.0, 4.0], [-2.0, 2.0]],
        "v_limits": [0.0, 2.0],
        "execution": "nndm",
        "x0": [0.0, 0.0, 1.0, 0.0],
    },
    "index": {
        "d_min": 1.0,
        "d_max": 3.0,
        "obstacles": [[0.0, 0.0]],
        "gamma": 0.01,
        "use": "none",
        "learned_path": None,
        "hand": None,
    },
    "synthesis": {
        "samples": 4000,
        "population": 12,
        "generations": 30,
        "resolution": 41,
        "region_half_width": 5.0,
        "v_max": 2.0,
        "checker": "grid",
        "margin_c": 1.0,
        "margin_node_limit": 100,
        "heatmap_bins": 20,
    },
    "solver": {
        "gap_abs": 1e-9,
        "gap_rel": 1e-9,
        "node_limit": None,
        "time_limit": None,
    },
}


def _merge(user, defaults, path="config"):
    """Defaults overlaid with user values; unknown keys are rejected."""
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: expected an object")
    out = {}
    for key, default in defaults.items():
        if key not in user:
            out[key] = copy.deepcopy(default)
        elif isinstance(default, dict):
            out[key] = _merge(user[key], default, f"{path}.{key}")
        else:
            out[key] = user[key]
    unknown = set(user) - set(defaults)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return out


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            user = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return _merge(user, DEFAULT_CONFIG)


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _echo_config(cfg, out_dir: Path, command: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / f"{command}_config.json", cfg)


def _box(pairs) -> Box:
    arr = np.asarray(pairs, dtype=float)
    return Box(arr[:, 0], arr[:, 1])


def _scenario_boxes(cfg):
    sc = cfg["scenario"]
    return _box(sc["u_box"]), float(sc["dt"])


def _solver_options(cfg) -> MilpOptions:
    s = cfg["solver"]
    return MilpOptions(
        gap_abs=float(s["gap_abs"]),
        gap_rel=float(s["gap_rel"]),
        node_limit=s["node_limit"],
        time_limit=s["time_limit"],
    )


def _load_learned_spec(cfg, path):
    idx = cfg["index"]
    try:
        with open(path) as fh:
            doc = json.load(fh)
        params = doc["params"]
        kind = doc["kind"]
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read synthesis result {path}: {exc}") from exc
    return safety.SafetyIndexSpec(
        kind=kind,
        alpha1=float(params["alpha1"]),
        alpha2=float(params["alpha2"]),
        beta=float(params["beta"]),
        gamma=float(params["gamma"]),
        d_min=float(idx["d_min"]),
        d_max=float(idx["d_max"]) if kind == safety.FOLLOWING else None,
        obstacles=tuple(map(tuple, idx["obstacles"])) if kind == safety.COLLISION else (),
        target=(0.0, 0.0) if kind == safety.FOLLOWING else None,
    )


def _index_for(cfg, choice, kind):
    idx = cfg["index"]
    common = dict(d_min=float(idx["d_min"]))
    if kind == safety.FOLLOWING:
        common.update(d_max=float(idx["d_max"]), target=(0.0, 0.0))
    else:
        common.update(obstacles=tuple(map(tuple, idx["obstacles"])))
    if choice == "phi0":
        return phi0_spec(kind, gamma=float(idx["gamma"]), **common)
    if choice == "hand":
        hand = idx.get("hand")
        if hand:
            return safety.SafetyIndexSpec(
                kind=kind, alpha1=float(hand["alpha1"]),
                alpha2=float(hand["alpha2"]), beta=float(hand["beta"]),
                gamma=float(hand["gamma"]), **common)
        return hand_spec(kind, **common)
    if choice == "learned":
        path = idx.get("learned_path")
        if not path:
            raise ConfigError("index.learned_path is required for --index learned")
        return _load_learned_spec(cfg, path)
    if choice == "none":
        return None
    raise ConfigError(f"unknown index choice {choice!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_gen_data(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    rng = named_rng(cfg["seed"], "gen-data", "samples")
    ds = gen_dataset(
        int(cfg["dataset"]["size"]),
        _box(cfg["dataset"]["state_box"]),
        _box(cfg["dataset"]["control_box"]),
        rng,
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    ds.to_csv(out)
    _echo_config(cfg, out.parent, "gen-data")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    ds = Dataset.from_csv(args.data)
    m = cfg["model"]
    init_seed = int(named_rng(cfg["seed"], "train", "init").integers(2**31))
    net = init_network(ds.state_dim, ds.control_dim, list(m["hidden"]), seed=init_seed)
    losses = []
    net = train(
        net,
        ds,
        epochs=int(m["epochs"]),
        batch_size=int(m["batch_size"]),
        learning_rate=float(m["learning_rate"]),
        seed=int(named_rng(cfg["seed"], "train", "shuffle").integers(2**31)),
        loss_callback=lambda epoch, loss: losses.append((epoch, loss)),
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(net, out)
    with open(out.with_name(out.stem + "_loss.csv"), "w") as fh:
        fh.write("epoch,mse\n")
        for epoch, loss in losses:
            fh.write(f"{epoch},{loss!r}\n")
    _echo_config(cfg, out.parent, "train")
    return 0


def _parse_method(text):
    if text == "mind":
        return ("mind", None)
    if text.startswith("shooting:"):
        n = int(text.split(":", 1)[1])
        if n < 1:
            raise ConfigError("shooting sample count must be positive")
        return ("shooting", n)
    raise ConfigError(f"unknown method {text!r}; use mind or shooting:N")


def cmd_track(args) -> int:
    cfg = load_config(args.config)
    net = load_model(args.model)
    method, n_samples = _parse_method(args.method)
    u_box, dt = _scenario_boxes(cfg)
    sc = cfg["scenario"]
    out_dir = Path(args.out_dir or cfg["output_dir"])

    if method == "mind":
        controller = MilpController(net, u_box, dt, options=_solver_options(cfg))
    else:
        controller = ShootingController(
            net, u_box, dt, n_samples, named_rng(cfg["seed"], "track", "shooting")
        )

    task = sc["task"]
    if task == "tracking":
        x0 = np.asarray(sc["x0"], dtype=float)
        reference = gen_reference(
            lambda x, u: evaluate(net, x, u), x0, int(sc["n_waypoints"]), dt,
            u_box, named_rng(cfg["seed"], "track", "reference"),
            v_limits=tuple(sc["v_limits"]),
        )
        config = simulate.ScenarioConfig(
            task=task, net=net, reference=reference, dt=dt, u_box=u_box,
            execution=sc["execution"],
        )
    elif task == safety.COLLISION:
        index = _index_for(cfg, cfg["index"]["use"], safety.COLLISION)
        config = make_collision_task(
            net, index, named_rng(cfg["seed"], "track", "task"), dt=dt,
            horizon=int(sc["horizon"]), u_box=u_box, execution=sc["execution"])
    elif task == safety.FOLLOWING:
        index = _index_for(cfg, cfg["index"]["use"], safety.FOLLOWING)
        config = make_following_task(
            net, index, named_rng(cfg["seed"], "track", "task"),
            d_min=float(cfg["index"]["d_min"]), d_max=float(cfg["index"]["d_max"]),
            dt=dt, horizon=int(sc["horizon"]), u_box=u_box,
            execution=sc["execution"])
    else:
        raise ConfigError(f"unknown task {task!r}")

    traj, metrics = rollout(config, controller)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out_dir / "trajectory.csv")
    _write_json(out_dir / "metrics.json", metrics.to_doc())
    _echo_config(cfg, out_dir, "track")
    return 0


def cmd_synth_index(args) -> int:
    cfg = load_config(args.config)
    net = load_model(args.model)
    u_box, dt = _scenario_boxes(cfg)
    sy = cfg["synthesis"]
    idx = cfg["index"]
    kind = cfg["scenario"]["task"]
    if kind == "tracking":
        kind = safety.COLLISION
    out_dir = Path(args.out_dir or cfg["output_dir"])

    region, exclude = default_sampling_region(
        float(idx["d_min"]), v_max=float(sy["v_max"]),
        half_width=float(sy["region_half_width"]),
    )
    states = sample_states(
        region, int(sy["samples"]), named_rng(cfg["seed"], "synth-index", "states"),
        exclude=exclude,
    )
    if sy["checker"] == "grid":
        checker = GridChecker(net, u_box, dt, resolution=int(sy["resolution"]))
    elif sy["checker"] == "exact":
        checker = ExactChecker(net, u_box, dt)
    else:
        raise ConfigError(f"unknown checker {sy['checker']!r}")

    rate_bound = x_dot_max(net, region, u_box,
                           node_limit=int(sy["margin_node_limit"]))
    beta_min = safety.safety_margin(float(sy["margin_c"]), rate_bound, dt)
    if kind == safety.COLLISION:
        space = SearchSpace.collision_default(beta_min=beta_min)
        geom = dict(obstacles=tuple(map(tuple, idx["obstacles"])))
    else:
        space = SearchSpace.following_default(beta_min=beta_min)
        geom = dict(d_max=float(idx["d_max"]), target=(0.0, 0.0))

    result = synthesize_index(
        kind, checker, states, space, float(idx["d_min"]), beta_min=beta_min,
        population=int(sy["population"]), generations=int(sy["generations"]),
        seed=int(named_rng(cfg["seed"], "synth-index", "cmaes").integers(2**31)),
        **geom,
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    doc = result.to_doc()
    doc["beta_min"] = beta_min
    doc["infeasible_count"] = result.infeasible_count
    doc["sampled_states"] = int(len(states))
    _write_json(out_dir / "synthesis.json", doc)
    with open(out_dir / "fitness_history.csv", "w") as fh:
        fh.write("generation,best,mean,best_ever\n")
        for row in result.history:
            fh.write(f"{row['generation']},{row['best']!r},{row['mean']!r},"
                     f"{row['best_ever']!r}\n")
    report = count_infeasible(states, result.spec, checker)
    counts, totals, xe, ye = report.heatmap(bins=int(sy["heatmap_bins"]))
    _write_heatmap_csv(out_dir / "heatmap.csv", counts, totals, xe, ye)
    heatmap_svg(counts, totals, xe, ye).save(out_dir / "heatmap.svg")
    _echo_config(cfg, out_dir, "synth-index")
    return 0


def _write_heatmap_csv(path, counts, totals, xe, ye) -> None:
    with open(path, "w") as fh:
        fh.write("i,j,x_lo,x_hi,y_lo,y_hi,samples,infeasible\n")
        for i in range(counts.shape[0]):
            for j in range(counts.shape[1]):
                fh.write(
                    f"{i},{j},{xe[i]!r},{xe[i + 1]!r},{ye[j]!r},{ye[j + 1]!r},"
                    f"{int(totals[i, j])},{int(counts[i, j])}\n"
                )


def _read_heatmap_csv(path):
    rows = []
    with open(path) as fh:
        header = fh.readline()
        for line in fh:
            parts = line.strip().split(",")
            if parts and parts[0]:
                rows.append(parts)
    ni = max(int(r[0]) for r in rows) + 1
    nj = max(int(r[1]) for r in rows) + 1
    counts = np.zeros((ni, nj))
    totals = np.zeros((ni, nj))
    xe = np.zeros(ni + 1)
    ye = np.zeros(nj + 1)
    for r in rows:
        i, j = int(r[0]), int(r[1])
        xe[i], xe[i + 1] = float(r[2]), float(r[3])
        ye[j], ye[j + 1] = float(r[4]), float(r[5])
        totals[i, j] = float(r[6])
        counts[i, j] = float(r[7])
    return counts, totals, xe, ye


def cmd_eval_safety(args) -> int:
    cfg = load_config(args.config)
    net = load_model(args.model)
    u_box, dt = _scenario_boxes(cfg)
    sc = cfg["scenario"]
    kind = sc["task"]
    if kind not in (safety.COLLISION, safety.FOLLOWING):
        raise ConfigError("eval-safety needs scenario.task set to "
                          f"{safety.COLLISION} or {safety.FOLLOWING}")
    index = _index_for(cfg, args.index, kind)
    if index is None:
        raise ConfigError("--index none is not valid for eval-safety")
    out_dir = Path(args.out_dir or cfg["output_dir"])
    controller = MilpController(net, u_box, dt, options=_solver_options(cfg))

    batch = []
    for trial in range(args.trials):
        rng = named_rng(cfg["seed"], "eval-safety", f"trial{trial}")
        if kind == safety.COLLISION:
            task = make_collision_task(net, index, rng, dt=dt,
                                       horizon=int(sc["horizon"]), u_box=u_box,
                                       execution=args.exec)
        else:
            task = make_following_task(
                net, index, rng, d_min=float(cfg["index"]["d_min"]),
                d_max=float(cfg["index"]["d_max"]), dt=dt,
                horizon=int(sc["horizon"]), u_box=u_box, execution=args.exec)
        _, metrics = rollout(task, controller)
        batch.append(metrics)

    doc = aggregate_metrics(batch)
    doc["index"] = args.index
    doc["execution"] = args.exec
    doc["task"] = kind
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / f"safety_{args.index}_{args.exec}.json", doc)
    _echo_config(cfg, out_dir, "eval-safety")
    return 0


def cmd_bench_scale(args) -> int:
    cfg = load_config(args.config) if args.config else _merge({}, DEFAULT_CONFIG)
    u_box, dt = _scenario_boxes(cfg)
    out = Path(args.out)
    rng_data = named_rng(cfg["seed"], "bench-scale", "data")
    ds = gen_dataset(int(cfg["dataset"]["size"]),
                     _box(cfg["dataset"]["state_box"]),
                     _box(cfg["dataset"]["control_box"]), rng_data)
    holdout = gen_dataset(2000, _box(cfg["dataset"]["state_box"]),
                          _box(cfg["dataset"]["control_box"]),
                          named_rng(cfg["seed"], "bench-scale", "holdout"))
    rows = []
    for layers in args.layers:
        for hidden in args.hidden:
            net = init_network(
                ds.state_dim, ds.control_dim, [hidden] * (layers - 1),
                seed=int(named_rng(cfg["seed"], "bench-scale",
                                   f"init{layers}x{hidden}").integers(2**31)),
            )
            net = train(net, ds, epochs=int(cfg["model"]["epochs"]),
                        batch_size=int(cfg["model"]["batch_size"]),
                        learning_rate=float(cfg["model"]["learning_rate"]),
                        seed=int(named_rng(cfg["seed"], "bench-scale",
                                           f"train{layers}x{hidden}").integers(2**31)))
            pred = evaluate(net, holdout.states, holdout.controls)
            pred_err = float(np.linalg.norm(pred - holdout.derivs, axis=1).mean())

            x0 = np.array(cfg["scenario"]["x0"], dtype=float)
            reference = gen_reference(
                lambda x, u: evaluate(net, x, u), x0, args.steps, dt, u_box,
                named_rng(cfg["seed"], "bench-scale", f"ref{layers}x{hidden}"),
                v_limits=tuple(cfg["scenario"]["v_limits"]))
            controller = MilpController(net, u_box, dt)
            config = simulate.ScenarioConfig(
                task="tracking", net=net, reference=reference, dt=dt, u_box=u_box)
            traj, metrics = rollout(config, controller)
            unstable = _mean_unstable(net, traj.states[:-1], u_box)
            rows.append((layers, hidden, unstable, metrics.mean_solve_ms,
                         metrics.max_solve_ms, pred_err, metrics.mean_l1))
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        fh.write("layers,hidden,unstable_mean,solve_ms_mean,solve_ms_max,"
                 "prediction_error,tracking_l1\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")
    _echo_config(cfg, out.parent, "bench-scale")
    return 0


def _mean_unstable(net, states, u_box) -> float:
    from .bounds import Status, activation_status, propagate

    totals = []
    for x in states:
        bt = propagate(net, Box(x, x).concat(u_box))
        totals.append(sum(int((st == Status.UNSTABLE).sum())
                          for st in activation_status(bt)))
    return float(np.mean(totals))


def _read_traj_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    col = {name: k for k, name in enumerate(header)}
    states = np.array([[float(r[col[c]]) for c in ("px", "py", "v", "theta")]
                       for r in rows])
    reference = np.array(
        [[float(r[col[c]]) for c in ("ref_px", "ref_py", "ref_v", "ref_theta")]
         for r in rows])
    return states, reference


def cmd_plot(args) -> int:
    chosen = [k for k in ("traj", "heatmap", "phase") if getattr(args, k)]
    if len(chosen) != 1:
        raise ConfigError("pick exactly one of --traj, --heatmap, --phase")
    mode = chosen[0]
    cfg = load_config(args.config) if args.config else _merge({}, DEFAULT_CONFIG)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if mode == "heatmap":
        counts, totals, xe, ye = _read_heatmap_csv(args.heatmap)
        heatmap_svg(counts, totals, xe, ye).save(out)
        return 0
    path = args.traj or args.phase
    states, reference = _read_traj_csv(path)
    idx = cfg["index"]
    if mode == "traj":
        trajectory_svg(states, reference,
                       obstacles=tuple(map(tuple, idx["obstacles"])),
                       d_min=float(idx["d_min"])).save(out)
        return 0
    kind = cfg["scenario"]["task"]
    if kind not in (safety.COLLISION, safety.FOLLOWING):
        kind = safety.COLLISION
    spec = _index_for(cfg, cfg["index"]["use"], kind)
    if spec is None:
        spec = phi0_spec(kind, d_min=float(idx["d_min"]),
                         d_max=float(idx["d_max"]) if kind == safety.FOLLOWING else None,
                         obstacles=tuple(map(tuple, idx["obstacles"])) or ((0.0, 0.0),)
                         if kind == safety.COLLISION else (),
                         target=(0.0, 0.0) if kind == safety.FOLLOWING else None,
                         gamma=float(idx["gamma"]))
    phase_svg(states, spec).save(out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safempc",
        description="Safe tracking control for ReLU network dynamics models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a training dataset CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a dynamics model")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("track", help="run one tracking rollout")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--method", default="mind",
                   help="mind (exact) or shooting:N (sampled baseline)")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("synth-index", help="synthesize safety-index parameters")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_synth_index)

    p = sub.add_parser("eval-safety", help="batch safety evaluation")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--index", required=True, choices=["phi0", "hand", "learned"])
    p.add_argument("--exec", default="nndm", choices=["nndm", "analytic"])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_eval_safety)

    p = sub.add_parser("bench-scale", help="solve-time scaling table")
    p.add_argument("--layers", type=int, nargs="+", default=[2, 3])
    p.add_argument("--hidden", type=int, nargs="+", default=[16, 32, 64])
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench_scale)

    p = sub.add_parser("plot", help="emit an SVG from run artifacts")
    p.add_argument("--traj", default=None)
    p.add_argument("--heatmap", default=None)
    p.add_argument("--phase", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ModelFormatError) as exc:
        _emit_error("config", exc)
        return 1
    except (OSError, ValueError) as exc:
        _emit_error("user", exc)
        return 1
    except (SolverFailure, EncodingError, RuntimeError) as exc:
        _emit_error("internal", exc)
        return 2


def _emit_error(category, exc) -> None:
    doc = {"error": {"category": category, "type": type(exc).__name__,
                     "message": str(exc)}}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")


if __name__ == "__main__":
    sys.exit(main())
