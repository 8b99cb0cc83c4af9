"""Command-line experiment runner.

Subcommands generate datasets, sweep exact accuracy tables, evolve and dump
weight distributions, run shot-budget curves, cross-check the closed-form
evolution against the statevector simulator, and evaluate the query-count
calculators. Every run writes its CSV outputs plus a run_manifest.json
(config snapshot, seed, version, output list, wall time) into the output
directory. With a fixed (config, seed) pair the CSV outputs are
byte-identical across reruns.

Configs can come from a flat key=value text file (--config PATH, '#' starts
a comment, keys match flag names with '-' or '_'); explicit command-line
flags override file values.

Exit codes: 0 success, 2 configuration error, 3 degenerate rotation angle.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import amplify as am
from . import statevec as sv
from . import theory as th
from .datasets import dataset_to_csv
from .tasks import TASK_NAMES, TaskError, load_task

_INT_KEYS = {"k", "shots", "eval_shots", "runs", "seed", "branch_m", "k_max"}
_BOOL_KEYS = {"exact_theta", "strict_ratio_theta", "dump_statevector",
              "dump_traces"}
_STR_KEYS = {"task", "budget", "pad", "out", "mnist_dir", "epsilons",
             "method", "split"}
_ALL_KEYS = _INT_KEYS | _BOOL_KEYS | _STR_KEYS


class ConfigError(ValueError):
    pass


def parse_config_file(path: str) -> dict:
    """Flat key=value file -> typed defaults dict."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{ln}: unknown config key {key!r}")
        if key in _INT_KEYS:
            try:
                values[key] = int(val)
            except ValueError as e:
                raise ConfigError(f"{path}:{ln}: {key} needs an integer") from e
        elif key in _BOOL_KEYS:
            low = val.lower()
            if low in ("1", "true", "yes", "on"):
                values[key] = True
            elif low in ("0", "false", "no", "off"):
                values[key] = False
            else:
                raise ConfigError(f"{path}:{ln}: {key} needs a boolean")
        else:
            values[key] = val
    return values


def _parse_budgets(text: str) -> list[int]:
    try:
        budgets = sorted({int(tok) for tok in text.split(",") if tok.strip()})
    except ValueError as e:
        raise ConfigError(f"bad budget list {text!r}") from e
    if not budgets or budgets[0] < 1:
        raise ConfigError("budgets must be positive integers")
    return budgets


def _parse_epsilons(text: str) -> list[float]:
    try:
        eps = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise ConfigError(f"bad epsilon list {text!r}") from e
    if not eps or min(eps) < 0:
        raise ConfigError("epsilons must be nonnegative numbers")
    return eps


def _parse_pad(text: str):
    if text == "auto":
        return "auto"
    try:
        n = int(text)
    except ValueError as e:
        raise ConfigError(f"--pad needs 'auto' or an integer, got {text!r}") from e
    if n < 0:
        raise ConfigError("--pad count must be >= 0")
    return n


def _out_dir(args, command: str) -> Path:
    out = Path(args.out) if args.out else Path("runs") / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8", newline="")
    return path


def _write_manifest(out: Path, command: str, args, outputs: list[Path],
                    t0: float) -> None:
    for p in outputs:
        if not p.exists() or p.stat().st_size == 0:
            raise RuntimeError(f"output {p} missing or empty")
    config = {k: (str(v) if isinstance(v, Path) else v)
              for k, v in sorted(vars(args).items()) if k not in ("func",)}
    manifest = {
        "command": command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "outputs": [p.name for p in outputs],
        "wall_time_s": round(time.monotonic() - t0, 3),
    }
    (out / "run_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _angle_mode(args) -> int | None:
    """Resolve the exact-vs-shot angle choice; returns shot count or None."""
    shots = getattr(args, "shots", None)
    if shots is not None and args.exact_theta:
        raise ConfigError("--shots and --exact-theta are mutually exclusive")
    if shots is not None and shots < 1:
        raise ConfigError("--shots must be >= 1")
    return shots


def cmd_gen_data(args) -> int:
    t0 = time.monotonic()
    out = _out_dir(args, "gen-data")
    bundle = load_task(args.task, args.mnist_dir, split_seed=args.seed)
    outputs = [
        _write(out / "dataset.csv", dataset_to_csv(bundle.full)),
        _write(out / "train.csv", dataset_to_csv(bundle.train)),
        _write(out / "test.csv", dataset_to_csv(bundle.test)),
    ]
    print(f"{args.task}: {len(bundle.full)} samples "
          f"({len(bundle.train)} train / {len(bundle.test)} test) -> {out}")
    _write_manifest(out, "gen-data", args, outputs, t0)
    return 0


def _pick_split(bundle, split: str):
    return {"full": bundle.full, "train": bundle.train,
            "test": bundle.test}[split]


def cmd_jtable(args) -> int:
    t0 = time.monotonic()
    out = _out_dir(args, "jtable")
    bundle = load_task(args.task, args.mnist_dir, split_seed=args.seed)
    d = _pick_split(bundle, args.split)
    table = am.accuracy_table(bundle.model, d)
    outputs = [_write(out / "jtable.csv", am.jtable_csv(table))]
    best = int(np.argmax(table.counts))
    print(f"{args.task}/{args.split}: {len(table.counts)} weights, "
          f"best weight {best} at accuracy "
          f"{table.counts[best] / table.n_samples:.6g} -> {out}")
    _write_manifest(out, "jtable", args, outputs, t0)
    return 0


def cmd_distribution(args) -> int:
    t0 = time.monotonic()
    out = _out_dir(args, "distribution")
    shots = _angle_mode(args)
    pad = _parse_pad(args.pad)
    bundle = load_task(args.task, args.mnist_dir)
    table = am.accuracy_table(bundle.model, bundle.full)
    rng = np.random.default_rng(args.seed)
    plan = am.make_plan(table, args.k, pad=pad, m=args.branch_m,
                        theta_shot_count=shots, rng=rng,
                        use_sqrt=not args.strict_ratio_theta)
    dist = am.evolve_distribution(table, plan)
    outputs = [_write(out / "distribution.csv",
                      am.distribution_csv(dist, table.normalized_accuracy()))]
    print(f"{args.task} k={plan.k}: n_aux={plan.n_aux} theta={plan.theta:.6g} "
          f"g={plan.g} residual={plan.residual:.6g} "
          f"leakage_bound={plan.leakage_bound:.3g} -> {out}")
    _write_manifest(out, "distribution", args, outputs, t0)
    return 0


def cmd_shots_curve(args) -> int:
    t0 = time.monotonic()
    out = _out_dir(args, "shots-curve")
    budgets = _parse_budgets(args.budget)
    pad = _parse_pad(args.pad)
    if args.runs < 1:
        raise ConfigError("--runs must be >= 1")
    if args.eval_shots is not None and args.eval_shots < 1:
        raise ConfigError("--eval-shots must be >= 1")
    if args.method not in ("kpd", "urs"):
        raise ConfigError("--method must be kpd or urs")
    bundle = load_task(args.task, args.mnist_dir)
    t_train = am.accuracy_table(bundle.model, bundle.train)
    t_test = am.accuracy_table(bundle.model, bundle.test)
    if args.method == "kpd":
        plan = am.make_plan(t_train, args.k, pad=pad, m=args.branch_m,
                            use_sqrt=not args.strict_ratio_theta)
        dist = am.evolve_distribution(t_train, plan)
        label = f"kpd:{args.k}"
    else:
        dist = am.uniform_distribution(bundle.model.weight_width)
        label = "urs"
    n_train = float(t_train.n_samples)
    n_test = float(t_test.n_samples)
    max_b = budgets[-1]
    train_acc = np.zeros((args.runs, len(budgets)))
    test_acc = np.zeros((args.runs, len(budgets)))
    outputs = []
    for rep in range(args.runs):
        rng = np.random.default_rng([args.seed, rep])
        draws = am.sample_weights(dist, max_b, rng)
        trace = []
        best_w, best_e = -1, -1.0
        bi = 0
        for i, w in enumerate(map(int, draws)):
            j = t_train.counts[w] / n_train
            if args.eval_shots is None:
                est = j
            else:
                est = float(np.mean(rng.random(args.eval_shots) < j))
            trace.append((i, w, est))
            if est > best_e or (est == best_e and w < best_w):
                best_w, best_e = w, est
            if bi < len(budgets) and i + 1 == budgets[bi]:
                train_acc[rep, bi] = t_train.counts[best_w] / n_train
                test_acc[rep, bi] = t_test.counts[best_w] / n_test
                bi += 1
        if args.dump_traces:
            outputs.append(_write(out / f"trace_rep{rep}.csv",
                                  am.trace_csv(trace)))
    lines = ["budget,mean_train,std_train,mean_test,std_test"]
    for bi, b in enumerate(budgets):
        lines.append(
            f"{b},{train_acc[:, bi].mean():.12g},{train_acc[:, bi].std():.12g},"
            f"{test_acc[:, bi].mean():.12g},{test_acc[:, bi].std():.12g}")
    outputs.insert(0, _write(out / "shots_curve.csv", "\n".join(lines) + "\n"))
    print(f"{args.task} {label}: budgets {budgets} x {args.runs} runs -> {out}")
    _write_manifest(out, "shots-curve", args, outputs, t0)
    return 0


def cmd_verify_oracle(args) -> int:
    t0 = time.monotonic()
    out = _out_dir(args, "verify-oracle")
    report = ["closed-form evolution vs statevector simulation"]
    outputs = []
    worst = 0.0
    for idx, name in enumerate(("toy", "simplified-ed")):
        bundle = load_task(name)
        table = am.accuracy_table(bundle.model, bundle.train)
        plan = am.make_plan(table, 1)
        predicted = am.evolve_distribution(table, plan).p
        marginal, state, layout = sv.grover_run(
            bundle.model, bundle.train, plan.k, plan.g, plan.n_aux,
            return_state=True)
        dev = float(np.abs(marginal - predicted).max())
        worst = max(worst, dev)
        drift = abs(state.norm() - 1.0)
        rng = np.random.default_rng([args.seed, idx])
        measured = state.measure_register(layout.weight, rng)
        report.append(
            f"instance={name} n_qubits={layout.n_qubits} k={plan.k} "
            f"n_aux={plan.n_aux} theta={plan.theta:.12g} g={plan.g} "
            f"residual={plan.residual:.12g} max_deviation={dev:.3e} "
            f"norm_drift={drift:.3e} measured_weight={measured}")
        if args.dump_statevector:
            outputs.append(_write(out / f"statevector_{name}.csv",
                                  sv.statevector_csv(state)))
    text = "\n".join(report) + "\n"
    outputs.insert(0, _write(out / "verify_oracle.txt", text))
    print(text, end="")
    print(f"worst deviation {worst:.3e} -> {out}")
    _write_manifest(out, "verify-oracle", args, outputs, t0)
    return 0


def cmd_theory(args) -> int:
    t0 = time.monotonic()
    out = _out_dir(args, "theory")
    epsilons = _parse_epsilons(args.epsilons)
    if args.k_max < 1:
        raise ConfigError("--k-max must be >= 1")
    bundle = load_task(args.task, args.mnist_dir)
    table = am.accuracy_table(bundle.model, bundle.full)
    C = float(bundle.class_count)
    rows, bounds, k_stars = [], [], []
    for eps in epsilons:
        alpha, beta = th.alpha_beta(table, eps)
        k_star = th.optimal_k(alpha, beta, C)
        holds = th.k_star_condition(alpha, beta, C)
        print(f"epsilon={eps:g}: alpha={alpha:.6g} beta={beta:.6g} "
              f"k_star={k_star} condition_holds={holds}")
        for k in range(1, args.k_max + 1):
            rows.append(th.TheoryParams(eps, alpha, beta, C, k))
            bounds.append(th.queries_kpd(alpha, beta, C, k))
            k_stars.append(k_star)
    outputs = [_write(out / "theory.csv", th.theory_csv(rows, bounds, k_stars))]
    print(f"{args.task}: C={C:g}, {len(rows)} rows -> {out}")
    _write_manifest(out, "theory", args, outputs, t0)
    return 0


def build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    """Build the argument parser; `config` entries become per-subcommand
    defaults (each applied only where a flag with that name exists), so
    explicit flags always win over config-file values."""
    parser = argparse.ArgumentParser(
        prog="grovertrain",
        description="Gradient-free training of Boolean models by amplitude "
                    "amplification: datasets, accuracy landscapes, evolved "
                    "weight distributions, shot-budget curves, simulator "
                    "cross-checks, and query-count calculators.")
    parser.add_argument("--config", metavar="PATH",
                        help="flat key=value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, task=True, seed=True):
        if task:
            p.add_argument("--task", required=False, default="simplified-ed",
                           choices=TASK_NAMES)
            p.add_argument("--mnist-dir", metavar="DIR",
                           help="directory with the four standard IDX files "
                                "(needed by tiny-mnist)")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", metavar="DIR",
                       help="output directory (default runs/<command>)")

    p = sub.add_parser("gen-data", help="write dataset/train/test CSVs")
    add_common(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("jtable", help="exact accuracy table over all weights")
    add_common(p)
    p.add_argument("--split", choices=("full", "train", "test"),
                   default="full")
    p.set_defaults(func=cmd_jtable)

    p = sub.add_parser("distribution",
                       help="evolved weight distribution for one plan")
    add_common(p)
    p.add_argument("--k", type=int, default=1, help="parallel dataset copies")
    p.add_argument("--shots", type=int, default=None,
                   help="estimate the rotation angle from this many samples")
    p.add_argument("--exact-theta", action="store_true",
                   help="force the exact rotation angle (the default)")
    p.add_argument("--strict-ratio-theta", action="store_true",
                   help="set the angle to arcsin of the solution ratio "
                        "itself rather than of its square root")
    p.add_argument("--pad", default="auto", metavar="auto|N",
                   help="auxiliary padding samples (auto: pad when the "
                        "rounded iteration count keeps too little mass)")
    p.add_argument("--branch-m", type=int, default=0,
                   help="rotation branch index in the iteration-count rule")
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("shots-curve",
                       help="best-found accuracy vs measurement budget")
    add_common(p)
    p.add_argument("--method", choices=("kpd", "urs"), default="kpd",
                   help="amplified sampling (kpd) or uniform random search")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--budget", default="1,2,4,8,16,32,64,128",
                   help="comma-separated measurement budgets")
    p.add_argument("--runs", type=int, default=20,
                   help="repetitions per budget")
    p.add_argument("--eval-shots", type=int, default=None,
                   help="shots per candidate evaluation (default: exact)")
    p.add_argument("--pad", default="auto", metavar="auto|N")
    p.add_argument("--branch-m", type=int, default=0)
    p.add_argument("--strict-ratio-theta", action="store_true")
    p.add_argument("--dump-traces", action="store_true",
                   help="write per-repetition sampling traces")
    p.set_defaults(func=cmd_shots_curve)

    p = sub.add_parser("verify-oracle",
                       help="closed form vs statevector on small instances")
    add_common(p, task=False)
    p.add_argument("--dump-statevector", action="store_true",
                   help="also write final statevectors (large files)")
    p.set_defaults(func=cmd_verify_oracle)

    p = sub.add_parser("theory", help="query-count bounds and best k")
    add_common(p, seed=False)
    p.add_argument("--epsilons", default="0",
                   help="comma-separated accuracy slacks")
    p.add_argument("--k-max", type=int, default=8,
                   help="evaluate bounds for k = 1..k_max")
    p.set_defaults(func=cmd_theory)

    if config:
        # subcommands parse into a fresh namespace, so defaults must be set
        # on each subparser itself, and only for flags it actually has
        for sp in sub.choices.values():
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in config.items() if k in dests})
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        config = parse_config_file(known.config) if known.config else None
        parser = build_parser(config)
        args = parser.parse_args(argv)
        return args.func(args)
    except am.DegenerateAngleError as e:
        print(f"degenerate angle: {e}", file=sys.stderr)
        return 3
    except (ConfigError, TaskError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
