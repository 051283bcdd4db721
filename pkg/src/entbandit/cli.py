"""Command-line front end.

Subcommands: ``gen-instance`` (write a labeled instance JSON),
``run`` (one policy / workflow / tomography run), ``sweep`` (CSV experiment
tables), ``verify`` (closed-form self-checks).

Exit codes: 0 completed, 2 copy budget exhausted, 3 inconclusive walk.
The ``ENTBANDIT_OUTDIR`` environment variable sets the default output
directory (default: current directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .artifacts import save_instance, load_instance, write_csv, write_json_artifact
from .bandit import BudgetExceededError, LilParams, lil_hdoc, successive_elimination
from .sampler import NoiseModel
from .states import ginibre_promise_instance, random_bds_instance, reference_bds_instance
from .tomography import classify_batch, required_shots, sweep_tomography
from .verify import run_all_checks
from .witness import build_wbm
from .workflow import sweep_fig6, sweep_fig7_fig8, sweep_fig9, workflow_arbitrary, workflow_bds

EXIT_OK = 0
EXIT_BUDGET = 2
EXIT_INCONCLUSIVE = 3


def _outpath(name: str, explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get("ENTBANDIT_OUTDIR", ".")) / name


def _load_noise(path: str | None) -> NoiseModel | None:
    if path is None:
        return None
    return NoiseModel.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _grid(text: str) -> list[int]:
    """Parse 'start:stop:step' (inclusive stop) or a comma list."""
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        return list(range(start, stop + 1, step))
    return [int(x) for x in text.split(",") if x]


def cmd_gen_instance(args) -> int:
    if args.family == "bds":
        if args.reference:
            instance = reference_bds_instance()
        else:
            instance = random_bds_instance(args.k, args.m, seed=args.seed, min_gap=args.min_gap)
    elif args.family == "ginibre":
        if not args.promise_one_entangled:
            raise SystemExit("ginibre generation currently requires --promise-one-entangled")
        instance = ginibre_promise_instance(args.k, seed=args.seed)
    else:
        raise SystemExit(f"unsupported family {args.family!r}")

    config = {
        "family": args.family,
        "k": args.k,
        "m": args.m,
        "min_gap": args.min_gap,
        "promise_one_entangled": args.promise_one_entangled,
        "reference": args.reference,
    }
    path = _outpath("instance.json", args.out)
    save_instance(path, instance, seed=args.seed, config=config)
    print(f"wrote {path}")
    print(f"K={instance.k} m={instance.m} entangled_arms={list(instance.entangled_arms())}")
    for wbm_id in range(1, 7):
        det = instance.detectable_under(wbm_id)
        print(f"  WBM {wbm_id}: detects arms {list(det)}")
    return EXIT_OK


def _emit_run(args, body: dict, config: dict, default_name: str) -> None:
    path = _outpath(default_name, args.out)
    write_json_artifact(path, "entbandit.run/1", args.seed, config, body)
    print(f"wrote {path}")


def cmd_run(args) -> int:
    instance = load_instance(args.instance)
    noise = _load_noise(args.noise)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    mode = args.mode

    if mode == "tomography":
        results = classify_batch(instance, args.epsilon_acc, args.delta, args.seed, noise=noise)
        t, n = required_shots(args.epsilon_acc, args.delta)
        body = {
            "results": [r.to_json_dict() for r in results],
            "shots_per_setting": t,
            "copies_per_state": n,
            "total_copies": n * instance.k,
        }
        _emit_run(args, body, config, "tomography.json")
        print(f"copies per state = {n}, total = {n * instance.k}")
        return EXIT_OK

    if mode in ("se", "lilhdoc"):
        params = LilParams(delta=args.delta, k=instance.k, epsilon=args.epsilon, sigma=args.sigma)
        wbm = build_wbm(args.wbm)
        kwargs = dict(
            zeta=args.zeta,
            max_copies=args.cutoff,
            noise=noise,
            mitigation_cadence=args.mitigation_cadence,
            estimator="plugin" if args.mitigation_cadence else args.estimator,
        )
        try:
            if mode == "se":
                rec = successive_elimination(instance, wbm, params, args.seed, **kwargs)
            else:
                rec = lil_hdoc(instance, wbm, params, args.seed, warm_start=args.warm_start, **kwargs)
        except BudgetExceededError as err:
            _emit_run(args, {"record": err.record.to_json_dict()}, config, f"{mode}.json")
            print("copy budget exhausted", file=sys.stderr)
            return EXIT_BUDGET
        _emit_run(args, {"record": rec.to_json_dict()}, config, f"{mode}.json")
        print(f"flagged arms: {list(rec.flagged_arms)} copies={rec.copies}")
        return EXIT_OK

    if mode == "workflow-bds":
        try:
            res = workflow_bds(
                instance, args.delta, args.seed, first_wbm=args.wbm if args.wbm in (1, 2) else 1,
                epsilon=args.epsilon, sigma=args.sigma, zeta=args.zeta,
                split_delta=args.split_delta, warm_start=args.warm_start,
                max_copies_per_phase=args.cutoff, noise=noise,
                mitigation_cadence=args.mitigation_cadence,
            )
        except BudgetExceededError as err:
            _emit_run(args, {"record": err.record.to_json_dict()}, config, "workflow_bds.json")
            print("copy budget exhausted", file=sys.stderr)
            return EXIT_BUDGET
        _emit_run(args, {"result": res.to_json_dict()}, config, "workflow_bds.json")
        print(f"flagged arms: {list(res.flagged_arms)} copies={res.copies} phases={res.wbms_used}")
        return EXIT_OK

    if mode == "workflow-arbitrary":
        order = tuple(int(x) for x in args.wbm_order.split(","))
        try:
            res = workflow_arbitrary(
                instance, args.delta, args.seed, order=order,
                epsilon=args.epsilon, sigma=args.sigma, zeta=args.zeta,
                warm_start=args.warm_start, max_copies_per_phase=args.cutoff,
                noise=noise, mitigation_cadence=args.mitigation_cadence,
            )
        except BudgetExceededError as err:
            _emit_run(args, {"record": err.record.to_json_dict()}, config, "workflow_arbitrary.json")
            print("copy budget exhausted", file=sys.stderr)
            return EXIT_BUDGET
        _emit_run(args, {"result": res.to_json_dict()}, config, "workflow_arbitrary.json")
        if res.inconclusive:
            print("inconclusive after all six WBMs", file=sys.stderr)
            return EXIT_INCONCLUSIVE
        print(f"flagged arm: {list(res.flagged_arms)} wbms_used={res.wbms_used} copies={res.copies}")
        return EXIT_OK

    raise SystemExit(f"unknown run mode {mode!r}")


def cmd_sweep(args) -> int:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    noise = _load_noise(args.noise)
    deltas = _floats(args.deltas)

    if args.kind == "fig6":
        instance = load_instance(args.instance)
        variants = [("noiseless", None, None)]
        if noise is not None:
            variants.append((args.noise_tag, noise, None))
            if args.mitigation_cadence:
                variants.append(
                    (f"{args.noise_tag}_mitigated_F{args.mitigation_cadence}", noise, args.mitigation_cadence)
                )
        rows = sweep_fig6(
            instance, deltas, args.trials, args.seed, variants=variants,
            baseline_epsilon=args.baseline_epsilon, workers=args.parallel,
        )
        path = _outpath("fig6.csv", args.out)
        write_csv(path, ["delta", "tag", "mean_copies", "std_copies", "trials"], rows, args.seed, config)
        print(f"wrote {path}")
        return EXIT_OK

    if args.kind == "fig7-fig8":
        fig7, fig8, _ = sweep_fig7_fig8(
            args.instances, args.k, deltas, args.seed,
            max_copies_per_phase=args.cutoff, workers=args.parallel,
        )
        p7 = _outpath("fig7.csv", args.out)
        write_csv(p7, ["delta", "detection_ratio", "n_instances"], fig7, args.seed, config)
        p8 = _outpath("fig8.csv", args.out_usage)
        write_csv(p8, ["delta", "wbms_used", "cumulative_count"], fig8, args.seed, config)
        print(f"wrote {p7} and {p8}")
        return EXIT_OK

    if args.kind == "tomography":
        instance = load_instance(args.instance)
        rows = sweep_tomography(
            instance, args.epsilon_acc, deltas, args.trials, args.seed, noise=noise
        )
        path = _outpath("tomography_sweep.csv", args.out)
        write_csv(
            path,
            ["delta", "epsilon", "copies_per_state", "total_copies", "accuracy"],
            rows, args.seed, config,
        )
        print(f"wrote {path}")
        return EXIT_OK

    if args.kind == "fig9":
        instance = load_instance(args.instance)
        if noise is None:
            raise SystemExit("fig9 requires --noise")
        rows = sweep_fig9(
            instance, deltas, _grid(args.f_grid), noise, args.trials, args.seed,
            baseline_trials=args.baseline_trials, max_copies_per_phase=args.cutoff,
            workers=args.parallel,
        )
        path = _outpath("fig9.csv", args.out)
        write_csv(path, ["delta", "F", "pct_reduction", "correct"], rows, args.seed, config)
        print(f"wrote {path}")
        return EXIT_OK

    raise SystemExit(f"unknown sweep kind {args.kind!r}")


def cmd_verify(args) -> int:
    results = run_all_checks()
    worst = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        extra = f"  [{r.detail}]" if r.detail else ""
        print(f"[{status}] {r.name}: max deviation {r.max_dev:.3e} (tol {r.tol:g}){extra}")
        worst |= not r.passed
    return EXIT_OK if worst == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entbandit", description=__doc__)
    ap.add_argument("--version", action="version", version=f"entbandit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-instance", help="generate and store a labeled instance")
    g.add_argument("--family", choices=("bds", "ginibre"), required=True)
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--min-gap", type=float, default=0.05)
    g.add_argument("--promise-one-entangled", action="store_true")
    g.add_argument("--reference", action="store_true", help="emit the bundled K=5 benchmark batch")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_instance)

    r = sub.add_parser("run", help="run one policy, workflow or the tomography baseline")
    r.add_argument("mode", choices=("se", "lilhdoc", "workflow-bds", "workflow-arbitrary", "tomography"))
    r.add_argument("--instance", required=True)
    r.add_argument("--delta", type=float, default=0.05)
    r.add_argument("--epsilon", type=float, default=0.5, help="width tuning parameter")
    r.add_argument("--sigma", type=float, default=2.5)
    r.add_argument("--zeta", type=float, default=0.0)
    r.add_argument("--wbm", type=int, default=1)
    r.add_argument("--wbm-order", default="1,2,3,4,5,6")
    r.add_argument("--warm-start", type=int, default=None)
    r.add_argument("--estimator", choices=("pairs", "overlap", "plugin"), default="pairs")
    r.add_argument("--split-delta", action="store_true", help="spend delta/2 per workflow phase")
    r.add_argument("--noise", help="noise model JSON file")
    r.add_argument("--mitigation-cadence", type=int, default=None)
    r.add_argument("--cutoff", type=int, default=10_000_000, help="copy budget")
    r.add_argument("--epsilon-acc", type=float, default=0.01, help="tomography trace accuracy")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run an experiment sweep and write CSV")
    s.add_argument("kind", choices=("fig6", "fig7-fig8", "fig9", "tomography"))
    s.add_argument("--instance")
    s.add_argument("--deltas", default="0.3,0.1,0.05,0.01")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--instances", type=int, default=200, help="batch count for fig7-fig8")
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--noise", help="noise model JSON file")
    s.add_argument("--noise-tag", default="readout_noise")
    s.add_argument("--mitigation-cadence", type=int, default=None)
    s.add_argument("--baseline-epsilon", type=float, default=None)
    s.add_argument("--epsilon-acc", type=float, default=0.01, help="tomography trace accuracy")
    s.add_argument("--baseline-trials", type=int, default=None)
    s.add_argument("--f-grid", default="50:10000:50")
    s.add_argument("--cutoff", type=int, default=10_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--parallel", type=int, default=1, help="worker processes for sweep cells")
    s.add_argument("--out")
    s.add_argument("--out-usage", help="fig8 output path")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the closed-form self-check suite")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
