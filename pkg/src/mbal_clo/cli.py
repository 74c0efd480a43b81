"""Deterministic command-line harness: gen / run / compare / psi.

All randomness in a run derives from one --seed: trial i uses a seed drawn
from SeedSequence([seed, 1, i]), the shared test set uses [seed, 2], and the
psi diagnostic uses [seed, 3]. Outputs are plain CSV (schema version in a
leading comment line) plus a deterministic summary JSON; wall-clock timing
goes to stdout only, never into files, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from .datagen import (
    gen_pricing_scenario,
    gen_shortest_path_scenario,
    load_scenario,
    save_scenario,
)
from .hypothesis import TrainerConfig
from .losses import parse_surrogate
from .mbal import MbalConfig, StepRecord, TrialTrace, run_stream, run_supervised
from .metrics import estimate_near_degeneracy, risk_ratio_table

SCHEMA_LINE = "# mbal-clo v1"
RUN_COLUMNS = ["trial", "t", "n_labels", "excess_spo_risk", "surrogate_risk", "b_t", "labeled_flag"]
COMPARE_COLUMNS = ["problem", "surrogate", "label_budget", "ratio", "ci_lo", "ci_hi", "trials"]
PSI_COLUMNS = ["b", "psi_hat"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, comments: list[str], header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        for line in comments:
            fh.write("# " + line + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _read_csv(path: Path, expected_columns: list[str]) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse a schema-versioned CSV into (comment metadata, row dicts)."""
    meta: dict[str, str] = {}
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise ValueError(f"{path}: expected schema line {SCHEMA_LINE!r}, got {first!r}")
        pos = fh.tell()
        while True:
            line = fh.readline()
            if not line.startswith("#"):
                fh.seek(pos)
                break
            pos = fh.tell()
            for token in line[1:].split():
                if "=" in token:
                    key, _, val = token.partition("=")
                    meta[key] = val
        reader = csv.DictReader(fh)
        if reader.fieldnames != expected_columns:
            missing = set(expected_columns) - set(reader.fieldnames or [])
            raise ValueError(f"{path}: column mismatch, missing {sorted(missing)}")
        return meta, list(reader)


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial seed derived from the master seed; stable across job counts."""
    return int(np.random.SeedSequence([master_seed, 1, trial]).generate_state(1, np.uint64)[0])


def _run_single_trial(payload: tuple) -> TrialTrace:
    scenario, algo, cfg, T, test_xs, stop_labels, eval_every, trial = payload
    runner = run_supervised if algo == "supervised" else run_stream
    return runner(
        cfg, scenario, T, test_xs,
        stop_after_labels=stop_labels, eval_every=eval_every, trial=trial,
    )


def _resolve_jobs(args: argparse.Namespace) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("MBAL_JOBS")
    return max(1, int(env)) if env else 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    if args.problem == "shortest-path":
        eps_bar = 0.25 if args.eps_bar is None else args.eps_bar
        kwargs = {}
        if args.sigma_m2 is not None:
            kwargs["sigma_m2"] = args.sigma_m2
        try:
            scn = gen_shortest_path_scenario(
                args.seed, k=args.grid, eps_bar=eps_bar,
                degeneracy_threshold=args.degeneracy_threshold, deg=args.deg, **kwargs,
            )
        except RuntimeError as exc:
            print(f"scenario search failed: {exc}", file=sys.stderr)
            return 1
        centers = len(scn.target_paths)
    else:
        eps_bar = 0.1 if args.eps_bar is None else args.eps_bar
        scn = gen_pricing_scenario(args.seed, eps_bar=eps_bar, shared_item_noise=args.shared_item_noise)
        centers = len(scn.centers)
    save_scenario(scn, args.out)
    poly = scn.polytope()
    print(f"wrote {args.out}: {poly.name}, d={poly.dim}, vertices={poly.num_vertices}, centers={centers}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    scenario = load_scenario(args.scenario)
    trainer = TrainerConfig(step_size=args.step_size, epochs_per_update=args.epochs)
    warmup_trainer = (
        TrainerConfig(step_size=args.step_size, epochs_per_update=args.warmup_epochs)
        if args.warmup_epochs is not None
        else None
    )
    surrogate = parse_surrogate(args.surrogate, huber_delta=args.huber_delta)
    test_xs = (
        scenario.sample_x_many(np.random.default_rng([args.seed, 2]), args.test_size)
        if args.test_size > 0
        else None
    )
    payloads = []
    seeds = []
    for trial in range(args.trials):
        seed_i = trial_seed(args.seed, trial)
        seeds.append(seed_i)
        cfg = MbalConfig(
            p_tilde=args.p_tilde,
            q_tilde=args.q_tilde,
            n0=args.warmup,
            surrogate=surrogate,
            trainer=trainer,
            seed=seed_i,
            schedule_exponent=args.schedule_exponent,
            warmup_trainer=warmup_trainer,
        )
        payloads.append(
            (scenario, args.algo, cfg, args.T, test_xs, args.stop_labels, args.eval_every, trial)
        )

    traces: list[TrialTrace] = []
    failures: list[tuple[int, int, str]] = []
    jobs = _resolve_jobs(args)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_single_trial, p) for p in payloads]
            for trial, fut in enumerate(futures):
                try:
                    traces.append(fut.result())
                except Exception as exc:  # noqa: BLE001 - per-trial isolation
                    failures.append((trial, seeds[trial], f"{type(exc).__name__}: {exc}"))
    else:
        for trial, payload in enumerate(payloads):
            try:
                traces.append(_run_single_trial(payload))
            except Exception as exc:  # noqa: BLE001 - per-trial isolation
                failures.append((trial, seeds[trial], f"{type(exc).__name__}: {exc}"))

    problem = scenario.polytope().name
    meta = (
        f"problem={problem} algo={args.algo} surrogate={surrogate.tag} n0={args.warmup} "
        f"seed={args.seed} trials={args.trials} T={args.T} p_tilde={_fmt(float(args.p_tilde))} "
        f"q_tilde={_fmt(float(args.q_tilde))} schedule_exponent={_fmt(float(args.schedule_exponent))}"
    )
    rows = [
        [tr.trial, rec.t, rec.n_t, rec.excess_spo_risk_test, rec.surrogate_risk_test, rec.b, int(rec.labeled)]
        for tr in traces
        for rec in tr.records
    ]
    out = Path(args.out)
    _write_csv(out, [meta], RUN_COLUMNS, rows)

    summary = {
        "version": SCHEMA_LINE.lstrip("# "),
        "command": "run",
        "problem": problem,
        "algo": args.algo,
        "surrogate": surrogate.tag,
        "config": {
            "scenario": str(args.scenario),
            "T": args.T,
            "trials": args.trials,
            "seed": args.seed,
            "p_tilde": args.p_tilde,
            "q_tilde": args.q_tilde,
            "warmup": args.warmup,
            "test_size": args.test_size,
            "stop_labels": args.stop_labels,
            "eval_every": args.eval_every,
            "schedule_exponent": args.schedule_exponent,
            "epochs": args.epochs,
            "step_size": args.step_size,
            "huber_delta": args.huber_delta,
            "warmup_epochs": args.warmup_epochs,
        },
        "trials_completed": [
            {"trial": tr.trial, "seed": tr.seed, "steps": tr.records[-1].t, "final_labels": tr.final_labels}
            for tr in traces
        ],
        "failures": [{"trial": t, "seed": s, "error": e} for t, s, e in failures],
    }
    summary_path = Path(args.summary) if args.summary else out.with_name(out.name + ".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    elapsed = time.perf_counter() - start
    print(f"wrote {out} ({len(traces)}/{args.trials} trials, jobs={jobs}) in {elapsed:.1f}s")
    if failures:
        for trial, seed_i, err in failures:
            print(f"trial {trial} (seed {seed_i}) failed: {err}", file=sys.stderr)
        return 1
    return 0


def _traces_from_run_csv(path: Path) -> tuple[dict[str, str], list[TrialTrace]]:
    meta, rows = _read_csv(path, RUN_COLUMNS)
    for key in ("problem", "algo", "surrogate", "n0", "seed"):
        if key not in meta:
            raise ValueError(f"{path}: missing {key}= in metadata comment")
    by_trial: dict[int, list[StepRecord]] = {}
    for row in rows:
        rec = StepRecord(
            t=int(row["t"]),
            nu=math.nan,
            b=float(row["b_t"]),
            near_margin=False,
            coin=False,
            labeled=bool(int(row["labeled_flag"])),
            n_t=int(row["n_labels"]),
            surrogate_risk_test=float(row["surrogate_risk"]),
            excess_spo_risk_test=float(row["excess_spo_risk"]),
        )
        by_trial.setdefault(int(row["trial"]), []).append(rec)
    traces = [
        TrialTrace(
            problem=meta["problem"],
            algo=meta["algo"],
            surrogate=meta["surrogate"],
            trial=trial,
            seed=int(meta["seed"]),
            n0=int(meta["n0"]),
            records=tuple(recs),
        )
        for trial, recs in sorted(by_trial.items())
    ]
    return meta, traces


def cmd_compare(args: argparse.Namespace) -> int:
    sup_traces: list[TrialTrace] = []
    mbal_traces: list[TrialTrace] = []
    for path, bucket, expected in (
        *((p, sup_traces, "supervised") for p in args.supervised),
        *((p, mbal_traces, "mbal") for p in args.mbal),
    ):
        meta, traces = _traces_from_run_csv(Path(path))
        if meta["algo"] != expected:
            raise ValueError(f"{path}: expected algo={expected} results, found algo={meta['algo']}")
        bucket.extend(traces)
    table = risk_ratio_table(sup_traces, mbal_traces, args.budget)
    if not table:
        print("no comparable (problem, surrogate) groups found", file=sys.stderr)
        return 1
    rows = [
        [r.problem, r.surrogate, r.label_budget, r.ratio, r.ci_lo, r.ci_hi, r.trials]
        for r in table
    ]
    _write_csv(Path(args.out), [], COMPARE_COLUMNS, rows)
    for r in table:
        print(
            f"{r.problem} {r.surrogate} @ {r.label_budget} labels: "
            f"ratio={r.ratio:.3f} [{r.ci_lo:.3f}, {r.ci_hi:.3f}] ({r.trials} trials)"
        )
    return 0


def cmd_psi(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.log_grid:
        if args.b_min <= 0:
            raise ValueError("--b-min must be > 0 with --log-grid")
        b_grid = np.geomspace(args.b_min, args.b_max, args.b_count)
    else:
        b_grid = np.linspace(args.b_min, args.b_max, args.b_count)
    seed = scenario.seed if args.seed is None else args.seed
    est = estimate_near_degeneracy(
        scenario, b_grid, args.samples, rng=np.random.default_rng([seed, 3])
    )
    problem = scenario.polytope().name
    kappa = math.nan if est.kappa_hat is None else est.kappa_hat
    b0 = math.nan if est.b0_hat is None else est.b0_hat
    meta = (
        f"problem={problem} samples={est.M} proxy={int(est.proxy)} seed={seed} "
        f"kappa_hat={_fmt(float(kappa))} b0_hat={_fmt(float(b0))}"
    )
    rows = [[float(b), float(p)] for b, p in zip(est.b_grid, est.psi)]
    _write_csv(Path(args.out), [meta], PSI_COLUMNS, rows)
    print(f"wrote {args.out}: kappa_hat={kappa:.4f} b0_hat={b0:.4f} (M={est.M}, proxy={est.proxy})")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbal-clo",
        description="Margin-based active learning for contextual linear optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate and save a scenario JSON")
    gen.add_argument("--problem", choices=["shortest-path", "pricing"], required=True)
    gen.add_argument("--grid", type=int, default=3, help="grid side for shortest-path")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--eps-bar", type=float, default=None, help="label noise half-width")
    gen.add_argument("--sigma-m2", type=float, default=None, help="feature mixture variance")
    gen.add_argument("--deg", type=int, default=1, help="degree of the mean cost model")
    gen.add_argument("--degeneracy-threshold", type=float, default=None)
    gen.add_argument("--shared-item-noise", action="store_true")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="run trials and write a long-format results CSV")
    run.add_argument("--scenario", required=True)
    run.add_argument("--algo", choices=["mbal", "supervised"], default="mbal")
    run.add_argument("--T", type=int, default=200, help="stream length per trial")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--p-tilde", type=float, default=1e-5)
    run.add_argument("--q-tilde", type=float, default=0.5)
    run.add_argument("--warmup", type=int, default=10, help="warm-up length n0")
    run.add_argument(
        "--surrogate", default="spoplus", choices=["spoplus", "spo", "squared", "mae", "huber"]
    )
    run.add_argument("--huber-delta", type=float, default=1.0)
    run.add_argument("--schedule-exponent", type=float, default=0.25)
    run.add_argument("--test-size", type=int, default=1000, help="0 disables risk evaluation")
    run.add_argument("--stop-labels", type=int, default=None, help="stop after this many post-warm-up labels")
    run.add_argument("--eval-every", type=int, default=None)
    run.add_argument("--epochs", type=int, default=50, help="descent epochs per refit")
    run.add_argument("--step-size", type=float, default=0.1)
    run.add_argument(
        "--warmup-epochs", type=int, default=None,
        help="descent epochs for the single warm-up fit (default: same as --epochs)",
    )
    run.add_argument("--jobs", type=int, default=None, help="worker processes (or MBAL_JOBS)")
    run.add_argument("--out", required=True)
    run.add_argument("--summary", default=None, help="summary JSON path (default <out>.summary.json)")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="risk-ratio table from run CSVs")
    compare.add_argument("--supervised", action="append", required=True, help="supervised run CSV (repeatable)")
    compare.add_argument("--mbal", action="append", required=True, help="active run CSV (repeatable)")
    compare.add_argument("--budget", type=int, required=True, help="post-warm-up label budget")
    compare.add_argument("--out", required=True)
    compare.set_defaults(func=cmd_compare)

    psi = sub.add_parser("psi", help="near-degeneracy profile of a scenario")
    psi.add_argument("--scenario", required=True)
    psi.add_argument("--b-min", type=float, default=0.01)
    psi.add_argument("--b-max", type=float, default=10.0)
    psi.add_argument("--b-count", type=int, default=50)
    psi.add_argument("--log-grid", action="store_true")
    psi.add_argument("--samples", type=int, default=100_000)
    psi.add_argument("--seed", type=int, default=None, help="defaults to the scenario seed")
    psi.add_argument("--out", required=True)
    psi.set_defaults(func=cmd_psi)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
