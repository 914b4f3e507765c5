"""Command-line driver: cluster files, sweep lambda grids, run synthetic
benchmarks, and evaluate the recovery-condition checker.

Exit codes: 0 success, 2 data error (unreadable or malformed input), 3
parameter error (bad flag values, including unknown flags).  Every command
prints its JSON payload to stdout and, with ``--out``, writes the same
payload to a file; payloads contain no timestamps or timings, so reruns
with identical flags produce byte-identical files.  ``synth`` additionally
reports its wall time on stdout only.
"""

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict

import numpy as np

from .data import (
    SynthSpec,
    clustering_error,
    generate_submodules,
    load_idx_images,
    load_idx_labels,
    load_pgm_dir,
)
from .solver import SolverConfig, affinity_from_tensor, solve_self_representation
from .spectral import spectral_cluster
from .t_algebra import FormatError, read_tsr1, tprod, write_tsr1
from .theory import SubmoduleSample, theorem3_check

__all__ = ["main"]

SCHEMA = "ssmc/1"

EXIT_DATA = 2
EXIT_PARAM = 3


class ParameterError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; bad or unknown flags are
    # parameter errors here, so remap to 3
    def error(self, message):
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def _add_solver_args(p):
    p.add_argument("--lambda-g", type=float, default=100.0, help="fidelity weight")
    p.add_argument("--lambda-h", type=float, default=0.0, help="row group-norm weight")
    p.add_argument("--affine", action="store_true", help="affine-submodule constraint")
    p.add_argument(
        "--normalize-columns",
        action="store_true",
        help="scale each lateral slice to unit Frobenius norm before solving",
    )
    p.add_argument("--rho", type=float, default=1.0, help="ADMM penalty")
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol-abs", type=float, default=1e-6)
    p.add_argument("--tol-rel", type=float, default=1e-4)


def _add_input_args(p):
    p.add_argument("--input", required=True, help="input path")
    p.add_argument("--format", choices=["tsr1", "idx", "pgmdir"], default="tsr1")
    p.add_argument("--decimate", type=int, default=1, help="pgmdir: keep every n-th pixel")
    p.add_argument("--crop", default=None, metavar="A:B", help="pgmdir: inclusive column range")
    p.add_argument("--truth", default=None, help="true labels (.json list or IDX) for error")


def _add_synth_args(p):
    p.add_argument("--h", type=int, default=28, help="rows per slice")
    p.add_argument("--depth", type=int, default=28, help="tube length")
    p.add_argument("--dims", default="2,2,2,2", help="per-cluster submodular dims, comma list")
    p.add_argument("--samples", default="10,10,10,10", help="per-cluster sample counts")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--shift-model", action="store_true", help="shifted-prototype clusters")
    p.add_argument("--affine-data", action="store_true", help="add per-cluster offsets")


def build_parser():
    parser = _Parser(prog="ssmc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cluster", help="cluster a tensor file end to end")
    _add_input_args(p)
    _add_solver_args(p)
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="JSON output path")
    p.add_argument("--affinity-out", default=None, help="write affinity matrix as TSR1")

    p = sub.add_parser("sweep", help="run cluster over a lambda_g grid")
    _add_input_args(p)
    _add_solver_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", required=True, help="comma list of lambda_g values")
    p.add_argument("--out", default=None, help="JSON output path (CSV written alongside)")

    p = sub.add_parser("synth", help="generate synthetic data, cluster, report error")
    _add_synth_args(p)
    _add_solver_args(p)
    p.add_argument("--k", type=int, default=None, help="clusters (default: number of dims)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("check", help="evaluate the recovery condition on generated clusters")
    _add_synth_args(p)
    p.add_argument("--fixture", choices=["gaussian", "orthogonal"], default="gaussian")
    p.add_argument("--cluster-index", type=int, default=0)
    p.add_argument("--budget", type=int, default=200, help="subtensor search budget")
    p.add_argument("--coherence-trials", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    return parser


def _parse_crop(text):
    if text is None:
        return None
    parts = text.split(":")
    if len(parts) != 2:
        raise ParameterError(f"crop must look like A:B, got {text!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParameterError(f"crop must be integer A:B, got {text!r}") from None
    if a < 0 or b < a:
        raise ParameterError(f"crop range {a}:{b} is empty or negative")
    return a, b


def _parse_int_list(text, flag):
    try:
        values = [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ParameterError(f"{flag} must be a comma list of integers, got {text!r}") from None
    if not values:
        raise ParameterError(f"{flag} must be nonempty")
    return values


def _solver_config(args):
    try:
        return SolverConfig(
            lambda_g=args.lambda_g,
            lambda_h=args.lambda_h,
            affine=args.affine,
            rho=args.rho,
            max_iters=args.max_iters,
            tol_abs=args.tol_abs,
            tol_rel=args.tol_rel,
            normalize_columns=args.normalize_columns,
        )
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc


def _load_input(args):
    crop = _parse_crop(args.crop)
    if args.format != "pgmdir" and (args.decimate != 1 or crop is not None):
        raise ParameterError("--decimate/--crop apply only to --format pgmdir")
    try:
        if args.format == "tsr1":
            return read_tsr1(args.input)
        if args.format == "idx":
            return load_idx_images(args.input)
        tensor, _ = load_pgm_dir(args.input, decimate=args.decimate, crop=crop)
        return tensor
    except (OSError, FormatError) as exc:
        raise DataError(str(exc)) from exc


def _load_truth(path):
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                return np.asarray(json.load(fh), dtype=np.int64)
        return load_idx_labels(path)
    except (OSError, FormatError, ValueError) as exc:
        raise DataError(f"cannot read truth labels: {exc}") from exc


def _emit(payload, out_path, stdout_extra=None):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    if stdout_extra:
        shown = dict(payload)
        shown.update(stdout_extra)
        sys.stdout.write(json.dumps(shown, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def _run_pipeline(tensor, cfg, k, seed):
    try:
        w, report = solve_self_representation(tensor, cfg)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    affinity = affinity_from_tensor(w)
    labels = spectral_cluster(affinity, k, seed)
    return w, report, affinity, labels


def _report_dict(report):
    d = asdict(report)
    d["objective_history"] = [float(v) for v in d["objective_history"]]
    return d


def cmd_cluster(args):
    cfg = _solver_config(args)
    tensor = _load_input(args)
    n = tensor.shape[1]
    if not 1 <= args.k <= n:
        raise ParameterError(f"k must be in 1..{n}, got {args.k}")
    truth = _load_truth(args.truth) if args.truth else None
    if truth is not None and truth.shape[0] != n:
        raise DataError(f"truth has {truth.shape[0]} labels for {n} samples")

    _, report, affinity, labels = _run_pipeline(tensor, cfg, args.k, args.seed)
    payload = {
        "schema": SCHEMA,
        "command": "cluster",
        "k": args.k,
        "labels": [int(v) for v in labels.labels],
        "solver_report": _report_dict(report),
        "warnings": list(labels.warnings),
    }
    if truth is not None:
        payload["clustering_error"] = clustering_error(labels, truth)
    if args.affinity_out:
        write_tsr1(args.affinity_out, affinity[:, :, None])
        payload["affinity_path"] = args.affinity_out
    _emit(payload, args.out)
    return 0


def cmd_sweep(args):
    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip() != ""]
    except ValueError:
        raise ParameterError(f"--grid must be a comma list of numbers, got {args.grid!r}") from None
    if not grid:
        raise ParameterError("--grid must be nonempty")
    base = _solver_config(args)
    tensor = _load_input(args)
    n = tensor.shape[1]
    if not 1 <= args.k <= n:
        raise ParameterError(f"k must be in 1..{n}, got {args.k}")
    truth = _load_truth(args.truth) if args.truth else None
    if truth is not None and truth.shape[0] != n:
        raise DataError(f"truth has {truth.shape[0]} labels for {n} samples")

    rows = []
    for lam in grid:
        row = {"lambda_g": lam}
        try:
            cfg = SolverConfig(
                lambda_g=lam,
                lambda_h=base.lambda_h,
                affine=base.affine,
                rho=base.rho,
                max_iters=base.max_iters,
                tol_abs=base.tol_abs,
                tol_rel=base.tol_rel,
                normalize_columns=base.normalize_columns,
            )
            _, report, _, labels = _run_pipeline(tensor, cfg, args.k, args.seed)
            row["iterations"] = report.iterations
            row["objective"] = report.objective
            row["clustering_error"] = (
                clustering_error(labels, truth) if truth is not None else None
            )
        except (ValueError, DataError, RuntimeError) as exc:
            row["error_message"] = str(exc)
        rows.append(row)

    payload = {"schema": SCHEMA, "command": "sweep", "k": args.k, "rows": rows}
    _emit(payload, args.out)
    if args.out:
        csv_path = args.out.rsplit(".", 1)[0] + ".csv"
        fields = ["lambda_g", "clustering_error", "iterations", "objective", "error_message"]
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, restval="")
            writer.writeheader()
            for row in rows:
                writer.writerow({f: row.get(f, "") for f in fields})
    return 0


def _synth_spec(args):
    dims = _parse_int_list(args.dims, "--dims")
    samples = _parse_int_list(args.samples, "--samples")
    try:
        return SynthSpec(
            h=args.h,
            d_per_cluster=dims,
            samples_per_cluster=samples,
            depth=args.depth,
            noise_sigma=args.noise,
            affine=args.affine_data,
            shift_model=args.shift_model,
            seed=args.seed,
        )
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc


def cmd_synth(args):
    spec = _synth_spec(args)
    cfg = _solver_config(args)
    k = args.k if args.k is not None else len(spec.d_per_cluster)
    n = sum(spec.samples_per_cluster)
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in 1..{n}, got {k}")
    start = time.perf_counter()
    labeled = generate_submodules(spec)[1]
    _, report, _, labels = _run_pipeline(labeled.tensor, cfg, k, args.seed)
    err = clustering_error(labels, labeled.truth)
    runtime = time.perf_counter() - start
    payload = {
        "schema": SCHEMA,
        "command": "synth",
        "k": k,
        "n": n,
        "clustering_error": err,
        "labels": [int(v) for v in labels.labels],
        "solver_report": _report_dict(report),
        "warnings": list(labels.warnings),
    }
    _emit(payload, args.out, stdout_extra={"runtime_seconds": runtime})
    return 0


def _orthogonal_samples(spec, rng):
    total = sum(spec.d_per_cluster)
    if total > spec.h:
        raise ParameterError(
            f"orthogonal fixture needs h >= sum of dims ({total}), got {spec.h}"
        )
    samples = []
    row = 0
    for d_c, m_c in zip(spec.d_per_cluster, spec.samples_per_cluster):
        gens = np.zeros((spec.h, d_c, spec.depth))
        for j in range(d_c):
            gens[row + j, j, 0] = 1.0
        row += d_c
        coeffs = rng.standard_normal((d_c, m_c, spec.depth))
        samples.append(SubmoduleSample(generators=gens, points=tprod(gens, coeffs)))
    return samples


def cmd_check(args):
    spec = _synth_spec(args)
    if args.coherence_trials < 1:
        raise ParameterError(f"--coherence-trials must be at least 1, got {args.coherence_trials}")
    if args.budget < 1:
        raise ParameterError(f"--budget must be at least 1, got {args.budget}")
    if not 0 <= args.cluster_index < len(spec.d_per_cluster):
        raise ParameterError(
            f"--cluster-index must be in 0..{len(spec.d_per_cluster) - 1}, "
            f"got {args.cluster_index}"
        )
    if args.fixture == "orthogonal":
        samples = _orthogonal_samples(spec, np.random.default_rng(spec.seed))
    else:
        samples = generate_submodules(spec)[0]
    try:
        report = theorem3_check(
            samples,
            args.cluster_index,
            subtensor_budget=args.budget,
            seed=args.seed,
            coherence_trials=args.coherence_trials,
        )
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc
    payload = {
        "schema": SCHEMA,
        "command": "check",
        "cluster_index": args.cluster_index,
        "fixture": args.fixture,
        "report": asdict(report),
    }
    _emit(payload, args.out)
    return 0


_COMMANDS = {
    "cluster": cmd_cluster,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
    "check": cmd_check,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"ssmc {args.command}: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except DataError as exc:
        print(f"ssmc {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RuntimeError as exc:
        print(f"ssmc {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
