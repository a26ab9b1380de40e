"""
Command line interface::

    quditqmc generate {mixture,grid,moons,circles} --out data.csv ...
    quditqmc fit data.csv --map {rff,softmax} --out model.json ...
    quditqmc predict model.json data.csv --out predictions.csv [--mode shots --shots N --seed S]
    quditqmc evaluate predictions.csv truth.csv [--mixture train.csv] [--out report.json]
    quditqmc plotdata model.json --out grid.csv ...

Exit status is 0 on success, 2 for bad input (arguments, files, shapes) and
3 when a numerical invariant fails (non-density matrix, degenerate sample,
norm drift).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import datasets as ds
from .circuits import DegenerateSampleError, predict_batch
from .density import DensityError, expectation_matrix, fit
from .experiments import softmax_map_for
from .features import RffMap
from .metrics import classification_report, density_report
from .modelio import load_model, save_model

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_fmt = ds.format_float


class InputError(Exception):
    pass


def _meta_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def _write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_table(path, header: Sequence[str], rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_table(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    if any(len(r) != len(header) for r in rows):
        raise InputError(f"{path}: ragged rows")
    try:
        values = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    return header, values.reshape(len(rows), len(header))


def _read_dataset(path) -> ds.LabeledDataset:
    try:
        return ds.read_csv(path)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None


def _write_dataset(path, data: ds.LabeledDataset, params: dict):
    ds.write_csv(path, data)
    _write_json(_meta_path(path), params)


def cmd_generate(args) -> int:
    if args.kind == "mixture":
        data = ds.gen_gaussian_mixture_1d(args.n, args.weights, args.means, args.stddevs, args.seed)
    elif args.kind == "grid":
        data = ds.LabeledDataset(ds.gen_test_grid(args.lo, args.hi, args.n), None,
                                 {"kind": "grid", "lo": args.lo, "hi": args.hi, "n": args.n})
    elif args.kind == "moons":
        data = ds.gen_moons(args.n, args.noise, args.seed)
    else:
        data = ds.gen_circles(args.n, args.noise, args.factor, args.seed)
    params = dict(data.params)
    _write_dataset(args.out, data, params)

    if args.train_count is not None:
        if not (args.train_out and args.test_out):
            raise InputError("--train-count needs --train-out and --test-out")
        train, test = ds.train_test_split(data, args.train_count, args.split_seed)
        split = {"train_count": args.train_count, "split_seed": args.split_seed, "source": params}
        _write_dataset(args.train_out, train, dict(split, part="train"))
        _write_dataset(args.test_out, test, dict(split, part="test"))
    return EXIT_OK


def cmd_fit(args) -> int:
    data = _read_dataset(args.data)
    if args.map == "rff":
        fmap = RffMap(data.n_features, args.dim, args.gamma, args.rff_seed)
    else:
        if data.n_features != len(args.grid):
            raise InputError(f"--grid has {len(args.grid)} axes, data has {data.n_features} features")
        fmap = softmax_map_for(data.samples, args.beta, tuple(args.grid))
    n_classes = args.classes
    if data.labels is None:
        if n_classes not in (None, 1):
            raise InputError("unlabeled data can only train a single-class model")
    elif n_classes is None:
        n_classes = int(data.labels.max()) + 1
    if n_classes is not None and n_classes > fmap.dim:
        raise InputError(f"{n_classes} classes exceed the feature dimension {fmap.dim}")
    model = fit(data.samples, data.labels, fmap, n_classes)
    save_model(model, args.out)
    return EXIT_OK


def _prediction_rows(model, results, oracle: Optional[np.ndarray]):
    D = model.n_classes
    if D == 1:
        header = ["density"] + (["oracle"] if oracle is not None else [])
        rows = []
        for i, r in enumerate(results):
            row = [_fmt(r.joint[0])]
            if oracle is not None:
                row.append(_fmt(oracle[i, 0]))
            rows.append(row)
        return header, rows
    header = ["label"] + [f"joint_{j}" for j in range(D)] + [f"posterior_{j}" for j in range(D)]
    if oracle is not None:
        header += [f"oracle_{j}" for j in range(D)]
    rows = []
    for i, r in enumerate(results):
        row = [str(r.label)] + [_fmt(v) for v in r.joint] + [_fmt(v) for v in r.posterior]
        if oracle is not None:
            row += [_fmt(v) for v in oracle[i]]
        rows.append(row)
    return header, rows


def cmd_predict(args) -> int:
    model = _load(args.model)
    data = _read_dataset(args.data)
    if data.n_features != model.feature_map.input_dim:
        raise InputError(
            f"data has {data.n_features} features, the model's feature map expects "
            f"{model.feature_map.input_dim}"
        )
    shots = args.shots if args.mode == "shots" else None
    results = predict_batch(model, data.samples, shots=shots, seed=args.seed)
    oracle = None
    if args.with_oracle:
        states = model.feature_map.transform(data.samples)
        oracle = expectation_matrix(model, states) * model.priors
    header, rows = _prediction_rows(model, results, oracle)
    _write_table(args.out, header, rows)
    return EXIT_OK


def _mixture_params(path) -> dict:
    if path is None:
        return dict(ds.DEFAULT_MIXTURE)
    path = Path(path)
    meta = path if path.name.endswith(".meta.json") else _meta_path(path)
    try:
        with open(meta) as fh:
            params = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read mixture metadata {meta}: {exc}") from None
    params = params.get("source", params)
    if params.get("kind") != "mixture":
        raise InputError(f"{meta} does not describe a mixture dataset")
    return {k: params[k] for k in ("weights", "means", "stddevs")}


def cmd_evaluate(args) -> int:
    header, values = _read_table(args.predictions)
    truth = _read_dataset(args.truth)
    if len(values) != len(truth):
        raise InputError(f"{len(values)} predictions for {len(truth)} truth rows")
    if "label" in header:
        if truth.labels is None:
            raise InputError(f"{args.truth} has no label column")
        n_classes = sum(h.startswith("joint_") for h in header) or None
        report = classification_report(values[:, header.index("label")], truth.labels, n_classes)
    elif "density" in header:
        if truth.n_features != 1:
            raise InputError("density evaluation needs a 1-D grid as truth")
        params = _mixture_params(args.mixture)
        x = truth.samples[:, 0]
        report = density_report(x, values[:, header.index("density")], ds.mixture_pdf(x, **params))
        report["mixture"] = params
    else:
        raise InputError(f"{args.predictions}: no 'label' or 'density' column")
    for key in ("accuracy", "pearson", "mae"):
        if key in report:
            print(f"{key}: {report[key]:.6f}")
    if "confusion" in report:
        print("confusion:", report["confusion"])
    if args.out:
        _write_json(args.out, report)
    return EXIT_OK


def cmd_plotdata(args) -> int:
    model = _load(args.model)
    fmap = model.feature_map
    if fmap.input_dim == 1:
        grid = ds.gen_test_grid(args.lo, args.hi, args.n if args.n is not None else 1000)
        results = predict_batch(model, grid)
        if model.n_classes == 1:
            header = ["x", "density"]
            rows = [[_fmt(x), _fmt(r.joint[0])] for x, r in zip(grid[:, 0], results)]
        else:
            header = ["x"] + [f"P_{j}" for j in range(model.n_classes)] + ["label"]
            rows = [[_fmt(x)] + [_fmt(p) for p in r.posterior] + [str(r.label)]
                    for x, r in zip(grid[:, 0], results)]
    elif fmap.input_dim == 2:
        if args.xlim is None or args.ylim is None:
            if not hasattr(fmap, "anchors"):
                raise InputError("--xlim and --ylim are required for this model")
            pad = 0.5
            lo = fmap.anchors.min(axis=0) - pad
            hi = fmap.anchors.max(axis=0) + pad
        xlim = args.xlim or (lo[0], hi[0])
        ylim = args.ylim or (lo[1], hi[1])
        n = args.n if args.n is not None else 100
        xs = np.linspace(xlim[0], xlim[1], n)
        ys = np.linspace(ylim[0], ylim[1], n)
        grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        results = predict_batch(model, grid)
        if model.n_classes == 1:
            header = ["x", "y", "density"]
            rows = [[_fmt(p[0]), _fmt(p[1]), _fmt(r.joint[0])] for p, r in zip(grid, results)]
        else:
            header = ["x", "y"] + [f"P_{j}" for j in range(model.n_classes)] + ["label"]
            rows = [[_fmt(p[0]), _fmt(p[1])] + [_fmt(v) for v in r.posterior] + [str(r.label)]
                    for p, r in zip(grid, results)]
    else:
        raise InputError("plot data is only produced for 1-D or 2-D inputs")
    _write_table(args.out, header, rows)
    return EXIT_OK


def _load(path):
    try:
        return load_model(path)
    except DensityError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot load model {path}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quditqmc", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset as CSV (+ .meta.json sidecar)")
    g.add_argument("kind", choices=["mixture", "grid", "moons", "circles"])
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=None, help="sample count (mixture 1000, grid 1000, moons/circles 2000)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise", type=float, default=0.1)
    g.add_argument("--factor", type=float, default=0.5, help="inner/outer radius ratio for circles")
    g.add_argument("--weights", type=float, nargs=2, default=ds.DEFAULT_MIXTURE["weights"])
    g.add_argument("--means", type=float, nargs=2, default=ds.DEFAULT_MIXTURE["means"])
    g.add_argument("--stddevs", type=float, nargs=2, default=ds.DEFAULT_MIXTURE["stddevs"])
    g.add_argument("--lo", type=float, default=-4.0)
    g.add_argument("--hi", type=float, default=4.0)
    g.add_argument("--train-count", type=int, default=None, help="also write a seeded train/test split")
    g.add_argument("--split-seed", type=int, default=0)
    g.add_argument("--train-out")
    g.add_argument("--test-out")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="train per-class density matrices and write a model file")
    f.add_argument("data")
    f.add_argument("--out", required=True)
    f.add_argument("--map", choices=["rff", "softmax"], required=True)
    f.add_argument("--dim", type=int, default=18, help="RFF output dimension")
    f.add_argument("--gamma", type=float, default=4.0, help="RFF kernel bandwidth")
    f.add_argument("--rff-seed", type=int, default=0)
    f.add_argument("--grid", type=int, nargs="+", default=[3, 3], help="softmax anchors per axis")
    f.add_argument("--beta", type=float, default=4.0, help="softmax inverse temperature")
    f.add_argument("--classes", type=int, default=None)
    f.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="run the prediction circuit on every sample")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["exact", "shots"], default="exact")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="base seed for shot sampling")
    p.add_argument("--with-oracle", action="store_true",
                   help="append closed-form pi_j <psi|rho_j|psi> columns")
    p.set_defaults(func=cmd_predict)

    e = sub.add_parser("evaluate", help="score predictions against ground truth")
    e.add_argument("predictions")
    e.add_argument("truth", help="labeled CSV, or the 1-D grid CSV for density predictions")
    e.add_argument("--mixture", help="mixture CSV (or its .meta.json) giving the analytic pdf")
    e.add_argument("--out", help="write the report as JSON")
    e.set_defaults(func=cmd_evaluate)

    q = sub.add_parser("plotdata", help="evaluate a model on a dense grid for plotting")
    q.add_argument("model")
    q.add_argument("--out", required=True)
    q.add_argument("--lo", type=float, default=-4.0)
    q.add_argument("--hi", type=float, default=4.0)
    q.add_argument("--n", type=int, default=None, help="grid points (1-D: 1000, 2-D: per axis, 100)")
    q.add_argument("--xlim", type=float, nargs=2)
    q.add_argument("--ylim", type=float, nargs=2)
    q.set_defaults(func=cmd_plotdata)
    return parser


_DEFAULT_N = {"mixture": 1000, "grid": 1000, "moons": 2000, "circles": 2000}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate" and args.n is None:
        args.n = _DEFAULT_N[args.kind]
    try:
        return args.func(args)
    except (DensityError, DegenerateSampleError, ArithmeticError) as exc:
        print(f"quditqmc: numerical invariant failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, OSError, ValueError) as exc:
        print(f"quditqmc: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
