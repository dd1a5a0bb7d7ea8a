"""Command-line driver: ``dqc1ml <command> [options]``.

Every command writes ``manifest.json`` into its output directory with the
fully resolved configuration. Option values are resolved as command-line
flag, then ``--config`` JSON file, then built-in default.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import datasets as ds
from . import experiments as ex
from .engine import (
    DEFAULT_SHOTS,
    Dqc1Config,
    apply_depolarizing,
    per_qubit_purities,
    prepare_target_mixed_via_ancilla,
)
from .feature_map import FeatureMapConfig
from .qcore import purity
from .resources import resource_map
from .svm import DEFAULT_C, KernelMatrix, build_kernel_matrix, load_model, save_model

log = logging.getLogger("dqc1ml")

DEFAULTS = {
    "alpha": 1.0,
    "mode": "exact",
    "shots": DEFAULT_SHOTS,
    "seed": 0,
    "layers": 2,
    "svm_c": DEFAULT_C,
    "noise_p": 0.0,
    "out": "out",
    "dataset": "adhoc",
    "train": None,
    "test": None,
    "n": None,
    "noise_std": None,
    "gap": None,
    "labeling": "prototype",
    "alphas": "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
    "repetitions": 5,
}

FIGURES = ("fig5", "fig6", "fig7", "fig8", "fig9", "fig10")


class CliError(Exception):
    pass


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("engine")
    g.add_argument("--alpha", type=float, help="control-qubit polarization in [0, 1]")
    g.add_argument("--mode", choices=("exact", "shots"))
    g.add_argument("--shots", type=int, help="shots per measured observable")
    g.add_argument("--seed", type=int, help="root seed")
    g.add_argument("--layers", type=int, help="feature-map layers l")
    g.add_argument("--svm-c", type=float, dest="svm_c", help="SVM box constraint C")
    g.add_argument("--noise-p", type=float, dest="noise_p", help="depolarizing strength in [0, 1]")
    g.add_argument("--out", help="output directory")
    g.add_argument("--config", help="JSON file with option defaults")


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset")
    g.add_argument("--dataset", help=f"one of {', '.join(ex.DATASET_NAMES)}")
    g.add_argument("--train", type=int, help="training size (per label for adhoc, total otherwise)")
    g.add_argument("--test", type=int, help="test size (per label for adhoc, total otherwise)")
    g.add_argument("--n", type=int, help="total points generated for moons/circles")
    g.add_argument("--noise-std", type=float, dest="noise_std", help="moons/circles feature noise")
    g.add_argument("--gap", type=float, help="adhoc rejection gap")
    g.add_argument("--labeling", choices=ds.ADHOC_LABELINGS, help="adhoc labeling rule")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqc1ml",
        description="Kernel classification with one-clean-qubit (DQC1) trace estimation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a dataset and write CSV files")
    _add_dataset_flags(p)
    _add_engine_flags(p)

    p = sub.add_parser("kernel", help="kernel matrix and per-pair resource table")
    p.add_argument("--data", required=True, help="dataset CSV (x1,x2,label)")
    _add_engine_flags(p)

    p = sub.add_parser("train", help="train an SVM on a dataset CSV")
    p.add_argument("--data", required=True, help="training CSV")
    p.add_argument("--kernel", help="precomputed kernel CSV (square, no header)")
    _add_engine_flags(p)

    p = sub.add_parser("evaluate", help="score a trained model on a dataset CSV")
    p.add_argument("--model", required=True, help="model JSON from 'train'")
    p.add_argument("--data", required=True, help="test CSV")
    p.add_argument("--kernel-rows", dest="kernel_rows", help="precomputed test-vs-train kernel CSV")
    _add_engine_flags(p)

    p = sub.add_parser("sweep-alpha", help="accuracy as a function of alpha")
    p.add_argument("--alphas", help="comma-separated alpha values")
    p.add_argument("--repetitions", type=int, help="number of seeds averaged per alpha")
    _add_dataset_flags(p)
    _add_engine_flags(p)

    p = sub.add_parser("reproduce", help="regenerate the data behind one figure")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--repetitions", type=int, help="seeds averaged for sweep figures")
    _add_engine_flags(p)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the optional config file over ``DEFAULTS``."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise CliError(f"config {args.config} must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config", "verbose"):
            cfg[key] = value
    return cfg


def engine_config(opts: dict, **overrides) -> tuple[Dqc1Config, FeatureMapConfig]:
    fm = FeatureMapConfig(layers=int(opts["layers"]))
    params = dict(
        n_target_qubits=fm.n_qubits,
        alpha=float(opts["alpha"]),
        mode=opts["mode"],
        shots=int(opts["shots"]),
        seed=int(opts["seed"]),
        noise_p=float(opts["noise_p"]),
    )
    params.update(overrides)
    return Dqc1Config(**params), fm


def _out_dir(opts: dict) -> Path:
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_manifest(out: Path, command: str, opts: dict, outputs: list[str], **extra) -> None:
    doc = {
        "command": command,
        "version": __version__,
        "config": opts,
        "outputs": sorted(outputs),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    doc.update(extra)
    (out / "manifest.json").write_text(json.dumps(doc, indent=2, default=_jsonable))


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _dataset_summary(d: ds.LabeledDataset) -> str:
    c = d.counts()
    return f"{d.name}: {len(d)} points (+1: {c[1]}, -1: {c[-1]})"


def _split_kwargs(opts: dict) -> dict:
    return {
        "train": opts["train"],
        "test": opts["test"],
        "n_total": opts["n"],
        "noise_std": opts["noise_std"],
        "gap": opts["gap"],
        "labeling": opts["labeling"],
    }


# -- commands ---------------------------------------------------------------


def cmd_generate(opts: dict) -> None:
    name = opts["dataset"]
    if name not in ex.DATASET_NAMES:
        raise CliError(f"unknown dataset {name!r}; valid names: {', '.join(ex.DATASET_NAMES)}")
    out = _out_dir(opts)
    _, fm = engine_config(opts)
    seed = int(opts["seed"])
    outputs = []
    if name == "adhoc":
        train, test = ex.make_split(name, seed, fm, **_split_kwargs(opts))
        parts = {"train.csv": train, "test.csv": test}
    else:
        full = ex.make_full(name, seed, opts["n"] or ex.BENCH_N_TOTAL, opts["noise_std"])
        parts = {f"{name}.csv": full}
        n_train, n_test = opts["train"], opts["test"]
        if n_train is None and n_test is None:
            # default split is 80/20 of the generated set
            n_train = int(round(0.8 * len(full))) // 2 * 2
            n_test = len(full) - n_train
        if n_train and n_test:
            train, test = ds.stratified_split(full, ds.SplitSpec(n_train // 2, n_test // 2, seed))
            parts.update({"train.csv": train, "test.csv": test})
    for fname, d in parts.items():
        ds.save_dataset(d, out / fname)
        outputs.append(fname)
        print(_dataset_summary(d))
    meta = {fname: {"rows": len(d), "counts": d.counts(), "scaling": d.scaling} for fname, d in parts.items()}
    write_manifest(out, "generate", opts, outputs, datasets=meta)


def cmd_kernel(opts: dict) -> None:
    data = ds.load_dataset(opts["data"])
    out = _out_dir(opts)
    cfg, fm = engine_config(opts)
    k = build_kernel_matrix(data.points, cfg, fm)
    ds.save_kernel(k.values, out / "kernel.csv")
    records = resource_map(data.points, cfg, fm)
    _write_csv(
        out / "resources.csv",
        ["i", "j", "kernel_abs", "delta_coherence", "geometric_discord", "bound_ok"],
        (
            [r.i, r.j, f"{r.kernel_abs:.17g}", f"{r.delta_coherence:.17g}",
             f"{r.geometric_discord:.17g}", str(r.bound_satisfied).lower()]
            for r in records
        ),
    )
    violations = sum(not r.bound_satisfied for r in records)
    print(f"kernel {k.size}x{k.size} ({cfg.mode}, alpha={cfg.alpha}); bound violations: {violations}")
    write_manifest(out, "kernel", opts, ["kernel.csv", "resources.csv"], bound_violations=violations)


def cmd_train(opts: dict) -> None:
    data = ds.load_dataset(opts["data"])
    out = _out_dir(opts)
    cfg, fm = engine_config(opts)
    kernel = None
    if opts.get("kernel"):
        K = ds.load_kernel(opts["kernel"])
        if K.shape[0] != len(data):
            raise CliError(f"kernel is {K.shape[0]}x{K.shape[0]} but dataset has {len(data)} points")
        kernel = KernelMatrix(K, cfg.mode, cfg.alpha)
    model = ex.fit(data, cfg, fm, float(opts["svm_c"]), kernel=kernel)
    save_model(model, out / "model.json")
    print(f"trained on {len(data)} points: {model.support.size} support vectors, "
          f"{model.n_updates} SMO updates, converged={model.converged}")
    write_manifest(out, "train", opts, ["model.json"])


def cmd_evaluate(opts: dict) -> None:
    model = load_model(opts["model"])
    data = ds.load_dataset(opts["data"])
    out = _out_dir(opts)
    cfg, fm = ex.config_from_meta(model.meta)
    rows = None
    if opts.get("kernel_rows"):
        rows = np.loadtxt(opts["kernel_rows"], delimiter=",", ndmin=2)
        if rows.shape != (len(data), model.beta.size):
            raise CliError(
                f"kernel rows have shape {rows.shape}, expected ({len(data)}, {model.beta.size})"
            )
    report = ex.evaluate(model, data, cfg, fm, kernel_rows=rows)
    report["config"] = ex.config_dict(cfg, fm, C=model.C, model=str(opts["model"]), data=str(opts["data"]))
    (out / "report.json").write_text(json.dumps(report, indent=2))
    print(f"accuracy {report['accuracy']:.4f} on {len(data)} points")
    write_manifest(out, "evaluate", opts, ["report.json"], accuracy=report["accuracy"])


def _parse_alphas(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        vals = text
    else:
        try:
            vals = [float(v) for v in str(text).split(",") if v.strip()]
        except ValueError as exc:
            raise CliError(f"bad alpha list {text!r}: {exc}") from None
    return ex.validate_alphas(vals)


def _sweep_rows(name: str, opts: dict, alphas) -> list[dict]:
    cfg, fm = engine_config(opts)
    seeds = range(int(opts["seed"]), int(opts["seed"]) + int(opts["repetitions"]))
    return ex.alpha_sweep(name, alphas, seeds, cfg, fm, float(opts["svm_c"]), **_split_kwargs(opts))


def _write_sweep(path: Path, rows: list[dict]) -> None:
    _write_csv(
        path,
        ["alpha", "mean_accuracy", "std_accuracy"],
        ([r["alpha"], f"{r['mean_accuracy']:.6g}", f"{r['std_accuracy']:.6g}"] for r in rows),
    )


def cmd_sweep_alpha(opts: dict) -> None:
    alphas = _parse_alphas(opts["alphas"])
    name = opts["dataset"]
    if name not in ex.DATASET_NAMES:
        raise CliError(f"unknown dataset {name!r}; valid names: {', '.join(ex.DATASET_NAMES)}")
    out = _out_dir(opts)
    rows = _sweep_rows(name, opts, alphas)
    _write_sweep(out / "sweep.csv", rows)
    for r in rows:
        print(f"alpha={r['alpha']:.2f} accuracy={r['mean_accuracy']:.3f} ± {r['std_accuracy']:.3f}")
    write_manifest(out, "sweep-alpha", opts, ["sweep.csv"], per_seed=rows)


# -- figure reproduction ----------------------------------------------------


def _fig5(opts: dict, out: Path) -> dict:
    cfg, fm = engine_config(opts)
    train, test = ex.make_split("adhoc", cfg.seed, fm, **_split_kwargs(opts))
    res = ex.run_pipeline(train, test, cfg, fm, float(opts["svm_c"]))
    _write_csv(
        out / "fig5_predictions.csv",
        ["x1", "x2", "label", "predicted", "margin"],
        (
            [f"{x[0]:.17g}", f"{x[1]:.17g}", int(y), p, f"{m:.17g}"]
            for x, y, p, m in zip(test.points, test.labels, res["predictions"], res["margins"])
        ),
    )
    ds.save_dataset(train, out / "fig5_train.csv")
    print(f"fig5: test accuracy {res['accuracy']:.3f}")
    return {"accuracy": res["accuracy"], "outputs": ["fig5_predictions.csv", "fig5_train.csv"]}


def _fig6(opts: dict, out: Path) -> dict:
    rows = _sweep_rows("adhoc", opts, _parse_alphas(opts["alphas"]))
    _write_sweep(out / "fig6_sweep.csv", rows)
    return {"sweep": rows, "outputs": ["fig6_sweep.csv"]}


def _fig7(opts: dict, out: Path) -> dict:
    result = {"outputs": []}
    alphas = _parse_alphas(opts["alphas"])
    for name in ("moons", "circles"):
        rows = _sweep_rows(name, opts, alphas)
        _write_sweep(out / f"fig7_{name}.csv", rows)
        result[name] = rows
        result["outputs"].append(f"fig7_{name}.csv")
        print(f"fig7 {name}: accuracy at alpha={rows[-1]['alpha']} is {rows[-1]['mean_accuracy']:.3f}")
    return result


def _fig8(opts: dict, out: Path) -> dict:
    """Ideal kernel next to a noisy, shot-sampled one, with their diagonals."""
    cfg, fm = engine_config(opts)
    train, _ = ex.make_split("adhoc", cfg.seed, fm, **_split_kwargs(opts))
    ideal = build_kernel_matrix(train.points, cfg.with_(mode="exact", noise_p=0.0), fm).values
    noisy_cfg = cfg.with_(mode="shots", noise_p=cfg.noise_p or 0.15)
    noisy = build_kernel_matrix(train.points, noisy_cfg, fm).values
    ds.save_kernel(ideal, out / "fig8_kernel_ideal.csv")
    ds.save_kernel(noisy, out / "fig8_kernel_noisy.csv")
    diff = np.abs(np.diag(ideal) - np.diag(noisy))
    _write_csv(
        out / "fig8_diagonal.csv",
        ["index", "ideal", "noisy"],
        ([i, f"{a:.17g}", f"{b:.17g}"] for i, (a, b) in enumerate(zip(np.diag(ideal), np.diag(noisy)))),
    )
    targets = prepare_target_mixed_via_ancilla(fm.n_qubits)
    noisy_targets = apply_depolarizing(targets, noisy_cfg.noise_p)
    print(f"fig8: diagonal deviation max {diff.max():.3f}, mean {diff.mean():.3f}")
    return {
        "diag_deviation_max": float(diff.max()),
        "diag_deviation_mean": float(diff.mean()),
        "noisy_config": ex.config_dict(noisy_cfg, fm),
        "target_purity_joint": purity(noisy_targets),
        "target_purity_per_qubit": per_qubit_purities(noisy_targets),
        "outputs": ["fig8_kernel_ideal.csv", "fig8_kernel_noisy.csv", "fig8_diagonal.csv"],
    }


def _resource_figure(opts: dict, out: Path, column: str, fname: str) -> dict:
    cfg, fm = engine_config(opts)
    train, _ = ex.make_split("adhoc", cfg.seed, fm, **_split_kwargs(opts))
    records = resource_map(train.points, cfg, fm)
    n = len(train)
    grid = np.zeros((n, n))
    for r in records:
        grid[r.i, r.j] = grid[r.j, r.i] = getattr(r, column)
    ds.save_kernel(grid, out / fname)
    violations = sum(not r.bound_satisfied for r in records)
    print(f"{fname}: {column} in [{grid.min():.4g}, {grid.max():.4g}], bound violations {violations}")
    return {"bound_violations": violations, "outputs": [fname]}


def cmd_reproduce(opts: dict) -> None:
    out = _out_dir(opts)
    fig = opts["figure"]
    if fig == "fig5":
        result = _fig5(opts, out)
    elif fig == "fig6":
        result = _fig6(opts, out)
    elif fig == "fig7":
        result = _fig7(opts, out)
    elif fig == "fig8":
        result = _fig8(opts, out)
    elif fig == "fig9":
        result = _resource_figure(opts, out, "delta_coherence", "fig9_coherence.csv")
    else:
        result = _resource_figure(opts, out, "geometric_discord", "fig10_discord.csv")
    outputs = result.pop("outputs")
    write_manifest(out, f"reproduce {fig}", opts, outputs, result=result)


COMMANDS = {
    "generate": cmd_generate,
    "kernel": cmd_kernel,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep-alpha": cmd_sweep_alpha,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve(args)
        COMMANDS[args.command](opts)
    except (CliError, ValueError, OSError, RuntimeError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
