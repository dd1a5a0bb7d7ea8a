"""Kernel -> SVM -> predict pipeline and the parameter sweeps built on it."""

from __future__ import annotations

from dataclasses import asdict
from typing import Iterable

import numpy as np

from . import datasets as ds
from .engine import Dqc1Config
from .feature_map import FeatureMapConfig
from .svm import (
    DEFAULT_C,
    SvmModel,
    accuracy,
    build_kernel_matrix,
    build_kernel_rows,
    classify,
    decision_values,
    psd_repair,
    svm_train,
)

DATASET_NAMES = ("adhoc", "moons", "circles")

# split sizes used for the reported figures
ADHOC_TRAIN_PER_LABEL = 20
ADHOC_TEST_PER_LABEL = 5
BENCH_N_TOTAL = 1000
BENCH_TRAIN = 800
BENCH_TEST = 200


def make_split(
    name: str,
    seed: int = 0,
    fm: FeatureMapConfig = FeatureMapConfig(),
    train: int | None = None,
    test: int | None = None,
    n_total: int | None = None,
    noise_std: float | None = None,
    gap: float | None = None,
    labeling: str = "prototype",
) -> tuple[ds.LabeledDataset, ds.LabeledDataset]:
    """Train/test pair for one of the named datasets.

    For ``adhoc`` the counts are per label; for ``moons``/``circles`` they
    are totals and are split evenly between the labels.
    """
    if name == "adhoc":
        spec = ds.SplitSpec(
            train or ADHOC_TRAIN_PER_LABEL, test or ADHOC_TEST_PER_LABEL, seed
        )
        return ds.gen_adhoc(spec, gap, fm, labeling)
    if name not in DATASET_NAMES:
        raise ValueError(f"unknown dataset {name!r}; valid names: {', '.join(DATASET_NAMES)}")
    train = BENCH_TRAIN if train is None else train
    test = BENCH_TEST if test is None else test
    n_total = _n_total_for(train, test) if n_total is None else n_total
    if train % 2 or test % 2:
        raise ValueError("train/test totals must be even for a balanced split")
    data = make_full(name, seed, n_total, noise_std)
    return ds.stratified_split(data, ds.SplitSpec(train // 2, test // 2, seed))


def _n_total_for(train: int, test: int) -> int:
    n = max(BENCH_N_TOTAL, train + test)
    return n + (n % 2)


def make_full(name: str, seed: int = 0, n_total: int = BENCH_N_TOTAL, noise_std: float | None = None):
    if name == "moons":
        return ds.gen_moons(n_total, ds.MOONS_NOISE if noise_std is None else noise_std, seed)
    if name == "circles":
        return ds.gen_circles(
            n_total, ds.CIRCLES_FACTOR, ds.CIRCLES_NOISE if noise_std is None else noise_std, seed
        )
    raise ValueError(f"unknown dataset {name!r}; valid names: moons, circles")


def model_meta(cfg: Dqc1Config, fm: FeatureMapConfig) -> dict:
    return {
        "alpha": cfg.alpha,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "shots": cfg.shots,
        "noise_p": cfg.noise_p,
        "feature_map": {"l": fm.layers, "n": fm.n_qubits, "extra_layer": fm.extra_layer},
    }


def config_from_meta(meta: dict) -> tuple[Dqc1Config, FeatureMapConfig]:
    fmd = meta.get("feature_map", {})
    fm = FeatureMapConfig(
        n_qubits=int(fmd.get("n", 2)),
        layers=int(fmd.get("l", 2)),
        extra_layer=bool(fmd.get("extra_layer", False)),
    )
    cfg = Dqc1Config(
        n_target_qubits=fm.n_qubits,
        alpha=float(meta.get("alpha", 1.0)),
        mode=meta.get("mode", "exact"),
        shots=int(meta.get("shots", Dqc1Config.shots)),
        seed=int(meta.get("seed", 0)),
        noise_p=float(meta.get("noise_p", 0.0)),
    )
    return cfg, fm


def fit(
    train: ds.LabeledDataset,
    cfg: Dqc1Config,
    fm: FeatureMapConfig = FeatureMapConfig(),
    C: float = DEFAULT_C,
    kernel=None,
) -> SvmModel:
    """Phases one and two: kernel on all training pairs, then the SVM dual."""
    k = build_kernel_matrix(train.points, cfg, fm) if kernel is None else kernel
    k = psd_repair(k)
    model = svm_train(k, train.labels, C, points=train.points)
    model.meta = model_meta(cfg, fm) | {"psd_repaired": k.psd_repaired}
    return model


def evaluate(
    model: SvmModel,
    test: ds.LabeledDataset,
    cfg: Dqc1Config,
    fm: FeatureMapConfig = FeatureMapConfig(),
    kernel_rows=None,
) -> dict:
    """Phase three: kernel rows against the training set, then classify."""
    rows = build_kernel_rows(test.points, model.points, cfg, fm) if kernel_rows is None else kernel_rows
    margins = decision_values(model, rows)
    pred = classify(margins)
    return {
        "accuracy": accuracy(pred, test.labels),
        "predictions": [int(p) for p in pred],
        "margins": [float(m) for m in margins],
    }


def run_pipeline(
    train: ds.LabeledDataset,
    test: ds.LabeledDataset,
    cfg: Dqc1Config,
    fm: FeatureMapConfig = FeatureMapConfig(),
    C: float = DEFAULT_C,
) -> dict:
    model = fit(train, cfg, fm, C)
    report = evaluate(model, test, cfg, fm)
    report["model"] = model
    return report


def validate_alphas(alphas: Iterable[float]) -> list[float]:
    out = [float(a) for a in alphas]
    bad = [a for a in out if not 0.0 <= a <= 1.0]
    if bad:
        raise ValueError(f"alpha values outside [0, 1]: {bad}")
    if not out:
        raise ValueError("alpha list is empty")
    return out


def alpha_sweep(
    name: str,
    alphas: Iterable[float],
    seeds: Iterable[int],
    cfg: Dqc1Config = Dqc1Config(),
    fm: FeatureMapConfig = FeatureMapConfig(),
    C: float = DEFAULT_C,
    **split_kw,
) -> list[dict]:
    """Test accuracy against control-qubit polarization, using the raw
    (alpha-scaled) kernel. One row per alpha with the mean and standard
    deviation over ``seeds``; each seed draws a fresh dataset and a fresh
    measurement stream."""
    alphas = validate_alphas(alphas)
    seeds = list(seeds)
    splits = {s: make_split(name, s, fm, **split_kw) for s in seeds}
    rows = []
    for a in alphas:
        accs = []
        for s in seeds:
            train, test = splits[s]
            run_cfg = cfg.with_(alpha=a, seed=s)
            accs.append(run_pipeline(train, test, run_cfg, fm, C)["accuracy"])
        rows.append(
            {
                "alpha": a,
                "mean_accuracy": float(np.mean(accs)),
                "std_accuracy": float(np.std(accs)),
                "accuracies": accs,
            }
        )
    return rows


def config_dict(cfg: Dqc1Config, fm: FeatureMapConfig, **extra) -> dict:
    return {"dqc1": asdict(cfg), "feature_map": asdict(fm), **extra}
