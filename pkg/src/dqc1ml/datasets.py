"""Benchmark datasets (ad-hoc, two moons, circles) and their CSV files."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.datasets import make_circles, make_moons

from .feature_map import FeatureMapConfig, encoding_unitaries, normalized_trace_gram
from .qcore import random_unitary

TWO_PI = 2 * np.pi
MAX_DRAWS = 1_000_000
CSV_HEADER = ["x1", "x2", "label"]

# Target interval of the min-max rescale for moons/circles. The maximum is
# kept well below 2*pi so the two ends of a feature never alias in the
# 2*pi-periodic single-qubit phases.
DEFAULT_FEATURE_RANGE = (0.0, np.pi)

# frozen noise levels, calibrated so exact-mode accuracy at alpha=1 is close
# to 0.935 (moons) and 0.925 (circles) with an 800/200 split
MOONS_NOISE = 0.06
CIRCLES_NOISE = 0.12
CIRCLES_FACTOR = 0.5

ADHOC_LABELINGS = ("prototype", "overlap")
ADHOC_DEFAULT_GAP = {"prototype": 0.2, "overlap": 0.3}


class DatasetFormatError(ValueError):
    pass


@dataclass
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    seed: int = 0
    # affine map applied to raw features: scaled = (raw - lo) * scale + range_lo
    scaling: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
        if len(self.points) != len(self.labels):
            raise ValueError(
                f"{len(self.points)} points but {len(self.labels)} labels"
            )
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be +1 or -1")

    def __len__(self) -> int:
        return len(self.labels)

    def counts(self) -> dict[int, int]:
        return {1: int(np.sum(self.labels == 1)), -1: int(np.sum(self.labels == -1))}

    def subset(self, idx, name: str | None = None) -> "LabeledDataset":
        return LabeledDataset(
            self.points[idx], self.labels[idx], name or self.name, self.seed, dict(self.scaling)
        )


@dataclass(frozen=True)
class SplitSpec:
    train_per_label: int
    test_per_label: int
    seed: int = 0

    def __post_init__(self):
        if self.train_per_label < 1 or self.test_per_label < 1:
            raise ValueError("split counts must be >= 1")


def minmax_rescale(X, feature_range=DEFAULT_FEATURE_RANGE) -> tuple[np.ndarray, dict]:
    """Per-feature affine map of ``X`` onto ``feature_range``."""
    X = np.asarray(X, dtype=float)
    lo_t, hi_t = (float(v) for v in feature_range)
    if not 0.0 <= lo_t < hi_t < TWO_PI:
        raise ValueError(f"feature range {feature_range} must lie inside [0, 2pi)")
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    scale = (hi_t - lo_t) / span
    params = {"lo": lo.tolist(), "scale": scale.tolist(), "range": [lo_t, hi_t]}
    return (X - lo) * scale + lo_t, params


def undo_rescale(X, params: dict) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return (X - params["range"][0]) / np.asarray(params["scale"]) + np.asarray(params["lo"])


def _pm1(y01) -> np.ndarray:
    return np.where(np.asarray(y01) == 1, 1, -1)


def gen_moons(
    n_total: int = 1000,
    noise_std: float = MOONS_NOISE,
    seed: int = 0,
    feature_range=DEFAULT_FEATURE_RANGE,
) -> LabeledDataset:
    """Two interleaved half circles with Gaussian noise, rescaled."""
    if n_total < 2 or n_total % 2:
        raise ValueError(f"n_total must be a positive even number, got {n_total}")
    if noise_std < 0:
        raise ValueError("noise_std must be >= 0")
    X, y = make_moons(n_samples=n_total, noise=noise_std or None, random_state=seed)
    Xs, params = minmax_rescale(X, feature_range)
    return LabeledDataset(Xs, _pm1(y), "moons", seed, params)


def gen_circles(
    n_total: int = 1000,
    factor: float = CIRCLES_FACTOR,
    noise_std: float = CIRCLES_NOISE,
    seed: int = 0,
    feature_range=DEFAULT_FEATURE_RANGE,
) -> LabeledDataset:
    """Concentric circles (inner radius ``factor``) with Gaussian noise, rescaled.

    The inner circle is labeled +1.
    """
    if not 0 < factor < 1:
        raise ValueError(f"factor must lie in (0, 1), got {factor}")
    if n_total < 2 or n_total % 2:
        raise ValueError(f"n_total must be a positive even number, got {n_total}")
    if noise_std < 0:
        raise ValueError("noise_std must be >= 0")
    X, y = make_circles(
        n_samples=n_total, factor=factor, noise=noise_std or None, random_state=seed
    )
    Xs, params = minmax_rescale(X, feature_range)
    return LabeledDataset(Xs, _pm1(y), "circles", seed, params)


def stratified_split(data: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Balanced train/test split with ``spec`` counts per label."""
    rng = np.random.default_rng(spec.seed)
    train_idx, test_idx = [], []
    for lab in (1, -1):
        idx = np.flatnonzero(data.labels == lab)
        need = spec.train_per_label + spec.test_per_label
        if len(idx) < need:
            raise ValueError(f"label {lab:+d} has {len(idx)} points, split needs {need}")
        idx = rng.permutation(idx)
        train_idx.append(idx[: spec.train_per_label])
        test_idx.append(idx[spec.train_per_label : need])
    tr, te = np.concatenate(train_idx), np.concatenate(test_idx)
    return data.subset(tr, f"{data.name}-train"), data.subset(te, f"{data.name}-test")


class AdhocLabeler:
    """Seeded labeling rule of the ad-hoc dataset.

    ``"prototype"``: two hidden reference points ``a``, ``b`` are drawn and
    ``x`` is labeled by ``K(x, a) - K(x, b)`` with the DQC1 kernel
    ``K = |tr(u(x) u(y)^dagger)| / 4``. The rule is a difference of two kernel
    sections, so the data are separable by that kernel.

    ``"overlap"``: ``x`` is labeled by ``<phi(x)| V^dagger (Z⊗Z) V |phi(x)>``
    with ``|phi(x)> = u(x)|00>`` and a seeded random 4x4 unitary ``V``. This
    is separable by the state-overlap kernel, not by the trace kernel.
    """

    def __init__(self, seed: int, labeling: str = "prototype", fm: FeatureMapConfig = FeatureMapConfig()):
        if labeling not in ADHOC_LABELINGS:
            raise ValueError(f"unknown labeling {labeling!r}; expected one of {ADHOC_LABELINGS}")
        self.labeling = labeling
        self.fm = fm
        rng = np.random.default_rng([int(seed), 0xAD])
        if labeling == "prototype":
            self.refs = rng.uniform(0, TWO_PI, size=(2, 2))
        else:
            v = random_unitary(4, rng)
            self.observable = v.conj().T @ np.diag([1.0, -1.0, -1.0, 1.0]) @ v

    def score(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.labeling == "prototype":
            k = np.abs(normalized_trace_gram(X, self.refs, self.fm))
            return k[:, 0] - k[:, 1]
        psi = encoding_unitaries(X, self.fm)[:, :, 0]
        return np.real(np.einsum("ni,ij,nj->n", psi.conj(), self.observable, psi))

    def labels(self, X) -> np.ndarray:
        return np.where(self.score(X) > 0, 1, -1)


def gen_adhoc(
    spec: SplitSpec,
    gap: float | None = None,
    fm: FeatureMapConfig = FeatureMapConfig(),
    labeling: str = "prototype",
    batch: int = 512,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Ad-hoc dataset, balanced, with a rejection gap around the boundary.

    Points are uniform on ``[0, 2pi)^2``; any point whose labeling score has
    magnitude below ``gap`` is rejected.
    """
    gap = ADHOC_DEFAULT_GAP[labeling] if gap is None else float(gap)
    if gap <= 0:
        raise ValueError(f"gap must be positive, got {gap}")
    labeler = AdhocLabeler(spec.seed, labeling, fm)
    rng = np.random.default_rng([int(spec.seed), 0xDA7A])
    need = spec.train_per_label + spec.test_per_label
    pos, neg = [], []
    draws = 0
    while len(pos) < need or len(neg) < need:
        if draws >= MAX_DRAWS:
            raise RuntimeError(
                f"rejection sampling exceeded {MAX_DRAWS} draws (gap={gap} too large?)"
            )
        X = rng.uniform(0, TWO_PI, size=(batch, 2))
        s = labeler.score(X)
        # consume draws in order so results do not depend on the batch size
        for x, v in zip(X, s):
            draws += 1
            if abs(v) >= gap:
                (pos if v > 0 else neg).append(x)
            if (len(pos) >= need and len(neg) >= need) or draws >= MAX_DRAWS:
                break
    pos, neg = np.array(pos[:need]), np.array(neg[:need])
    t = spec.train_per_label
    meta = {"labeling": labeling, "gap": gap, "range": [0.0, TWO_PI]}

    def make(p, q, suffix):
        pts = np.vstack([p, q])
        labs = np.r_[np.ones(len(p), dtype=int), -np.ones(len(q), dtype=int)]
        return LabeledDataset(pts, labs, f"adhoc-{suffix}", spec.seed, dict(meta))

    return make(pos[:t], neg[:t], "train"), make(pos[t:], neg[t:], "test")


def save_dataset(d: LabeledDataset, path) -> None:
    """Write ``x1,x2,label`` CSV; floats use 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for (a, b), lab in zip(d.points, d.labels):
            w.writerow([f"{a:.17g}", f"{b:.17g}", int(lab)])


def load_dataset(path, name: str | None = None) -> LabeledDataset:
    path = Path(path)
    pts, labs = [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None:
            raise DatasetFormatError(f"{path}: empty dataset")
        if [h.strip() for h in header] != CSV_HEADER:
            raise DatasetFormatError(f"{path}:1: expected header {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(r, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DatasetFormatError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                a, b, lab = float(row[0]), float(row[1]), int(row[2])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from None
            if lab not in (1, -1):
                raise DatasetFormatError(f"{path}:{lineno}: label {lab} is not +1 or -1")
            pts.append((a, b))
            labs.append(lab)
    if not pts:
        raise DatasetFormatError(f"{path}: empty dataset")
    return LabeledDataset(np.array(pts), np.array(labs), name or path.stem)


def save_kernel(K, path) -> None:
    np.savetxt(path, np.asarray(K), delimiter=",", fmt="%.17g")


def load_kernel(path) -> np.ndarray:
    K = np.loadtxt(path, delimiter=",", ndmin=2)
    if K.shape[0] != K.shape[1]:
        raise DatasetFormatError(f"{path}: kernel matrix is not square ({K.shape})")
    return K
