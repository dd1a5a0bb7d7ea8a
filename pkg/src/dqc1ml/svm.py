"""Kernel matrices from the DQC1 engine and an SMO solver for the SVM dual.

The dual solved here is

    maximize   sum_i b_i - 1/2 sum_ij y_i y_j b_i b_j K_ij
    subject to sum_i b_i y_i = 0,  0 <= b_i <= C

and the classifier is ``sign(sum_i b_i y_i K(x, x_i) + bias)``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

from .engine import (
    TAG_TEST,
    TAG_TRAIN,
    Dqc1Config,
    derived_rng,
    expectations_from_trace,
    raw_signal,
)
from .feature_map import FeatureMapConfig, normalized_trace_gram

log = logging.getLogger(__name__)

PSD_TOL = 1e-9
KKT_TOL = 1e-4
MAX_PAIR_UPDATES = 1_000_000
DEFAULT_C = 1000.0
_TAU = 1e-12


class KernelNotPSDError(ValueError):
    pass


@dataclass(frozen=True)
class KernelMatrix:
    values: np.ndarray
    mode: str = "exact"
    alpha: float = 1.0
    psd_repaired: bool = False

    @property
    def size(self) -> int:
        return self.values.shape[0]


def _raw_matrix(T: np.ndarray, cfg: Dqc1Config, tag: int, symmetric: bool) -> np.ndarray:
    """Raw DQC1 kernel signal for a matrix of normalized traces ``T``."""
    if cfg.mode == "exact":
        m = (1 - cfg.noise_p) * cfg.alpha * np.abs(T)
        return np.clip(m, 0.0, 1.0)
    out = np.zeros(T.shape)
    rows, cols = T.shape
    for i in range(rows):
        for j in range(i if symmetric else 0, cols):
            ex, ey = expectations_from_trace(T[i, j], cfg)
            out[i, j] = raw_signal(ex, ey, cfg, derived_rng(cfg.seed, tag, i, j))
    return out


def build_kernel_matrix(
    points, cfg: Dqc1Config, fm: FeatureMapConfig = FeatureMapConfig()
) -> KernelMatrix:
    """Training kernel: entry (i, j) is the raw DQC1 signal for
    ``kernel_unitary(x_i, x_j)``. Only ``i <= j`` is evaluated; the lower
    triangle is a mirror."""
    X = np.asarray(points, dtype=float)
    if len(X) < 2:
        raise ValueError("need at least two points to build a kernel matrix")
    T = normalized_trace_gram(X, X, fm)
    K = _raw_matrix(T, cfg, TAG_TRAIN, symmetric=True)
    K = np.triu(K) + np.triu(K, 1).T
    return KernelMatrix(K, cfg.mode, cfg.alpha)


def build_kernel_rows(
    test_points, train_points, cfg: Dqc1Config, fm: FeatureMapConfig = FeatureMapConfig()
) -> np.ndarray:
    """Kernel rows ``K(test_i, train_j)`` for the prediction phase."""
    T = normalized_trace_gram(
        np.atleast_2d(np.asarray(test_points, dtype=float)),
        np.atleast_2d(np.asarray(train_points, dtype=float)),
        fm,
    )
    return _raw_matrix(T, cfg, TAG_TEST, symmetric=False)


def psd_repair(k: KernelMatrix) -> KernelMatrix:
    """Clip negative eigenvalues to zero. Returns ``k`` itself when it is
    already PSD within ``PSD_TOL``."""
    K = np.asarray(k.values, dtype=float)
    if np.max(np.abs(K - K.T)) > PSD_TOL:
        raise ValueError("kernel matrix is not symmetric")
    w, v = np.linalg.eigh(K)
    if w[0] >= -PSD_TOL:
        return k
    fixed = (v * np.clip(w, 0.0, None)) @ v.T
    fixed = (fixed + fixed.T) / 2
    return replace(k, values=fixed, psd_repaired=True)


def min_eigenvalue(K) -> float:
    return float(np.linalg.eigvalsh(np.asarray(K, dtype=float))[0])


def dual_objective(beta, labels, K) -> float:
    beta = np.asarray(beta, dtype=float)
    yb = beta * np.asarray(labels, dtype=float)
    return float(beta.sum() - 0.5 * yb @ np.asarray(K, dtype=float) @ yb)


@dataclass
class SvmModel:
    beta: np.ndarray
    bias: float
    labels: np.ndarray
    points: np.ndarray
    C: float
    n_updates: int = 0
    converged: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta > 0)

    def to_dict(self) -> dict:
        d = {
            "beta": self.beta.tolist(),
            "bias": self.bias,
            "C": self.C,
            "labels": [int(v) for v in self.labels],
            "points": self.points.tolist(),
            "n_updates": self.n_updates,
            "converged": self.converged,
        }
        d.update(self.meta)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        core = {"beta", "bias", "C", "labels", "points", "n_updates", "converged"}
        missing = {"beta", "bias", "C", "labels", "points"} - d.keys()
        if missing:
            raise ValueError(f"model document missing fields: {sorted(missing)}")
        return cls(
            beta=np.asarray(d["beta"], dtype=float),
            bias=float(d["bias"]),
            labels=np.asarray(d["labels"], dtype=int),
            points=np.asarray(d["points"], dtype=float).reshape(-1, 2),
            C=float(d["C"]),
            n_updates=int(d.get("n_updates", 0)),
            converged=bool(d.get("converged", True)),
            meta={k: v for k, v in d.items() if k not in core},
        )


def save_model(model: SvmModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2))


def load_model(path) -> SvmModel:
    return SvmModel.from_dict(json.loads(Path(path).read_text()))


def _check_labels(labels, size: int) -> np.ndarray:
    y = np.asarray(labels)
    if y.shape != (size,):
        raise ValueError(f"expected {size} labels, got shape {y.shape}")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise ValueError("training labels contain a single class")
    return y.astype(float)


@njit(cache=True)
def _smo_loop(K, y, C, tol, max_updates):
    """SMO iterations on the dual; returns (beta, gradient, updates, converged).

    Working pair: ``i`` is the maximal violator in the "up" set; ``j`` is the
    "low" candidate violating against ``i`` with the largest guaranteed
    decrease ``b^2 / a`` of the two-variable subproblem (second-order
    selection). Ties go to the lowest index. The pair step is the LIBSVM
    closed form with box clipping.
    """
    n = K.shape[0]
    beta = np.zeros(n)
    G = -np.ones(n)
    updates = 0
    while updates < max_updates:
        i = -1
        g_max = -np.inf
        g_min = np.inf
        for t in range(n):
            s = -y[t] * G[t]
            if (y[t] > 0 and beta[t] < C) or (y[t] < 0 and beta[t] > 0):
                if s > g_max:
                    g_max = s
                    i = t
            if (y[t] > 0 and beta[t] > 0) or (y[t] < 0 and beta[t] < C):
                if s < g_min:
                    g_min = s
        if i < 0 or g_max - g_min < tol:
            return beta, G, updates, True

        j = -1
        best = -np.inf
        for t in range(n):
            if (y[t] > 0 and beta[t] > 0) or (y[t] < 0 and beta[t] < C):
                b = g_max + y[t] * G[t]
                if b > 0:
                    a = K[i, i] + K[t, t] - 2 * K[i, t]
                    if a <= 0:
                        a = _TAU
                    gain = b * b / a
                    if gain > best:
                        best = gain
                        j = t

        bi = beta[i]
        bj = beta[j]
        # Q_ij = y_i y_j K_ij
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] - 2 * K[i, j]
            if quad <= 0:
                quad = _TAU
            delta = (-G[i] - G[j]) / quad
            diff = bi - bj
            ai = bi + delta
            aj = bj + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            elif ai < 0:
                ai = 0.0
                aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            elif aj > C:
                aj = C
                ai = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2 * K[i, j]
            if quad <= 0:
                quad = _TAU
            delta = (G[i] - G[j]) / quad
            total = bi + bj
            ai = bi - delta
            aj = bj + delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            elif aj < 0:
                aj = 0.0
                ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            elif ai < 0:
                ai = 0.0
                aj = total

        di = ai - bi
        dj = aj - bj
        beta[i] = ai
        beta[j] = aj
        for t in range(n):
            G[t] += y[t] * (y[i] * K[t, i] * di + y[j] * K[t, j] * dj)
        updates += 1
    return beta, G, updates, False


def _bias(beta, y, G, C) -> float:
    yG = y * G
    free = (beta > 0) & (beta < C)
    if np.any(free):
        r = float(np.mean(yG[free]))
    else:
        at_upper = beta >= C
        ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (~at_upper & (y < 0))
        ub = np.min(yG[ub_mask]) if np.any(ub_mask) else np.inf
        lb = np.max(yG[lb_mask]) if np.any(lb_mask) else -np.inf
        r = float((ub + lb) / 2)
    return -r


def svm_train(
    k: KernelMatrix | np.ndarray,
    labels,
    C: float = DEFAULT_C,
    tol: float = KKT_TOL,
    max_updates: int = MAX_PAIR_UPDATES,
    points=None,
) -> SvmModel:
    """Solve the box-constrained SVM dual by sequential minimal optimization.

    Each step picks a violating pair (see :func:`_smo_loop`) and optimizes
    it in closed form. Stops when the maximal KKT violation falls below
    ``tol`` or after ``max_updates`` steps.

    Raises
    ------
    ValueError
        On a single-class label vector or ``C <= 0``.
    KernelNotPSDError
        If the kernel has an eigenvalue below ``-PSD_TOL``; run
        :func:`psd_repair` first.
    """
    K = np.asarray(k.values if isinstance(k, KernelMatrix) else k, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n):
        raise ValueError(f"kernel must be square, got {K.shape}")
    y = _check_labels(labels, n)
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    lam = min_eigenvalue(K)
    if lam < -PSD_TOL:
        raise KernelNotPSDError(
            f"kernel has eigenvalue {lam:.3g} < 0; apply psd_repair before training"
        )

    beta, G, updates, converged = _smo_loop(
        np.ascontiguousarray(K), y, float(C), float(tol), int(max_updates)
    )
    if not converged:
        log.warning("SMO stopped after %d updates without reaching tol=%g", updates, tol)

    # snap round-off at the box edges
    beta[np.abs(beta) < 1e-12 * C] = 0.0
    beta[np.abs(beta - C) < 1e-12 * C] = C
    pts = np.zeros((n, 2)) if points is None else np.asarray(points, dtype=float)
    return SvmModel(beta, _bias(beta, y, G, C), y.astype(int), pts, float(C), updates, converged)


def svm_decision(model: SvmModel, kernel_row) -> float:
    """Raw margin ``sum_i b_i y_i k_i + bias``."""
    row = np.asarray(kernel_row, dtype=float)
    if row.shape != model.beta.shape:
        raise ValueError(
            f"kernel row has length {row.size}, model was trained on {model.beta.size} points"
        )
    return float(np.dot(model.beta * model.labels, row) + model.bias)


def decision_values(model: SvmModel, kernel_rows) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
    if rows.shape[1] != model.beta.size:
        raise ValueError(
            f"kernel rows have {rows.shape[1]} columns, model was trained on {model.beta.size} points"
        )
    return rows @ (model.beta * model.labels) + model.bias


def classify(margins) -> np.ndarray:
    """Sign of the margin, with a zero margin mapped to +1."""
    return np.where(np.asarray(margins) >= 0, 1, -1)


def predict(
    model: SvmModel,
    test_points,
    cfg: Dqc1Config,
    fm: FeatureMapConfig = FeatureMapConfig(),
) -> np.ndarray:
    rows = build_kernel_rows(test_points, model.points, cfg, fm)
    return classify(decision_values(model, rows))


def accuracy(predicted: Sequence[int], actual: Sequence[int]) -> float:
    p, a = np.asarray(predicted), np.asarray(actual)
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {a.shape}")
    if p.size == 0:
        raise ValueError("cannot score an empty prediction")
    return float(np.mean(p == a))
