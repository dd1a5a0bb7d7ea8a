"""Two-qubit data-encoding unitaries and the kernel unitary built from them.

A feature vector ``x = (x1, x2)`` is encoded by repeating a layer
``U_phi(x) @ (H ⊗ H)`` (Hadamards first, then a diagonal phase gate), where

    U_phi(x) = exp(i * (phi1 * Z1 + phi2 * Z2 + phi12 * Z1 Z2)),
    phi1 = x1, phi2 = x2, phi12 = (pi - x1) * (pi - x2).

Basis ordering is big-endian: qubit 1 is the most significant bit, so the
Z eigenvalues over ``|00>, |01>, |10>, |11>`` are ``z1 = (1, 1, -1, -1)`` and
``z2 = (1, -1, 1, -1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import HADAMARD

N_FEATURES = 2

_Z1 = np.array([1.0, 1.0, -1.0, -1.0])
_Z2 = np.array([1.0, -1.0, 1.0, -1.0])
_HH = np.kron(HADAMARD, HADAMARD)


@dataclass(frozen=True)
class FeatureMapConfig:
    """Shape of the encoding circuit.

    ``layers`` is the number of ``U_phi H⊗H`` repetitions. Setting
    ``extra_layer=True`` applies ``layers + 1`` repetitions, the literal
    reading of a product indexed from 0 to l.
    """

    n_qubits: int = 2
    layers: int = 2
    extra_layer: bool = False

    def __post_init__(self):
        if self.n_qubits != 2:
            raise ValueError("only the two-qubit pairwise feature map is supported")
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")

    @property
    def depth(self) -> int:
        return self.layers + (1 if self.extra_layer else 0)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


def _check_features(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != N_FEATURES:
        raise ValueError(f"feature vectors must have {N_FEATURES} entries, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature values must be finite")
    return x


def phase_functions(x) -> tuple[float, float, float]:
    """Return ``(phi1, phi2, phi12)`` for a single feature vector."""
    x1, x2 = _check_features(x)
    return float(x1), float(x2), float((np.pi - x1) * (np.pi - x2))


def _phase_diagonals(X: np.ndarray) -> np.ndarray:
    # X: (m, 2) -> (m, 4) diagonal of U_phi for each row
    p12 = (np.pi - X[:, 0]) * (np.pi - X[:, 1])
    arg = X[:, :1] * _Z1 + X[:, 1:2] * _Z2 + p12[:, None] * (_Z1 * _Z2)
    return np.exp(1j * arg)


def encoding_phase_unitary(x) -> np.ndarray:
    """Diagonal 4x4 phase unitary ``U_phi(x)``."""
    x = _check_features(x)
    return np.diag(_phase_diagonals(x.reshape(1, N_FEATURES))[0])


def encoding_unitaries(X, cfg: FeatureMapConfig = FeatureMapConfig()) -> np.ndarray:
    """Stack of encoding unitaries ``u^l(x)`` for every row of ``X``.

    Returns an array of shape ``(m, 4, 4)``.
    """
    X = _check_features(np.atleast_2d(X))
    layer = _phase_diagonals(X)[:, :, None] * _HH[None, :, :]
    out = layer
    for _ in range(cfg.depth - 1):
        out = layer @ out
    return out


def encoding_unitary(x, cfg: FeatureMapConfig = FeatureMapConfig()) -> np.ndarray:
    return encoding_unitaries(np.reshape(_check_features(x), (1, N_FEATURES)), cfg)[0]


def kernel_unitary(x, x2, cfg: FeatureMapConfig = FeatureMapConfig()) -> np.ndarray:
    """``u^l(x) @ u^l(x2)^dagger``; the identity when ``x == x2``."""
    return encoding_unitary(x, cfg) @ encoding_unitary(x2, cfg).conj().T


def normalized_trace_gram(X, Y, cfg: FeatureMapConfig = FeatureMapConfig()) -> np.ndarray:
    """Matrix of ``tr(u(x_i) u(y_j)^dagger) / 4`` for all row pairs.

    Uses ``tr(A B^dagger) = sum_ab A[a, b] conj(B[a, b])`` so the whole matrix
    is one complex matrix product.
    """
    ux = encoding_unitaries(X, cfg).reshape(-1, cfg.dim * cfg.dim)
    uy = encoding_unitaries(Y, cfg).reshape(-1, cfg.dim * cfg.dim)
    return (ux @ uy.conj().T) / cfg.dim
