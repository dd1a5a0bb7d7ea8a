"""Dense linear-algebra helpers for small quantum registers.

Matrices are plain ``numpy`` complex arrays. Register sizes in this package
never exceed a handful of qubits, so everything is kept dense and exact.
All entropies are in bits.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNITARY_TOL = 1e-10
# eigenvalues at or below this contribute nothing to an entropy
ENTROPY_EIG_CUTOFF = 1e-14


class InvalidStateError(ValueError):
    """Raised when a matrix is not a valid density matrix."""


class NotUnitaryError(ValueError):
    """Raised when a matrix fails the unitarity check."""


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def check_density_matrix(rho) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as a complex array.

    Raises :class:`InvalidStateError` if ``rho`` is not Hermitian, does not
    have unit trace, or has an eigenvalue below ``-PSD_TOL``.
    """
    rho = _as_square(rho)
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise InvalidStateError("matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace is {tr.real:.3g}, expected 1")
    eig = np.linalg.eigvalsh(rho)
    if eig[0] < -PSD_TOL:
        raise InvalidStateError(f"negative eigenvalue {eig[0]:.3g}")
    return rho


def check_unitary(u) -> np.ndarray:
    u = _as_square(u)
    dev = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if dev > UNITARY_TOL:
        raise NotUnitaryError(f"max |UU^dagger - I| = {dev:.3g}")
    return u


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = _as_square(u)
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= tol)


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor_all(mats: Iterable) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = tensor_product(out, m)
    return out


def partial_trace(rho, subsystem_dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced state of ``rho`` on the subsystems listed in ``keep``.

    Parameters
    ----------
    rho : array_like
        Density matrix on the composite space, ordered as ``subsystem_dims``.
    subsystem_dims : sequence of int
        Local dimensions; their product must equal ``rho.shape[0]``.
    keep : iterable of int
        Indices of the subsystems to keep, in any order. The result is ordered
        by ascending subsystem index.
    """
    rho = _as_square(rho)
    dims = [int(d) for d in subsystem_dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValueError(
            f"subsystem dims {dims} do not match matrix dimension {rho.shape[0]}"
        )
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(dims + dims)
    # contract each traced subsystem's row index with its column index
    for offset, k in enumerate(traced):
        axis = k - offset
        t = np.trace(t, axis1=axis, axis2=axis + t.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d_keep, d_keep)


def _clipped_eigenvalues(rho) -> np.ndarray:
    eig = np.linalg.eigvalsh(_as_square(rho))
    if eig[0] < -PSD_TOL:
        raise InvalidStateError(f"negative eigenvalue {eig[0]:.3g}")
    return np.clip(eig, 0.0, None)


def shannon_entropy(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > ENTROPY_EIG_CUTOFF]
    h = float(-np.sum(p * np.log2(p)))
    return abs(h) if h == 0.0 else h


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy ``-tr(rho log2 rho)`` in bits."""
    return shannon_entropy(_clipped_eigenvalues(rho))


def binary_entropy(x: float) -> float:
    """Binary Shannon entropy H2(x) in bits, with H2(0) = H2(1) = 0."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    return shannon_entropy([x, 1.0 - x])


def purity(rho) -> float:
    rho = _as_square(rho)
    return float(np.real(np.trace(rho @ rho)))


def dephase(rho) -> np.ndarray:
    """Diagonal part of ``rho`` in the computational basis."""
    rho = _as_square(rho)
    return np.diag(np.diag(rho))


def coherence(rho) -> float:
    """Relative-entropy coherence ``S(diag(rho)) - S(rho)`` in bits."""
    rho = _as_square(rho)
    c = shannon_entropy(np.clip(np.diag(rho).real, 0.0, None)) - von_neumann_entropy(rho)
    # tiny negative values are eigen-solver round-off on diagonal inputs
    return max(c, 0.0)


def ket(bits: str) -> np.ndarray:
    """Computational basis column vector, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
