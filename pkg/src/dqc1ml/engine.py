"""One-clean-qubit (DQC1) trace estimation.

The control qubit starts in ``(I + alpha Z) / 2`` and the n target qubits in
``I / 2^n``. After a Hadamard on the control and a controlled-U the control
qubit holds ``alpha * tr(U) / 2^n`` in its lower off-diagonal element.

Two readouts are offered. :func:`estimate_trace` divides out ``alpha`` and
returns an estimate of ``tr(U) / 2^n``. :func:`estimate_kernel_raw` returns
the measured off-diagonal magnitude ``alpha * |tr(U)| / 2^n`` as is.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import qcore
from .qcore import HADAMARD

DEFAULT_SHOTS = 8192

# stream tags for derived_rng(seed, tag, i, j)
TAG_TRAIN = 10
TAG_SQUARED = 11
TAG_TEST = 12

Mode = Literal["exact", "shots"]


class ZeroPolarizationError(ValueError):
    """The normalized trace cannot be recovered when alpha is zero."""


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class Dqc1Config:
    """Settings for one DQC1 run.

    ``seed`` is the root seed. Individual circuits draw from streams derived
    from ``(seed, *key)`` (see :func:`derived_rng`), so results do not depend
    on evaluation order.
    """

    n_target_qubits: int = 2
    alpha: float = 1.0
    mode: Mode = "exact"
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    noise_p: float = 0.0

    def __post_init__(self):
        if self.n_target_qubits < 1:
            raise ValueError("n_target_qubits must be >= 1")
        _check_unit_interval("alpha", self.alpha)
        _check_unit_interval("noise_p", self.noise_p)
        if self.mode not in ("exact", "shots"):
            raise ValueError(f"mode must be 'exact' or 'shots', got {self.mode!r}")
        if self.mode == "shots" and self.shots < 1:
            raise ValueError("shots must be >= 1 in shots mode")

    @property
    def dim(self) -> int:
        return 2**self.n_target_qubits

    def with_(self, **changes) -> "Dqc1Config":
        return replace(self, **changes)


@dataclass(frozen=True)
class TraceEstimate:
    """Estimate of ``tr(U) / 2^n``."""

    value: complex
    std_error: float = 0.0
    mode: Mode = "exact"
    shots_used: int = 0
    # sampled control-qubit expectations, before dividing by alpha
    expect_x: float = field(default=float("nan"), repr=False)
    expect_y: float = field(default=float("nan"), repr=False)


def derived_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream named by ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(k) for k in key)]))


def prepare_control(alpha: float) -> np.ndarray:
    """Control qubit ``diag((1 + alpha) / 2, (1 - alpha) / 2)``."""
    alpha = _check_unit_interval("alpha", alpha)
    return np.diag([(1 + alpha) / 2, (1 - alpha) / 2]).astype(complex)


def control_rotation_angle(alpha: float) -> float:
    """R_y angle that takes |0> to a state with populations ``(1 ± alpha) / 2``."""
    alpha = _check_unit_interval("alpha", alpha)
    return 2 * np.arccos(np.sqrt((1 + alpha) / 2))


def prepare_control_by_rotation(alpha: float) -> np.ndarray:
    """Control state from ``R_y(theta)|0>`` followed by dephasing.

    Gives ``diag(cos^2(theta/2), sin^2(theta/2))``, the same state as
    :func:`prepare_control`.
    """
    theta = control_rotation_angle(alpha)
    ry = np.array(
        [[np.cos(theta / 2), -np.sin(theta / 2)], [np.sin(theta / 2), np.cos(theta / 2)]],
        dtype=complex,
    )
    psi = ry @ qcore.ket("0")
    return qcore.dephase(qcore.projector(psi))


def bell_pair() -> np.ndarray:
    """Density matrix of ``(|00> + |11>) / sqrt(2)``."""
    return qcore.projector((qcore.ket("00") + qcore.ket("11")) / np.sqrt(2))


def prepare_target_mixed_via_ancilla(n: int) -> np.ndarray:
    """Maximally mixed n-qubit register obtained by discarding Bell partners.

    Qubits are ordered ``(t1, a1, t2, a2, ...)``; the ancillas are traced out.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    joint = qcore.tensor_all([bell_pair()] * n)
    keep = range(0, 2 * n, 2)
    return qcore.partial_trace(joint, [2] * (2 * n), keep)


def per_qubit_purities(rho) -> list[float]:
    n = qcore.num_qubits(np.asarray(rho).shape[0])
    return [qcore.purity(qcore.partial_trace(rho, [2] * n, [k])) for k in range(n)]


def controlled_unitary(u) -> np.ndarray:
    """Block-diagonal ``|0><0| ⊗ I + |1><1| ⊗ u``."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = np.eye(d)
    out[d:, d:] = u
    return out


def initial_state(alpha: float, n: int) -> np.ndarray:
    """Product state ``rho_control ⊗ I / 2^n`` before any gate."""
    return qcore.tensor_product(prepare_control(alpha), qcore.maximally_mixed(2**n))


def evolve_full_register(u, alpha: float, applications: int = 1) -> np.ndarray:
    """Joint control+target state after H on the control and ``applications``
    controlled-u gates, simulated on the full ``2^(n+1)`` register."""
    u = np.asarray(u, dtype=complex)
    n = qcore.num_qubits(u.shape[0])
    rho = initial_state(alpha, n)
    h = qcore.tensor_product(HADAMARD, np.eye(2**n))
    rho = h @ rho @ h.conj().T
    cu = controlled_unitary(u)
    for _ in range(applications):
        rho = cu @ rho @ cu.conj().T
    return rho


def control_state_from_register(rho) -> np.ndarray:
    n = qcore.num_qubits(np.asarray(rho).shape[0]) - 1
    return qcore.partial_trace(rho, [2] + [2] * n, [0])


def run_exact(u, alpha: float, noise_p: float = 0.0) -> np.ndarray:
    """Closed-form control-qubit state after the DQC1 circuit.

    ``0.5 * [[1, alpha * conj(t)], [alpha * t, 1]]`` with ``t = tr(u) / 2^n``,
    optionally followed by depolarizing noise of strength ``noise_p``.
    """
    u = np.asarray(u, dtype=complex)
    alpha = _check_unit_interval("alpha", alpha)
    t = np.trace(u) / u.shape[0]
    rho = 0.5 * np.array([[1.0, alpha * np.conj(t)], [alpha * t, 1.0]], dtype=complex)
    if noise_p:
        rho = apply_depolarizing(rho, noise_p)
    return rho


def apply_depolarizing(rho, p: float) -> np.ndarray:
    """``(1 - p) rho + p I / d``."""
    p = _check_unit_interval("p", p)
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return (1 - p) * rho + p * np.eye(d) / d


def control_expectations(u, cfg: Dqc1Config) -> tuple[float, float]:
    """Exact ``<X>`` and ``<Y>`` of the control qubit after the circuit."""
    rho = run_exact(u, cfg.alpha, cfg.noise_p)
    # <X> = 2 Re rho[1, 0], <Y> = 2 Im rho[1, 0]
    return 2 * rho[1, 0].real, 2 * rho[1, 0].imag


def expectations_from_trace(t: complex, cfg: Dqc1Config) -> tuple[float, float]:
    """``<X>``, ``<Y>`` given the normalized trace ``t = tr(U) / 2^n``.

    Same values as :func:`control_expectations` without building the state.
    """
    m = (1 - cfg.noise_p) * cfg.alpha * complex(t)
    return m.real, m.imag


def raw_signal(ex: float, ey: float, cfg: Dqc1Config, rng=None) -> float:
    """Clamped ``|<X> + i<Y>|``, sampled first in shots mode."""
    if cfg.mode == "shots":
        if rng is None:
            rng = derived_rng(cfg.seed)
        ex = sample_expectation(ex, cfg.shots, rng)
        ey = sample_expectation(ey, cfg.shots, rng)
    return float(min(max(np.hypot(ex, ey), 0.0), 1.0))


def sample_expectation(mean: float, shots: int, rng: np.random.Generator) -> float:
    """Empirical mean of ``shots`` ±1 outcomes with true mean ``mean``."""
    p_plus = min(max((1 + mean) / 2, 0.0), 1.0)
    k = rng.binomial(shots, p_plus)
    return 2 * k / shots - 1


def _sample_xy(u, cfg: Dqc1Config, rng) -> tuple[float, float]:
    ex, ey = control_expectations(u, cfg)
    if rng is None:
        rng = derived_rng(cfg.seed)
    return sample_expectation(ex, cfg.shots, rng), sample_expectation(ey, cfg.shots, rng)


def estimate_trace(u, cfg: Dqc1Config, rng: np.random.Generator | None = None) -> TraceEstimate:
    """Estimate ``tr(u) / 2^n`` from the control qubit.

    In shots mode ``cfg.shots`` samples are drawn for each of the X and Y
    measurements. ``rng`` defaults to the stream derived from ``cfg.seed``
    alone; pass :func:`derived_rng` output to key the draw to a circuit.
    """
    u = np.asarray(u, dtype=complex)
    if cfg.mode == "exact":
        t = np.trace(u) / u.shape[0]
        if cfg.noise_p:
            t = (1 - cfg.noise_p) * t
        return TraceEstimate(complex(t), 0.0, "exact", 0)
    if cfg.alpha == 0.0:
        raise ZeroPolarizationError("trace unrecoverable at zero polarization")
    x_hat, y_hat = _sample_xy(u, cfg, rng)
    var = (1 - x_hat**2) / cfg.shots + (1 - y_hat**2) / cfg.shots
    return TraceEstimate(
        complex(x_hat, y_hat) / cfg.alpha,
        float(np.sqrt(var)) / cfg.alpha,
        "shots",
        2 * cfg.shots,
        x_hat,
        y_hat,
    )


def estimate_kernel_raw(u, cfg: Dqc1Config, rng: np.random.Generator | None = None) -> float:
    """Off-diagonal magnitude ``alpha * |tr(u)| / 2^n`` (or its shot
    estimate), clamped to [0, 1]. Not divided by alpha."""
    ex, ey = control_expectations(np.asarray(u, dtype=complex), cfg)
    return raw_signal(ex, ey, cfg, rng)
