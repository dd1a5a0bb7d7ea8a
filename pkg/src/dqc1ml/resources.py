"""Coherence consumed and geometric discord produced by a DQC1 run."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .engine import TAG_SQUARED, TAG_TRAIN, Dqc1Config, derived_rng, estimate_trace
from .feature_map import FeatureMapConfig, kernel_unitary
from .qcore import binary_entropy

BOUND_TOL = 1e-12


def _unit(name: str, v: float) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


def coherence_consumption(trace_abs: float, alpha: float, n: int = 2) -> float:
    """Coherence lost by the control qubit, in bits.

    ``H2((1 - alpha * trace_abs) / 2) - H2((1 - alpha) / 2)`` where
    ``trace_abs = |tr(U)| / 2^n``. The result does not depend on ``n`` once
    the trace is normalized; ``n`` is accepted for symmetry with
    :func:`geometric_discord_closed_form`.
    """
    trace_abs = _unit("trace_abs", trace_abs)
    alpha = _unit("alpha", alpha)
    if n < 1:
        raise ValueError("n must be >= 1")
    dc = binary_entropy((1 - alpha * trace_abs) / 2) - binary_entropy((1 - alpha) / 2)
    return max(dc, 0.0)


def geometric_discord_closed_form(trace_u_squared_abs: float, alpha: float, n: int = 2) -> float:
    """Geometric discord of the DQC1 output state.

    ``(alpha / 2)^2 / 2^n * (1 - |tr(U^2)| / 2^n)``, given
    ``trace_u_squared_abs = |tr(U^2)| / 2^n``.
    """
    t2 = _unit("trace_u_squared_abs", trace_u_squared_abs)
    alpha = _unit("alpha", alpha)
    if n < 1:
        raise ValueError("n must be >= 1")
    return (alpha / 2) ** 2 / 2**n * (1 - t2)


def trace_u_squared(u, cfg: Dqc1Config, rng: np.random.Generator | None = None):
    """DQC1 estimate of ``tr(u^2) / 2^n``.

    The circuit applies controlled-u twice, which is the controlled version of
    ``u @ u``; the engine is run on that product.
    """
    u = np.asarray(u, dtype=complex)
    return estimate_trace(u @ u, cfg, rng)


@dataclass(frozen=True)
class ResourceRecord:
    i: int
    j: int
    kernel_abs: float
    delta_coherence: float
    geometric_discord: float
    bound_satisfied: bool

    @property
    def pair(self) -> tuple[int, int]:
        return self.i, self.j

    def as_dict(self) -> dict:
        return asdict(self)


def resource_record(
    i: int, j: int, u, cfg: Dqc1Config, rng_trace=None, rng_square=None
) -> ResourceRecord:
    n = cfg.n_target_qubits
    if cfg.alpha == 0.0 and cfg.mode == "shots":
        # nothing is measurable without polarization; both resources vanish
        t_abs, t2_abs = 0.0, 0.0
    else:
        t_abs = min(abs(estimate_trace(u, cfg, rng_trace).value), 1.0)
        t2_abs = min(abs(trace_u_squared(u, cfg, rng_square).value), 1.0)
    dc = coherence_consumption(t_abs, cfg.alpha, n)
    dg = geometric_discord_closed_form(t2_abs, cfg.alpha, n)
    return ResourceRecord(i, j, t_abs, dc, dg, bool(dg <= dc + BOUND_TOL))


def resource_map(
    points: Sequence, cfg: Dqc1Config, fm: FeatureMapConfig = FeatureMapConfig()
) -> list[ResourceRecord]:
    """Resource records for every pair ``i <= j`` of ``points``.

    In shots mode the trace draw for pair ``(i, j)`` uses the same derived
    stream as the training kernel, so ``kernel_abs`` here and the classifier's
    kernel entry come from one measurement record.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        raise ValueError("resource_map needs at least one point")
    records = []
    for i in range(len(pts)):
        for j in range(i, len(pts)):
            u = kernel_unitary(pts[i], pts[j], fm)
            rng_t = rng_s = None
            if cfg.mode == "shots":
                rng_t = derived_rng(cfg.seed, TAG_TRAIN, i, j)
                rng_s = derived_rng(cfg.seed, TAG_SQUARED, i, j)
            records.append(resource_record(i, j, u, cfg, rng_t, rng_s))
    return records
