import numpy as np
import pytest
from scipy.optimize import minimize

from dqc1ml import engine, qcore
from dqc1ml.engine import Dqc1Config
from dqc1ml.feature_map import kernel_unitary
from dqc1ml.resources import (
    coherence_consumption,
    geometric_discord_closed_form,
    resource_map,
    trace_u_squared,
)


def h2(p):
    return 0.0 if p in (0.0, 1.0) else -p * np.log2(p) - (1 - p) * np.log2(1 - p)


def measured_discord(rho, rng, starts=6):
    """Minimum squared Hilbert-Schmidt distance between ``rho`` and its image
    under a projective measurement of the control qubit, searched over all
    measurement directions on the Bloch sphere."""
    d = rho.shape[0] // 2

    def disturbance(p):
        th, ph = p
        v = np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
        w = np.array([-np.exp(-1j * ph) * np.sin(th / 2), np.cos(th / 2)])
        out = np.zeros_like(rho)
        for e in (v, w):
            proj = np.kron(np.outer(e, e.conj()), np.eye(d))
            out += proj @ rho @ proj
        return float(np.sum(np.abs(rho - out) ** 2))

    opts = {"xatol": 1e-10, "fatol": 1e-15}
    return min(
        minimize(disturbance, x0, method="Nelder-Mead", options=opts).fun
        for x0 in rng.uniform(0, np.pi, (starts, 2))
    )


class TestCoherenceConsumption:
    def test_unit_trace(self):
        assert coherence_consumption(1.0, 1.0) == 0.0

    def test_zero_trace(self):
        assert coherence_consumption(0.0, 1.0) == pytest.approx(1.0)

    def test_half_trace(self):
        assert coherence_consumption(0.5, 1.0) == pytest.approx(0.8112781244591328, abs=1e-12)

    def test_matches_state_coherence(self, rng):
        # entropy difference computed on the actual control-qubit state
        for alpha in (0.25, 0.5, 1.0):
            u = qcore.random_unitary(4, rng)
            rho = engine.run_exact(u, alpha)
            t = abs(np.trace(u)) / 4
            expected = qcore.coherence(rho) - qcore.coherence(
                0.5 * np.array([[1, alpha], [alpha, 1]])
            )
            assert coherence_consumption(t, alpha) == pytest.approx(-expected, abs=1e-10)

    def test_formula(self):
        for t in np.linspace(0, 1, 7):
            for a in (0.2, 0.7):
                assert coherence_consumption(t, a) == pytest.approx(h2((1 - a * t) / 2) - h2((1 - a) / 2))

    def test_monotone_in_trace(self):
        for a in (0.25, 0.5, 1.0):
            vals = [coherence_consumption(t, a) for t in np.linspace(0, 1, 101)]
            assert np.all(np.diff(vals) <= 1e-15)
            assert min(vals) >= 0.0

    @pytest.mark.parametrize("args", [(1.2, 1.0), (0.5, -0.1), (-0.1, 0.5)])
    def test_out_of_range(self, args):
        with pytest.raises(ValueError):
            coherence_consumption(*args)


class TestGeometricDiscord:
    def test_square_identity(self):
        assert geometric_discord_closed_form(1.0, 1.0) == 0.0

    def test_maximal(self):
        assert geometric_discord_closed_form(0.0, 1.0, 2) == pytest.approx(0.0625)

    def test_partial(self):
        assert geometric_discord_closed_form(0.5, 0.5, 2) == pytest.approx(0.0078125)

    def test_alpha_squared_scaling(self):
        base = geometric_discord_closed_form(0.3, 0.2)
        for a in (0.4, 0.8):
            assert geometric_discord_closed_form(0.3, a) / base == pytest.approx((a / 0.2) ** 2)

    def test_range(self):
        for a in (0.0, 0.5, 1.0):
            for t in np.linspace(0, 1, 5):
                assert 0.0 <= geometric_discord_closed_form(t, a) <= (a / 2) ** 2 / 4

    @pytest.mark.parametrize("args", [(1.5, 1.0), (0.5, 2.0)])
    def test_out_of_range(self, args):
        with pytest.raises(ValueError):
            geometric_discord_closed_form(*args)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
    def test_matches_measurement_minimization(self, rng, alpha):
        for _ in range(3):
            u = qcore.random_unitary(4, rng)
            rho = engine.evolve_full_register(u, alpha)
            t2 = abs(np.trace(u @ u)) / 4
            assert geometric_discord_closed_form(t2, alpha) == pytest.approx(
                measured_discord(rho, rng), abs=1e-9
            )


class TestTraceUSquared:
    def test_identity(self):
        assert trace_u_squared(np.eye(4), Dqc1Config()).value == pytest.approx(1.0)

    def test_phase_sum(self):
        assert abs(trace_u_squared(np.diag([1, 1j, -1, -1j]), Dqc1Config()).value) < 1e-15

    def test_double_application(self, rng):
        u = qcore.random_unitary(4, rng)
        rho = engine.control_state_from_register(engine.evolve_full_register(u, 1.0, applications=2))
        assert trace_u_squared(u, Dqc1Config()).value == pytest.approx(2 * rho[1, 0], abs=1e-12)


class TestResourceMap:
    def test_single_point(self):
        (rec,) = resource_map([(0.3, 1.9)], Dqc1Config())
        assert rec.pair == (0, 0)
        assert rec.delta_coherence == pytest.approx(0.0, abs=1e-10)
        assert rec.geometric_discord == pytest.approx(0.0, abs=1e-10)

    def test_pairs_and_bound(self, rng):
        pts = rng.uniform(0, 2 * np.pi, (6, 2))
        for alpha in (0.25, 0.5, 1.0):
            recs = resource_map(pts, Dqc1Config(alpha=alpha))
            assert [r.pair for r in recs] == [(i, j) for i in range(6) for j in range(i, 6)]
            assert all(r.bound_satisfied for r in recs)

    def test_bound_flag_matches_values(self, rng):
        recs = resource_map(rng.uniform(0, 2 * np.pi, (4, 2)), Dqc1Config(alpha=0.5, mode="shots", shots=64))
        for r in recs:
            assert r.bound_satisfied == (r.geometric_discord <= r.delta_coherence + 1e-12)

    def test_bound_random_pairs(self, rng):
        for alpha in (0.25, 0.5, 1.0):
            for x, y in rng.uniform(0, 2 * np.pi, (200, 2, 2)):
                u = kernel_unitary(x, y)
                dc = coherence_consumption(min(abs(np.trace(u)) / 4, 1.0), alpha)
                dg = geometric_discord_closed_form(min(abs(np.trace(u @ u)) / 4, 1.0), alpha)
                assert dg <= dc + 1e-12, (x, y, alpha)

    def test_shots_agree_with_exact(self, rng):
        pts = rng.uniform(0, 2 * np.pi, (5, 2))
        exact = resource_map(pts, Dqc1Config(alpha=1.0))
        shots = resource_map(pts, Dqc1Config(alpha=1.0, mode="shots", shots=100_000, seed=4))
        sigma = np.sqrt(2 / 100_000)
        for e, s in zip(exact, shots):
            assert s.kernel_abs == pytest.approx(e.kernel_abs, abs=5 * sigma)
            # D_G is linear in |tr U^2| with slope (alpha/2)^2 / 4
            assert s.geometric_discord == pytest.approx(e.geometric_discord, abs=5 * sigma / 16)

    def test_shots_deterministic(self, rng):
        pts = rng.uniform(0, 2 * np.pi, (3, 2))
        cfg = Dqc1Config(alpha=0.7, mode="shots", shots=500, seed=9)
        assert resource_map(pts, cfg) == resource_map(pts, cfg)

    def test_zero_alpha_shots(self, rng):
        recs = resource_map(rng.uniform(0, 2 * np.pi, (3, 2)), Dqc1Config(alpha=0.0, mode="shots"))
        assert all(r.delta_coherence == 0.0 and r.geometric_discord == 0.0 for r in recs)

    def test_empty(self):
        with pytest.raises(ValueError):
            resource_map([], Dqc1Config())
