import numpy as np
import pytest

from dqc1ml import experiments as ex
from dqc1ml.engine import Dqc1Config
from dqc1ml.feature_map import FeatureMapConfig


class TestMakeSplit:
    def test_adhoc_sizes(self):
        train, test = ex.make_split("adhoc", 0)
        assert len(train) == 40 and len(test) == 10

    def test_moons_sizes(self):
        train, test = ex.make_split("moons", 0)
        assert len(train) == 800 and len(test) == 200
        assert train.counts() == {1: 400, -1: 400}

    def test_custom_totals(self):
        train, test = ex.make_split("circles", 1, train=60, test=20)
        assert len(train) == 60 and len(test) == 20

    def test_odd_total(self):
        with pytest.raises(ValueError):
            ex.make_split("moons", 0, train=61, test=20)

    def test_unknown(self):
        with pytest.raises(ValueError, match="adhoc, moons, circles"):
            ex.make_split("spirals", 0)


class TestPipeline:
    @pytest.mark.parametrize("C", [1.0, 100.0, 1000.0])
    def test_adhoc_robust_to_c(self, C):
        train, test = ex.make_split("adhoc", 0)
        assert ex.run_pipeline(train, test, Dqc1Config(), C=C)["accuracy"] == 1.0

    def test_zero_alpha_is_chance(self):
        train, test = ex.make_split("adhoc", 1)
        report = ex.run_pipeline(train, test, Dqc1Config(alpha=0.0))
        assert report["accuracy"] == pytest.approx(0.5)
        assert len(set(report["predictions"])) == 1

    def test_shots_mode_runs(self):
        train, test = ex.make_split("adhoc", 0, train=8, test=3)
        report = ex.run_pipeline(train, test, Dqc1Config(mode="shots", shots=2048, seed=1))
        assert 0.0 <= report["accuracy"] <= 1.0
        assert len(report["margins"]) == 6

    def test_meta_round_trip(self):
        cfg = Dqc1Config(alpha=0.4, mode="shots", shots=77, seed=5, noise_p=0.1)
        fm = FeatureMapConfig(layers=3)
        assert ex.config_from_meta(ex.model_meta(cfg, fm)) == (cfg, fm)

    def test_evaluate_with_rows_matches(self):
        train, test = ex.make_split("adhoc", 2, train=6, test=3)
        cfg = Dqc1Config()
        model = ex.fit(train, cfg)
        from dqc1ml.svm import build_kernel_rows

        rows = build_kernel_rows(test.points, train.points, cfg)
        assert ex.evaluate(model, test, cfg) == ex.evaluate(model, test, cfg, kernel_rows=rows)


class TestSweep:
    def test_rows(self):
        rows = ex.alpha_sweep("adhoc", [0.0, 1.0], [0, 1], train=6, test=3)
        assert [r["alpha"] for r in rows] == [0.0, 1.0]
        assert rows[0]["mean_accuracy"] == pytest.approx(0.5)
        for r in rows:
            assert r["mean_accuracy"] == pytest.approx(np.mean(r["accuracies"]))
            assert r["std_accuracy"] == pytest.approx(np.std(r["accuracies"]))

    @pytest.mark.parametrize("alphas", [[0.5, 1.2], [-0.1], []])
    def test_bad_alphas(self, alphas):
        with pytest.raises(ValueError):
            ex.alpha_sweep("adhoc", alphas, [0])
