"""Random-forest importance ranking."""

from __future__ import annotations

import numpy as np
import pytest

from dancemix.analysis.forest import rf_importance
from dancemix.errors import DegenerateVarianceError, InsufficientDataError, InvalidArgumentError


def planted_dataset(seed: int, n: int = 60, d: int = 6):
    """y depends strongly on column 0, weakly on nothing else."""
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.standard_normal((n, d))
    y = 3.0 * X[:, 0] + 0.1 * rng.standard_normal(n)
    return X, y


class TestImportances:
    def test_planted_feature_ranks_first_across_trials(self):
        """The informative column must win in at least 95 of 100 seeded runs."""
        wins = 0
        for seed in range(100):
            X, y = planted_dataset(seed)
            result = rf_importance(X, y, n_trees=25, seed=seed)
            wins += int(np.argmax(result.importances) == 0)
        assert wins >= 95, f"planted feature won only {wins}/100 trials"

    def test_importances_are_a_distribution(self):
        X, y = planted_dataset(7)
        result = rf_importance(X, y, n_trees=40, seed=1)
        assert result.importances.shape == (6,)
        assert np.all(result.importances >= 0.0)
        assert abs(result.importances.sum() - 1.0) < 1e-12

    def test_deterministic_for_fixed_seed(self):
        X, y = planted_dataset(3)
        a = rf_importance(X, y, n_trees=30, seed=11)
        b = rf_importance(X, y, n_trees=30, seed=11)
        np.testing.assert_array_equal(a.importances, b.importances)
        assert a.r2_oob == b.r2_oob

    def test_seed_changes_the_forest(self):
        X, y = planted_dataset(3)
        a = rf_importance(X, y, n_trees=30, seed=11)
        b = rf_importance(X, y, n_trees=30, seed=12)
        assert not np.array_equal(a.importances, b.importances)

    def test_pure_noise_spreads_importance(self):
        rng = np.random.Generator(np.random.PCG64(0))
        X = rng.standard_normal((80, 4))
        y = rng.standard_normal(80)
        result = rf_importance(X, y, n_trees=50, seed=2)
        assert np.max(result.importances) < 0.6


class TestOob:
    def test_strong_signal_scores_high(self):
        X, y = planted_dataset(5, n=120)
        result = rf_importance(X, y, n_trees=60, seed=4)
        assert result.r2_oob > 0.7
        assert result.oob_coverage == 120

    def test_noise_scores_at_or_below_zero_ish(self):
        rng = np.random.Generator(np.random.PCG64(9))
        X = rng.standard_normal((100, 5))
        y = rng.standard_normal(100)
        result = rf_importance(X, y, n_trees=60, seed=5)
        assert result.r2_oob < 0.3


class TestErrors:
    def test_too_few_samples(self):
        X, y = planted_dataset(0, n=19)
        with pytest.raises(InsufficientDataError):
            rf_importance(X, y)

    def test_constant_target(self):
        rng = np.random.Generator(np.random.PCG64(1))
        X = rng.standard_normal((30, 3))
        with pytest.raises(DegenerateVarianceError):
            rf_importance(X, np.ones(30))

    def test_shape_and_finiteness(self):
        X, y = planted_dataset(0)
        with pytest.raises(InvalidArgumentError):
            rf_importance(X, y[:-1])
        with pytest.raises(InvalidArgumentError):
            rf_importance(X.ravel(), y)
        bad = X.copy()
        bad[0, 0] = np.nan
        with pytest.raises(InvalidArgumentError):
            rf_importance(bad, y)
        with pytest.raises(InvalidArgumentError):
            rf_importance(X, y, n_trees=0)
