import numpy as np
import pytest

from multitask_link_prediction.errors import ConfigError
from multitask_link_prediction.exchangeability import relational_tasks
from multitask_link_prediction.graph import TaskPartition
from multitask_link_prediction.verify import (
    BaseSuite,
    EquivarianceSuite,
    ExchangeabilitySuite,
    GradcheckSuite,
    PropertyResult,
    RankingSuite,
    get_suite,
    orbit_distribution,
    relation_agnostic_scorer,
    run_suite,
)


def _names(results):
    return [r.name for r in results]


class TestPropertyResult:
    def test_to_dict(self):
        """"""
        result = PropertyResult("symmetry", True, value=0.0, seed=3)
        assert result.to_dict() == {
            "property": "symmetry",
            "passed": True,
            "value": 0.0,
            "seed": 3,
            "detail": "",
        }
        assert "ok" in repr(result)


class TestSuites:
    def test_gradcheck(self):
        """"""
        results = GradcheckSuite(hidden_dim=4).run()
        assert _names(results) == ["loss_gradient", "regularizer_gradient"]
        assert all(r.passed for r in results), results

    def test_equivariance(self):
        """"""
        results = EquivarianceSuite(cases=3, layer_cases=4).run()
        assert _names(results) == [
            "double_equivariance",
            "hard_soft_consistency",
            "single_task_reduction",
        ]
        assert all(r.passed for r in results), results

    def test_exchangeability(self):
        """"""
        results = ExchangeabilitySuite(cases=3).run()
        assert _names(results) == [
            "reflexivity",
            "symmetry",
            "transitivity",
            "task_recovery",
        ]
        assert all(r.passed for r in results), results

    def test_ranking(self):
        """"""
        results = RankingSuite(cases=20).run()
        assert len(results) == 5
        assert all(r.passed for r in results), results

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "name", ["gradcheck", "equivariance", "exchangeability", "ranking"]
    )
    def test_default_suites(self, name):
        """"""
        assert all(r.passed for r in run_suite(name, seed=1))

    def test_get_suite(self):
        """"""
        assert isinstance(get_suite("ranking", cases=1), RankingSuite)

        with pytest.raises(ValueError):
            get_suite("unknown")

        with pytest.raises(ConfigError):
            get_suite("ranking", width=1)

    def test_from_config(self):
        """"""
        config = ExchangeabilitySuite.Config(cases=2)
        assert config.suite_type == "exchangeability"

        instance = BaseSuite.from_config(config)
        assert isinstance(instance, ExchangeabilitySuite)
        assert instance.cases == 2


class TestOracles:
    def test_orbit_distribution(self, rng):
        """"""
        tasks = TaskPartition([0, 0, 1])
        dist = orbit_distribution(4, tasks, rng)
        assert 1 <= len(dist) <= 2
        assert relational_tasks(dist) == tasks

    def test_relation_agnostic_scorer(self, rng):
        """"""
        scorer = relation_agnostic_scorer(4, rng)
        scores = scorer(np.array([[0, 0, 1], [0, 3, 1], [1, 0, 0]]))
        assert scores[0] == scores[1]
        assert scores.shape == (3,)
