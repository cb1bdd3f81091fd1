import pytest

from multitask_link_prediction.base import BaseConfigurable, config_factory
from multitask_link_prediction.errors import ConfigError
from multitask_link_prediction.evaluation import DualScheme
from multitask_link_prediction.model import ModelConfig


@pytest.fixture()
def configurable():
    class Configurable(BaseConfigurable):

        _config_attrs = {"configurable_type": "test"}

        def __init__(self, arg1, kwarg1=1, kwarg2=2):
            self.arg1 = arg1
            self.kwarg1 = kwarg1
            self.kwarg2 = kwarg2

    return Configurable


class TestBaseConfig:
    def test_defaults(self):
        """"""
        config = ModelConfig()
        assert config.section == "model"
        assert config.hidden_dim == 32
        assert config.max_tasks == 2
        assert config.homogeneous is False

    def test_unknown_key(self):
        """"""
        with pytest.raises(ConfigError):
            ModelConfig(hidden_size=4)

    def test_checks(self):
        """"""
        with pytest.raises(ConfigError):
            ModelConfig(hidden_dim=0)

        with pytest.raises(ConfigError):
            ModelConfig(aggregation="sum")

    def test_replace(self):
        """"""
        config = ModelConfig().replace(max_tasks=4)
        assert config.max_tasks == 4
        assert config.hidden_dim == 32
        assert config != ModelConfig()
        assert config == ModelConfig(max_tasks=4)

    def test_config_factory(self):
        """"""
        config_type = config_factory(
            "TestConfig",
            {"a": 1, "b": "x"},
            config_attrs={"section": "test"},
            checks=((lambda c: c.a > 0, "a must be positive"),),
        )
        config = config_type(a=2)
        assert config.to_dict() == {"a": 2, "b": "x"}
        assert config.section == "test"

        with pytest.raises(ConfigError, match="a must be positive"):
            config_type(a=0)


class TestBaseConfigurable:
    def test_get_params(self, configurable):
        """"""
        assert configurable.get_params() == {"kwarg1": 1, "kwarg2": 2}
        assert DualScheme.get_params() == {"n_tail": 24, "n_rel": 26}

    def test_get_constructor_args(self):
        """"""
        config = DualScheme.Config(n_tail=10)
        assert DualScheme.get_constructor_args(config) == {
            "n_tail": 10,
            "n_rel": 26,
        }

        # regression test for overriding parameters with "0"
        assert DualScheme.get_constructor_args(config, n_rel=0) == {
            "n_tail": 10,
            "n_rel": 0,
        }

    def test_config(self, configurable):
        """"""
        config = configurable.Config(kwarg1=2)
        assert config.configurable_type == "test"
        assert config.kwarg1 == 2
        assert config.kwarg2 == 2

        with pytest.raises(ConfigError):
            configurable.Config(kwarg3=1)
