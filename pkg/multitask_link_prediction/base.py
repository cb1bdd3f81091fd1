""""""
import abc
import inspect
import logging

from multitask_link_prediction.errors import ConfigError

logger = logging.getLogger(__name__)


class BaseConfig:
    """ Base class for all configurations. """

    section = None
    defaults = {}
    checks = ()

    def __init__(self, **kwargs):
        """ Constructor. """
        unknown = sorted(set(kwargs) - set(self.defaults))
        if len(unknown) > 0:
            raise ConfigError(
                f"Unknown {self.__class__.__name__} key(s): "
                f"{', '.join(unknown)}"
            )

        for k, v in self.defaults.items():
            setattr(self, k, kwargs.get(k, v))

        self.validate()

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __repr__(self):
        kwargs = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items())
        return f"{self.__class__.__name__}({kwargs})"

    def validate(self):
        """ Check the invariants of this configuration. """
        for check, message in self.checks:
            if not check(self):
                raise ConfigError(f"{self.__class__.__name__}: {message}")

    def to_dict(self):
        """ Get the configuration as a dict in declaration order. """
        return {k: getattr(self, k) for k in self.defaults}

    def replace(self, **kwargs):
        """ Copy of this configuration with some values replaced. """
        values = self.to_dict()
        values.update(kwargs)
        return type(self)(**values)


def config_factory(name, config_kwargs, config_attrs=None, checks=()):
    """ Create a new config type with defaults, attributes and checks.

    Parameters
    ----------
    name : str
        Name of the new type.

    config_kwargs : dict
        Mapping from key to default value. The order is preserved when the
        configuration is written to a file.

    config_attrs : dict, optional
        Additional class attributes, e.g. the ``section`` name.

    checks : iterable of (callable, str)
        Predicates on a config instance with an error message for when they
        do not hold.

    Returns
    -------
    type
        A subclass of BaseConfig.
    """
    attrs = {"defaults": dict(config_kwargs), "checks": tuple(checks)}
    attrs.update(config_attrs or {})

    return type(name, (BaseConfig,), attrs)


class BaseConfigurable:
    """ Base class for all configurables. """

    _config_attrs = {}

    @classmethod
    def get_params(cls):
        """ Get constructor keyword parameters for a class. """
        signature = inspect.signature(cls.__init__)

        return {
            name: param.default
            for name, param in signature.parameters.items()
            if param.kind is param.POSITIONAL_OR_KEYWORD
            and param.default is not inspect.Parameter.empty
        }

    @classmethod
    def get_constructor_args(cls, config, **kwargs):
        """ Get constructor arguments for a class from a Config. """
        cls_kwargs = cls.get_params()

        for name in cls_kwargs:
            if name in kwargs:
                cls_kwargs[name] = kwargs[name]
            elif hasattr(config, name):
                cls_kwargs[name] = getattr(config, name)

        return cls_kwargs

    @classmethod
    def Config(cls, **kwargs):
        """ Configuration for this class. """
        config_kwargs = dict(cls.get_params())
        config_kwargs.update(cls._config_attrs)
        config_type = config_factory(cls.__name__ + "Config", config_kwargs)

        return config_type(**kwargs)

    @classmethod
    @abc.abstractmethod
    def from_config(cls, config, **kwargs):
        """ Create an instance from a Config. """
