""" Run configuration from flat key-value files and dotted overrides.

A configuration file holds one ``section.key = value`` assignment per line,
e.g.::

    # smaller model
    model.hidden_dim = 16
    train.max_epochs = 5

Blank lines and lines starting with ``#`` are ignored.
"""
import logging
from pathlib import Path

from multitask_link_prediction.errors import ConfigError, ParseError
from multitask_link_prediction.loss import LossConfig
from multitask_link_prediction.model import ModelConfig
from multitask_link_prediction.training import TrainConfig

logger = logging.getLogger(__name__)

SECTIONS = {
    ModelConfig.section: ModelConfig,
    TrainConfig.section: TrainConfig,
    LossConfig.section: LossConfig,
}

_TRUE = ("true", "yes", "on", "1")
_FALSE = ("false", "no", "off", "0")


def coerce(value, default):
    """ Convert a string to the type of a default value.

    Parameters
    ----------
    value : str
        The raw value.

    default : bool, int, float or str
        The default whose type is used.

    Returns
    -------
    bool, int, float or str
        The converted value.
    """
    if not isinstance(value, str):
        return value

    if isinstance(default, bool):
        if value.lower() in _TRUE:
            return True
        if value.lower() in _FALSE:
            return False
        raise ConfigError(f"Expected a boolean, got {value!r}")
    try:
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError:
        raise ConfigError(
            f"Expected {type(default).__name__}, got {value!r}"
        )

    return value


def _format(value):
    """ String representation of a value in a configuration file. """
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


class RunConfig:
    """ Model, training and loss configuration of a run. """

    def __init__(self, model=None, train=None, loss=None):
        """ Constructor.

        Parameters
        ----------
        model : ModelConfig, optional
            Model configuration.

        train : TrainConfig, optional
            Training configuration.

        loss : LossConfig, optional
            Loss configuration.
        """
        self.model = model or ModelConfig()
        self.train = train or TrainConfig()
        self.loss = loss or LossConfig()

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.to_dict() == (
            other.to_dict()
        )

    def __repr__(self):
        return (
            f"RunConfig(model={self.model!r}, train={self.train!r}, "
            f"loss={self.loss!r})"
        )

    def to_dict(self):
        """ Flat mapping from dotted key to value. """
        return {
            f"{section}.{key}": value
            for section in SECTIONS
            for key, value in getattr(self, section).to_dict().items()
        }

    @classmethod
    def from_dict(cls, values):
        """ Create a configuration from dotted keys with raw values.

        Values are coerced to the type of the default. Unknown sections or
        keys raise a ConfigError.
        """
        kwargs = {section: {} for section in SECTIONS}
        for dotted, value in values.items():
            section, _, key = dotted.partition(".")
            if section not in SECTIONS or key == "":
                raise ConfigError(f"Unknown configuration key: {dotted}")
            defaults = SECTIONS[section].defaults
            if key not in defaults:
                raise ConfigError(f"Unknown configuration key: {dotted}")
            kwargs[section][key] = coerce(value, defaults[key])

        return cls(
            **{
                section: config_type(**kwargs[section])
                for section, config_type in SECTIONS.items()
            }
        )

    @classmethod
    def read(cls, path, overrides=None):
        """ Read a configuration file.

        Parameters
        ----------
        path : str or pathlib.Path, optional
            Path to the file. If None, only defaults and overrides are used.

        overrides : dict, optional
            Dotted keys with raw values, applied after the file.

        Returns
        -------
        RunConfig
            The merged configuration.
        """
        values = {}
        if path is not None:
            values.update(read_key_values(path))
        values.update(overrides or {})

        return cls.from_dict(values)

    def write(self, path):
        """ Write this configuration in the file format read by
        :meth:`read`. """
        path = Path(path).expanduser()
        with open(path, "w") as f:
            for section in SECTIONS:
                f.write(f"# {section}\n")
                for key, value in getattr(self, section).to_dict().items():
                    f.write(f"{section}.{key} = {_format(value)}\n")

        logger.debug(f"Wrote configuration to {path}")


def read_key_values(path):
    """ Parse ``key = value`` lines of a configuration file. """
    path = Path(path).expanduser()
    if not path.exists():
        raise FileNotFoundError(f"No such file: {path}")

    values = {}
    with open(path) as f:
        for line_number, line in enumerate(f, 1):
            line = line.strip()
            if line == "" or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if sep == "" or key.strip() == "":
                raise ParseError(
                    f"Expected 'key = value', got {line!r}", path, line_number
                )
            if key.strip() in values:
                logger.warning(
                    f"{path}:{line_number}: {key.strip()} is set twice, "
                    f"the last value is used"
                )
            values[key.strip()] = value.strip()

    return values


def parse_overrides(args):
    """ Parse ``--section.key value`` pairs of unparsed command line
    arguments. """
    overrides = {}
    args = list(args)
    while len(args) > 0:
        flag = args.pop(0)
        if not flag.startswith("--") or "." not in flag:
            raise ConfigError(f"Unrecognized argument: {flag}")
        if "=" in flag:
            key, value = flag[2:].split("=", 1)
        elif len(args) == 0:
            raise ConfigError(f"Missing value for {flag}")
        else:
            key, value = flag[2:], args.pop(0)
        overrides[key] = value

    return overrides
