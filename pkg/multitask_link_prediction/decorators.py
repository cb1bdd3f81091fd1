""""""
from multitask_link_prediction.base import BaseConfigurable


class _base_decorator:
    """ Base class for decorators. """

    registry: dict
    name: str
    config_attr: str

    def __init__(self, type_name):
        """ Constructor. """
        self.type_name = type_name

    def __call__(self, decorated_class):
        """ Decorate class. """
        if not issubclass(decorated_class, BaseConfigurable):
            raise TypeError(
                "Decorated class must be a subclass of BaseConfigurable"
            )

        if self.type_name in self.registry:
            raise ValueError(
                f"{self.name} type {self.type_name} is already in use."
            )
        else:
            self.registry[self.type_name] = decorated_class

        setattr(decorated_class, self.config_attr, self.type_name)
        decorated_class._config_attrs = {self.config_attr: self.type_name}

        return decorated_class


class scheme(_base_decorator):
    """ Ranking scheme decorator. """

    registry = {}
    name = "Scheme"
    config_attr = "scheme_type"


class suite(_base_decorator):
    """ Property suite decorator. """

    registry = {}
    name = "Suite"
    config_attr = "suite_type"
