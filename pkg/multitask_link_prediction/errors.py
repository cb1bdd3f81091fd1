""""""


class ContractViolation(ValueError):
    """ Raised when the inputs of an operation violate its preconditions. """


class ShapeError(ContractViolation):
    """ Raised when tensor shapes do not conform. """


class DomainError(ValueError):
    """ Raised when an argument lies outside the domain of a function. """


class NumericError(ArithmeticError):
    """ Raised when a computation produces non-finite values. """


class CapacityError(ValueError):
    """ Raised when an exhaustive enumeration would be too large. """


class GenerationError(RuntimeError):
    """ Raised when a dataset cannot be generated. """


class ParseError(ValueError):
    """ Raised when a file does not match the expected format. """

    def __init__(self, message, path=None, line_number=None):
        """ Constructor. """
        self.path = path
        self.line_number = line_number
        if line_number is not None:
            message = f"{path}:{line_number}: {message}"
        super().__init__(message)


class DegenerateInputError(ValueError):
    """ Raised when an input is too small for the requested operation. """


class CheckpointError(OSError):
    """ Raised when a checkpoint cannot be read. """


class ConfigError(ValueError):
    """ Raised for unknown or invalid configuration keys. """
