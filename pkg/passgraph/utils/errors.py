"""Exception hierarchy shared by every passgraph package.

Each class carries a ``category`` and an ``exit_code`` so the CLI can turn a
failure into a categorized non-zero exit status.
"""


class PassGraphError(Exception):
    category = "error"
    exit_code = 1


# ----- configuration


class ConfigError(PassGraphError):
    category = "config"
    exit_code = 2

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        self.message = message
        super().__init__(f"{key_path}: {message}")


# ----- input / data


class DataError(PassGraphError):
    category = "data"
    exit_code = 3


class InvalidState(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class TooFewSamples(DataError):
    pass


class EmptyInput(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class MissingLabel(DataError):
    pass


class SchemaVersionUnsupported(DataError):
    pass


class MalformedLine(DataError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class TooManyErrors(DataError):
    def __init__(self, errors: list, total_lines: int):
        self.errors = errors
        self.total_lines = total_lines
        super().__init__(
            f"{len(errors)} of {total_lines} lines invalid (first: {errors[0]})"
        )


class InsufficientSamples(DataError):
    pass


class MissingPathError(DataError):
    def __init__(self, path, what: str = "file"):
        self.path = path
        super().__init__(f"missing {what}: {path}")


class DegenerateFacing(DataError):
    """Raised internally when the ball sits on the passer; resolved by fallback."""


# ----- model files and shapes


class ModelError(PassGraphError):
    category = "model"
    exit_code = 4


class ShapeMismatch(ModelError):
    pass


class VersionMismatch(ModelError):
    pass


class ChecksumFailure(ModelError):
    pass


# ----- numerics


class NumericalError(PassGraphError):
    category = "numerical"
    exit_code = 5


class NonFiniteActivation(NumericalError):
    def __init__(self, layer: int | str, where: str = ""):
        self.layer = layer
        self.where = where
        suffix = f" ({where})" if where else ""
        super().__init__(f"non-finite activation at layer {layer}{suffix}")


class NonFiniteGradient(NumericalError):
    pass
