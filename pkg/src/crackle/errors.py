"""Exception families shared by every module.

Each family carries the process exit code the CLI maps it to.
"""


class CrackleError(Exception):
    exit_code = 5


class ConfigError(CrackleError):
    exit_code = 1


class ParameterError(ConfigError, ValueError):
    """An argument violates an operation's precondition."""


class DataError(CrackleError, ValueError):
    exit_code = 3


class DecodeError(DataError):
    def __init__(self, chunk, detail):
        super().__init__(f"malformed WAV: chunk {chunk!r}: {detail}")
        self.chunk = chunk


class UnsupportedFormatError(DataError):
    def __init__(self, format_code, detail=""):
        msg = f"unsupported WAV encoding: format code {format_code}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.format_code = format_code


class EmptyInputError(DataError):
    def __init__(self, length, needed):
        super().__init__(f"input has {length} samples, need at least {needed}")
        self.length = length
        self.needed = needed


class DegenerateInputError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class AnnotationError(DataError):
    def __init__(self, line, detail):
        super().__init__(f"line {line}: {detail}")
        self.line = line


class CapacityError(DataError):
    def __init__(self, requested, achievable):
        super().__init__(
            f"requested {requested} windows but only {achievable} fit outside annotated crackles"
        )
        self.requested = requested
        self.achievable = achievable


class DanglingReferenceError(DataError):
    def __init__(self, source_id):
        super().__init__(f"annotation refers to unknown recording {source_id!r}")
        self.source_id = source_id


class SplitError(DataError):
    pass


class FoldingError(DataError):
    pass


class ModelFormatError(DataError):
    pass


class ModelVersionError(ModelFormatError):
    pass


class IntegrityError(ModelFormatError):
    pass


class TrainingError(CrackleError):
    exit_code = 4


class ConvergenceError(TrainingError):
    def __init__(self, iterations, residual):
        super().__init__(
            f"SMO did not converge after {iterations} pair updates (KKT gap {residual:.3g})"
        )
        self.iterations = iterations
        self.residual = residual


class InvariantError(CrackleError):
    exit_code = 5
