class PivotFPEException(Exception):
    pass


class InvalidSeries(ValueError, PivotFPEException):
    pass


class SeriesParseError(ValueError, PivotFPEException):
    def __init__(self, message, line_number=None):
        super().__init__(message if line_number is None else f"line {line_number}: {message}")
        self.line_number = line_number


class LagOutOfRange(IndexError, PivotFPEException):
    pass


class NotSymmetric(ValueError, PivotFPEException):
    pass


class SingularToeplitz(ArithmeticError, PivotFPEException):
    def __init__(self, order, message=None):
        super().__init__(message or f"Toeplitz matrix is numerically singular at order {order}")
        self.order = order


class PathSingular(ArithmeticError, PivotFPEException):
    def __init__(self, lam, order=None):
        where = f" (order {order})" if order is not None else ""
        super().__init__(
            f"sequential Toeplitz matrix is numerically singular at lambda={lam!r}{where}; "
            "the grid starts too close to 0 for this sample size"
        )
        self.lam = lam
        self.order = order


class DegenerateNormalizer(ArithmeticError, PivotFPEException):
    pass


class InsufficientReplicates(ValueError, PivotFPEException):
    pass


class AlphaNotTabulated(KeyError, PivotFPEException):
    def __init__(self, alpha, alphas=()):
        super().__init__(f"alpha={alpha!r} is not tabulated (available: {list(alphas)!r})")
        self.alpha = alpha
        self.alphas = tuple(alphas)

    def __str__(self):
        return self.args[0]


class SchemaMismatch(ValueError, PivotFPEException):
    pass


class NonStationarySpec(ValueError, PivotFPEException):
    def __init__(self, message, spectral_radius=None):
        super().__init__(message)
        self.spectral_radius = spectral_radius


class UnknownProcess(KeyError, PivotFPEException):
    def __str__(self):
        return f"unknown process specification {self.args[0]!r}"


class UnknownExperiment(KeyError, PivotFPEException):
    def __str__(self):
        return f"unknown experiment {self.args[0]!r}"


class ExperimentFailed(RuntimeError, PivotFPEException):
    def __init__(self, experiment, configuration, cause):
        super().__init__(f"experiment {experiment!r} failed at {configuration!r}: {cause}")
        self.experiment = experiment
        self.configuration = configuration
        self.cause = cause

    def __reduce__(self):
        return type(self), (self.experiment, self.configuration, self.cause)


__all__ = [
    "AlphaNotTabulated",
    "DegenerateNormalizer",
    "ExperimentFailed",
    "InsufficientReplicates",
    "InvalidSeries",
    "LagOutOfRange",
    "NonStationarySpec",
    "NotSymmetric",
    "PathSingular",
    "PivotFPEException",
    "SchemaMismatch",
    "SeriesParseError",
    "SingularToeplitz",
    "UnknownExperiment",
    "UnknownProcess",
]
