"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`LstmcastError`.
The CLI maps the four families below onto its exit codes: ``DataError`` -> 2,
``DivergenceError`` -> 3, ``ArtifactError`` -> 4.
"""


class LstmcastError(Exception):
    pass


# numerics / shapes

class ShapeError(LstmcastError, ValueError):
    pass


class InvalidRange(LstmcastError, ValueError):
    pass


class NonFiniteError(LstmcastError, ArithmeticError):
    pass


# data

class DataError(LstmcastError):
    pass


class MissingFileError(DataError, FileNotFoundError):
    pass


class BadHeaderError(DataError):
    def __init__(self, found, expected):
        self.found = list(found)
        self.expected = list(expected)
        super().__init__(f"bad header: found {self.found}, expected {self.expected}")


class BadRowError(DataError):
    def __init__(self, row_number, field, value):
        self.row_number = row_number
        self.field = field
        self.value = value
        super().__init__(f"line {row_number}: cannot parse field {field!r} from {value!r}")


class MixedSymbolsError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class TooFewRowsError(DataError):
    pass


class LengthMismatchError(LstmcastError, ValueError):
    pass


class EmptyInputError(LstmcastError, ValueError):
    pass


# evaluation

class ZeroActualError(LstmcastError, ValueError):
    pass


class DegenerateRangeError(LstmcastError, ValueError):
    pass


class InconsistentMetricsError(LstmcastError, ValueError):
    pass


class MissingCellError(LstmcastError, KeyError):
    def __init__(self, stock, model):
        self.stock = stock
        self.model = model
        super().__init__(f"no report for ({stock}, {model})")

    def __str__(self):
        return self.args[0]


# training / persistence

class DivergenceError(LstmcastError):
    pass


class ArtifactError(LstmcastError):
    pass


class ArtifactVersionError(ArtifactError):
    pass


class DegenerateScalerWarning(UserWarning):
    pass
