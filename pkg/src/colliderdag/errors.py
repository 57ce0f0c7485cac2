"""Exception hierarchy shared by the learner pipeline."""


class ColliderDagError(Exception):
    """Base class for all package errors."""


class DatasetError(ColliderDagError, ValueError):
    """Input matrix violates a Dataset invariant or cannot be parsed."""


class CsvParseError(DatasetError):
    def __init__(self, path, row, column, cell):
        self.path = path
        self.row = row
        self.column = column
        self.cell = cell
        super().__init__(
            f"{path}: cannot parse {cell!r} as a finite real "
            f"(row {row}, column {column!r})"
        )


class ConstantColumnError(DatasetError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} has zero sample variance")


class SynthSpecError(ColliderDagError, ValueError):
    """Invalid synthetic-data specification."""


class DegenerateTripleError(ColliderDagError, ArithmeticError):
    """A three-variable fit could not be solved reliably.

    ``columns`` names the variables involved (as indices or labels) and
    ``triple`` is filled in once the failing triple is known.
    """

    def __init__(self, message, columns=None, triple=None, target=None):
        self.columns = columns
        self.triple = triple
        self.target = target
        super().__init__(message)


class DegenerateDenominatorError(DegenerateTripleError):
    """Target column sum too close to zero for percentage contributions."""


class UndefinedContributionError(ColliderDagError, ValueError):
    """All raw contributions are zero, so no mapping exists."""


class EmptyResultError(ColliderDagError):
    """Every triple was skipped; there is nothing to learn from."""
