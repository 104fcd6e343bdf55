"""Exception hierarchy shared by every creditlab module."""


class CreditLabError(ValueError):
    """Base class for data and validation errors.

    ``stage`` is filled in by the pipeline when an error escapes one of
    its stages, so callers can tell where a run stopped.
    """

    stage = None

    def __str__(self):
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


# --- datamodel -----------------------------------------------------------

class DivisionByZero(CreditLabError):
    def __init__(self, ratio_code, row=None):
        self.ratio_code = ratio_code
        self.row = row
        where = f" (row {row})" if row is not None else ""
        super().__init__(f"zero denominator for {ratio_code}{where}")


class ParseError(CreditLabError):
    def __init__(self, row, column, detail=""):
        self.row = row
        self.column = column
        super().__init__(f"cannot parse row {row}, column {column!r}"
                         + (f": {detail}" if detail else ""))


class MissingColumn(CreditLabError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing column {name!r}")


class InvalidLabel(CreditLabError):
    def __init__(self, row, value=None):
        self.row = row
        self.value = value
        super().__init__(f"invalid label {value!r} on row {row}; expected 0 or 1")


class SchemaError(CreditLabError):
    pass


class YearOutsideSplit(CreditLabError):
    def __init__(self, firm_id, year):
        self.firm_id = firm_id
        self.year = year
        super().__init__(f"record {firm_id!r} has year {year} outside the split")


# --- shared contract errors ----------------------------------------------

class MissingClass(CreditLabError):
    pass


class DimensionMismatch(CreditLabError):
    pass


class LengthMismatch(CreditLabError):
    pass


class EmptyInput(CreditLabError):
    pass


# --- discriminant --------------------------------------------------------

class DegenerateVariable(CreditLabError):
    pass


class NoVariableSelected(CreditLabError):
    pass


class SingularWithinCovariance(CreditLabError):
    pass


class NoSeparation(DegenerateVariable):
    pass


# --- neural --------------------------------------------------------------

class InvalidArchitecture(CreditLabError):
    pass


class InvalidConfig(CreditLabError):
    pass


class NonFiniteError(CreditLabError):
    """Training diverged. ``network`` and ``history`` hold the state at abort."""

    def __init__(self, message, network=None, history=None):
        super().__init__(message)
        self.network = network
        self.history = history


# --- harness -------------------------------------------------------------

class NotPositiveDefinite(CreditLabError):
    pass


class ConfigError(CreditLabError):
    pass
