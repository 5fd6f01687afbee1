"""Exception types shared across the pipeline.

Every exception carries a ``code`` ("module.Name") so the CLI can emit a
machine-readable error object without guessing where a failure came from.
"""


class SpecforgeError(Exception):
    """Base class for all errors raised by this package."""

    code = "specforge.Error"


class ParseError(SpecforgeError):
    """Malformed input file content (bad row, bad header, bad value)."""

    code = "corpus.ParseError"

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(f"{message}{where}")


class ReferentialError(SpecforgeError):
    """A record points at an org, province, region or SC that does not exist."""

    code = "corpus.ReferentialError"

    def __init__(self, message, record_id=None):
        self.record_id = record_id
        super().__init__(message)


class EmptyCorpusError(SpecforgeError):
    """No publications survived loading and filtering."""

    code = "corpus.EmptyCorpusError"


class MissingStratumError(SpecforgeError):
    """A publication's (year, subject category) stratum is absent from the table."""

    code = "normalize.MissingStratumError"


class LeaveOneOutUndefined(SpecforgeError):
    """Leave-one-out mean requested on a single-publication stratum."""

    code = "normalize.LeaveOneOutUndefined"


class ImpactCoverageError(SpecforgeError):
    """A corpus publication has no impact record."""

    code = "strength.ImpactCoverageError"


class InactiveTerritoryError(SpecforgeError):
    """Territory absent from the strength matrix or with zero total strength."""

    code = "strength.InactiveTerritoryError"


class EmptyMatrixError(SpecforgeError):
    """Strength matrix has no entries."""

    code = "strength.EmptyMatrixError"


class UndefinedShareError(SpecforgeError):
    """Subject category with zero national total; its share ratio is undefined."""

    code = "specialization.UndefinedShareError"


class DomainError(SpecforgeError):
    """Scalar argument outside the function's documented domain."""

    code = "specialization.DomainError"


class MissingPopulationError(SpecforgeError):
    """Active territory without a usable population figure."""

    code = "analytics.MissingPopulationError"


class SpecError(SpecforgeError):
    """Inconsistent synthetic-corpus plan or chart specification."""

    code = "synth.SpecError"


class UnknownScError(SpecforgeError):
    """Subject category not present in the corpus/matrix."""

    code = "report.UnknownScError"


class StyleMismatchError(SpecforgeError):
    """Analysis result handed to a table style it does not fit."""

    code = "report.StyleMismatchError"


class ConfigError(SpecforgeError):
    """Invalid run configuration (bad value, unknown key, missing file)."""

    code = "cli.ConfigError"
