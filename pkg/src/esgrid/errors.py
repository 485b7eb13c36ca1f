class ESGridError(Exception):
    """Base class for all errors raised by esgrid."""


class RelationFormatError(ESGridError, ValueError):
    """Malformed relation, grid, group or spec file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotLatinError(ESGridError):
    """A fiber that should have exactly one completion does not."""


class P1Error(ESGridError):
    def __init__(self, report):
        self.report = report
        bad = [c for c in report.coordinates if not c.ok]
        first = bad[0] if bad else None
        msg = "relation is not a Latin hypercube (P1 fails)"
        if first is not None:
            msg += (f": coordinate {first.coordinate}, prefix {first.prefix} "
                    f"has {first.completions} completions")
        super().__init__(msg)


class P2Error(ESGridError):
    def __init__(self, witness, message="P2 fails"):
        self.witness = witness
        super().__init__(f"{message}: {witness}")


class NotAbelianError(ESGridError, ValueError):
    pass


class ResourceLimitError(ESGridError):
    pass
