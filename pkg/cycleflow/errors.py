class GridValidationError(ValueError):
    """Input that cannot describe a valid grid, schedule or request. Maps to exit code 2."""
    pass


class CaseParseError(GridValidationError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class UnsupportedBranchError(GridValidationError):
    pass


class ConnectivityError(GridValidationError):
    def __init__(self, message, bus_id=None):
        self.bus_id = bus_id
        super().__init__(message)


class SchemaError(GridValidationError):
    pass


class TopologyError(GridValidationError):
    pass


class ScheduleError(GridValidationError):
    def __init__(self, message, bus_id=None):
        self.bus_id = bus_id
        super().__init__(message)


class FitError(GridValidationError):
    pass


class BenchConfigError(GridValidationError):
    pass


class NumericalError(RuntimeError):
    """A computation that should succeed on valid input did not. Maps to exit code 3."""
    pass


class IllConditionedGridError(NumericalError):
    pass


class SolverError(NumericalError):
    pass


class EquivalenceError(NumericalError):
    pass
