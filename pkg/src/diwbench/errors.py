"""Exception hierarchy shared by all workbench stages."""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for every error raised by diwbench."""


# sensor model
class InvalidSpec(WorkbenchError, ValueError):
    pass


class WrongSensorKind(WorkbenchError, ValueError):
    pass


class FailureExceeded(WorkbenchError, ValueError):
    """Requested strain lies beyond the sensor's failure strain."""


class DegenerateCycle(WorkbenchError, ValueError):
    pass


# toolpath compiler
class BoundsError(WorkbenchError, ValueError):
    pass


class EmptyFill(WorkbenchError, ValueError):
    pass


class PlanError(WorkbenchError, ValueError):
    pass


# G-code parsing
class GCodeError(WorkbenchError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownCommand(GCodeError):
    pass


class MalformedParameter(GCodeError):
    pass


# experiment harness
class ProtocolError(WorkbenchError, ValueError):
    pass


# analysis
class MissingBaseline(WorkbenchError, ValueError):
    def __init__(self, cycle: int):
        super().__init__(f"cycle {cycle} has no baseline rows")
        self.cycle = cycle


class DegenerateCurve(WorkbenchError, ValueError):
    pass


class FitError(WorkbenchError, ValueError):
    pass


class NotAFailureRun(WorkbenchError, ValueError):
    pass


class InsufficientData(WorkbenchError, ValueError):
    pass


class SchemaError(WorkbenchError, ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row
