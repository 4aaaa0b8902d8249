from typing import Any, Optional


class ToolkitError(Exception):
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class SchemaError(ToolkitError):
    exit_code = 2


class ShapeError(ToolkitError):
    exit_code = 3


class PreconditionError(ToolkitError):
    exit_code = 4


class NotInvertible(PreconditionError):
    pass


class NotUnital(PreconditionError):
    pass


class NotARepresentation(PreconditionError):
    def __init__(self, detail: str, residual: float):
        super().__init__(detail)
        self.residual = residual


class NotInCommutant(PreconditionError):
    pass


class NotHermitian(PreconditionError):
    pass


class NotInAlgebra(PreconditionError):
    pass


class NotMinimal(PreconditionError):
    def __init__(self, detail: str, reports: Optional[Any] = None):
        super().__init__(detail)
        self.reports = reports


class MapsDiffer(PreconditionError):
    def __init__(self, detail: str, residual: float):
        super().__init__(detail)
        self.residual = residual


class DegenerateMap(PreconditionError):
    # result holds (reduced data, projections); the reduction itself completed
    def __init__(self, detail: str, result: Any = None):
        super().__init__(detail)
        self.result = result


class VerificationError(ToolkitError):
    exit_code = 1


class GenericPositionViolated(VerificationError):
    def __init__(self, detail: str, report: Any = None, slot: Optional[int] = None):
        super().__init__(detail)
        self.report = report
        self.slot = slot


class HalmosIdentityViolated(VerificationError):
    def __init__(self, detail: str, residual: float):
        super().__init__(detail)
        self.residual = residual
