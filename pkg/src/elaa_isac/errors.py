"""Exception types raised across the package."""


class ElaaIsacError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(ElaaIsacError, ValueError):
    pass


class GeometryOverlapError(ElaaIsacError, ValueError):
    """Element edge is larger than the center-to-center spacing."""


class SingularGeometryError(ElaaIsacError, ValueError):
    """A source point coincides with an array element."""


class ResolutionError(ElaaIsacError, ValueError):
    """Quadrature mesh too coarse for the requested wavelength."""


class InfeasibleOrthogonalityError(ElaaIsacError, ValueError):
    pass


class DegenerateChannelError(ElaaIsacError, ValueError):
    pass


class InfeasibleNullingError(ElaaIsacError, ValueError):
    pass


class PilotContaminationError(ElaaIsacError, ValueError):
    """Fewer pilot symbols than users; orthogonal pilots impossible."""


class CalibrationInfeasibleError(ElaaIsacError, RuntimeError):
    pass


class ConfigError(ElaaIsacError, ValueError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, message, *, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ExperimentError(ElaaIsacError, RuntimeError):
    """Failure inside one trade-off case, tagged with the case label and rho."""

    def __init__(self, message, *, case=None, rho=None):
        self.case = case
        self.rho = rho
        super().__init__(f"[case {case}, rho {rho}] {message}")
