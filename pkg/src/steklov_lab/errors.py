"""Exception hierarchy shared by all modules.

ValidationError covers bad inputs detectable before any computation starts
(CLI exit code 2); NumericError covers failures arising during a computation
(CLI exit code 3).
"""


class SteklovLabError(Exception):
    pass


class ValidationError(SteklovLabError):
    pass


class NumericError(SteklovLabError):
    pass


# -- geometry / meshing ------------------------------------------------------

class InvalidShape(ValidationError):
    pass


class NonSimplePolygon(ValidationError):
    pass


class StepTooCoarse(ValidationError):
    pass


class InvalidMesh(ValidationError):
    pass


# -- finite elements / spectra -----------------------------------------------

class DegenerateTriangle(NumericError):
    pass


class ZeroBoundaryTrace(ValidationError):
    pass


class SingularInteriorBlock(NumericError):
    pass


class EigensolverNoConvergence(NumericError):
    pass


class InvalidSpectrumList(ValidationError):
    pass


class NoPositiveEigenvalue(ValidationError):
    pass


class ShootingBlowup(NumericError):
    pass


# -- charts / transport ------------------------------------------------------

class LeftChartDomain(NumericError):
    pass


class MetricDegenerate(NumericError):
    pass


class NotASubmersionChart(ValidationError):
    pass


class GridTooCoarse(NumericError):
    pass
