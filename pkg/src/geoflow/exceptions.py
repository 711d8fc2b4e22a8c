"""Exception hierarchy shared by every module."""


class GeoflowError(Exception):
    pass


class GraphValidationError(GeoflowError, ValueError):
    """Raised for malformed graph or space descriptions."""


class UncertifiedError(GeoflowError):
    """A query reaches beyond the radius for which a patch is exact."""


class BudgetExceeded(GeoflowError):
    """A configured resource cap (vertices, quadruples, words) was hit."""


class ConfigError(GeoflowError, ValueError):
    pass
