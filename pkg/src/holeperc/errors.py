class InvariantViolation(RuntimeError):
    """A structural identity of the model failed on a concrete configuration."""


class OracleScaleExceeded(ValueError):
    """An oracle was asked to handle more than its configured desk-scale limit."""


class UnknownClusterError(KeyError):
    pass
